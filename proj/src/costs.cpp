#include "courttrack/costs.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "courttrack/error.hpp"

namespace courttrack {

NeighborhoodSpec::NeighborhoodSpec(int size) : size_(size) {
    if (size < 1 || size > 3) {
        throw Error(ErrorCode::InvalidArgument, "neighborhood size must be 1, 2 or 3, got " + std::to_string(size));
    }
}

void TrackerConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0,1]");
    if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "conf_threshold must lie in [0,1]");
    }
    if (part_subset.empty()) throw Error(ErrorCode::InvalidArgument, "part_subset must not be empty");
    if (!(cost_gate > 0.0)) throw Error(ErrorCode::InvalidArgument, "cost_gate must be positive");
}

std::vector<std::string> TrackerConfig::warnings() const {
    std::vector<std::string> out;
    if (secondary == SecondaryCost::Deep && neighborhood.size() == 1 && alpha < 1.0) {
        if (alpha == 0.0) {
            out.emplace_back("alpha=0 with a 1x1 neighborhood: the softmax over a single cell pair is always 1, "
                             "so every association costs 0 and identities are arbitrary");
        } else {
            out.emplace_back("1x1 neighborhood: the appearance term is constant and only the geometric term "
                             "discriminates");
        }
    }
    return out;
}

double centroid_cost(const BoundingBox& a, const BoundingBox& b, const FrameMeta& frame) {
    if (frame.width <= 0 || frame.height <= 0) throw Error(ErrorCode::InvalidArgument, "frame size must be positive");
    const double diag = std::hypot(static_cast<double>(frame.width), static_cast<double>(frame.height));
    return norm(a.centroid() - b.centroid()) / diag;
}

namespace {

int clamp_index(long v, int size) { return static_cast<int>(std::clamp<long>(v, 0, size - 1)); }

long nearest(double v) { return static_cast<long>(std::floor(v + 0.5)); }

} // namespace

double color_cost(const Detection& a, const Detection& b, const cv::Mat& image_a, const cv::Mat& image_b,
                  double conf_threshold) {
    const PartSet shared = shared_parts(a, b, conf_threshold);
    if (shared.empty()) throw Error(ErrorCode::EmptySharedParts, "no shared parts for color cost");
    for (const cv::Mat* img : {&image_a, &image_b}) {
        if (img->empty()) throw Error(ErrorCode::MissingImage, "color cost needs both frame images");
        if (img->type() != CV_8UC3) throw Error(ErrorCode::InvalidArgument, "color cost expects 8-bit BGR images");
    }

    constexpr int kPatch = 9;
    double total = 0.0;
    for (int k : shared.ids()) {
        const Keypoint& ka = a.keypoints[static_cast<std::size_t>(k)];
        const Keypoint& kb = b.keypoints[static_cast<std::size_t>(k)];
        const long ax = nearest(ka.x), ay = nearest(ka.y);
        const long bx = nearest(kb.x), by = nearest(kb.y);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const auto& pa = image_a.at<cv::Vec3b>(clamp_index(ay + dy, image_a.rows),
                                                       clamp_index(ax + dx, image_a.cols));
                const auto& pb = image_b.at<cv::Vec3b>(clamp_index(by + dy, image_b.rows),
                                                       clamp_index(bx + dx, image_b.cols));
                double sq = 0.0;
                for (int c = 0; c < 3; ++c) {
                    const double d = static_cast<double>(pa[c]) - static_cast<double>(pb[c]);
                    sq += d * d;
                }
                total += std::sqrt(sq);
            }
        }
    }
    return total / (255.0 * static_cast<double>(shared.size()) * kPatch * std::sqrt(3.0));
}

CropGeometry crop_geometry(const BoundingBox& bbox) {
    const double side = bbox.height();
    if (!(side > 0.0)) throw Error(ErrorCode::InvalidArgument, "crop needs a bounding box with positive height");
    return {bbox.centroid(), side};
}

Point2 grid_coordinate(Point2 p, const CropGeometry& g, const LayerSpec& layer) {
    const Point2 o = g.origin();
    const double lx = std::clamp(p.x - o.x, 0.0, g.side);
    const double ly = std::clamp(p.y - o.y, 0.0, g.side);
    const double to_input = CropGeometry::kTargetSide / g.side;
    return {lx * to_input * (layer.grid_w / CropGeometry::kTargetSide),
            ly * to_input * (layer.grid_h / CropGeometry::kTargetSide)};
}

std::vector<GridCell> map_to_grid(Point2 p, const CropGeometry& g, const LayerSpec& layer, const NeighborhoodSpec& n) {
    const Point2 u = grid_coordinate(p, g, layer);
    std::vector<long> xs, ys;
    switch (n.size()) {
    case 1:
        xs = {nearest(u.x)};
        ys = {nearest(u.y)};
        break;
    case 2:
        xs = {static_cast<long>(std::floor(u.x)), static_cast<long>(std::ceil(u.x))};
        ys = {static_cast<long>(std::floor(u.y)), static_cast<long>(std::ceil(u.y))};
        break;
    default: {
        const long cx = nearest(u.x), cy = nearest(u.y);
        xs = {cx - 1, cx, cx + 1};
        ys = {cy - 1, cy, cy + 1};
        break;
    }
    }
    std::set<GridCell> cells;
    for (long y : ys) {
        for (long x : xs) cells.insert({clamp_index(x, layer.grid_w), clamp_index(y, layer.grid_h)});
    }
    return {cells.begin(), cells.end()};
}

namespace {

double dot_product(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

/// Order-independent sum so that swapping the two detections is bit-exact.
double canonical_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

} // namespace

std::vector<double> dl_similarity(std::span<const std::vector<float>* const> vectors_a,
                                  std::span<const std::vector<float>* const> vectors_b,
                                  SimilarityNormalization normalization) {
    const std::size_t na = vectors_a.size(), nb = vectors_b.size();
    std::vector<double> ex(na * nb);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            if (vectors_a[i]->size() != vectors_b[j]->size()) {
                throw Error(ErrorCode::InvalidArgument, "feature vectors differ in length");
            }
            ex[i * nb + j] = std::exp(dot_product(*vectors_a[i], *vectors_b[j]));
        }
    }
    std::vector<double> sim(na * nb);
    if (normalization == SimilarityNormalization::PairSet) {
        const double total = canonical_sum(ex);
        for (std::size_t i = 0; i < ex.size(); ++i) sim[i] = ex[i] / total;
    } else {
        for (std::size_t i = 0; i < na; ++i) {
            const double row = canonical_sum({ex.begin() + static_cast<std::ptrdiff_t>(i * nb),
                                              ex.begin() + static_cast<std::ptrdiff_t>((i + 1) * nb)});
            for (std::size_t j = 0; j < nb; ++j) sim[i * nb + j] = ex[i * nb + j] / row;
        }
    }
    return sim;
}

namespace {

std::vector<const std::vector<float>*> neighborhood_vectors(const Detection& d, int part, const TrackerConfig& cfg) {
    const CropGeometry g = crop_geometry(d.bbox);
    std::vector<const std::vector<float>*> out;
    for (GridCell cell : map_to_grid(d.keypoints[static_cast<std::size_t>(part)].position(), g, cfg.layer,
                                     cfg.neighborhood)) {
        if (const auto* v = d.features->find(part, cell)) out.push_back(v);
    }
    if (out.empty()) {
        throw Error(ErrorCode::MissingFeatures, "detection " + std::to_string(d.detection_id) + " in frame " +
                                                    std::to_string(d.frame_id) + " has no features for part " +
                                                    std::string(part_name(part)));
    }
    return out;
}

void require_features(const Detection& d, const LayerSpec& layer) {
    if (!d.features) {
        throw Error(ErrorCode::MissingFeatures, "detection " + std::to_string(d.detection_id) + " in frame " +
                                                    std::to_string(d.frame_id) + " carries no features");
    }
    if (d.features->layer().name != layer.name) {
        throw Error(ErrorCode::MissingFeatures, "features were exported for layer " + d.features->layer().name +
                                                    ", config asks for " + layer.name);
    }
}

} // namespace

double dl_cost(const Detection& a, const Detection& b, const TrackerConfig& cfg) {
    require_features(a, cfg.layer);
    require_features(b, cfg.layer);
    const PartSet shared = shared_parts(a, b, cfg.conf_threshold);
    std::vector<int> parts;
    for (int k : shared.ids()) {
        if (cfg.part_subset.contains(k)) parts.push_back(k);
    }
    if (parts.empty()) throw Error(ErrorCode::EmptySharedParts, "no shared parts for deep-feature cost");

    double total = 0.0;
    for (int k : parts) {
        const auto va = neighborhood_vectors(a, k, cfg);
        const auto vb = neighborhood_vectors(b, k, cfg);
        const auto sim = dl_similarity(va, vb, cfg.similarity);
        total += *std::max_element(sim.begin(), sim.end());
    }
    return total / static_cast<double>(parts.size());
}

FusedCost combined_cost(const Observation& a, const Observation& b, const TrackerConfig& cfg, const FrameMeta& frame) {
    FusedCost out;
    out.geometric = centroid_cost(a.placed_box, b.placed_box, frame);
    if (cfg.alpha == 1.0) {
        out.value = out.geometric;
        return out;
    }
    try {
        if (cfg.secondary == SecondaryCost::Deep) {
            out.secondary = 1.0 - dl_cost(*a.detection, *b.detection, cfg);
        } else {
            if (!a.image || !b.image) throw Error(ErrorCode::MissingImage, "color cost needs both frame images");
            out.secondary = color_cost(*a.detection, *b.detection, *a.image, *b.image, cfg.conf_threshold);
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptySharedParts) throw;
        out.geometric_only = true;
        out.value = out.geometric;
        return out;
    }
    out.value = cfg.alpha * out.geometric + (1.0 - cfg.alpha) * *out.secondary;
    return out;
}

double combined_cost(const Detection& a, const Detection& b, const TrackerConfig& cfg, const FrameMeta& frame) {
    const cv::Mat* img = frame.image.empty() ? nullptr : &frame.image;
    return combined_cost(Observation::of(a, img), Observation::of(b, img), cfg, frame).value;
}

} // namespace courttrack
