#include "courttrack/matcher.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include <opencv2/imgcodecs.hpp>

#include "courttrack/error.hpp"

namespace courttrack {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    CostMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw Error(ErrorCode::InvalidArgument, "ragged cost matrix");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

CostMatrix CostMatrix::scaled(double factor) const {
    CostMatrix out = *this;
    for (double& v : out.data_) v *= factor;
    return out;
}

std::vector<AssocEntry> build_assoc(const CostMatrix& costs) {
    std::vector<AssocEntry> out;
    if (costs.cols() == 0) return out;
    out.reserve(costs.rows());
    for (std::size_t r = 0; r < costs.rows(); ++r) {
        AssocEntry e;
        e.row = r;
        e.best_col = 0;
        e.best_cost = costs(r, 0);
        for (std::size_t c = 1; c < costs.cols(); ++c) {
            const double v = costs(r, c);
            if (v < e.best_cost) {
                e.second_col = e.best_col;
                e.second_cost = e.best_cost;
                e.best_col = c;
                e.best_cost = v;
            } else if (!e.second_cost || v < *e.second_cost) {
                e.second_col = c;
                e.second_cost = v;
            }
        }
        out.push_back(e);
    }
    return out;
}

namespace {

double margin(const AssocEntry& e) {
    return e.second_cost ? *e.second_cost - e.best_cost : std::numeric_limits<double>::infinity();
}

/// Index into `claimants` of the entry that takes the contested column.
std::size_t pick_winner(const std::vector<const AssocEntry*>& claimants) {
    constexpr double kRatio = 0.9;
    for (std::size_t i = 0; i < claimants.size(); ++i) {
        bool dominates = true;
        for (std::size_t j = 0; j < claimants.size() && dominates; ++j) {
            if (j != i) dominates = claimants[i]->best_cost < kRatio * claimants[j]->best_cost;
        }
        if (dominates) return i;
    }
    std::size_t w = 0;
    for (std::size_t i = 1; i < claimants.size(); ++i) {
        const AssocEntry& a = *claimants[i];
        const AssocEntry& b = *claimants[w];
        if (std::tuple(-margin(a), a.best_cost, a.row) < std::tuple(-margin(b), b.best_cost, b.row)) w = i;
    }
    return w;
}

} // namespace

Assignment resolve_conflicts(std::span<const AssocEntry> entries, std::size_t rows) {
    Assignment out(rows);
    std::map<std::size_t, std::vector<const AssocEntry*>> claims;
    for (const auto& e : entries) {
        if (e.row >= rows) throw Error(ErrorCode::InvalidArgument, "association row out of range");
        claims[e.best_col].push_back(&e);
    }

    std::set<std::size_t> taken;
    std::vector<const AssocEntry*> losers;
    for (auto& [col, claimants] : claims) {
        const std::size_t w = claimants.size() == 1 ? 0 : pick_winner(claimants);
        out[claimants[w]->row] = col;
        taken.insert(col);
        for (std::size_t i = 0; i < claimants.size(); ++i) {
            if (i != w) losers.push_back(claimants[i]);
        }
    }

    std::sort(losers.begin(), losers.end(), [](const AssocEntry* a, const AssocEntry* b) {
        const double ca = a->second_cost.value_or(std::numeric_limits<double>::infinity());
        const double cb = b->second_cost.value_or(std::numeric_limits<double>::infinity());
        return std::tie(ca, a->row) < std::tie(cb, b->row);
    });
    for (const AssocEntry* e : losers) {
        if (e->second_col && taken.insert(*e->second_col).second) out[e->row] = *e->second_col;
    }
    return out;
}

Assignment assign(const CostMatrix& costs, double cost_gate) {
    const auto entries = build_assoc(costs);
    Assignment a = resolve_conflicts(entries, costs.rows());
    for (std::size_t r = 0; r < a.size(); ++r) {
        if (a[r] && costs(r, *a[r]) > cost_gate) a[r].reset();
    }
    return a;
}

Assignment brute_force_assignment(const CostMatrix& costs) {
    constexpr std::size_t kMax = 8;
    if (costs.rows() > kMax || costs.cols() > kMax) {
        throw Error(ErrorCode::TooLarge, "exhaustive assignment is limited to 8x8");
    }
    Assignment best(costs.rows());
    if (costs.rows() == 0 || costs.cols() == 0) return best;

    const bool permute_cols = costs.rows() <= costs.cols();
    const std::size_t span = permute_cols ? costs.cols() : costs.rows();
    const std::size_t pairs = std::min(costs.rows(), costs.cols());
    std::vector<std::size_t> perm(span);
    std::iota(perm.begin(), perm.end(), 0);
    double best_total = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_perm;
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < pairs; ++i) total += permute_cols ? costs(i, perm[i]) : costs(perm[i], i);
        if (total < best_total) {
            best_total = total;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    for (std::size_t i = 0; i < pairs; ++i) {
        if (permute_cols) {
            best[i] = best_perm[i];
        } else {
            best[best_perm[i]] = i;
        }
    }
    return best;
}

CostMatrix cost_matrix(const FrameSlot& current, const FrameSlot& history, const TrackerConfig& cfg) {
    CostMatrix m(current.observations.size(), history.observations.size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            m(r, c) = combined_cost(current.observations[r], history.observations[c], cfg, *current.meta).value;
        }
    }
    return m;
}

std::vector<int> match_frame(const FrameSlot& current, const FrameSlot* prev1, const FrameSlot* prev2,
                             const TrackerConfig& cfg, TrackState& state) {
    struct Claim {
        double cost;
        int history_rank;
        std::size_t row;
        int track;
    };
    const std::size_t n = current.observations.size();
    std::vector<Claim> claims;
    int rank = 0;
    for (const FrameSlot* hist : {prev1, prev2}) {
        if (hist && !hist->observations.empty() && n > 0) {
            if (hist->track_ids.size() != hist->observations.size()) {
                throw Error(ErrorCode::InvalidArgument, "history frame has not been labeled");
            }
            const CostMatrix costs = cost_matrix(current, *hist, cfg);
            const Assignment a = assign(costs, cfg.cost_gate);
            for (std::size_t r = 0; r < n; ++r) {
                if (a[r]) claims.push_back({costs(r, *a[r]), rank, r, hist->track_ids[*a[r]]});
            }
        }
        ++rank;
    }
    std::sort(claims.begin(), claims.end(), [](const Claim& a, const Claim& b) {
        return std::tie(a.cost, a.history_rank, a.row) < std::tie(b.cost, b.history_rank, b.row);
    });

    std::vector<int> ids(n, 0);
    std::set<int> used;
    for (const Claim& c : claims) {
        if (ids[c.row] == 0 && !used.contains(c.track)) {
            ids[c.row] = c.track;
            used.insert(c.track);
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        if (ids[r] == 0) ids[r] = state.allocate();
        state.tracks[ids[r]] = {current.meta->frame_id, current.frame_index,
                                current.observations[r].detection->detection_id};
    }
    return ids;
}

namespace {

cv::Mat load_frame_image(const FrameMeta& meta) {
    if (!meta.image.empty()) return meta.image;
    if (!meta.image_path) {
        throw Error(ErrorCode::MissingImage, "frame " + std::to_string(meta.frame_id) + " has no image");
    }
    cv::Mat img = cv::imread(*meta.image_path, cv::IMREAD_COLOR);
    if (img.empty()) throw Error(ErrorCode::IoError, "cannot read image " + *meta.image_path);
    return img;
}

} // namespace

std::vector<TrackAssignment> track_sequence(const Sequence& seq, const TrackerConfig& cfg,
                                            std::span<const Homography> pair_homographies) {
    cfg.validate();
    validate(seq);
    if (cfg.needs_features()) {
        for (const auto& f : seq.frames) {
            for (const auto& d : f.detections) {
                if (!d.features) {
                    throw Error(ErrorCode::MissingFeatures, "detection " + std::to_string(d.detection_id) +
                                                                " in frame " + std::to_string(d.frame_id) +
                                                                " has no features");
                }
            }
        }
    }

    std::optional<StabilizedSequence> stabilized;
    if (cfg.stabilize) {
        if (pair_homographies.empty() && seq.frames.size() > 1) {
            throw Error(ErrorCode::InvalidArgument, "stabilize=true needs frame-pair homographies");
        }
        stabilized = stabilize(seq, pair_homographies);
    }
    const Sequence& placed = stabilized ? stabilized->stabilized : seq;

    TrackState state;
    std::deque<FrameSlot> history;  // front = t-1, back = t-2
    std::deque<cv::Mat> images;     // parallel to history
    std::vector<TrackAssignment> out;
    out.reserve(seq.detection_count());

    for (std::size_t fi = 0; fi < seq.frames.size(); ++fi) {
        const SequenceFrame& frame = seq.frames[fi];
        cv::Mat image;
        if (cfg.needs_images() && !frame.detections.empty()) image = load_frame_image(frame.meta);

        FrameSlot slot;
        slot.meta = &frame.meta;
        slot.frame_index = fi;
        for (std::size_t di = 0; di < frame.detections.size(); ++di) {
            slot.observations.push_back(
                {&frame.detections[di], placed.frames[fi].detections[di].bbox, image.empty() ? nullptr : &image});
        }
        const FrameSlot* prev1 = history.size() > 0 ? &history[0] : nullptr;
        const FrameSlot* prev2 = history.size() > 1 ? &history[1] : nullptr;
        slot.track_ids = match_frame(slot, prev1, prev2, cfg, state);

        for (std::size_t di = 0; di < frame.detections.size(); ++di) {
            const Detection& d = frame.detections[di];
            out.push_back({d.frame_id, d.detection_id, slot.track_ids[di], d.bbox});
        }

        // The slot's observations point at `image`; keep both alive together.
        images.push_front(std::move(image));
        for (auto& obs : slot.observations) obs.image = images.front().empty() ? nullptr : &images.front();
        history.push_front(std::move(slot));
        if (history.size() > 2) {
            history.pop_back();
            images.pop_back();
        }
    }
    return out;
}

std::vector<TrackRow> to_track_rows(const std::vector<TrackAssignment>& assignments) {
    std::vector<TrackRow> rows;
    rows.reserve(assignments.size());
    for (const auto& a : assignments) rows.push_back(TrackRow::from_box(a.frame_id, a.track_id, a.bbox));
    return rows;
}

} // namespace courttrack
