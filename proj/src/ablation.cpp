#include "courttrack/ablation.hpp"

#include <atomic>
#include <mutex>
#include <cstdio>
#include <thread>

#include <json.hpp>

#include "courttrack/error.hpp"
#include "courttrack/matcher.hpp"
#include "courttrack/metrics.hpp"

namespace courttrack {

std::vector<double> AblationSpec::default_alphas() {
    std::vector<double> out;
    for (int i = 0; i <= 20; ++i) out.push_back(i / 20.0);
    return out;
}

std::size_t AblationSpec::cell_count() const {
    return alphas.size() * neighborhoods.size() * layers.size() * stabilize.size();
}

void AblationSpec::validate() const {
    if (cell_count() == 0) throw Error(ErrorCode::InvalidArgument, "ablation grid is empty");
    for (double a : alphas) {
        if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0,1]");
    }
    for (int n : neighborhoods) NeighborhoodSpec{n};
    if (!(iou_gate > 0.0 && iou_gate <= 1.0)) throw Error(ErrorCode::InvalidArgument, "iou gate must lie in (0,1]");
    if (threads < 1) throw Error(ErrorCode::InvalidArgument, "threads must be >= 1");
}

namespace {

struct Cell {
    double alpha;
    int neighborhood;
    LayerSpec layer;
    bool stabilize;
};

AblationRow run_cell(const Cell& cell, const TrackerConfig& base, const std::vector<FixtureData>& datasets,
                     double iou_gate) {
    TrackerConfig cfg = base;
    cfg.alpha = cell.alpha;
    cfg.neighborhood = NeighborhoodSpec(cell.neighborhood);
    cfg.layer = cell.layer;
    cfg.stabilize = cell.stabilize;

    MetricsAccumulator pooled;
    for (const auto& data : datasets) {
        std::vector<Homography> pairs;
        if (cfg.stabilize) pairs = pair_homographies_for(data.sequence, data.homographies);
        const auto rows = to_track_rows(track_sequence(data.sequence, cfg, pairs));
        pooled += evaluate_tracks(data.ground_truth, rows, iou_gate);
    }
    AblationRow row;
    row.alpha = cell.alpha;
    row.neighborhood = cell.neighborhood;
    row.layer = cell.layer.name;
    row.stabilize = cell.stabilize;
    row.mota = mota(pooled);
    row.motp = pooled.correspondences > 0 ? motp(pooled) : 0.0;
    row.false_positives = pooled.false_positives;
    row.misses = pooled.misses;
    row.mismatches = pooled.mismatches;
    row.ground_truth = pooled.ground_truth;
    return row;
}

} // namespace

AblationReport run_ablation(const AblationSpec& spec, const TrackerConfig& base,
                            const std::vector<FixtureData>& datasets) {
    spec.validate();
    if (datasets.empty()) throw Error(ErrorCode::InvalidArgument, "ablation needs at least one dataset");

    std::vector<Cell> cells;
    for (const auto& layer : spec.layers)
        for (bool stab : spec.stabilize)
            for (int n : spec.neighborhoods)
                for (double a : spec.alphas) cells.push_back({a, n, layer, stab});

    AblationReport report;
    report.rows.resize(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                report.rows[i] = run_cell(cells[i], base, datasets, spec.iou_gate);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), cells.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::size_t best = 0;
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        if (report.rows[i].mota > report.rows[best].mota) best = i;
    }
    report.rows[best].best = true;
    return report;
}

std::string AblationReport::to_table() const {
    std::string out = "layer  stab  n  alpha  MOTA      MOTP      FP      M       MM      G\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-6s %-5s %d  %.2f   %-9.4f %-9.4f %-7lld %-7lld %-7lld %lld%s\n",
                      r.layer.c_str(), r.stabilize ? "yes" : "no", r.neighborhood, r.alpha, r.mota, r.motp,
                      r.false_positives, r.misses, r.mismatches, r.ground_truth, r.best ? "  *" : "");
        out += buf;
    }
    return out;
}

std::string AblationReport::to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["layer"] = r.layer;
        j["stabilize"] = r.stabilize;
        j["neighborhood"] = r.neighborhood;
        j["alpha"] = r.alpha;
        j["mota"] = r.mota;
        j["motp"] = r.motp;
        j["fp"] = r.false_positives;
        j["m"] = r.misses;
        j["mm"] = r.mismatches;
        j["g"] = r.ground_truth;
        j["best"] = r.best;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

} // namespace courttrack
