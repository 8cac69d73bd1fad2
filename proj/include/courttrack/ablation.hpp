#pragma once

#include <string>
#include <vector>

#include "courttrack/costs.hpp"
#include "courttrack/synth.hpp"

namespace courttrack {

struct AblationSpec {
    std::vector<double> alphas = default_alphas();
    std::vector<int> neighborhoods{1, 2, 3};
    std::vector<LayerSpec> layers{LayerSpec::b4c2()};
    std::vector<bool> stabilize{false};
    double iou_gate = 0.5;
    int threads = 1;

    /// 0, 0.05, ..., 1.
    static std::vector<double> default_alphas();
    std::size_t cell_count() const;
    void validate() const;
};

struct AblationRow {
    double alpha = 0.0;
    int neighborhood = 2;
    std::string layer;
    bool stabilize = false;
    double mota = 0.0;
    double motp = 0.0;
    long long false_positives = 0;
    long long misses = 0;
    long long mismatches = 0;
    long long ground_truth = 0;
    bool best = false;
};

struct AblationReport {
    std::vector<AblationRow> rows;

    std::string to_table() const;
    std::string to_json() const;
};

/// Cartesian product of the grids in `spec`, ordered layer, stabilize,
/// neighborhood, alpha. Every cell tracks every dataset with `base` updated by
/// the cell's values and pools the CLEAR-MOT counts. The row with the highest
/// MOTA (first on ties) is flagged best.
AblationReport run_ablation(const AblationSpec& spec, const TrackerConfig& base,
                            const std::vector<FixtureData>& datasets);

} // namespace courttrack
