#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "courttrack/costs.hpp"
#include "courttrack/detection.hpp"
#include "courttrack/homography.hpp"
#include "courttrack/io.hpp"

namespace courttrack {

/// Association costs between detections at t (rows) and an earlier frame (cols).
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    CostMatrix scaled(double factor) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct AssocEntry {
    std::size_t row = 0;
    std::size_t best_col = 0;
    double best_cost = 0.0;
    std::optional<std::size_t> second_col;
    std::optional<double> second_cost;
};

/// Two smallest costs per row, ties to the lower column. Empty when the
/// matrix has no columns.
std::vector<AssocEntry> build_assoc(const CostMatrix& costs);

/// row -> col, unset for unmatched rows.
using Assignment = std::vector<std::optional<std::size_t>>;

/// Resolves repeated best columns: a claimant whose cost undercuts every rival
/// by more than 10% wins outright, otherwise the largest second-minus-best
/// margin wins; losers try their second column if nobody holds it. Never
/// assigns a column twice.
Assignment resolve_conflicts(std::span<const AssocEntry> entries, std::size_t rows);

/// build_assoc + resolve_conflicts, then drops matches costing more than
/// `cost_gate`.
Assignment assign(const CostMatrix& costs, double cost_gate = 1.0);

/// Minimum-total one-to-one assignment of min(rows, cols) pairs by exhaustive
/// permutation. Throws TooLarge beyond 8 rows or columns.
Assignment brute_force_assignment(const CostMatrix& costs);

struct TrackRecord {
    int last_frame_id = 0;
    std::size_t last_frame_index = 0;
    int last_detection_id = 0;
};

/// Identity bookkeeping across frames. Ids start at 1.
struct TrackState {
    int next_id = 1;
    std::map<int, TrackRecord> tracks;

    int allocate() { return next_id++; }
};

/// Detections of one frame as the matcher sees them, plus the ids they
/// received once matched.
struct FrameSlot {
    const FrameMeta* meta = nullptr;
    std::size_t frame_index = 0;
    std::vector<Observation> observations;
    std::vector<int> track_ids;
};

CostMatrix cost_matrix(const FrameSlot& current, const FrameSlot& history, const TrackerConfig& cfg);

/// Assigns track ids to `current` using the frames one and two steps back
/// (either may be null or empty). Keeps, per detection, the cheaper of the two
/// history matches; a track id goes to at most one detection, cheapest first,
/// with losers falling back to their other match or a fresh id.
std::vector<int> match_frame(const FrameSlot& current, const FrameSlot* prev1, const FrameSlot* prev2,
                             const TrackerConfig& cfg, TrackState& state);

struct TrackAssignment {
    int frame_id = 0;
    int detection_id = 0;
    int track_id = 0;
    BoundingBox bbox;  ///< Original image coordinates.

    friend bool operator==(const TrackAssignment&, const TrackAssignment&) = default;
};

/// Runs the matcher over a whole sequence. With `pair_homographies` and
/// cfg.stabilize the geometric term uses frame-0 coordinates. Images needed by
/// the color cost are loaded from FrameMeta::image_path when not already set.
/// Throws MissingFeatures when the config needs features a detection lacks.
std::vector<TrackAssignment> track_sequence(const Sequence& seq, const TrackerConfig& cfg,
                                            std::span<const Homography> pair_homographies = {});

std::vector<TrackRow> to_track_rows(const std::vector<TrackAssignment>& assignments);

} // namespace courttrack
