#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "courttrack/detection.hpp"
#include "courttrack/geometry.hpp"
#include "courttrack/homography.hpp"

namespace courttrack {

namespace fs = std::filesystem;

/// Frame size used when no frame metadata file is supplied.
inline constexpr int kDefaultFrameWidth = 1920;
inline constexpr int kDefaultFrameHeight = 1080;

struct SequencePaths {
    fs::path detections;
    std::optional<fs::path> frames;
    /// Directory `feat_ref` entries are resolved against. Defaults to the
    /// directory of the detections file.
    std::optional<fs::path> features_dir;
};

/// Reads the detections/frames JSON Lines files and any referenced PFV1 files.
/// Images are not decoded here.
Sequence load_sequence(const SequencePaths& paths);

/// Writes detections and frame metadata; feature files are written next to the
/// detections file for detections that carry a `feat_ref`.
void save_sequence(const Sequence& seq, const SequencePaths& paths);

Detection parse_detection_line(const std::string& line, const std::string& source, std::size_t line_no);
std::string format_detection_line(const Detection& det);

/// One row of the MOT-style CSV used for both tracker output and ground truth.
struct TrackRow {
    int frame_id = 0;
    int track_id = 0;
    double x_min = 0.0;
    double y_min = 0.0;
    double width = 0.0;
    double height = 0.0;

    static TrackRow from_box(int frame_id, int track_id, const BoundingBox& box) {
        return {frame_id, track_id, box.x_min, box.y_min, box.width(), box.height()};
    }
    BoundingBox bbox() const { return {x_min, y_min, x_min + width, y_min + height}; }

    friend bool operator==(const TrackRow&, const TrackRow&) = default;
};

void save_tracks(const fs::path& path, const std::vector<TrackRow>& rows);
std::vector<TrackRow> load_tracks(const fs::path& path);

struct HomographyRecord {
    int frame_from = 0;
    int frame_to = 0;
    Homography h;
};

void save_homographies(const fs::path& path, const std::vector<HomographyRecord>& records);
std::vector<HomographyRecord> load_homographies(const fs::path& path);

/// Orders records to match consecutive frames of `seq`. Throws InvalidArgument
/// when a consecutive pair has no record.
std::vector<Homography> pair_homographies_for(const Sequence& seq,
                                              const std::vector<HomographyRecord>& records);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

} // namespace courttrack
