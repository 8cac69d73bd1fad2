#pragma once

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>

#include "courttrack/detection.hpp"

namespace courttrack::testing {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(COURTTRACK_FIXTURE_DIR) / name;
}

/// Fresh directory under the system temp dir, removed first if present.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("courttrack_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct PartAt {
    int part;
    double x;
    double y;
    double conf = 1.0;
};

inline Skeleton skeleton_of(std::initializer_list<PartAt> parts) {
    Skeleton sk = empty_skeleton();
    for (const auto& p : parts) {
        auto& kp = sk[static_cast<std::size_t>(p.part)];
        kp.x = p.x;
        kp.y = p.y;
        kp.confidence = p.conf;
        kp.present = true;
    }
    return sk;
}

/// Two-point skeleton whose derived bbox is exactly `box` (Nose and R-Heel at
/// the corners), optionally with extra parts.
inline Detection box_detection(int frame, int id, const BoundingBox& box) {
    return Detection::create(frame, id,
                             skeleton_of({{0, box.x_min, box.y_min}, {24, box.x_max, box.y_max}}));
}

inline FrameMeta frame_meta(int id = 0, int w = 1920, int h = 1080) {
    FrameMeta m;
    m.frame_id = id;
    m.width = w;
    m.height = h;
    return m;
}

} // namespace courttrack::testing
