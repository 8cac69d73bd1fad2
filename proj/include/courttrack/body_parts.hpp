#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace courttrack {

inline constexpr int kNumParts = 25;

/// Body-25 keypoint layout as emitted by the pose estimator.
///
/// The tracker's part names follow the per-part ablation naming: Neck is reported
/// as "Chest", each big toe as "Toes" and each small toe as "Mid-Foot". That
/// correspondence is our reading of the standard layout; the estimator itself only
/// emits indices.
enum class Part : int {
    Nose = 0,
    Chest = 1,
    RShoulder = 2,
    RElbow = 3,
    RWrist = 4,
    LShoulder = 5,
    LElbow = 6,
    LWrist = 7,
    MidHip = 8,
    RHip = 9,
    RKnee = 10,
    RAnkle = 11,
    LHip = 12,
    LKnee = 13,
    LAnkle = 14,
    REye = 15,
    LEye = 16,
    REar = 17,
    LEar = 18,
    LToes = 19,
    LMidFoot = 20,
    LHeel = 21,
    RToes = 22,
    RMidFoot = 23,
    RHeel = 24,
};

constexpr int index_of(Part p) { return static_cast<int>(p); }

std::string_view part_name(int part_id);
std::optional<int> part_from_name(std::string_view name);

/// Set of part ids, stored as a 25-bit membership table.
class PartSet {
public:
    PartSet() = default;
    static PartSet all();
    static PartSet of(std::initializer_list<Part> parts);

    void insert(int part_id);
    bool contains(int part_id) const;
    std::size_t size() const;
    bool empty() const { return size() == 0; }
    std::vector<int> ids() const;

    friend bool operator==(const PartSet&, const PartSet&) = default;

private:
    std::array<bool, kNumParts> members_{};
};

/// Part clusters ranked by single-part tracking quality: the torso six, twelve
/// parts adding knees/elbows/ankles, and twenty parts dropping the five weakest.
enum class PartPreset { All, Top6, Top12, Top20 };

PartSet preset_parts(PartPreset preset);
std::optional<PartPreset> preset_from_name(std::string_view name);

} // namespace courttrack
