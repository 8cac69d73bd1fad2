#include "courttrack/body_parts.hpp"

#include "courttrack/error.hpp"

#include <string>

namespace courttrack {
namespace {

constexpr std::array<std::string_view, kNumParts> kPartNames = {
    "Nose",     "Chest",    "R-Shoulder", "R-Elbow",  "R-Wrist", "L-Shoulder", "L-Elbow",
    "L-Wrist",  "Mid-Hip",  "R-Hip",      "R-Knee",   "R-Ankle", "L-Hip",      "L-Knee",
    "L-Ankle",  "R-Eye",    "L-Eye",      "R-Ear",    "L-Ear",   "L-Toes",     "L-Mid-Foot",
    "L-Heel",   "R-Toes",   "R-Mid-Foot", "R-Heel",
};

void check_part(int part_id) {
    if (part_id < 0 || part_id >= kNumParts) {
        throw Error(ErrorCode::InvalidArgument, "part id out of range: " + std::to_string(part_id));
    }
}

} // namespace

std::string_view part_name(int part_id) {
    check_part(part_id);
    return kPartNames[static_cast<std::size_t>(part_id)];
}

std::optional<int> part_from_name(std::string_view name) {
    for (int i = 0; i < kNumParts; ++i) {
        if (kPartNames[static_cast<std::size_t>(i)] == name) return i;
    }
    return std::nullopt;
}

PartSet PartSet::all() {
    PartSet s;
    s.members_.fill(true);
    return s;
}

PartSet PartSet::of(std::initializer_list<Part> parts) {
    PartSet s;
    for (Part p : parts) s.insert(index_of(p));
    return s;
}

void PartSet::insert(int part_id) {
    check_part(part_id);
    members_[static_cast<std::size_t>(part_id)] = true;
}

bool PartSet::contains(int part_id) const {
    return part_id >= 0 && part_id < kNumParts && members_[static_cast<std::size_t>(part_id)];
}

std::size_t PartSet::size() const {
    std::size_t n = 0;
    for (bool m : members_) n += m ? 1 : 0;
    return n;
}

std::vector<int> PartSet::ids() const {
    std::vector<int> out;
    for (int i = 0; i < kNumParts; ++i) {
        if (members_[static_cast<std::size_t>(i)]) out.push_back(i);
    }
    return out;
}

PartSet preset_parts(PartPreset preset) {
    using enum Part;
    switch (preset) {
    case PartPreset::All:
        return PartSet::all();
    case PartPreset::Top6:
        return PartSet::of({Chest, LShoulder, RShoulder, RHip, MidHip, LHip});
    case PartPreset::Top12:
        return PartSet::of({Chest, LShoulder, RShoulder, RHip, MidHip, LHip, LKnee, RKnee, LElbow, RElbow,
                            RAnkle, LAnkle});
    case PartPreset::Top20: {
        PartSet s;
        for (int i = 0; i < kNumParts; ++i) {
            const Part p = static_cast<Part>(i);
            if (p == RMidFoot || p == LEye || p == Nose || p == REye || p == REar) continue;
            s.insert(i);
        }
        return s;
    }
    }
    return PartSet::all();
}

std::optional<PartPreset> preset_from_name(std::string_view name) {
    if (name == "all") return PartPreset::All;
    if (name == "top6") return PartPreset::Top6;
    if (name == "top12") return PartPreset::Top12;
    if (name == "top20") return PartPreset::Top20;
    return std::nullopt;
}

} // namespace courttrack
