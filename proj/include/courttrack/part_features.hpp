#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "courttrack/body_parts.hpp"

namespace courttrack {

/// Convolutional layer whose activations back the appearance features. Grid
/// sizes assume a 224x224 input crop.
struct LayerSpec {
    std::string name;
    int grid_w = 0;
    int grid_h = 0;
    int channels = 0;

    static LayerSpec b2c2() { return {"b2c2", 112, 112, 128}; }
    static LayerSpec b3c2() { return {"b3c2", 56, 56, 256}; }
    static LayerSpec b4c2() { return {"b4c2", 28, 28, 512}; }
    static LayerSpec b5c2() { return {"b5c2", 14, 14, 512}; }

    /// Throws InvalidArgument for unknown names.
    static LayerSpec from_name(std::string_view name);

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct GridCell {
    int x = 0;
    int y = 0;

    friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

/// Unit-norm appearance vectors per body part per grid cell.
///
/// The channel count of the stored vectors may be smaller than the layer's
/// nominal channel count (synthetic fixtures use short signatures); all vectors
/// in one set share the same length.
class PartFeatureSet {
public:
    static constexpr double kNormTolerance = 1e-5;

    PartFeatureSet(LayerSpec layer, int channels);

    const LayerSpec& layer() const { return layer_; }
    int channels() const { return channels_; }

    /// Throws InvalidArgument on wrong length, out-of-range part, or a vector
    /// whose L2 norm is not 1 within kNormTolerance.
    void insert(int part_id, GridCell cell, std::vector<float> vec);

    /// nullptr when the cell was not exported.
    const std::vector<float>* find(int part_id, GridCell cell) const;

    const std::map<GridCell, std::vector<float>>& cells(int part_id) const;
    std::size_t entry_count() const;

    friend bool operator==(const PartFeatureSet&, const PartFeatureSet&) = default;

private:
    LayerSpec layer_;
    int channels_;
    std::array<std::map<GridCell, std::vector<float>>, kNumParts> parts_;
};

/// Scales `vec` to unit L2 norm in place. Throws InvalidArgument on a zero vector.
void l2_normalize(std::span<float> vec);

// PFV1 binary layout, little-endian:
//   "PFV1" | u8 name_len | name bytes | u32 channels | u32 entry_count
//   entry_count x { u8 part_id | u16 cell_x | u16 cell_y | channels x f32 }
std::vector<std::uint8_t> encode_pfv1(const PartFeatureSet& set);
PartFeatureSet decode_pfv1(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>");

void write_pfv1(const std::filesystem::path& path, const PartFeatureSet& set);
PartFeatureSet read_pfv1(const std::filesystem::path& path);

} // namespace courttrack
