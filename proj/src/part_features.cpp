#include "courttrack/part_features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "courttrack/error.hpp"

namespace courttrack {

static_assert(std::endian::native == std::endian::little, "PFV1 I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

LayerSpec LayerSpec::from_name(std::string_view name) {
    for (const LayerSpec& l : {b2c2(), b3c2(), b4c2(), b5c2()}) {
        if (l.name == name) return l;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown layer '" + std::string(name) + "'");
}

PartFeatureSet::PartFeatureSet(LayerSpec layer, int channels) : layer_(std::move(layer)), channels_(channels) {
    if (channels <= 0) throw Error(ErrorCode::InvalidArgument, "feature channel count must be positive");
}

void PartFeatureSet::insert(int part_id, GridCell cell, std::vector<float> vec) {
    if (part_id < 0 || part_id >= kNumParts) {
        throw Error(ErrorCode::InvalidArgument, "feature part id out of range");
    }
    if (static_cast<int>(vec.size()) != channels_) {
        throw Error(ErrorCode::InvalidArgument, "feature vector has " + std::to_string(vec.size()) +
                                                    " channels, expected " + std::to_string(channels_));
    }
    if (cell.x < 0 || cell.y < 0 || cell.x >= layer_.grid_w || cell.y >= layer_.grid_h) {
        throw Error(ErrorCode::InvalidArgument, "grid cell outside layer " + layer_.name);
    }
    double sq = 0.0;
    for (float v : vec) sq += static_cast<double>(v) * v;
    if (std::abs(std::sqrt(sq) - 1.0) > kNormTolerance) {
        throw Error(ErrorCode::InvalidArgument, "feature vector is not unit norm");
    }
    parts_[static_cast<std::size_t>(part_id)][cell] = std::move(vec);
}

const std::vector<float>* PartFeatureSet::find(int part_id, GridCell cell) const {
    if (part_id < 0 || part_id >= kNumParts) return nullptr;
    const auto& m = parts_[static_cast<std::size_t>(part_id)];
    auto it = m.find(cell);
    return it == m.end() ? nullptr : &it->second;
}

const std::map<GridCell, std::vector<float>>& PartFeatureSet::cells(int part_id) const {
    return parts_.at(static_cast<std::size_t>(part_id));
}

std::size_t PartFeatureSet::entry_count() const {
    std::size_t n = 0;
    for (const auto& m : parts_) n += m.size();
    return n;
}

void l2_normalize(std::span<float> vec) {
    double sq = 0.0;
    for (float v : vec) sq += static_cast<double>(v) * v;
    const double n = std::sqrt(sq);
    if (n == 0.0) throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero vector");
    for (float& v : vec) v = static_cast<float>(v / n);
}

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.insert(out.end(), buf, buf + sizeof(T));
}

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, const std::string& source) : bytes_(bytes), source_(source) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) throw ParseError(source_, 0, "truncated PFV1 data");
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string get_string(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw ParseError(source_, 0, "truncated PFV1 data");
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    const std::string& source_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_pfv1(const PartFeatureSet& set) {
    std::vector<std::uint8_t> out;
    const std::string& name = set.layer().name;
    if (name.size() > 255) throw Error(ErrorCode::InvalidArgument, "layer name too long");
    out.insert(out.end(), {'P', 'F', 'V', '1'});
    put<std::uint8_t>(out, static_cast<std::uint8_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(set.channels()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(set.entry_count()));
    for (int k = 0; k < kNumParts; ++k) {
        for (const auto& [cell, vec] : set.cells(k)) {
            put<std::uint8_t>(out, static_cast<std::uint8_t>(k));
            put<std::uint16_t>(out, static_cast<std::uint16_t>(cell.x));
            put<std::uint16_t>(out, static_cast<std::uint16_t>(cell.y));
            for (float v : vec) put<float>(out, v);
        }
    }
    return out;
}

PartFeatureSet decode_pfv1(std::span<const std::uint8_t> bytes, const std::string& source) {
    Reader r(bytes, source);
    if (r.get_string(4) != "PFV1") throw ParseError(source, 0, "bad PFV1 magic");
    const auto name_len = r.get<std::uint8_t>();
    const std::string name = r.get_string(name_len);
    const auto channels = r.get<std::uint32_t>();
    const auto count = r.get<std::uint32_t>();
    if (channels == 0 || channels > (1u << 20)) throw ParseError(source, 0, "implausible channel count");

    LayerSpec layer;
    try {
        layer = LayerSpec::from_name(name);
    } catch (const Error&) {
        throw ParseError(source, 0, "unknown layer '" + name + "'");
    }
    PartFeatureSet set(layer, static_cast<int>(channels));
    for (std::uint32_t i = 0; i < count; ++i) {
        const int part = r.get<std::uint8_t>();
        const int cx = r.get<std::uint16_t>();
        const int cy = r.get<std::uint16_t>();
        std::vector<float> vec(channels);
        for (auto& v : vec) v = r.get<float>();
        try {
            set.insert(part, {cx, cy}, std::move(vec));
        } catch (const Error& e) {
            throw ParseError(source, 0, "entry " + std::to_string(i) + ": " + e.what());
        }
    }
    if (!r.done()) throw ParseError(source, 0, "trailing bytes after PFV1 entries");
    return set;
}

void write_pfv1(const std::filesystem::path& path, const PartFeatureSet& set) {
    const auto bytes = encode_pfv1(set);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

PartFeatureSet read_pfv1(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_pfv1(bytes, path.string());
}

} // namespace courttrack
