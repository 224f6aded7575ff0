#pragma once

// VGF1 volume files and on-disk activation stacks.
//
// VGF1 layout (all little-endian):
//   "VGF1" | u32 W,H,L | f64 spacing x,y,z | f64 origin x,y,z | W*H*L f32, x fastest

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "labels.hpp"
#include "volume.hpp"

namespace spinerect {

namespace detail {

inline constexpr std::array<char, 4> kVgfMagic = {'V', 'G', 'F', '1'};
inline constexpr std::size_t kVgfHeaderBytes = 4 + 3 * 4 + 6 * 8;

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((value >> (8 * b)) & 0xFFu));
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(p[b]) << (8 * b);
  return v;
}

}  // namespace detail

inline std::string encode_volume(const VolumeGrid& g) {
  const auto& geo = g.geometry();
  for (auto d : geo.dims) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw InputError("vgf: dimension exceeds u32");
  }
  std::string out;
  out.reserve(detail::kVgfHeaderBytes + 4 * geo.voxel_count());
  out.append(detail::kVgfMagic.data(), detail::kVgfMagic.size());
  for (auto d : geo.dims) detail::put_le(out, static_cast<std::uint32_t>(d));
  for (double v : {geo.spacing.x, geo.spacing.y, geo.spacing.z, geo.origin.x, geo.origin.y, geo.origin.z}) {
    detail::put_le(out, std::bit_cast<std::uint64_t>(v));
  }
  for (double v : g.data()) detail::put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

inline VolumeGrid decode_volume(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), detail::kVgfMagic.data(), 4) != 0) {
    throw FormatError("vgf: missing VGF1 magic");
  }
  if (bytes.size() < detail::kVgfHeaderBytes) throw HeaderError("vgf: truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 4;
  Geometry geo;
  for (auto& d : geo.dims) {
    d = detail::get_le<std::uint32_t>(p);
    p += 4;
  }
  std::array<double, 6> h{};
  for (auto& v : h) {
    v = std::bit_cast<double>(detail::get_le<std::uint64_t>(p));
    p += 8;
  }
  geo.spacing = {h[0], h[1], h[2]};
  geo.origin = {h[3], h[4], h[5]};
  try {
    geo.validate();
  } catch (const InputError& e) {
    throw HeaderError(std::string("vgf: bad header: ") + e.what());
  }
  const std::size_t payload = bytes.size() - detail::kVgfHeaderBytes;
  const std::size_t n = geo.voxel_count();
  if (payload != 4 * n) {
    throw PayloadMismatchError("vgf: header declares " + std::to_string(n) + " values but payload holds " +
                               std::to_string(payload / 4) + (payload % 4 ? " and a partial value" : ""));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i, p += 4) {
    const float f = std::bit_cast<float>(detail::get_le<std::uint32_t>(p));
    if (!std::isfinite(f)) throw NonFiniteError("vgf: non-finite value at index " + std::to_string(i));
    data[i] = f;
  }
  return VolumeGrid(geo, std::move(data));
}

inline void write_volume(const VolumeGrid& g, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open " + path.string() + " for writing");
  const std::string bytes = encode_volume(g);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw InputError("failed writing " + path.string());
}

inline VolumeGrid read_volume(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_volume(bytes);
}

inline std::string channel_file_name(int v) {
  std::ostringstream os;
  os << "channel_" << (v < 10 ? "0" : "") << v << ".vgf";
  return os.str();
}

inline void write_stack(const ActivationStack& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["v_max"] = s.v_max();
  auto labels = nlohmann::json::array();
  for (int v = 1; v <= s.v_max(); ++v) {
    labels.push_back(label_name(v));
    write_volume(s.channel(v), dir / channel_file_name(v));
  }
  meta["labels"] = std::move(labels);
  std::ofstream os(dir / "stack.json");
  os << meta.dump(2) << '\n';
}

inline ActivationStack read_stack(const std::filesystem::path& dir) {
  std::ifstream is(dir / "stack.json");
  if (!is) throw InputError("missing " + (dir / "stack.json").string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("stack.json: " + std::string(e.what()));
  }
  if (!meta.contains("v_max") || !meta["v_max"].is_number_integer()) throw InputError("stack.json: missing v_max");
  const int v_max = meta["v_max"].get<int>();
  if (v_max < 1) throw InputError("stack.json: v_max must be >= 1");
  std::vector<VolumeGrid> channels;
  channels.reserve(static_cast<std::size_t>(v_max));
  for (int v = 1; v <= v_max; ++v) channels.push_back(read_volume(dir / channel_file_name(v)));
  return ActivationStack(std::move(channels), v_max);
}

}  // namespace spinerect
