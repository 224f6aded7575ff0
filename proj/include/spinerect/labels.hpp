#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace spinerect {

inline constexpr int kDefaultVMax = 26;

namespace detail {
inline constexpr std::array<std::string_view, kDefaultVMax> kLabelNames = {
    "C1", "C2", "C3", "C4", "C5", "C6", "C7",                                 //
    "T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "T9", "T10", "T11", "T12",  //
    "L1", "L2", "L3", "L4", "L5",                                             //
    "S1", "S2"};
}

// Anatomical name of 1-based label v. Labels past S2 (only possible with a
// non-default label count) are named "V<n>".
inline std::string label_name(int v) {
  if (v >= 1 && v <= kDefaultVMax) return std::string(detail::kLabelNames[v - 1]);
  return "V" + std::to_string(v);
}

inline std::optional<int> label_from_name(std::string_view name) {
  for (int v = 1; v <= kDefaultVMax; ++v) {
    if (detail::kLabelNames[v - 1] == name) return v;
  }
  return std::nullopt;
}

enum class Region { cervical, thoracic, lumbar, sacral };

inline Region region_of(int v) {
  if (v <= 7) return Region::cervical;
  if (v <= 19) return Region::thoracic;
  if (v <= 24) return Region::lumbar;
  return Region::sacral;
}

inline std::string_view region_name(Region r) {
  switch (r) {
    case Region::cervical: return "Cervical";
    case Region::thoracic: return "Thoracic";
    case Region::lumbar: return "Lumbar";
    case Region::sacral: return "Sacrum";
  }
  return "";
}

}  // namespace spinerect
