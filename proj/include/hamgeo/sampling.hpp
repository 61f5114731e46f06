#pragma once

// Deterministic sampling of phase points in a coordinate box.

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "hamgeo/errors.hpp"
#include "hamgeo/phase_point.hpp"

namespace hamgeo {

inline constexpr std::uint64_t kDefaultSeed = 20240917;
inline constexpr std::size_t kDefaultSampleCount = 100;

/// Closed ranges for each phase coordinate, ordered (x^1..x^n, p_1..p_n).
struct SampleBox {
  std::vector<std::pair<double, double>> ranges;

  std::size_t dim() const noexcept { return ranges.size() / 2; }

  /// x in [x_lo, x_hi]^n, p in [p_lo, p_hi]^n.
  static SampleBox uniform(std::size_t n, double x_lo, double x_hi, double p_lo, double p_hi) {
    SampleBox b;
    for (std::size_t i = 0; i < n; ++i) b.ranges.push_back({x_lo, x_hi});
    for (std::size_t i = 0; i < n; ++i) b.ranges.push_back({p_lo, p_hi});
    return b;
  }

  /// The box used throughout for the worked planar example.
  static SampleBox default_box() { return uniform(2, -2.0, 2.0, 0.2, 2.0); }

  void validate() const {
    if (ranges.empty() || ranges.size() % 2 != 0) throw DimensionError("sample box needs 2n ranges");
    for (const auto& [lo, hi] : ranges) {
      if (!(lo <= hi)) throw std::invalid_argument("sample box range has lo > hi");
    }
  }
};

/// `count` points drawn uniformly from the box. The same (box, count, seed)
/// always gives the same points: coordinates come straight from the 53 high
/// bits of a mt19937_64 stream, so no library distribution is involved.
inline std::vector<PhasePoint> sample_points(const SampleBox& box, std::size_t count, std::uint64_t seed) {
  box.validate();
  std::mt19937_64 rng(seed);
  std::vector<PhasePoint> out;
  out.reserve(count);
  std::vector<double> z(box.ranges.size());
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t a = 0; a < z.size(); ++a) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const auto [lo, hi] = box.ranges[a];
      z[a] = lo + (hi - lo) * u;
    }
    out.push_back(PhasePoint::from_coordinates(z));
  }
  return out;
}

}  // namespace hamgeo
