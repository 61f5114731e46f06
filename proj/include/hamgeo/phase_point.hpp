#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hamgeo/errors.hpp"

namespace hamgeo {

/// A point (x, p) of the cotangent bundle. Phase coordinates are always
/// ordered x^1..x^n, p_1..p_n.
class PhasePoint {
 public:
  PhasePoint() = default;

  PhasePoint(std::vector<double> x, std::vector<double> p)
      : x_(std::move(x)), p_(std::move(p)) {
    if (x_.size() != p_.size() || x_.empty()) {
      throw DimensionError("phase point needs n >= 1 positions and n momenta");
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i]) || !std::isfinite(p_[i])) {
        throw DomainError("phase point has a non-finite entry");
      }
    }
  }

  /// Builds a point from 2n phase coordinates.
  static PhasePoint from_coordinates(std::span<const double> z) {
    if (z.size() % 2 != 0) {
      throw DimensionError("phase coordinates must have even length");
    }
    const std::size_t n = z.size() / 2;
    return PhasePoint(std::vector<double>(z.begin(), z.begin() + n),
                      std::vector<double>(z.begin() + n, z.end()));
  }

  std::size_t dim() const noexcept { return x_.size(); }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& p() const noexcept { return p_; }

  /// Phase coordinate a in 0..2n-1.
  double coordinate(std::size_t a) const {
    return a < dim() ? x_[a] : p_[a - dim()];
  }

  std::vector<double> coordinates() const {
    std::vector<double> z(x_);
    z.insert(z.end(), p_.begin(), p_.end());
    return z;
  }

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;

 private:
  std::vector<double> x_;
  std::vector<double> p_;
};

}  // namespace hamgeo
