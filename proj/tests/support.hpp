#pragma once

// Shared fixtures: sample points, a random expression generator and the
// closed forms of the planar example used as oracles.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hamgeo/builtin.hpp"
#include "hamgeo/expr.hpp"
#include "hamgeo/geometry.hpp"
#include "hamgeo/phase_point.hpp"
#include "hamgeo/sampling.hpp"

namespace testsupport {

using hamgeo::Matrix;
using hamgeo::PhasePoint;

inline const PhasePoint kP0({1.0, 0.0}, {1.0, 1.0});

inline std::vector<PhasePoint> planar_points(std::size_t count = 100, std::uint64_t seed = hamgeo::kDefaultSeed) {
  return hamgeo::sample_points(hamgeo::SampleBox::default_box(), count, seed);
}

inline std::vector<PhasePoint> box_points(std::size_t n, double lo, double hi, std::size_t count, std::uint64_t seed) {
  return hamgeo::sample_points(hamgeo::SampleBox::uniform(n, lo, hi, lo, hi), count, seed);
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double d : v) m = std::max(m, std::fabs(d));
  return m;
}

inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Closed forms for H = 1/2 (p1^2 + (p1 x1 + p2)^2).
inline Matrix planar_g_upper(const PhasePoint& P) {
  const double x1 = P.x()[0];
  return mat2(1 + x1 * x1, x1, x1, 1);
}

inline Matrix planar_connection(const PhasePoint& P) {
  const double x1 = P.x()[0], p1 = P.p()[0], p2 = P.p()[1];
  const double s = p1 * x1 + p2;
  return mat2(-s, x1 * s, x1 * s, -x1 * (p1 * (1 + x1 * x1) + p2 * x1));
}

/// R_121 and R_212 recomputed from the closed-form connection by hand.
inline std::pair<double, double> planar_curvature(const PhasePoint& P) {
  const double x1 = P.x()[0], p1 = P.p()[0], p2 = P.p()[1];
  return {p1 * x1 + p2, p1 + p1 * x1 * x1 + p2 * x1};
}

/// Random expressions over x1..xn, p1..pn built from + - * ^ and the
/// elementary functions, kept finite on a bounded box.
class ExprGen {
 public:
  ExprGen(std::size_t dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

  std::string text(int depth = 3) {
    if (depth == 0 || pick(4) == 0) return leaf();
    switch (pick(7)) {
      case 0: return "(" + text(depth - 1) + "+" + text(depth - 1) + ")";
      case 1: return "(" + text(depth - 1) + "-" + text(depth - 1) + ")";
      case 2: return "(" + text(depth - 1) + "*" + text(depth - 1) + ")";
      case 3: return "(" + text(depth - 1) + ")^" + std::to_string(2 + pick(2));
      case 4: return "sin(" + text(depth - 1) + ")";
      case 5: return "cos(" + text(depth - 1) + ")";
      default: return "-" + leaf();
    }
  }

  hamgeo::Expression expr(int depth = 3) { return hamgeo::parse(text(depth), dim_); }

 private:
  std::size_t pick(std::size_t k) { return std::uniform_int_distribution<std::size_t>(0, k - 1)(rng_); }

  std::string leaf() {
    switch (pick(3)) {
      case 0: return "x" + std::to_string(1 + pick(dim_));
      case 1: return "p" + std::to_string(1 + pick(dim_));
      default: return std::to_string(1 + pick(5)) + ".5";
    }
  }

  std::size_t dim_;
  std::mt19937_64 rng_;
};

}  // namespace testsupport
