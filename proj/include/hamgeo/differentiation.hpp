#pragma once

// Lifting expressions to jets, and the finite-difference oracle used to
// cross-check them.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hamgeo/errors.hpp"
#include "hamgeo/expr.hpp"
#include "hamgeo/jet.hpp"
#include "hamgeo/phase_point.hpp"

namespace hamgeo {

/// All partial derivatives of `expr` at `point` up to `order` (0..3), in the
/// phase ordering (x^1..x^n, p_1..p_n).
inline Jet3 jet_lift(const Expression& expr, const PhasePoint& point, int order) {
  const std::size_t m = 2 * point.dim();
  std::vector<Jet3> z;
  z.reserve(m);
  for (std::size_t a = 0; a < m; ++a) z.push_back(Jet3::variable(m, order, a, point.coordinate(a)));
  return evaluate<Jet3>(expr, std::span<const Jet3>(z)).expanded(m, order);
}

/// Local Taylor model of a scalar near a base point. Geometric quantities are
/// carried as LocalFields so that their derivatives come out exactly.
using LocalField = Jet<double>;

/// Order-3 jet of `expr` whose coefficients are LocalFields of order
/// `field_order`. partial(alpha) of the result is the Taylor model of the
/// function d^alpha expr near `point`.
inline Jet<LocalField> jet_lift_nested(const Expression& expr, const PhasePoint& point, int field_order) {
  const std::size_t m = 2 * point.dim();
  std::vector<Jet<LocalField>> z;
  z.reserve(m);
  for (std::size_t a = 0; a < m; ++a) {
    z.push_back(Jet<LocalField>::variable(m, 3, a, LocalField::variable(m, field_order, a, point.coordinate(a))));
  }
  return evaluate<Jet<LocalField>>(expr, std::span<const Jet<LocalField>>(z)).expanded(m, 3);
}

/// Taylor model (order `order`) of `expr` near `point`; same as jet_lift.
inline LocalField local_field(const Expression& expr, const PhasePoint& point, int order) {
  return jet_lift(expr, point, order);
}

/// Default central-difference step for a derivative of the given order.
inline double fd_default_step(std::size_t order) {
  switch (order) {
    case 0:
    case 1:
      return 1e-6;
    case 2:
      return 1e-4;
    default:
      return 1e-3;
  }
}

namespace detail {

inline long double nested_central_difference(const Expression& expr, std::vector<long double>& z,
                                             std::span<const std::size_t> vars, long double h) {
  if (vars.empty()) return evaluate<long double>(expr, std::span<const long double>(z));
  const std::size_t a = vars.back();
  const auto rest = vars.first(vars.size() - 1);
  const long double z0 = z[a];
  const long double step = h * std::max(1.0L, std::fabs(z0));
  z[a] = z0 + step;
  const long double up = nested_central_difference(expr, z, rest, h);
  z[a] = z0 - step;
  const long double down = nested_central_difference(expr, z, rest, h);
  z[a] = z0;
  return (up - down) / (2.0L * step);
}

}  // namespace detail

/// Central finite-difference estimate of d^|vars| expr / dz_vars at `point`.
/// Steps default to 1e-6, 1e-4, 1e-3 for orders 1, 2, 3, scaled by
/// max(1, |z_a|). Mixed and repeated indices use the tensor product of
/// one-dimensional central stencils. The stencil is evaluated in long double
/// so that roundoff stays well below the O(h^2) truncation error at order 3.
inline double fd_oracle(const Expression& expr, const PhasePoint& point, std::span<const std::size_t> vars,
                        double step = 0.0) {
  if (vars.size() > 3) throw OrderError("finite-difference oracle supports orders up to 3");
  const std::vector<double> coords = point.coordinates();
  for (auto a : vars) {
    if (a >= coords.size()) throw DimensionError("multi-index variable out of range");
  }
  std::vector<long double> z(coords.begin(), coords.end());
  const double h = step > 0.0 ? step : fd_default_step(vars.size());
  return static_cast<double>(detail::nested_central_difference(expr, z, vars, h));
}

inline double fd_oracle(const Expression& expr, const PhasePoint& point, std::initializer_list<std::size_t> vars,
                        double step = 0.0) {
  return fd_oracle(expr, point, std::span<const std::size_t>(vars.begin(), vars.size()), step);
}

/// max(relative, absolute-floor) comparison used by every oracle check.
inline bool close_enough(double actual, double expected, double rel, double abs_floor) {
  return std::fabs(actual - expected) <= std::max(rel * std::fabs(expected), abs_floor);
}

}  // namespace hamgeo
