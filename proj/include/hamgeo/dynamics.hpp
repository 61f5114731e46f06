#pragma once

// Hamilton's equations: fixed-step RK4 integration, drift of watched
// quantities, and pointwise checks of the geodesic property and of the
// agreement between the Berwald connection and the dynamical derivative.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hamgeo/differentiation.hpp"
#include "hamgeo/errors.hpp"
#include "hamgeo/expr.hpp"
#include "hamgeo/geometry.hpp"
#include "hamgeo/phase_point.hpp"
#include "hamgeo/vector_field.hpp"

namespace hamgeo {

/// Any state component beyond this magnitude aborts the integration.
inline constexpr double kBlowUpBound = 1e12;

/// (dx/dt, dp/dt) = (dH/dp, -dH/dx).
inline std::vector<double> hamilton_rhs(const HamiltonianSpec& H, const PhasePoint& state) {
  if (H.dim != state.dim()) throw DimensionError("Hamiltonian and state dimensions differ");
  const Jet3 h = jet_lift(H.expr, state, 1);
  const std::size_t n = state.dim();
  std::vector<double> out(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = h.partial({n + i});
    out[n + i] = -h.partial({i});
  }
  return out;
}

struct NamedExpression {
  std::string name;
  Expression expr;
};

struct Trajectory {
  enum class Status { complete, blow_up, domain_error };

  std::vector<double> times;
  std::vector<PhasePoint> states;
  /// Sampled quantities in registration order; "H" comes first.
  std::vector<std::pair<std::string, std::vector<double>>> samples;
  Status status = Status::complete;
  std::string message;

  bool ok() const noexcept { return status == Status::complete; }
};

inline std::string to_string(Trajectory::Status s) {
  switch (s) {
    case Trajectory::Status::complete: return "complete";
    case Trajectory::Status::blow_up: return "blow-up";
    case Trajectory::Status::domain_error: return "domain-error";
  }
  return "unknown";
}

/// Classical fixed-step Runge-Kutta on Hamilton's equations. H and every
/// watched expression are sampled at each accepted state. A domain error or
/// a state beyond kBlowUpBound stops the run and flags the trajectory.
inline Trajectory integrate_rk4(const HamiltonianSpec& H, const PhasePoint& start, double dt, long steps,
                                const std::vector<NamedExpression>& watch = {}) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive and finite");
  if (steps <= 0) throw std::invalid_argument("steps must be positive");
  if (H.dim != start.dim()) throw DimensionError("Hamiltonian and start dimensions differ");
  for (const auto& w : watch) check_dimension(w.expr, start.dim());

  Trajectory traj;
  traj.samples.push_back({"H", {}});
  for (const auto& w : watch) traj.samples.push_back({w.name, {}});

  auto record = [&](double t, const PhasePoint& s) {
    std::vector<double> vals{evaluate(H.expr, s)};
    for (const auto& w : watch) vals.push_back(evaluate(w.expr, s));
    traj.times.push_back(t);
    traj.states.push_back(s);
    for (std::size_t k = 0; k < vals.size(); ++k) traj.samples[k].second.push_back(vals[k]);
  };

  const std::size_t m = 2 * start.dim();
  auto shifted = [&](const std::vector<double>& z, const std::vector<double>& k, double h) {
    std::vector<double> out(m);
    for (std::size_t a = 0; a < m; ++a) out[a] = z[a] + h * k[a];
    return PhasePoint::from_coordinates(out);
  };
  auto out_of_bounds = [&](const std::vector<double>& z) {
    return std::any_of(z.begin(), z.end(), [](double v) { return !std::isfinite(v) || std::fabs(v) > kBlowUpBound; });
  };

  try {
    record(0.0, start);
  } catch (const std::domain_error& e) {
    traj.status = Trajectory::Status::domain_error;
    traj.message = std::string("at t=0: ") + e.what();
    return traj;
  }

  std::vector<double> z = start.coordinates();
  std::vector<double> carry(m, 0.0);
  for (long step = 1; step <= steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    try {
      const PhasePoint s = PhasePoint::from_coordinates(z);
      const auto k1 = hamilton_rhs(H, s);
      const auto k2 = hamilton_rhs(H, shifted(z, k1, 0.5 * dt));
      const auto k3 = hamilton_rhs(H, shifted(z, k2, 0.5 * dt));
      const auto k4 = hamilton_rhs(H, shifted(z, k3, dt));
      // Compensated summation of the increments keeps roundoff from
      // accumulating over long runs.
      std::vector<double> next(m), next_carry(m);
      for (std::size_t a = 0; a < m; ++a) {
        const double inc = dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]) - carry[a];
        next[a] = z[a] + inc;
        next_carry[a] = (next[a] - z[a]) - inc;
      }
      if (out_of_bounds(next)) {
        traj.status = Trajectory::Status::blow_up;
        traj.message = "state left the bound " + detail::format_number(kBlowUpBound) + " at t=" + detail::format_number(t);
        return traj;
      }
      z = std::move(next);
      carry = std::move(next_carry);
      record(t, PhasePoint::from_coordinates(z));
    } catch (const std::domain_error& e) {
      traj.status = Trajectory::Status::domain_error;
      traj.message = "at t=" + detail::format_number(t) + ": " + e.what();
      return traj;
    } catch (const std::invalid_argument& e) {
      traj.status = Trajectory::Status::blow_up;
      traj.message = "at t=" + detail::format_number(t) + ": " + e.what();
      return traj;
    }
  }
  return traj;
}

struct Drift {
  std::string name;
  double initial = 0.0;
  double max_drift = 0.0;  ///< max_t |Q(t) - Q(0)|
};

inline std::vector<Drift> drift_report(const Trajectory& traj) {
  if (traj.states.empty()) throw std::invalid_argument("drift report of an empty trajectory");
  std::vector<Drift> out;
  for (const auto& [name, series] : traj.samples) {
    Drift d{name, series.front(), 0.0};
    for (double v : series) d.max_drift = std::max(d.max_drift, std::fabs(v - d.initial));
    out.push_back(d);
  }
  return out;
}

/// nabla rho_H = h[rho_H, h rho_H] + v[rho_H, v rho_H] in the natural basis.
inline std::vector<double> geodesic_residual(const LocalGeometry& geo) {
  return geo.covariant_derivative(geo.rho()).values();
}

inline std::vector<double> geodesic_residual(const HamiltonianSpec& H, const PhasePoint& point) {
  return geodesic_residual(LocalGeometry(H, point, 1));
}

/// Horizontality bound required before comparing D_rho Y with nabla Y.
inline constexpr double kBerwaldHypothesisTol = 1e-8;

/// D_{rho_H} Y from the Berwald coefficients, in the natural basis. Y is
/// split as Y^j delta/delta x^j + Yv_j d/dp_j with Yv_j = Y_j - Y^k N_kj and
/// rho_H as xi^i delta/delta x^i + (chi_i - xi^k N_ki) d/dp_i.
inline std::vector<double> berwald_derivative(const LocalGeometry& geo, const VectorFieldModel& Y) {
  const std::size_t n = geo.dim();
  const BerwaldCoefficients B = berwald_coefficients(geo);
  const Matrix N = geo.connection().values();
  const VectorFieldModel vy = geo.vertical(Y);
  const HorizontalityCheck hc = is_horizontal(geo, 0.0);

  std::vector<double> h(n, 0.0);  // coefficients on delta/delta x^s
  std::vector<double> v(n, 0.0);  // coefficients on d/dp_s
  for (std::size_t i = 0; i < n; ++i) {
    const double a = geo.xi()[i].value();
    const double b = hc.residual[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double yh = Y.x(j).value();
      const double yv = vy.p(j).value();
      h[j] += a * geo.delta_x(Y.x(j), i).value() + b * Y.x(j).derivative(geo.P(i)).value();
      v[j] += a * geo.delta_x(vy.p(j), i).value() + b * vy.p(j).derivative(geo.P(i)).value();
      for (std::size_t s = 0; s < n; ++s) {
        h[s] += a * yh * B.hh(i, j, s) + b * yh * B.vh(i, j, s);
        v[s] += a * yv * B.hv(i, j, s) + b * yv * B.vv(i, j, s);
      }
    }
  }
  std::vector<double> out(2 * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    out[s] = h[s];
    out[n + s] += v[s];
    for (std::size_t k = 0; k < n; ++k) out[n + k] += h[s] * N(s, k);
  }
  return out;
}

/// D_{rho_H} Y - nabla Y. Refuses (HypothesisError) unless rho_H is
/// horizontal at the point to kBerwaldHypothesisTol.
inline std::vector<double> berwald_vs_nabla(const LocalGeometry& geo, const VectorFieldModel& Y) {
  const HorizontalityCheck hc = is_horizontal(geo, kBerwaldHypothesisTol);
  if (!hc.horizontal) {
    throw HypothesisError("rho_H is not horizontal at the point (max residual " + detail::format_number(hc.max_residual) +
                          ", bound " + detail::format_number(kBerwaldHypothesisTol) + ")");
  }
  const std::vector<double> d = berwald_derivative(geo, Y);
  const std::vector<double> nab = geo.covariant_derivative(Y).values();
  std::vector<double> out;
  for (std::size_t a = 0; a < d.size(); ++a) out.push_back(d[a] - nab[a]);
  return out;
}

inline std::vector<double> berwald_vs_nabla(const HamiltonianSpec& H, const VectorFieldSpec& Y,
                                            const PhasePoint& point) {
  if (H.dim != point.dim() || Y.dim != point.dim()) throw DimensionError("Hamiltonian, field and point dimensions differ");
  return berwald_vs_nabla(LocalGeometry(H, point, 1), model(Y, point, 1));
}

}  // namespace hamgeo
