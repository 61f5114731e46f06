#pragma once

// Symmetry notions for a Hamiltonian system, each evaluated as a pointwise
// residual: infinitesimal and natural symmetries, Newtonoid fields, Noether
// symmetries, the invariant equation, the star product and momentum maps.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hamgeo/differentiation.hpp"
#include "hamgeo/errors.hpp"
#include "hamgeo/expr.hpp"
#include "hamgeo/geometry.hpp"
#include "hamgeo/phase_point.hpp"
#include "hamgeo/vector_field.hpp"

namespace hamgeo {

/// Sign in front of p_j dX^j/dx^i in the momentum part of the complete lift.
enum class LiftSign { minus, plus };

inline std::string to_string(LiftSign s) { return s == LiftSign::minus ? "minus" : "plus"; }

namespace detail {

inline void check_dims(const HamiltonianSpec& H, std::size_t field_dim, const PhasePoint& point) {
  if (H.dim != point.dim() || field_dim != point.dim()) {
    throw DimensionError("Hamiltonian, field and point dimensions differ");
  }
}

}  // namespace detail

/// [rho_H, X] at the point.
inline std::vector<double> symmetry_residual(const HamiltonianSpec& H, const VectorFieldSpec& X,
                                             const PhasePoint& point) {
  detail::check_dims(H, X.dim, point);
  return bracket(hamiltonian_field_model(H, point, 1), model(X, point, 1)).values();
}

/// J_H [rho_H, X]: g_ij times the x-part of the bracket, as n vertical components.
inline std::vector<double> newtonoid_residual(const LocalGeometry& geo, const VectorFieldModel& X) {
  const VectorFieldModel b = bracket(geo.rho(), X);
  const VectorFieldModel jb = geo.tangent_structure(b);
  std::vector<double> out;
  for (std::size_t j = 0; j < geo.dim(); ++j) out.push_back(jb.p(j).value());
  return out;
}

inline std::vector<double> newtonoid_residual(const HamiltonianSpec& H, const VectorFieldSpec& X,
                                              const PhasePoint& point) {
  detail::check_dims(H, X.dim, point);
  return newtonoid_residual(LocalGeometry(H, point, 1), model(X, point, 1));
}

/// The Newtonoid field with the given x-components, as a local model:
///   Y_k = g_ki (rho_H(X^i) - X^j d2H/dp_i dx^j).
/// The result is one order below min(geometry order, order of `xs`).
inline VectorFieldModel newtonoid_lift(const LocalGeometry& geo, const std::vector<LocalField>& xs) {
  const std::size_t n = geo.dim();
  if (xs.size() != n) throw DimensionError("Newtonoid lift needs n position components");
  std::vector<LocalField> w;
  for (std::size_t i = 0; i < n; ++i) {
    LocalField s = geo.along_rho(xs[i]);
    for (std::size_t j = 0; j < n; ++j) s = s - xs[j] * geo.h_px()(i, j);
    w.push_back(s);
  }
  VectorFieldModel out{n, {}};
  for (std::size_t i = 0; i < n; ++i) out.components.push_back(xs[i]);
  for (std::size_t k = 0; k < n; ++k) {
    LocalField y(0.0);
    for (std::size_t i = 0; i < n; ++i) y = y + geo.g_lower()(k, i) * w[i];
    out.components.push_back(y);
  }
  return out;
}

/// Values (X^i, Y_k) of the Newtonoid lift at the point.
inline std::vector<double> newtonoid_lift(const HamiltonianSpec& H, const std::vector<Expression>& xs,
                                          const PhasePoint& point) {
  detail::check_dims(H, xs.size(), point);
  const LocalGeometry geo(H, point, 0);
  std::vector<LocalField> fields;
  for (const auto& e : xs) fields.push_back(jet_lift(e, point, 1));
  return newtonoid_lift(geo, fields).values();
}

/// v(X) - J_H(nabla X), momentum components. Needs geometry order >= 1 and
/// a model of X of order >= 1.
inline std::vector<double> newtonoid_invariant_residual(const LocalGeometry& geo, const VectorFieldModel& X) {
  const VectorFieldModel vx = geo.vertical(X);
  const VectorFieldModel jn = geo.tangent_structure(geo.covariant_derivative(X));
  std::vector<double> out;
  for (std::size_t j = 0; j < geo.dim(); ++j) out.push_back(vx.p(j).value() - jn.p(j).value());
  return out;
}

inline std::vector<double> newtonoid_invariant_residual(const HamiltonianSpec& H, const VectorFieldSpec& X,
                                                        const PhasePoint& point) {
  detail::check_dims(H, X.dim, point);
  return newtonoid_invariant_residual(LocalGeometry(H, point, 1), model(X, point, 1));
}

/// Lift of a base field to T*M: X^i d/dx^i -/+ p_j dX^j/dx^i d/dp_i.
inline VectorFieldSpec complete_lift(const BaseVectorFieldSpec& Xt, LiftSign sign = LiftSign::minus) {
  const std::size_t n = Xt.dim;
  std::vector<Expression> ps;
  for (std::size_t i = 1; i <= n; ++i) {
    Expression sum = Expression::constant(0.0);
    bool empty = true;
    for (std::size_t j = 1; j <= n; ++j) {
      const Expression d = differentiate(Xt.components[j - 1], x_var(i));
      if (d.is_constant(0.0)) continue;
      const Expression p = Expression::variable(p_var(j));
      const Expression term = d.is_constant(1.0) ? p : p * d;
      sum = empty ? term : sum + term;
      empty = false;
    }
    ps.push_back(empty || sign == LiftSign::plus ? sum : -sum);
  }
  return VectorFieldSpec(n, Xt.components, std::move(ps));
}

/// Components of L_X theta for theta = p_j dx^j, ordered (dx^1..dx^n, dp_1..dp_n):
///   (L_X theta)_{x^i} = Y_i + p_j dX^j/dx^i,  (L_X theta)_{p_i} = p_j dX^j/dp_i.
inline std::vector<double> liouville_lie_derivative(const VectorFieldSpec& X, const PhasePoint& point) {
  if (X.dim != point.dim()) throw DimensionError("vector field and point dimensions differ");
  const std::size_t n = X.dim;
  const VectorFieldModel m = model(X, point, 1);
  std::vector<double> out(2 * n, 0.0);
  for (std::size_t a = 0; a < 2 * n; ++a) {
    double s = a < n ? m.p(a).value() : 0.0;
    for (std::size_t j = 0; j < n; ++j) s += point.p()[j] * m.x(j).partial({a});
    out[a] = s;
  }
  return out;
}

/// [rho_H, X^{C*}] for the complete lift of a base field.
inline std::vector<double> natural_symmetry_residual(const HamiltonianSpec& H, const BaseVectorFieldSpec& Xt,
                                                     const PhasePoint& point, LiftSign sign = LiftSign::minus) {
  return symmetry_residual(H, complete_lift(Xt, sign), point);
}

struct NoetherResidual {
  Eigen::MatrixXd lie_omega;  ///< L_X omega, 2n x 2n, antisymmetric
  double x_of_h = 0.0;        ///< X(H)
};

/// Canonical symplectic matrix of omega = dp_i ^ dx^i in the (x, p) ordering:
/// omega(u, v) = u^T S v.
inline Eigen::MatrixXd symplectic_matrix(std::size_t n) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    S(i, n + i) = -1.0;
    S(n + i, i) = 1.0;
  }
  return S;
}

/// L_X omega = A^T S + S A with A(c, a) = dX^c/dz_a, and X(H).
inline NoetherResidual noether_residual(const HamiltonianSpec& H, const VectorFieldModel& X, const PhasePoint& point) {
  const std::size_t m = 2 * X.dim;
  Eigen::MatrixXd A(m, m);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t a = 0; a < m; ++a) A(c, a) = X.components[c].partial({a});
  const Eigen::MatrixXd S = symplectic_matrix(X.dim);
  NoetherResidual out;
  out.lie_omega = A.transpose() * S + S * A;
  const Jet3 h = jet_lift(H.expr, point, 1);
  for (std::size_t a = 0; a < m; ++a) out.x_of_h += X.components[a].value() * h.partial({a});
  return out;
}

inline NoetherResidual noether_residual(const HamiltonianSpec& H, const VectorFieldSpec& X, const PhasePoint& point) {
  detail::check_dims(H, X.dim, point);
  return noether_residual(H, model(X, point, 1), point);
}

/// nabla^2 V + R_ij X^i with V_j = g_ij X^i and (nabla V)_i = rho_H(V_i) + V_j nabla_v(j, i).
/// Only the x-components of X enter. Needs geometry order >= 2 and `xs` of order >= 2.
inline std::vector<double> invariant_equation_residual(const LocalGeometry& geo, const std::vector<LocalField>& xs) {
  const std::size_t n = geo.dim();
  if (xs.size() != n) throw DimensionError("invariant equation needs n position components");
  auto nabla = [&](const std::vector<LocalField>& v) {
    std::vector<LocalField> out;
    for (std::size_t i = 0; i < n; ++i) {
      LocalField s = geo.along_rho(v[i]);
      for (std::size_t j = 0; j < n; ++j) s = s + v[j] * geo.nabla_v(j, i);
      out.push_back(s);
    }
    return out;
  };
  std::vector<LocalField> v;
  for (std::size_t j = 0; j < n; ++j) {
    LocalField s(0.0);
    for (std::size_t i = 0; i < n; ++i) s = s + geo.g_lower()(i, j) * xs[i];
    v.push_back(s);
  }
  const std::vector<LocalField> second = nabla(nabla(v));
  const Matrix R = jacobi_endomorphism(geo);
  std::vector<double> out;
  for (std::size_t j = 0; j < n; ++j) {
    double s = second[j].value();
    for (std::size_t i = 0; i < n; ++i) s += R(i, j) * xs[i].value();
    out.push_back(s);
  }
  return out;
}

inline std::vector<double> invariant_equation_residual(const HamiltonianSpec& H, const VectorFieldSpec& X,
                                                       const PhasePoint& point) {
  detail::check_dims(H, X.dim, point);
  const LocalGeometry geo(H, point, 2);
  std::vector<LocalField> xs;
  for (const auto& e : X.x_components) xs.push_back(jet_lift(e, point, 2));
  return invariant_equation_residual(geo, xs);
}

/// f * X = f X + f J_H[rho_H, X] + rho_H(f) J_H X.
inline std::vector<double> star_product(const Expression& f, const VectorFieldSpec& X, const HamiltonianSpec& H,
                                        const PhasePoint& point) {
  detail::check_dims(H, X.dim, point);
  check_dimension(f, point.dim());
  const LocalGeometry geo(H, point, 1);
  const VectorFieldModel xm = model(X, point, 1);
  const LocalField fj = jet_lift(f, point, 1);
  const double fv = fj.value();
  const double rho_f = geo.along_rho(fj).value();
  const std::vector<double> xv = xm.values();
  const std::vector<double> jb = geo.tangent_structure(bracket(geo.rho(), xm)).values();
  const std::vector<double> jx = geo.tangent_structure(xm).values();
  std::vector<double> out;
  for (std::size_t a = 0; a < xv.size(); ++a) out.push_back(fv * xv[a] + fv * jb[a] + rho_f * jx[a]);
  return out;
}

/// X^{C*}(H).
inline double invariant_vector_field_check(const HamiltonianSpec& H, const BaseVectorFieldSpec& Xt,
                                           const PhasePoint& point, LiftSign sign = LiftSign::minus) {
  detail::check_dims(H, Xt.dim, point);
  const VectorFieldModel lift = model(complete_lift(Xt, sign), point, 0);
  const Jet3 h = jet_lift(H.expr, point, 1);
  double s = 0.0;
  for (std::size_t a = 0; a < 2 * point.dim(); ++a) s += lift.components[a].value() * h.partial({a});
  return s;
}

/// theta(X^{C*}) = p_i X^i(x).
inline double momentum_map(const BaseVectorFieldSpec& Xt, const PhasePoint& point) {
  if (Xt.dim != point.dim()) throw DimensionError("base field and point dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < Xt.dim; ++i) s += point.p()[i] * evaluate(Xt.components[i], point);
  return s;
}

struct NoetherFromConservation {
  VectorFieldSpec field;          ///< X^i = df/dp_i, Y_i = -df/dx^i
  std::vector<double> values;     ///< field components at the point
  NoetherResidual residual;       ///< L_X omega and X(H)
  double rho_f = 0.0;             ///< rho_H(f)
  double conservation_value = 0;  ///< f - theta(X)
  double rho_conservation = 0;    ///< rho_H(f - theta(X))
};

/// The field X with i_X omega = -df and its Noether diagnostics.
inline NoetherFromConservation noether_from_conservation(const Expression& f, const HamiltonianSpec& H,
                                                         const PhasePoint& point) {
  detail::check_dims(H, H.dim, point);
  check_dimension(f, point.dim());
  const std::size_t n = point.dim();
  std::vector<Expression> xs, ps;
  for (std::size_t i = 1; i <= n; ++i) {
    xs.push_back(differentiate(f, p_var(i)));
    ps.push_back(-differentiate(f, x_var(i)));
  }
  NoetherFromConservation out{VectorFieldSpec(n, std::move(xs), std::move(ps)), {}, {}, 0.0, 0.0, 0.0};
  const VectorFieldModel xm = model(out.field, point, 1);
  out.values = xm.values();
  out.residual = noether_residual(H, xm, point);

  const VectorFieldModel rho = hamiltonian_field_model(H, point, 1);
  const LocalField fj = jet_lift(f, point, 2);
  out.rho_f = rho.apply(fj).value();
  // theta(X) = p_i df/dp_i, built from the order-2 jet so rho_H can act on it.
  LocalField theta(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    theta = theta + Jet3::variable(2 * n, 1, n + i, point.p()[i]) * fj.derivative(n + i);
  }
  const LocalField c = fj.truncated(1) - theta;
  out.conservation_value = c.value();
  out.rho_conservation = rho.apply(c).value();
  return out;
}

}  // namespace hamgeo
