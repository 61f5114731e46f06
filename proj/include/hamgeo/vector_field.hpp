#pragma once

// Vector fields on the cotangent bundle: expression-level specs and their
// local Taylor models at a point.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hamgeo/differentiation.hpp"
#include "hamgeo/errors.hpp"
#include "hamgeo/expr.hpp"
#include "hamgeo/phase_point.hpp"

namespace hamgeo {

/// X = X^i(x,p) d/dx^i + Y_i(x,p) d/dp_i.
struct VectorFieldSpec {
  std::size_t dim = 0;
  std::vector<Expression> x_components;
  std::vector<Expression> p_components;

  VectorFieldSpec() = default;
  VectorFieldSpec(std::size_t dim_, std::vector<Expression> xs, std::vector<Expression> ps)
      : dim(dim_), x_components(std::move(xs)), p_components(std::move(ps)) {
    if (dim == 0 || x_components.size() != dim || p_components.size() != dim) {
      throw DimensionError("vector field needs n position and n momentum components");
    }
    for (const auto& e : x_components) check_dimension(e, dim);
    for (const auto& e : p_components) check_dimension(e, dim);
  }

  static VectorFieldSpec parse(std::size_t dim, const std::vector<std::string>& xs,
                               const std::vector<std::string>& ps) {
    std::vector<Expression> ex, ep;
    for (const auto& s : xs) ex.push_back(hamgeo::parse(s, dim));
    for (const auto& s : ps) ep.push_back(hamgeo::parse(s, dim));
    return VectorFieldSpec(dim, std::move(ex), std::move(ep));
  }

  static VectorFieldSpec zero(std::size_t dim) {
    return VectorFieldSpec(dim, std::vector<Expression>(dim), std::vector<Expression>(dim));
  }

  /// Unit coordinate field d/dz_a in the phase ordering.
  static VectorFieldSpec coordinate(std::size_t dim, std::size_t a) {
    VectorFieldSpec v = zero(dim);
    (a < dim ? v.x_components[a] : v.p_components[a - dim]) = Expression::constant(1.0);
    return v;
  }

  const Expression& component(std::size_t a) const {
    return a < dim ? x_components[a] : p_components[a - dim];
  }
};

/// A vector field X^i(x) d/dx^i on the base manifold.
struct BaseVectorFieldSpec {
  std::size_t dim = 0;
  std::vector<Expression> components;

  BaseVectorFieldSpec() = default;
  BaseVectorFieldSpec(std::size_t dim_, std::vector<Expression> comps)
      : dim(dim_), components(std::move(comps)) {
    if (dim == 0 || components.size() != dim) {
      throw DimensionError("base vector field needs n components");
    }
    for (const auto& e : components) {
      check_dimension(e, dim);
      if (depends_on_momenta(e)) throw DimensionError("base vector field components must not use momenta");
    }
  }

  static BaseVectorFieldSpec parse(std::size_t dim, const std::vector<std::string>& comps) {
    std::vector<Expression> e;
    for (const auto& s : comps) e.push_back(hamgeo::parse(s, dim));
    return BaseVectorFieldSpec(dim, std::move(e));
  }
};

/// Local Taylor model of the 2n components of a vector field near a point.
struct VectorFieldModel {
  std::size_t dim = 0;
  std::vector<LocalField> components;

  const LocalField& x(std::size_t i) const { return components[i]; }
  const LocalField& p(std::size_t i) const { return components[dim + i]; }

  int order() const {
    int o = LocalField::kConstantOrder;
    for (const auto& c : components) o = std::min(o, c.order());
    return o;
  }

  std::vector<double> values() const {
    std::vector<double> v;
    for (const auto& c : components) v.push_back(c.value());
    return v;
  }

  /// Directional derivative X(f) = X^a df/dz_a; one order below min(X, f).
  LocalField apply(const LocalField& f) const {
    LocalField out(0.0);
    for (std::size_t a = 0; a < components.size(); ++a) out = out + components[a] * f.derivative(a);
    return out;
  }
};

inline VectorFieldModel model(const VectorFieldSpec& spec, const PhasePoint& point, int order) {
  if (spec.dim != point.dim()) throw DimensionError("vector field and point dimensions differ");
  VectorFieldModel m{spec.dim, {}};
  for (std::size_t a = 0; a < 2 * spec.dim; ++a) m.components.push_back(jet_lift(spec.component(a), point, order));
  return m;
}

/// rho_H as expressions: dH/dp_i d/dx^i - dH/dx^i d/dp_i.
inline VectorFieldSpec hamiltonian_field_spec(const HamiltonianSpec& H) {
  std::vector<Expression> xs, ps;
  for (std::size_t i = 1; i <= H.dim; ++i) {
    xs.push_back(differentiate(H.expr, p_var(i)));
    ps.push_back(-differentiate(H.expr, x_var(i)));
  }
  return VectorFieldSpec(H.dim, std::move(xs), std::move(ps));
}

/// Local model of rho_H taken from the jet of H (order <= 2).
inline VectorFieldModel hamiltonian_field_model(const HamiltonianSpec& H, const PhasePoint& point, int order) {
  if (H.dim != point.dim()) throw DimensionError("Hamiltonian and point dimensions differ");
  const std::size_t n = point.dim();
  const Jet<LocalField> h = jet_lift_nested(H.expr, point, order);
  VectorFieldModel m{n, {}};
  for (std::size_t i = 0; i < n; ++i) m.components.push_back(h.partial({n + i}).expanded(2 * n, order));
  for (std::size_t i = 0; i < n; ++i) m.components.push_back(-h.partial({i}).expanded(2 * n, order));
  return m;
}

/// Coordinate bracket [X, Y]^A = X(Y^A) - Y(X^A).
inline VectorFieldModel bracket(const VectorFieldModel& X, const VectorFieldModel& Y) {
  if (X.dim != Y.dim) throw DimensionError("bracket of fields with different dimensions");
  VectorFieldModel out{X.dim, {}};
  for (std::size_t a = 0; a < 2 * X.dim; ++a) {
    out.components.push_back(X.apply(Y.components[a]) - Y.apply(X.components[a]));
  }
  return out;
}

/// Evaluated components of [X, Y] at `point`.
inline std::vector<double> lie_bracket(const VectorFieldSpec& X, const VectorFieldSpec& Y, const PhasePoint& point) {
  if (X.dim != Y.dim) throw DimensionError("bracket of fields with different dimensions");
  return bracket(model(X, point, 1), model(Y, point, 1)).values();
}

}  // namespace hamgeo
