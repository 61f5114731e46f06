#pragma once

// The twelve acceptance criteria, run against the built-in planar example
// and the free particle. Shared by `hamgeo selftest` and the acceptance test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hamgeo/builtin.hpp"
#include "hamgeo/differentiation.hpp"
#include "hamgeo/dynamics.hpp"
#include "hamgeo/expr.hpp"
#include "hamgeo/geometry.hpp"
#include "hamgeo/sampling.hpp"
#include "hamgeo/symmetry.hpp"
#include "hamgeo/vector_field.hpp"

namespace hamgeo::acceptance {

struct Options {
  std::uint64_t seed = kDefaultSeed;
  double tol_scale = 1.0;
  LiftSign lift_sign = LiftSign::minus;
};

/// One measured quantity of a criterion: its worst value over the sample
/// set and the bound it is judged against.
struct Part {
  std::string label;
  double worst = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct Criterion {
  int id = 0;
  std::string title;
  std::vector<Part> parts;
  std::string note;

  bool pass() const {
    return !parts.empty() && std::all_of(parts.begin(), parts.end(), [](const Part& p) { return p.pass; });
  }
};

namespace detail {

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double d : v) m = std::max(m, std::fabs(d));
  return m;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Running maximum of a non-negative error measure.
struct Worst {
  double value = 0.0;
  void operator()(double v) {
    if (!(v <= value)) value = std::isnan(v) ? INFINITY : v;
  }
};

/// |actual - expected| / max(1, |expected|): relative for large entries,
/// absolute for entries near zero.
inline double scaled_error(double actual, double expected) {
  return std::fabs(actual - expected) / std::max(1.0, std::fabs(expected));
}

inline Part below(std::string label, double worst, double bound) {
  return {std::move(label), worst, bound, worst <= bound};
}

inline Part within(std::string label, double value, double lo, double hi) {
  return {std::move(label), value, hi, value >= lo && value <= hi};
}

/// Runs `body`, turning an escaped exception into a failing part.
inline void guarded(Criterion& c, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    c.parts.push_back({std::string("exception: ") + e.what(), INFINITY, 0.0, false});
  }
}

struct PlanarClosedForm {
  Matrix N;
  Tensor3 R;
  Matrix g_upper, g_lower;
};

inline PlanarClosedForm planar_closed_form(const PhasePoint& P) {
  const double x1 = P.x()[0], p1 = P.p()[0], p2 = P.p()[1];
  PlanarClosedForm c{Matrix(2, 2), Tensor3(2), Matrix(2, 2), Matrix(2, 2)};
  const double u = p1 * x1 + p2;
  c.N << -u, x1 * u, x1 * u, -x1 * (p1 * (1 + x1 * x1) + p2 * x1);
  c.R(0, 1, 0) = 2 * p1 * x1 + p2;
  c.R(1, 0, 0) = -c.R(0, 1, 0);
  c.R(1, 0, 1) = p1 + 2 * p1 * x1 * x1 + p2 * x1;
  c.R(0, 1, 1) = -c.R(1, 0, 1);
  c.g_upper << 1 + x1 * x1, x1, x1, 1;
  c.g_lower << 1, -x1, -x1, 1 + x1 * x1;
  return c;
}

}  // namespace detail

inline std::vector<PhasePoint> planar_samples(const Options& o) {
  return sample_points(SampleBox::default_box(), kDefaultSampleCount, o.seed);
}

inline Criterion closed_form_oracle(const Options& o) {
  Criterion c{1, "closed-form connection and curvature of the planar example", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::planar_hamiltonian();
    detail::Worst wn, wr;
    for (const auto& P : planar_samples(o)) {
      const LocalGeometry geo(H, P, 1);
      const auto ref = detail::planar_closed_form(P);
      const Matrix N = connection(geo);
      const Tensor3 R = curvature(geo);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          wn(detail::scaled_error(N(i, j), ref.N(i, j)));
          for (int k = 0; k < 2; ++k) wr(detail::scaled_error(R(i, j, k), ref.R(i, j, k)));
        }
    }
    c.parts.push_back(detail::below("N vs reference closed form (scaled error)", wn.value, 1e-9 * o.tol_scale));
    c.parts.push_back(detail::below("R vs reference closed form (scaled error)", wr.value, 1e-9 * o.tol_scale));
  });
  c.note = "the curvature of this N is R121 = p1 x1 + p2, R212 = p1 + p1 x1^2 + p2 x1";
  return c;
}

inline Criterion metric_oracle(const Options& o) {
  Criterion c{2, "metric equals the closed-form Hessian and inverts", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::planar_hamiltonian();
    detail::Worst wg, wl, wi;
    for (const auto& P : planar_samples(o)) {
      const auto m = metric(H, P);
      const auto ref = detail::planar_closed_form(P);
      wg(detail::max_abs(Matrix(m.upper - ref.g_upper)));
      wl(detail::max_abs(Matrix(m.lower - ref.g_lower)));
      wi(detail::max_abs(Matrix(m.upper * m.lower - Matrix::Identity(2, 2))));
    }
    c.parts.push_back(detail::below("|g^ij - closed-form Hessian|", wg.value, 1e-12 * o.tol_scale));
    c.parts.push_back(detail::below("|g_ij - closed-form inverse|", wl.value, 1e-12 * o.tol_scale));
    c.parts.push_back(detail::below("|g^ij g_jk - I|", wi.value, 1e-12 * o.tol_scale));
  });
  return c;
}

inline Criterion horizontality_and_geodesics(const Options& o) {
  Criterion c{3, "rho_H horizontal and geodesic", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::planar_hamiltonian();
    detail::Worst wh, wg;
    for (const auto& P : planar_samples(o)) {
      const LocalGeometry geo(H, P, 1);
      wh(is_horizontal(geo, 1e-10).max_residual);
      wg(detail::max_abs(geodesic_residual(geo)));
    }
    c.parts.push_back(detail::below("horizontality residual", wh.value, 1e-10 * o.tol_scale));
    c.parts.push_back(detail::below("|nabla rho_H|", wg.value, 1e-8 * o.tol_scale));
  });
  return c;
}

inline Criterion jacobi_cross_route(const Options& o) {
  Criterion c{4, "Jacobi endomorphism: direct formula vs curvature contraction", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::planar_hamiltonian();
    detail::Worst w;
    for (const auto& P : planar_samples(o)) {
      const LocalGeometry geo(H, P, 1);
      w(detail::max_abs(Matrix(jacobi_endomorphism(geo) - jacobi_via_curvature(geo))));
    }
    c.parts.push_back(detail::below("|R_jk - R_ijk xi^i|", w.value, 1e-8 * o.tol_scale));
  });
  return c;
}

inline Criterion nabla_J(const Options& o) {
  Criterion c{5, "nabla J_H vanishes exactly at the canonical connection", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::planar_hamiltonian();
    detail::Worst w0, w1;
    for (const auto& P : planar_samples(o)) {
      const LocalGeometry geo(H, P, 0);
      const Matrix N = connection(geo);
      w0(detail::max_abs(nabla_J_residual(geo, N)));
      const Matrix shifted = N + 0.1 * Matrix::Identity(2, 2);
      w1(detail::max_abs(Matrix(nabla_J_residual(geo, shifted) - 0.2 * Matrix::Identity(2, 2))));
    }
    c.parts.push_back(detail::below("|nabla J| at canonical N", w0.value, 1e-9 * o.tol_scale));
    c.parts.push_back(detail::below("|nabla J(N + 0.1 I) - 0.2 I|", w1.value, 1e-12 * o.tol_scale));
  });
  return c;
}

inline Criterion berwald_equals_nabla(const Options& o) {
  Criterion c{6, "Berwald derivative along rho_H equals the dynamical derivative", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::planar_hamiltonian();
    const std::vector<std::pair<std::string, VectorFieldSpec>> fields = {
        {"d/dp1", VectorFieldSpec::coordinate(2, 2)},
        {"d/dp2", VectorFieldSpec::coordinate(2, 3)},
        {"d/dx1", VectorFieldSpec::coordinate(2, 0)},
        {"rho_H", hamiltonian_field_spec(H)},
    };
    std::vector<detail::Worst> w(fields.size());
    for (const auto& P : planar_samples(o)) {
      const LocalGeometry geo(H, P, 1);
      for (std::size_t f = 0; f < fields.size(); ++f) {
        w[f](detail::max_abs(berwald_vs_nabla(geo, model(fields[f].second, P, 1))));
      }
    }
    for (std::size_t f = 0; f < fields.size(); ++f) {
      c.parts.push_back(detail::below("|D Y - nabla Y|, Y = " + fields[f].first, w[f].value, 1e-8 * o.tol_scale));
    }
  });
  return c;
}

inline Criterion symmetry_suite(const Options& o) {
  Criterion c{7, "symmetry of p2 d/dx2, Noether property of rho_H, invariant equation", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::planar_hamiltonian();
    const auto X = VectorFieldSpec::parse(2, {"0", "p2"}, {"0", "0"});
    const auto rho = hamiltonian_field_spec(H);
    detail::Worst wb, wn, wh, wi;
    for (const auto& P : planar_samples(o)) {
      wb(detail::max_abs(symmetry_residual(H, X, P)));
      const auto nr = noether_residual(H, rho, P);
      wn(detail::max_abs(nr.lie_omega));
      wh(std::fabs(nr.x_of_h));
      wi(detail::max_abs(invariant_equation_residual(H, X, P)));
    }
    c.parts.push_back(detail::below("|[rho_H, p2 d/dx2]|", wb.value, 1e-12 * o.tol_scale));
    c.parts.push_back(detail::below("|L_rho omega|", wn.value, 1e-10 * o.tol_scale));
    c.parts.push_back(detail::below("|rho_H(H)|", wh.value, 1e-10 * o.tol_scale));
    c.parts.push_back(detail::below("|invariant equation| for p2 d/dx2", wi.value, 1e-8 * o.tol_scale));
  });
  return c;
}

inline Criterion conservation_chain(const Options& o) {
  Criterion c{8, "conserved momentum p2: Noether field, momentum map, RK4 drift", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::planar_hamiltonian();
    const Expression f = parse("p2", 2);
    const auto base = BaseVectorFieldSpec::parse(2, {"0", "1"});
    detail::Worst wx, wr, wm;
    for (const auto& P : planar_samples(o)) {
      const auto nf = noether_from_conservation(f, H, P);
      const std::vector<double> expected{0.0, 1.0, 0.0, 0.0};
      for (std::size_t a = 0; a < 4; ++a) wx(std::fabs(nf.values[a] - expected[a]));
      wr(std::max({detail::max_abs(nf.residual.lie_omega), std::fabs(nf.residual.x_of_h), std::fabs(nf.rho_f),
                   std::fabs(nf.rho_conservation)}));
      wm(std::fabs(momentum_map(base, P) - P.p()[1]));
    }
    c.parts.push_back(detail::below("|X - d/dx2| from f = p2", wx.value, 1e-12 * o.tol_scale));
    c.parts.push_back(detail::below("Noether residuals of that X", wr.value, 1e-10 * o.tol_scale));
    c.parts.push_back(detail::below("|momentum_map(d/dx2) - p2|", wm.value, 1e-12 * o.tol_scale));

    const auto start = builtin::planar_start();
    const auto run = integrate_rk4(H, start, 1e-3, 10000, {{"p2", f}});
    const auto half = integrate_rk4(H, start, 5e-4, 20000);
    if (!run.ok() || !half.ok()) {
      c.parts.push_back({"trajectory: " + run.message + half.message, INFINITY, 0.0, false});
      return;
    }
    const auto drift = drift_report(run);
    const double h_drift = drift[0].max_drift;
    const double h_half = drift_report(half)[0].max_drift;
    c.parts.push_back(detail::below("p2 drift, dt=1e-3, 1e4 steps", drift[1].max_drift, 1e-12 * o.tol_scale));
    c.parts.push_back(detail::below("H drift, dt=1e-3, 1e4 steps", h_drift, 1e-8 * o.tol_scale));
    c.parts.push_back(detail::within("H drift ratio dt/(dt/2) in [12, 20]", h_drift / h_half, 12.0, 20.0));
  });
  return c;
}

/// Polynomial base fields used for the Liouville-form check.
inline std::vector<BaseVectorFieldSpec> polynomial_base_fields() {
  const std::vector<std::pair<const char*, const char*>> comps = {
      {"1", "0"},          {"0", "1"},       {"x1", "0"},       {"x2", "0"},
      {"x1^2", "x1*x2"},   {"x2^2-x1", "3*x1"}, {"x1*x2", "x1^3"}, {"1+x1+x2", "x2^2"},
      {"x1^2*x2", "2-x2^3"}, {"0.5*x1^3-x2", "x1*x2^2"},
  };
  std::vector<BaseVectorFieldSpec> out;
  for (const auto& [a, b] : comps) out.push_back(BaseVectorFieldSpec::parse(2, {a, b}));
  return out;
}

inline Criterion complete_lift_invariance(const Options& o) {
  Criterion c{9, "complete lifts preserve the Liouville form", {}, {}};
  detail::guarded(c, [&] {
    auto points = planar_samples(o);
    points.resize(50);
    detail::Worst w, w_flipped;
    const LiftSign flipped = o.lift_sign == LiftSign::minus ? LiftSign::plus : LiftSign::minus;
    for (const auto& Xt : polynomial_base_fields()) {
      const auto lift = complete_lift(Xt, o.lift_sign);
      const auto other = complete_lift(Xt, flipped);
      for (const auto& P : points) {
        w(detail::max_abs(liouville_lie_derivative(lift, P)));
        w_flipped(detail::max_abs(liouville_lie_derivative(other, P)));
      }
    }
    c.parts.push_back(
        detail::below("|L_{X^C*} theta|, sign " + to_string(o.lift_sign), w.value, 1e-10 * o.tol_scale));
    c.note = "opposite sign (" + to_string(flipped) + ") gives max |L theta| = " +
             hamgeo::detail::format_number(w_flipped.value);
  });
  return c;
}

inline Criterion free_particle_suite(const Options& o) {
  Criterion c{10, "free particle: flat geometry, constant fields are symmetries", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::free_particle();
    const std::vector<BaseVectorFieldSpec> constants = {
        BaseVectorFieldSpec::parse(2, {"1", "0"}),
        BaseVectorFieldSpec::parse(2, {"0", "1"}),
        BaseVectorFieldSpec::parse(2, {"2", "-3"}),
    };
    detail::Worst wgeo, wsym;
    for (const auto& P : planar_samples(o)) {
      const LocalGeometry geo(H, P, 2);
      const auto nc = nabla_coefficients(geo);
      const auto bc = berwald_coefficients(geo);
      wgeo(std::max({detail::max_abs(connection(geo)), curvature(geo).max_abs(),
                     detail::max_abs(jacobi_endomorphism(geo)), detail::max_abs(jacobi_via_curvature(geo)),
                     detail::max_abs(nc.horizontal), detail::max_abs(nc.vertical), bc.hh.max_abs(), bc.hv.max_abs(),
                     bc.vh.max_abs(), bc.vv.max_abs()}));
      for (const auto& Xt : constants) {
        const auto lift = complete_lift(Xt, o.lift_sign);
        const auto m = model(lift, P, 2);
        const auto nr = noether_residual(H, m, P);
        std::vector<LocalField> xs{m.x(0), m.x(1)};
        wsym(std::max({detail::max_abs(bracket(geo.rho(), m).values()), detail::max_abs(newtonoid_residual(geo, m)),
                       detail::max_abs(nr.lie_omega), std::fabs(nr.x_of_h),
                       std::fabs(invariant_vector_field_check(H, Xt, P, o.lift_sign)),
                       detail::max_abs(invariant_equation_residual(geo, xs)),
                       detail::max_abs(liouville_lie_derivative(lift, P))}));
      }
    }
    c.parts.push_back(detail::below("max |N, R, Jacobi, nabla, Berwald| (exact zero)", wgeo.value, 0.0));
    c.parts.push_back(detail::below("symmetry residuals of constant base fields", wsym.value, 1e-12 * o.tol_scale));
  });
  return c;
}

inline Criterion jet_engine(const Options& o) {
  Criterion c{11, "order-3 jets of H agree with finite differences", {}, {}};
  detail::guarded(c, [&] {
    const auto H = builtin::planar_hamiltonian();
    auto points = planar_samples(o);
    points.resize(50);
    std::vector<std::vector<std::size_t>> indices{{}};
    for (std::size_t a = 0; a < 4; ++a) {
      indices.push_back({a});
      for (std::size_t b = a; b < 4; ++b) {
        indices.push_back({a, b});
        for (std::size_t d = b; d < 4; ++d) indices.push_back({a, b, d});
      }
    }
    const double rel = 1e-5 * o.tol_scale;
    const double floor = 1e-7 * o.tol_scale;
    detail::Worst w;
    for (const auto& P : points) {
      const Jet3 h = jet_lift(H.expr, P, 3);
      for (const auto& idx : indices) {
        const double jet = h.partial(idx);
        const double fd = fd_oracle(H.expr, P, idx);
        w(std::fabs(jet - fd) / std::max(rel * std::fabs(fd), floor));
      }
    }
    c.parts.push_back(detail::below("|jet - fd| / max(1e-5 |fd|, 1e-7)", w.value, 1.0));
  });
  return c;
}

inline Criterion pmp_builder(const Options& o) {
  Criterion c{12, "PMP reduction of the control system reproduces H", {}, {}};
  detail::guarded(c, [&] {
    const auto built = pmp_hamiltonian(builtin::planar_control_system());
    const auto H = builtin::planar_hamiltonian();
    detail::Worst w;
    for (const auto& P : planar_samples(o)) {
      const double a = evaluate(built.expr, P);
      const double b = evaluate(H.expr, P);
      w(std::fabs(a - b) / std::max(std::fabs(b), 1e-300));
    }
    c.parts.push_back(detail::below("relative |H_pmp - H|", w.value, 1e-12 * o.tol_scale));
  });
  return c;
}

inline std::vector<Criterion> run_all(const Options& o = {}) {
  return {closed_form_oracle(o),    metric_oracle(o),          horizontality_and_geodesics(o),
          jacobi_cross_route(o),    nabla_J(o),                berwald_equals_nabla(o),
          symmetry_suite(o),        conservation_chain(o),     complete_lift_invariance(o),
          free_particle_suite(o),   jet_engine(o),             pmp_builder(o)};
}

/// "PASS [n] title" or "FAIL [n] title: first failing part".
inline std::string summary_line(const Criterion& c) {
  std::string s = (c.pass() ? "PASS" : "FAIL");
  s += " [" + std::to_string(c.id) + "] " + c.title;
  for (const auto& p : c.parts) {
    if (!p.pass) {
      s += ": " + p.label + " = " + hamgeo::detail::format_number(p.worst) + " (bound " +
           hamgeo::detail::format_number(p.bound) + ")";
      break;
    }
  }
  return s;
}

}  // namespace hamgeo::acceptance
