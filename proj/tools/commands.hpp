#pragma once

// The hamgeo subcommands. Each appends human-readable text and JSON blocks
// to a Report; main() decides where they go.

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hamgeo/acceptance.hpp"
#include "hamgeo/dynamics.hpp"
#include "hamgeo/geometry.hpp"
#include "hamgeo/symmetry.hpp"
#include "manifest.hpp"

namespace hamgeo::cli {

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kManifestError = 2, kRegularityError = 3 };

struct Settings {
  std::optional<std::uint64_t> seed;  ///< overrides the manifest seed
  double tol_scale = 1.0;
};

struct Report {
  Json manifest;
  Json conventions;
  Json geometry = Json::array();
  Json symmetry = Json::array();
  Json trajectories = Json::array();
  Json verdicts = Json::array();
  std::string text;
  bool failed = false;

  Json to_json() const {
    Json j;
    j["manifest"] = manifest;
    j["conventions"] = conventions;
    j["geometry"] = geometry;
    j["symmetry"] = symmetry;
    j["trajectories"] = trajectories;
    j["verdicts"] = verdicts;
    return j;
  }
};

/// A regularity failure at a named point.
class PointRegularityError : public std::runtime_error {
 public:
  PointRegularityError(const std::string& point, const RegularityError& e)
      : std::runtime_error("point " + point + ": " + e.what()) {}
};

namespace detail {

inline std::string num(double v) { return hamgeo::detail::format_number(v == 0.0 ? 0.0 : v); }

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const Tensor3& t) {
  Json out = Json::array();
  for (std::size_t i = 0; i < t.dim(); ++i) {
    Json a = Json::array();
    for (std::size_t j = 0; j < t.dim(); ++j) {
      Json b = Json::array();
      for (std::size_t k = 0; k < t.dim(); ++k) b.push_back(t(i, j, k));
      a.push_back(std::move(b));
    }
    out.push_back(std::move(a));
  }
  return out;
}

inline Json to_json(const PhasePoint& p) { return Json{{"x", p.x()}, {"p", p.p()}}; }

inline std::string vec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + ")";
}

inline std::string point_text(const PhasePoint& p) { return "x=" + vec(p.x()) + " p=" + vec(p.p()); }

inline std::string matrix_text(const std::string& title, const Matrix& m) {
  std::string s = "  " + title + ":\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += "    [";
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + num(m(i, j));
    s += "]\n";
  }
  return s;
}

inline std::string tensor_text(const std::string& title, const Tensor3& t) {
  std::string s = "  " + title + ":\n";
  for (std::size_t i = 0; i < t.dim(); ++i)
    for (std::size_t j = 0; j < t.dim(); ++j) {
      s += fmt::format("    [{}][{}][:] = [", i + 1, j + 1);
      for (std::size_t k = 0; k < t.dim(); ++k) s += (k ? ", " : "") + num(t(i, j, k));
      s += "]\n";
    }
  return s;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double d : v) m = std::max(m, std::fabs(d));
  return m;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Worst value of a residual over a sample set, with where it occurred.
struct SampleMax {
  double value = 0.0;
  std::size_t index = 0;
  void add(double v, std::size_t i) {
    if (std::isnan(v)) v = INFINITY;
    if (v > value || (i == 0 && value == 0.0)) {
      value = v;
      index = i;
    }
  }
};

inline void verdict(Report& r, const std::string& check, const std::string& subject, double value, double tol,
                    const std::string& text_label, std::optional<PhasePoint> worst_point = std::nullopt) {
  const bool pass = value <= tol;
  if (!pass) r.failed = true;
  Json v{{"check", check}, {"subject", subject}, {"pass", pass}, {"value", value}, {"tolerance", tol}};
  if (worst_point) v["worst_point"] = to_json(*worst_point);
  r.verdicts.push_back(std::move(v));
  r.text += fmt::format("  {}: {} ({} = {}, tol {})\n", check, pass ? "PASS" : "FAIL", text_label, num(value), num(tol));
}

inline std::vector<PhasePoint> samples(const Manifest& m, const Settings& s) {
  return sample_points(m.box, m.sample_count, s.seed.value_or(m.seed));
}

inline LocalGeometry geometry_at(const HamiltonianSpec& H, const PhasePoint& P, int order, const std::string& label) {
  try {
    return LocalGeometry(H, P, order);
  } catch (const RegularityError& e) {
    throw PointRegularityError(label, e);
  }
}

inline std::string sample_label(std::size_t i, const PhasePoint& P) {
  return "sample #" + std::to_string(i) + " (" + point_text(P) + ")";
}

/// Local model of a manifest field; `geo` must carry order + 1.
inline VectorFieldModel field_model(const Manifest& m, const FieldEntry& f, const LocalGeometry& geo, int order) {
  const PhasePoint& P = geo.point();
  switch (f.kind) {
    case FieldEntry::Kind::full: return model(f.full, P, order);
    case FieldEntry::Kind::base: return model(complete_lift(f.base), P, order);
    case FieldEntry::Kind::hamiltonian: return hamiltonian_field_model(m.hamiltonian, P, order);
    case FieldEntry::Kind::newtonoid: {
      std::vector<LocalField> xs;
      for (const auto& e : f.positions) xs.push_back(jet_lift(e, P, order + 1));
      return newtonoid_lift(geo, xs);
    }
  }
  throw ManifestError("fields", "unknown field kind");
}

}  // namespace detail

inline Json conventions(const Manifest& m, const Settings& s) {
  return Json{
      {"variable_ordering", "(x1..xn, p1..pn); vector components listed in this order"},
      {"matrix_index", "first index is the row"},
      {"connection", "N[i][j] = N_ij; delta/delta x^i = d/dx^i + N_ij d/dp_j"},
      {"curvature", "R3[i][j][k] = R_ijk = delta N_jk/delta x^i - delta N_ik/delta x^j"},
      {"jacobi", "Phi[j][k] = R_jk from the direct formula; Phi_contraction[i][j] = R_kij xi^k"},
      {"nabla_h", "nabla_h[j][i]: coefficient of delta/delta x^i in nabla delta/delta x^j"},
      {"nabla_v", "nabla_v[j][i] = d2H/dp_j dx^i + N_ik g^kj: coefficient of d/dp_i in nabla d/dp_j"},
      {"nabla_metric",
       "vertical metric g^jl delta p_j (x) delta p_l: rho_H(g^jl) - g^kl nabla_v[j][k] - g^jk nabla_v[l][k]"},
      {"berwald", "hh[i][j][s], hv[i][j][r], vh[i][j][s], vv[i][j][s] with t_ij = g_ij"},
      {"complete_lift_sign", to_string(LiftSign::minus)},
      {"complete_lift", "X^i d/dx^i - p_j dX^j/dx^i d/dp_i"},
      {"symplectic_form", "omega = dp_i ^ dx^i, matrix [[0, -I], [I, 0]]"},
      {"liouville_form", "theta = p_i dx^i"},
      {"newtonoid_residual", "g_ij [rho_H, X]^i (x-part), n vertical components"},
      {"tolerance_scale", s.tol_scale},
      {"seed", s.seed.value_or(m.seed)},
      {"sample_count", m.sample_count},
  };
}

/// Full pointwise geometry at the named points (all points when empty).
inline void cmd_report(const Manifest& m, const std::vector<std::string>& names, const Settings& s, Report& r) {
  const Tolerances tol = m.tolerances.scaled(s.tol_scale);
  std::vector<const PointEntry*> pts;
  if (names.empty()) {
    for (const auto& p : m.points) pts.push_back(&p);
  } else {
    for (const auto& n : names) pts.push_back(&m.point(n));
  }
  if (pts.empty()) throw ManifestError("points", "manifest defines no points");
  const std::size_t n = m.dim;
  for (const PointEntry* pe : pts) {
    const auto geo = detail::geometry_at(m.hamiltonian, pe->point, 1, pe->name);
    const GeometryReport g = geometry_report(m.hamiltonian, pe->point, tol.horizontal);
    const auto geodesic = geodesic_residual(geo);

    r.geometry.push_back(Json{
        {"point", pe->name},
        {"x", pe->point.x()},
        {"p", pe->point.p()},
        {"rcond", g.metric.rcond},
        {"g_upper", detail::to_json(g.metric.upper)},
        {"g_lower", detail::to_json(g.metric.lower)},
        {"xi", g.xi},
        {"chi", g.chi},
        {"N", detail::to_json(g.connection)},
        {"R3", detail::to_json(g.curvature)},
        {"Phi", detail::to_json(g.jacobi)},
        {"Phi_contraction", detail::to_json(g.jacobi_contraction)},
        {"nabla_h", detail::to_json(g.nabla.horizontal)},
        {"nabla_v", detail::to_json(g.nabla.vertical)},
        {"berwald",
         {{"hh", detail::to_json(g.berwald.hh)},
          {"hv", detail::to_json(g.berwald.hv)},
          {"vh", detail::to_json(g.berwald.vh)},
          {"vv", detail::to_json(g.berwald.vv)}}},
        {"horizontal",
         {{"flag", g.horizontal.horizontal},
          {"residual", g.horizontal.residual},
          {"max_residual", g.horizontal.max_residual},
          {"tolerance", g.horizontal.tolerance}}},
        {"nabla_J", detail::to_json(g.nabla_J)},
        {"nabla_metric", detail::to_json(g.nabla_metric)},
        {"geodesic_residual", geodesic},
    });

    r.text += fmt::format("== geometry at {}: {}\n", pe->name, detail::point_text(pe->point));
    r.text += "  rcond(g^ij) = " + detail::num(g.metric.rcond) + "\n";
    r.text += detail::matrix_text("g^ij", g.metric.upper);
    r.text += detail::matrix_text("g_ij", g.metric.lower);
    r.text += "  xi  = " + detail::vec(g.xi) + "\n";
    r.text += "  chi = " + detail::vec(g.chi) + "\n";
    r.text += detail::matrix_text("N_ij", g.connection);
    r.text += detail::tensor_text("R_ijk", g.curvature);
    r.text += detail::matrix_text("Jacobi R_jk (direct)", g.jacobi);
    r.text += detail::matrix_text("Jacobi R_kij xi^k (contraction)", g.jacobi_contraction);
    r.text += detail::matrix_text("nabla_h", g.nabla.horizontal);
    r.text += detail::matrix_text("nabla_v", g.nabla.vertical);
    r.text += detail::tensor_text("Berwald HH", g.berwald.hh);
    r.text += detail::tensor_text("Berwald HV", g.berwald.hv);
    r.text += detail::tensor_text("Berwald VH", g.berwald.vh);
    r.text += detail::tensor_text("Berwald VV", g.berwald.vv);
    r.text += fmt::format("  horizontal: {} (residual {})\n", g.horizontal.horizontal ? "yes" : "no",
                          detail::vec(g.horizontal.residual));
    r.text += detail::matrix_text("nabla J residual", g.nabla_J);
    r.text += detail::matrix_text("nabla g residual", g.nabla_metric);
    r.text += "  nabla rho_H = " + detail::vec(geodesic) + "\n";

    const std::string subject = pe->name;
    detail::verdict(r, "metric inverse", subject,
                    detail::max_abs(Matrix(g.metric.upper * g.metric.lower - Matrix::Identity(n, n))),
                    tol.metric_inverse, "max |g^ij g_jk - I|");
    detail::verdict(r, "nabla J = 0", subject, detail::max_abs(g.nabla_J), tol.nabla_J, "max |nabla J|");
    detail::verdict(r, "nabla g = 0", subject, detail::max_abs(g.nabla_metric), tol.nabla_metric, "max |nabla g|");
    if (g.horizontal.horizontal) {
      detail::verdict(r, "Jacobi routes agree", subject,
                      detail::max_abs(Matrix(g.jacobi - g.jacobi_contraction)), tol.jacobi,
                      "max |direct - contraction|");
      detail::verdict(r, "geodesic", subject, detail::max_abs(geodesic), tol.geodesic, "max |nabla rho_H|");
    } else {
      r.text += "  (rho_H not horizontal here: Jacobi cross-route and geodesic checks not applicable)\n";
    }
  }
}

/// Symmetry notions for the named fields over the sample set.
inline void cmd_symmetry(const Manifest& m, const std::vector<std::string>& names, const Settings& s, Report& r) {
  const Tolerances tol = m.tolerances.scaled(s.tol_scale);
  std::vector<const FieldEntry*> fields;
  if (names.empty()) {
    for (const auto& f : m.fields) fields.push_back(&f);
  } else {
    for (const auto& n : names) fields.push_back(&m.field(n));
  }
  if (fields.empty()) throw ManifestError("fields", "manifest defines no fields");
  const auto pts = detail::samples(m, s);
  const std::size_t n = m.dim;

  for (const FieldEntry* f : fields) {
    const bool base = f->kind == FieldEntry::Kind::base;
    detail::SampleMax sym, newt, omega, xh, inv, liou;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto& P = pts[k];
      const auto geo = detail::geometry_at(m.hamiltonian, P, 2, detail::sample_label(k, P));
      const VectorFieldModel X = detail::field_model(m, *f, geo, 1);
      sym.add(detail::max_abs(bracket(geo.rho(), X).values()), k);
      newt.add(detail::max_abs(newtonoid_residual(geo, X)), k);
      const auto nr = noether_residual(m.hamiltonian, X, P);
      omega.add(detail::max_abs(nr.lie_omega), k);
      xh.add(std::fabs(nr.x_of_h), k);
      std::vector<LocalField> xs;
      if (f->kind == FieldEntry::Kind::newtonoid) {
        for (const auto& e : f->positions) xs.push_back(jet_lift(e, P, 2));
      } else {
        const VectorFieldModel X2 = detail::field_model(m, *f, geo, 2);
        for (std::size_t i = 0; i < n; ++i) xs.push_back(X2.x(i));
      }
      inv.add(detail::max_abs(invariant_equation_residual(geo, xs)), k);
      if (base) liou.add(detail::max_abs(liouville_lie_derivative(complete_lift(f->base), P)), k);
    }

    r.text += fmt::format("== symmetry of field {} ({}) over {} samples\n", f->name, to_string(f->kind), pts.size());
    const std::string bracket_check = base ? "natural symmetry" : "infinitesimal symmetry";
    detail::verdict(r, bracket_check, f->name, sym.value, tol.symmetry, "max |[rho_H, X]|", pts[sym.index]);
    detail::verdict(r, "Newtonoid", f->name, newt.value, tol.newtonoid, "max |J_H [rho_H, X]|", pts[newt.index]);
    const double noether = std::max(omega.value, xh.value);
    const bool noether_pass = noether <= tol.noether;
    if (!noether_pass) r.failed = true;
    r.verdicts.push_back(Json{{"check", "Noether"},
                              {"subject", f->name},
                              {"pass", noether_pass},
                              {"value", noether},
                              {"tolerance", tol.noether},
                              {"lie_omega_max", omega.value},
                              {"x_of_h_max", xh.value},
                              {"worst_point", detail::to_json(pts[omega.value >= xh.value ? omega.index : xh.index])}});
    r.text += fmt::format("  Noether: {} (max |L_X omega| = {}, max |X(H)| = {}, tol {})\n",
                          noether_pass ? "PASS" : "FAIL", detail::num(omega.value), detail::num(xh.value),
                          detail::num(tol.noether));
    detail::verdict(r, "invariant equation", f->name, inv.value, tol.invariant_equation,
                    "max |nabla^2(g X) + Phi(X)|", pts[inv.index]);
    if (base) {
      detail::verdict(r, "invariant vector field", f->name, xh.value, tol.noether, "max |X^C*(H)|", pts[xh.index]);
      detail::verdict(r, "Liouville form preserved", f->name, liou.value, tol.liouville, "max |L_X theta|",
                      pts[liou.index]);
    }

    Json block{{"field", f->name},
               {"kind", to_string(f->kind)},
               {"samples", pts.size()},
               {"residuals",
                {{"symmetry", {{"max", sym.value}, {"worst_point", detail::to_json(pts[sym.index])}}},
                 {"newtonoid", {{"max", newt.value}, {"worst_point", detail::to_json(pts[newt.index])}}},
                 {"lie_omega", {{"max", omega.value}, {"worst_point", detail::to_json(pts[omega.index])}}},
                 {"x_of_h", {{"max", xh.value}, {"worst_point", detail::to_json(pts[xh.index])}}},
                 {"invariant_equation", {{"max", inv.value}, {"worst_point", detail::to_json(pts[inv.index])}}}}}};
    if (base) {
      block["residuals"]["liouville"] = {{"max", liou.value}, {"worst_point", detail::to_json(pts[liou.index])}};
    }
    r.symmetry.push_back(std::move(block));
  }
}

/// Complete lifts of base fields, Newtonoid lifts of the others.
inline void cmd_lift(const Manifest& m, const std::vector<std::string>& names, const Settings& s, Report& r) {
  const Tolerances tol = m.tolerances.scaled(s.tol_scale);
  std::vector<const FieldEntry*> fields;
  if (names.empty()) {
    for (const auto& f : m.fields) fields.push_back(&f);
  } else {
    for (const auto& n : names) fields.push_back(&m.field(n));
  }
  if (fields.empty()) throw ManifestError("fields", "manifest defines no fields");
  const auto pts = detail::samples(m, s);
  const std::size_t n = m.dim;

  for (const FieldEntry* f : fields) {
    Json block{{"field", f->name}, {"kind", to_string(f->kind)}};
    if (f->kind == FieldEntry::Kind::base) {
      const auto lift = complete_lift(f->base);
      Json xs = Json::array(), ps = Json::array();
      r.text += fmt::format("== complete lift of {} (sign {})\n", f->name, to_string(LiftSign::minus));
      for (std::size_t i = 0; i < n; ++i) {
        xs.push_back(print(lift.x_components[i]));
        r.text += fmt::format("  d/dx{}: {}\n", i + 1, print(lift.x_components[i]));
      }
      for (std::size_t i = 0; i < n; ++i) {
        ps.push_back(print(lift.p_components[i]));
        r.text += fmt::format("  d/dp{}: {}\n", i + 1, print(lift.p_components[i]));
      }
      block["lift"] = {{"x", xs}, {"p", ps}};
      Json at = Json::array();
      for (const auto& pe : m.points) {
        const double mm = momentum_map(f->base, pe.point);
        const auto vals = model(lift, pe.point, 0).values();
        at.push_back(Json{{"point", pe.name}, {"components", vals}, {"momentum_map", mm}});
        r.text += fmt::format("  at {}: components {}, momentum map p_i X^i = {}\n", pe.name, detail::vec(vals),
                              detail::num(mm));
      }
      block["points"] = at;
      detail::SampleMax liou;
      for (std::size_t k = 0; k < pts.size(); ++k) liou.add(detail::max_abs(liouville_lie_derivative(lift, pts[k])), k);
      block["liouville_max"] = liou.value;
      detail::verdict(r, "Liouville form preserved", f->name, liou.value, tol.liouville, "max |L_X theta|",
                      pts[liou.index]);
    } else {
      r.text += fmt::format("== Newtonoid lift of {} ({})\n", f->name, to_string(f->kind));
      Json at = Json::array();
      for (const auto& pe : m.points) {
        const auto geo = detail::geometry_at(m.hamiltonian, pe.point, 1, pe.name);
        const VectorFieldModel src = detail::field_model(m, *f, geo, 0);
        std::vector<LocalField> xs;
        if (f->kind == FieldEntry::Kind::newtonoid) {
          for (const auto& e : f->positions) xs.push_back(jet_lift(e, pe.point, 1));
        } else {
          const VectorFieldModel X1 = detail::field_model(m, *f, detail::geometry_at(m.hamiltonian, pe.point, 2, pe.name), 1);
          for (std::size_t i = 0; i < n; ++i) xs.push_back(X1.x(i));
        }
        const auto vals = newtonoid_lift(geo, xs).values();
        at.push_back(Json{{"point", pe.name}, {"components", vals}, {"field_components", src.values()}});
        r.text += fmt::format("  at {}: lift {}, field {}\n", pe.name, detail::vec(vals), detail::vec(src.values()));
      }
      block["points"] = at;
      detail::SampleMax newt, inv;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto& P = pts[k];
        const auto geo = detail::geometry_at(m.hamiltonian, P, 2, detail::sample_label(k, P));
        std::vector<LocalField> xs;
        const VectorFieldModel X2 = f->kind == FieldEntry::Kind::newtonoid ? VectorFieldModel{} : detail::field_model(m, *f, geo, 2);
        for (std::size_t i = 0; i < n; ++i) {
          xs.push_back(f->kind == FieldEntry::Kind::newtonoid ? jet_lift(f->positions[i], P, 2) : X2.x(i));
        }
        const VectorFieldModel lifted = newtonoid_lift(geo, xs);
        newt.add(detail::max_abs(newtonoid_residual(geo, lifted)), k);
        inv.add(detail::max_abs(newtonoid_invariant_residual(geo, lifted)), k);
      }
      block["newtonoid_max"] = newt.value;
      block["newtonoid_invariant_max"] = inv.value;
      detail::verdict(r, "lift is Newtonoid", f->name, newt.value, tol.newtonoid, "max |J_H [rho_H, X]|",
                      pts[newt.index]);
      detail::verdict(r, "v(X) = J_H(nabla X)", f->name, inv.value, tol.newtonoid, "max |v(X) - J_H(nabla X)|",
                      pts[inv.index]);
    }
    r.symmetry.push_back(std::move(block));
  }
}

/// RK4 runs with drift tables.
inline void cmd_integrate(const Manifest& m, const std::vector<std::string>& names, const Settings& s, Report& r) {
  const Tolerances tol = m.tolerances.scaled(s.tol_scale);
  std::vector<const RunEntry*> runs;
  if (names.empty()) {
    for (const auto& run : m.runs) runs.push_back(&run);
  } else {
    for (const auto& n : names) runs.push_back(&m.run(n));
  }
  if (runs.empty()) throw ManifestError("runs", "manifest defines no runs");

  for (const RunEntry* run : runs) {
    const Trajectory traj = integrate_rk4(m.hamiltonian, run->start, run->dt, run->steps, run->watch);
    std::vector<Expression> exprs{m.hamiltonian.expr};
    for (const auto& w : run->watch) exprs.push_back(w.expr);
    std::vector<double> max_rho(exprs.size(), 0.0);
    for (const auto& state : traj.states) {
      const VectorFieldModel rho = hamiltonian_field_model(m.hamiltonian, state, 0);
      for (std::size_t q = 0; q < exprs.size(); ++q) {
        const double v = rho.apply(jet_lift(exprs[q], state, 1)).value();
        max_rho[q] = std::max(max_rho[q], std::isnan(v) ? INFINITY : std::fabs(v));
      }
    }

    const auto drift = drift_report(traj);
    r.text += fmt::format("== run {}: dt {}, {} steps, status {}\n", run->name, detail::num(run->dt), run->steps,
                          to_string(traj.status));
    if (!traj.message.empty()) r.text += "  " + traj.message + "\n";
    r.text += fmt::format("  {:<12} {:>24} {:>24} {:>24} {:>24}\n", "quantity", "initial", "final", "max drift",
                          "max |rho_H(Q)|");
    Json rows = Json::array();
    for (std::size_t q = 0; q < drift.size(); ++q) {
      const double final_value = traj.samples[q].second.back();
      r.text += fmt::format("  {:<12} {:>24} {:>24} {:>24} {:>24}\n", drift[q].name, detail::num(drift[q].initial),
                            detail::num(final_value), detail::num(drift[q].max_drift), detail::num(max_rho[q]));
      rows.push_back(Json{{"name", drift[q].name},
                          {"initial", drift[q].initial},
                          {"final", final_value},
                          {"max_drift", drift[q].max_drift},
                          {"max_rho", max_rho[q]}});
    }
    r.trajectories.push_back(Json{{"run", run->name},
                                  {"start", detail::to_json(run->start)},
                                  {"dt", run->dt},
                                  {"steps", run->steps},
                                  {"status", to_string(traj.status)},
                                  {"message", traj.message},
                                  {"final_time", traj.times.back()},
                                  {"final_state", detail::to_json(traj.states.back())},
                                  {"drift", rows}});

    if (!traj.ok()) {
      r.failed = true;
      r.verdicts.push_back(Json{{"check", "trajectory complete"},
                                {"subject", run->name},
                                {"pass", false},
                                {"status", to_string(traj.status)},
                                {"message", traj.message}});
      r.text += fmt::format("  trajectory complete: FAIL ({})\n", traj.message);
      continue;
    }
    detail::verdict(r, "H drift", run->name, drift[0].max_drift, tol.h_drift, "max |H(t) - H(0)|");
    for (std::size_t q = 1; q < drift.size(); ++q) {
      if (max_rho[q] < tol.conservation) {
        detail::verdict(r, "conserved quantity drift", run->name + "/" + drift[q].name, drift[q].max_drift,
                        tol.conserved_drift, "max |Q(t) - Q(0)|");
      }
    }
  }
}

/// The acceptance suite; ignores the manifest.
inline void cmd_selftest(const Settings& s, Report& r) {
  acceptance::Options o;
  if (s.seed) o.seed = *s.seed;
  o.tol_scale = s.tol_scale;
  for (const auto& c : acceptance::run_all(o)) {
    const bool pass = c.pass();
    if (!pass) r.failed = true;
    Json parts = Json::array();
    for (const auto& p : c.parts) {
      parts.push_back(Json{{"label", p.label}, {"worst", p.worst}, {"bound", p.bound}, {"pass", p.pass}});
    }
    Json v{{"check", "acceptance " + std::to_string(c.id)}, {"subject", c.title}, {"pass", pass}, {"parts", parts}};
    if (!c.note.empty()) v["note"] = c.note;
    r.verdicts.push_back(std::move(v));
    r.text += acceptance::summary_line(c) + "\n";
  }
}

}  // namespace hamgeo::cli
