#pragma once

// JSON manifests for the hamgeo CLI. See manifests/README.md for the schema.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hamgeo/builtin.hpp"
#include "hamgeo/dynamics.hpp"
#include "hamgeo/expr.hpp"
#include "hamgeo/phase_point.hpp"
#include "hamgeo/sampling.hpp"
#include "hamgeo/vector_field.hpp"
#include "json.hpp"

namespace hamgeo::cli {

using Json = nlohmann::ordered_json;

class ManifestError : public std::runtime_error {
 public:
  ManifestError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what) {}
};

struct Tolerances {
  double symmetry = 1e-10;
  double newtonoid = 1e-9;
  double noether = 1e-10;
  double invariant_equation = 1e-8;
  double liouville = 1e-10;
  double horizontal = 1e-10;
  double geodesic = 1e-8;
  double jacobi = 1e-9;
  double nabla_J = 1e-9;
  double nabla_metric = 1e-8;
  double metric_inverse = 1e-12;
  double h_drift = 1e-8;
  double conserved_drift = 1e-8;
  /// rho_H(f) below this along a run marks f as conserved.
  double conservation = 1e-12;

  Tolerances scaled(double s) const {
    Tolerances t = *this;
    for (double* v : t.all()) *v *= s;
    return t;
  }

  std::vector<double*> all() {
    return {&symmetry, &newtonoid, &noether,      &invariant_equation, &liouville, &horizontal,    &geodesic,
            &jacobi,   &nabla_J,   &nabla_metric, &metric_inverse,     &h_drift,   &conserved_drift, &conservation};
  }

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> n = {
        "symmetry", "newtonoid", "noether",      "invariant_equation", "liouville", "horizontal",      "geodesic",
        "jacobi",   "nabla_J",   "nabla_metric", "metric_inverse",     "h_drift",   "conserved_drift", "conservation"};
    return n;
  }
};

struct FieldEntry {
  enum class Kind { full, base, hamiltonian, newtonoid };
  std::string name;
  Kind kind = Kind::full;
  VectorFieldSpec full;               ///< kind full
  BaseVectorFieldSpec base;           ///< kind base
  std::vector<Expression> positions;  ///< kind newtonoid: the X^i
};

inline std::string to_string(FieldEntry::Kind k) {
  switch (k) {
    case FieldEntry::Kind::full: return "full";
    case FieldEntry::Kind::base: return "base";
    case FieldEntry::Kind::hamiltonian: return "hamiltonian";
    case FieldEntry::Kind::newtonoid: return "newtonoid";
  }
  return "unknown";
}

struct PointEntry {
  std::string name;
  PhasePoint point;
};

struct RunEntry {
  std::string name;
  PhasePoint start;
  double dt = 1e-3;
  long steps = 10000;
  std::vector<NamedExpression> watch;
};

struct Manifest {
  std::string name;
  std::size_t dim = 0;
  HamiltonianSpec hamiltonian;
  std::vector<FieldEntry> fields;
  std::vector<PointEntry> points;
  std::vector<RunEntry> runs;
  SampleBox box;
  std::size_t sample_count = kDefaultSampleCount;
  std::uint64_t seed = kDefaultSeed;
  Tolerances tolerances;
  Json source;  ///< the manifest as read, echoed into reports

  const FieldEntry& field(const std::string& n) const {
    for (const auto& f : fields)
      if (f.name == n) return f;
    throw ManifestError("fields", "no field named '" + n + "'");
  }
  const PointEntry& point(const std::string& n) const {
    for (const auto& p : points)
      if (p.name == n) return p;
    throw ManifestError("points", "no point named '" + n + "'");
  }
  const RunEntry& run(const std::string& n) const {
    for (const auto& r : runs)
      if (r.name == n) return r;
    throw ManifestError("runs", "no run named '" + n + "'");
  }
};

namespace detail {

inline const Json& require(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ManifestError(where, "missing key '" + key + "'");
  return j.at(key);
}

inline std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ManifestError(where, "expected a string");
  return j.get<std::string>();
}

inline double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ManifestError(where, "expected a number");
  return j.get<double>();
}

inline std::vector<double> as_numbers(const Json& j, std::size_t n, const std::string& where) {
  if (!j.is_array() || j.size() != n) throw ManifestError(where, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline Expression as_expression(const Json& j, std::size_t dim, const std::string& where) {
  if (j.is_number()) return Expression::constant(j.get<double>());
  try {
    return parse(as_string(j, where), dim);
  } catch (const ParseError& e) {
    throw ManifestError(where, std::string(e.what()));
  } catch (const DimensionError& e) {
    throw ManifestError(where, std::string(e.what()));
  }
}

inline std::vector<Expression> as_expressions(const Json& j, std::size_t n, std::size_t dim, const std::string& where) {
  if (!j.is_array() || j.size() != n) {
    throw ManifestError(where, "expected an array of " + std::to_string(n) + " expressions");
  }
  std::vector<Expression> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(as_expression(j[i], dim, where + "[" + std::to_string(i) + "]"));
  return out;
}

inline PhasePoint as_point(const Json& j, std::size_t dim, const std::string& where) {
  try {
    return PhasePoint(as_numbers(require(j, "x", where), dim, where + ".x"),
                      as_numbers(require(j, "p", where), dim, where + ".p"));
  } catch (const std::invalid_argument& e) {
    throw ManifestError(where, e.what());
  }
}

inline std::string entry_name(const Json& j, std::set<std::string>& seen, const std::string& where) {
  const std::string n = as_string(require(j, "name", where), where + ".name");
  if (n.empty()) throw ManifestError(where, "empty name");
  if (!seen.insert(n).second) throw ManifestError(where, "duplicate name '" + n + "'");
  return n;
}

inline HamiltonianSpec parse_hamiltonian(const Json& j, const std::string& name, std::size_t dim) {
  const std::string where = "hamiltonian";
  if (j.is_string()) {
    return HamiltonianSpec(name, dim, as_expression(j, dim, where));
  }
  if (j.is_object() && j.contains("control_affine")) {
    const Json& gens = j.at("control_affine");
    if (!gens.is_array() || gens.empty()) throw ManifestError(where, "control_affine needs at least one generator");
    ControlAffineSystem sys{dim, {}};
    for (std::size_t a = 0; a < gens.size(); ++a) {
      sys.generators.push_back(as_expressions(gens[a], dim, dim, where + ".control_affine[" + std::to_string(a) + "]"));
    }
    try {
      return pmp_hamiltonian(sys, name);
    } catch (const DimensionError& e) {
      throw ManifestError(where, e.what());
    }
  }
  throw ManifestError(where, "expected an expression string or {\"control_affine\": [...]}");
}

}  // namespace detail

/// Builds a manifest from parsed JSON. Every structural problem raises
/// ManifestError naming the offending entry.
inline Manifest parse_manifest(const Json& j) {
  if (!j.is_object()) throw ManifestError("", "manifest must be a JSON object");
  Manifest m;
  m.source = j;
  m.name = j.contains("name") ? detail::as_string(j.at("name"), "name") : "manifest";
  const Json& dim = detail::require(j, "dim", "");
  if (!dim.is_number_integer() || dim.get<long>() < 1) throw ManifestError("dim", "must be a positive integer");
  m.dim = dim.get<std::size_t>();
  const std::size_t n = m.dim;
  m.hamiltonian = detail::parse_hamiltonian(detail::require(j, "hamiltonian", ""), m.name, n);

  std::set<std::string> field_names, point_names, run_names;
  if (j.contains("fields")) {
    const Json& fs = j.at("fields");
    if (!fs.is_array()) throw ManifestError("fields", "expected an array");
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const std::string where = "fields[" + std::to_string(k) + "]";
      FieldEntry f;
      f.name = detail::entry_name(fs[k], field_names, where);
      const std::string kind = fs[k].contains("kind") ? detail::as_string(fs[k].at("kind"), where + ".kind") : "full";
      if (kind == "full") {
        f.kind = FieldEntry::Kind::full;
        f.full = VectorFieldSpec(n, detail::as_expressions(detail::require(fs[k], "x", where), n, n, where + ".x"),
                                 detail::as_expressions(detail::require(fs[k], "p", where), n, n, where + ".p"));
      } else if (kind == "base") {
        f.kind = FieldEntry::Kind::base;
        auto comps = detail::as_expressions(detail::require(fs[k], "x", where), n, n, where + ".x");
        try {
          f.base = BaseVectorFieldSpec(n, std::move(comps));
        } catch (const DimensionError& e) {
          throw ManifestError(where, e.what());
        }
      } else if (kind == "hamiltonian") {
        f.kind = FieldEntry::Kind::hamiltonian;
      } else if (kind == "newtonoid") {
        f.kind = FieldEntry::Kind::newtonoid;
        f.positions = detail::as_expressions(detail::require(fs[k], "x", where), n, n, where + ".x");
      } else {
        throw ManifestError(where + ".kind", "unknown field kind '" + kind + "'");
      }
      m.fields.push_back(std::move(f));
    }
  }

  if (j.contains("points")) {
    const Json& ps = j.at("points");
    if (!ps.is_array()) throw ManifestError("points", "expected an array");
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const std::string where = "points[" + std::to_string(k) + "]";
      PointEntry p;
      p.name = detail::entry_name(ps[k], point_names, where);
      p.point = detail::as_point(ps[k], n, where);
      m.points.push_back(std::move(p));
    }
  }

  if (j.contains("runs")) {
    const Json& rs = j.at("runs");
    if (!rs.is_array()) throw ManifestError("runs", "expected an array");
    for (std::size_t k = 0; k < rs.size(); ++k) {
      const std::string where = "runs[" + std::to_string(k) + "]";
      RunEntry r;
      r.name = detail::entry_name(rs[k], run_names, where);
      const Json& start = detail::require(rs[k], "start", where);
      if (start.is_string()) {
        try {
          r.start = m.point(start.get<std::string>()).point;
        } catch (const ManifestError&) {
          throw ManifestError(where + ".start", "no point named '" + start.get<std::string>() + "'");
        }
      } else {
        r.start = detail::as_point(start, n, where + ".start");
      }
      if (rs[k].contains("dt")) r.dt = detail::as_number(rs[k].at("dt"), where + ".dt");
      if (!(r.dt > 0.0) || !std::isfinite(r.dt)) throw ManifestError(where + ".dt", "dt must be positive");
      if (rs[k].contains("steps")) {
        const Json& s = rs[k].at("steps");
        if (!s.is_number_integer()) throw ManifestError(where + ".steps", "expected an integer");
        r.steps = s.get<long>();
      }
      if (r.steps <= 0) throw ManifestError(where + ".steps", "steps must be positive");
      if (rs[k].contains("watch")) {
        const Json& w = rs[k].at("watch");
        if (!w.is_array()) throw ManifestError(where + ".watch", "expected an array");
        std::set<std::string> watch_names{"H"};
        for (std::size_t i = 0; i < w.size(); ++i) {
          const std::string wh = where + ".watch[" + std::to_string(i) + "]";
          NamedExpression e;
          if (w[i].is_string()) {
            e.name = w[i].get<std::string>();
            e.expr = detail::as_expression(w[i], n, wh);
          } else {
            e.name = detail::as_string(detail::require(w[i], "name", wh), wh + ".name");
            e.expr = detail::as_expression(detail::require(w[i], "expr", wh), n, wh + ".expr");
          }
          if (!watch_names.insert(e.name).second) throw ManifestError(wh, "duplicate watch name '" + e.name + "'");
          r.watch.push_back(std::move(e));
        }
      }
      m.runs.push_back(std::move(r));
    }
  }

  m.box = SampleBox::uniform(n, -1.0, 1.0, -1.0, 1.0);
  if (j.contains("sampling")) {
    const Json& s = j.at("sampling");
    if (s.contains("box")) {
      const Json& b = s.at("box");
      m.box.ranges.clear();
      for (const char* part : {"x", "p"}) {
        const std::string where = std::string("sampling.box.") + part;
        const Json& rs = detail::require(b, part, "sampling.box");
        if (!rs.is_array() || rs.size() != n) throw ManifestError(where, "expected n [lo, hi] pairs");
        for (std::size_t i = 0; i < n; ++i) {
          const auto r = detail::as_numbers(rs[i], 2, where + "[" + std::to_string(i) + "]");
          if (!(r[0] <= r[1])) throw ManifestError(where, "range has lo > hi");
          m.box.ranges.push_back({r[0], r[1]});
        }
      }
    }
    if (s.contains("count")) {
      if (!s.at("count").is_number_integer() || s.at("count").get<long>() < 1) {
        throw ManifestError("sampling.count", "must be a positive integer");
      }
      m.sample_count = s.at("count").get<std::size_t>();
    }
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) throw ManifestError("sampling.seed", "must be a non-negative integer");
      m.seed = s.at("seed").get<std::uint64_t>();
    }
  }

  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    if (!t.is_object()) throw ManifestError("tolerances", "expected an object");
    auto ptrs = m.tolerances.all();
    for (const auto& [key, value] : t.items()) {
      const auto& names = Tolerances::names();
      const auto it = std::find(names.begin(), names.end(), key);
      if (it == names.end()) throw ManifestError("tolerances", "unknown tolerance '" + key + "'");
      const double v = detail::as_number(value, "tolerances." + key);
      if (!(v >= 0.0)) throw ManifestError("tolerances." + key, "must be non-negative");
      *ptrs[static_cast<std::size_t>(it - names.begin())] = v;
    }
  }
  return m;
}

inline const char* kPaperExampleManifest = R"json({
  "name": "paper-example",
  "dim": 2,
  "hamiltonian": {"control_affine": [["1", "0"], ["x1", "1"]]},
  "fields": [
    {"name": "p2_dx2", "kind": "full", "x": ["0", "p2"], "p": ["0", "0"]},
    {"name": "rho_H", "kind": "hamiltonian"},
    {"name": "x1_dx1", "kind": "full", "x": ["x1", "0"], "p": ["0", "0"]},
    {"name": "dx2", "kind": "base", "x": ["0", "1"]},
    {"name": "dx1", "kind": "base", "x": ["1", "0"]},
    {"name": "p2_dx2_newtonoid", "kind": "newtonoid", "x": ["0", "p2"]}
  ],
  "points": [
    {"name": "P0", "x": [1, 0], "p": [1, 1]}
  ],
  "runs": [
    {"name": "default", "start": "P0", "dt": 0.001, "steps": 10000, "watch": ["p2"]}
  ],
  "sampling": {"box": {"x": [[-2, 2], [-2, 2]], "p": [[0.2, 2], [0.2, 2]]}, "count": 100, "seed": 20240917}
})json";

inline const char* kFreeParticleManifest = R"json({
  "name": "free-particle",
  "dim": 2,
  "hamiltonian": "0.5*(p1^2+p2^2)",
  "fields": [
    {"name": "dx1", "kind": "base", "x": ["1", "0"]},
    {"name": "dx2", "kind": "base", "x": ["0", "1"]},
    {"name": "rho_H", "kind": "hamiltonian"},
    {"name": "x1_dx1", "kind": "base", "x": ["x1", "0"]}
  ],
  "points": [
    {"name": "P0", "x": [1, 0], "p": [1, 1]},
    {"name": "P1", "x": [-0.5, 2], "p": [0.3, -1.2]}
  ],
  "runs": [
    {"name": "default", "start": "P0", "dt": 0.001, "steps": 10000, "watch": ["p1", "p2"]}
  ],
  "sampling": {"box": {"x": [[-2, 2], [-2, 2]], "p": [[-2, 2], [-2, 2]]}, "count": 100, "seed": 20240917}
})json";

/// Loads a built-in manifest by name or a JSON file by path.
inline Manifest load_manifest(const std::string& ref) {
  Json j;
  try {
    if (ref == "paper-example") {
      j = Json::parse(kPaperExampleManifest);
    } else if (ref == "free-particle") {
      j = Json::parse(kFreeParticleManifest);
    } else {
      std::ifstream in(ref);
      if (!in) throw ManifestError(ref, "cannot open manifest");
      j = Json::parse(in);
    }
  } catch (const Json::parse_error& e) {
    throw ManifestError(ref, std::string("invalid JSON: ") + e.what());
  }
  return parse_manifest(j);
}

}  // namespace hamgeo::cli
