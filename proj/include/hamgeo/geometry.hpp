#pragma once

// Pointwise geometry induced by a regular Hamiltonian on T*M: the momentum
// metric, the Hamiltonian vector field, the canonical nonlinear connection,
// its curvature, the Jacobi endomorphism, the dynamical covariant derivative
// and the Berwald connection.
//
// Index conventions: phase variables are ordered (x^1..x^n, p_1..p_n); the
// first index of every matrix is the row; R3(i, j, k) stores R_{ijk}.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hamgeo/differentiation.hpp"
#include "hamgeo/errors.hpp"
#include "hamgeo/expr.hpp"
#include "hamgeo/jet.hpp"
#include "hamgeo/phase_point.hpp"
#include "hamgeo/vector_field.hpp"

namespace hamgeo {

using Matrix = Eigen::MatrixXd;

/// Reciprocal condition estimate below which a matrix counts as singular.
inline constexpr double kSingularRcond = 1e-12;

/// Dense n x n x n array.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(std::size_t n) : n_(n), data_(n * n * n, 0.0) {}

  std::size_t dim() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * n_ + j) * n_ + k]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[(i * n_ + j) * n_ + k]; }
  const std::vector<double>& data() const noexcept { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Square matrix of local fields.
class FieldMatrix {
 public:
  FieldMatrix() = default;
  explicit FieldMatrix(std::size_t n) : n_(n), data_(n * n, LocalField(0.0)) {}

  std::size_t dim() const noexcept { return n_; }
  LocalField& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const LocalField& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  Matrix values() const {
    Matrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j).value();
    return m;
  }

  static FieldMatrix constant(const Matrix& m) {
    FieldMatrix out(static_cast<std::size_t>(m.rows()));
    for (std::size_t i = 0; i < out.n_; ++i)
      for (std::size_t j = 0; j < out.n_; ++j) out(i, j) = LocalField(m(i, j));
    return out;
  }

  friend FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b) {
    FieldMatrix out(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t j = 0; j < a.n_; ++j) {
        LocalField s(0.0);
        for (std::size_t k = 0; k < a.n_; ++k) s = s + a(i, k) * b(k, j);
        out(i, j) = s;
      }
    return out;
  }
  friend FieldMatrix operator+(const FieldMatrix& a, const FieldMatrix& b) {
    FieldMatrix out(a.n_);
    for (std::size_t k = 0; k < a.data_.size(); ++k) out.data_[k] = a.data_[k] + b.data_[k];
    return out;
  }
  FieldMatrix operator-() const {
    FieldMatrix out(n_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = -data_[k];
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<LocalField> data_;
};

namespace detail {

/// Inverse of the numeric value of `m`, with its reciprocal condition estimate.
inline Matrix checked_inverse(const Matrix& m, const std::string& what, double* rcond_out = nullptr) {
  const Eigen::PartialPivLU<Matrix> lu(m);
  const double rcond = lu.rcond();
  if (rcond_out) *rcond_out = rcond;
  if (!(rcond >= kSingularRcond)) {
    throw RegularityError(what + " is singular (reciprocal condition estimate " + format_number(rcond) + ")",
                          rcond);
  }
  return lu.inverse();
}

/// Inverse of a matrix of local fields: with A = A0 + dA and G0 = A0^-1,
/// A^-1 = sum_j (-G0 dA)^j G0, exact once truncated at the field order since
/// dA has no constant term. At first order this is dG = -G dA G.
inline FieldMatrix field_inverse(const FieldMatrix& a, int order, const std::string& what, double* rcond = nullptr) {
  const Matrix a0 = a.values();
  const FieldMatrix g0 = FieldMatrix::constant(checked_inverse(a0, what, rcond));
  const FieldMatrix neg_g0_da = -(g0 * (a + -FieldMatrix::constant(a0)));
  FieldMatrix out = g0;
  FieldMatrix term = g0;
  for (int j = 1; j <= order; ++j) {
    term = neg_g0_da * term;
    out = out + term;
  }
  return out;
}

}  // namespace detail

/// Taylor models, near a point, of every quantity derived from H that the
/// geometry needs. `field_order` is the order of those models: 0 gives values
/// only, 1 adds first derivatives of the connection (curvature, Jacobi
/// endomorphism, Berwald coefficients), 2 is needed for second covariant
/// derivatives.
class LocalGeometry {
 public:
  LocalGeometry(const HamiltonianSpec& H, const PhasePoint& point, int field_order)
      : n_(point.dim()), order_(field_order), point_(point) {
    if (H.dim != point.dim()) throw DimensionError("Hamiltonian and point dimensions differ");
    const std::size_t n = n_;
    const Jet<LocalField> h = jet_lift_nested(H.expr, point, field_order);
    auto d = [&](std::initializer_list<std::size_t> vars) { return h.partial(vars).expanded(2 * n, field_order); };

    hamiltonian_ = d({});
    g_upper_ = FieldMatrix(n);
    h_px_ = FieldMatrix(n);
    h_xx_ = FieldMatrix(n);
    for (std::size_t i = 0; i < n; ++i) {
      xi_.push_back(d({P(i)}));
      chi_.push_back(-d({X(i)}));
      for (std::size_t j = 0; j < n; ++j) {
        g_upper_(i, j) = d({P(i), P(j)});
        h_px_(i, j) = d({P(i), X(j)});
        h_xx_(i, j) = d({X(i), X(j)});
      }
    }
    g_lower_ = detail::field_inverse(g_upper_, field_order, "momentum Hessian g^{ij}", &rcond_);

    for (std::size_t a = 0; a < 2 * n; ++a) {
      FieldMatrix dg_up(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dg_up(i, j) = d({P(i), P(j), a});
      dg_lower_.push_back(-(g_lower_ * dg_up * g_lower_));
      dg_upper_.push_back(std::move(dg_up));
    }

    // N_ij = 1/2 ({g_ij, H} - g_ik d2H/dp_k dx^j - g_jk d2H/dp_k dx^i)
    connection_ = FieldMatrix(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        LocalField poisson(0.0);
        LocalField mixed(0.0);
        for (std::size_t k = 0; k < n; ++k) {
          poisson = poisson + dg_lower_[P(k)](i, j) * d({X(k)}) - xi_[k] * dg_lower_[X(k)](i, j);
          mixed = mixed + g_lower_(i, k) * h_px_(k, j) + g_lower_(j, k) * h_px_(k, i);
        }
        connection_(i, j) = 0.5 * (poisson - mixed);
      }
    }
  }

  std::size_t dim() const noexcept { return n_; }
  int order() const noexcept { return order_; }
  const PhasePoint& point() const noexcept { return point_; }
  double rcond() const noexcept { return rcond_; }

  /// Phase index of x^i and p_i (0-based i).
  std::size_t X(std::size_t i) const noexcept { return i; }
  std::size_t P(std::size_t i) const noexcept { return n_ + i; }

  const LocalField& hamiltonian() const noexcept { return hamiltonian_; }
  const FieldMatrix& g_upper() const noexcept { return g_upper_; }
  const FieldMatrix& g_lower() const noexcept { return g_lower_; }
  /// d g^{ij} / dz_a and d g_{ij} / dz_a.
  const FieldMatrix& dg_upper(std::size_t a) const { return dg_upper_[a]; }
  const FieldMatrix& dg_lower(std::size_t a) const { return dg_lower_[a]; }
  /// xi^i = dH/dp_i, chi_i = -dH/dx^i.
  const std::vector<LocalField>& xi() const noexcept { return xi_; }
  const std::vector<LocalField>& chi() const noexcept { return chi_; }
  /// h_px(k, j) = d2H / dp_k dx^j.
  const FieldMatrix& h_px() const noexcept { return h_px_; }
  const FieldMatrix& h_xx() const noexcept { return h_xx_; }
  /// Canonical nonlinear connection N_ij.
  const FieldMatrix& connection() const noexcept { return connection_; }

  VectorFieldModel rho() const {
    VectorFieldModel m{n_, {}};
    for (const auto& v : xi_) m.components.push_back(v);
    for (const auto& v : chi_) m.components.push_back(v);
    return m;
  }

  /// rho_H(f).
  LocalField along_rho(const LocalField& f) const {
    LocalField out(0.0);
    for (std::size_t i = 0; i < n_; ++i) out = out + xi_[i] * f.derivative(X(i)) + chi_[i] * f.derivative(P(i));
    return out;
  }

  /// delta f / delta x^i = df/dx^i + N_ij df/dp_j.
  LocalField delta_x(const LocalField& f, std::size_t i) const {
    LocalField out = f.derivative(X(i));
    for (std::size_t j = 0; j < n_; ++j) out = out + connection_(i, j) * f.derivative(P(j));
    return out;
  }

  /// Coefficient of d/dp_i in the dynamical covariant derivative of d/dp_j:
  /// d2H/dp_j dx^i + N_ik g^{kj}, as a local field.
  LocalField nabla_v(std::size_t j, std::size_t i) const {
    LocalField out = h_px_(j, i);
    for (std::size_t k = 0; k < n_; ++k) out = out + connection_(i, k) * g_upper_(k, j);
    return out;
  }

  /// Horizontal part of a vector: (W^x, W^x^i N_ij).
  VectorFieldModel horizontal(const VectorFieldModel& w) const {
    VectorFieldModel out{n_, {}};
    for (std::size_t i = 0; i < n_; ++i) out.components.push_back(w.x(i));
    for (std::size_t j = 0; j < n_; ++j) {
      LocalField s(0.0);
      for (std::size_t i = 0; i < n_; ++i) s = s + w.x(i) * connection_(i, j);
      out.components.push_back(s);
    }
    return out;
  }

  /// Vertical part of a vector: (0, W_p - W^x^i N_ij).
  VectorFieldModel vertical(const VectorFieldModel& w) const {
    VectorFieldModel out{n_, {}};
    for (std::size_t i = 0; i < n_; ++i) out.components.push_back(LocalField(0.0));
    for (std::size_t j = 0; j < n_; ++j) {
      LocalField s = w.p(j);
      for (std::size_t i = 0; i < n_; ++i) s = s - w.x(i) * connection_(i, j);
      out.components.push_back(s);
    }
    return out;
  }

  /// J_H W = (0, g_ij W^x^i).
  VectorFieldModel tangent_structure(const VectorFieldModel& w) const {
    VectorFieldModel out{n_, {}};
    for (std::size_t i = 0; i < n_; ++i) out.components.push_back(LocalField(0.0));
    for (std::size_t j = 0; j < n_; ++j) {
      LocalField s(0.0);
      for (std::size_t i = 0; i < n_; ++i) s = s + g_lower_(i, j) * w.x(i);
      out.components.push_back(s);
    }
    return out;
  }

  /// Dynamical covariant derivative nabla W = h[rho_H, hW] + v[rho_H, vW].
  VectorFieldModel covariant_derivative(const VectorFieldModel& w) const {
    const VectorFieldModel r = rho();
    const VectorFieldModel hb = horizontal(bracket(r, horizontal(w)));
    const VectorFieldModel vb = vertical(bracket(r, vertical(w)));
    VectorFieldModel out{n_, {}};
    for (std::size_t a = 0; a < 2 * n_; ++a) out.components.push_back(hb.components[a] + vb.components[a]);
    return out;
  }

 private:
  std::size_t n_;
  int order_;
  PhasePoint point_;
  double rcond_ = 0.0;
  LocalField hamiltonian_;
  FieldMatrix g_upper_, g_lower_, h_px_, h_xx_, connection_;
  std::vector<FieldMatrix> dg_upper_, dg_lower_;
  std::vector<LocalField> xi_, chi_;
};

// ---------------------------------------------------------------------------
// Pointwise quantities

struct MetricPair {
  Matrix upper;  ///< g^{ij}
  Matrix lower;  ///< g_{ij}
  double rcond = 0.0;
};

inline MetricPair metric(const LocalGeometry& geo) {
  return {geo.g_upper().values(), geo.g_lower().values(), geo.rcond()};
}

/// g^{ij} = d2H/dp_i dp_j and its inverse. Throws RegularityError when the
/// reciprocal condition estimate falls below 1e-12.
inline MetricPair metric(const HamiltonianSpec& H, const PhasePoint& point) {
  return metric(LocalGeometry(H, point, 0));
}

struct HamiltonianVectorField {
  std::vector<double> xi;   ///< dH/dp_i
  std::vector<double> chi;  ///< -dH/dx^i
};

/// Components of rho_H. Needs no regularity.
inline HamiltonianVectorField hamiltonian_vector_field(const HamiltonianSpec& H, const PhasePoint& point) {
  if (H.dim != point.dim()) throw DimensionError("Hamiltonian and point dimensions differ");
  const Jet3 h = jet_lift(H.expr, point, 1);
  HamiltonianVectorField out;
  for (std::size_t i = 0; i < point.dim(); ++i) {
    out.xi.push_back(h.partial({point.dim() + i}));
    out.chi.push_back(-h.partial({i}));
  }
  return out;
}

inline Matrix connection(const LocalGeometry& geo) { return geo.connection().values(); }

/// Canonical nonlinear connection N_ij of the Hamilton space.
inline Matrix connection(const HamiltonianSpec& H, const PhasePoint& point) {
  return connection(LocalGeometry(H, point, 0));
}

/// Nonlinear connection induced by a J-regular field rho = xi d/dx + chi d/dp
/// with t^{ij} = d xi^j / dp_i:
///   N_ij = 1/2 (t_ik dchi_j/dp_k - t_kj dxi^k/dx^i - rho(t_ij)).
/// `rho` must carry at least order 2.
inline Matrix connection_general(const VectorFieldModel& rho) {
  const std::size_t n = rho.dim;
  if (rho.order() < 2) throw OrderError("connection_general needs an order-2 model of rho");
  FieldMatrix t_upper(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t_upper(i, j) = rho.x(j).derivative(n + i);
  const FieldMatrix t_lower = detail::field_inverse(t_upper, 1, "J-regularity matrix t^{ij}");
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = -rho.apply(t_lower(i, j)).value();
      for (std::size_t k = 0; k < n; ++k) {
        s += t_lower(i, k).value() * rho.p(j).derivative(n + k).value();
        s -= t_lower(k, j).value() * rho.x(k).derivative(i).value();
      }
      out(i, j) = 0.5 * s;
    }
  }
  return out;
}

inline Matrix connection_general(const VectorFieldSpec& rho, const PhasePoint& point) {
  return connection_general(model(rho, point, 2));
}

/// The general construction applied to rho_H itself (its components come
/// from the order-3 jet of H rather than from expressions).
inline Matrix connection_general(const HamiltonianSpec& H, const PhasePoint& point) {
  if (H.dim != point.dim()) throw DimensionError("Hamiltonian and point dimensions differ");
  const Jet<LocalField> h = jet_lift_nested(H.expr, point, 2);
  const std::size_t n = point.dim();
  VectorFieldModel rho{n, {}};
  for (std::size_t i = 0; i < n; ++i) rho.components.push_back(h.partial({n + i}).expanded(2 * n, 2));
  for (std::size_t i = 0; i < n; ++i) rho.components.push_back(-h.partial({i}).expanded(2 * n, 2));
  return connection_general(rho);
}

/// delta f / delta x^i for a function given by its jet (order >= 1).
inline std::vector<double> adapted_derivative(const LocalGeometry& geo, const LocalField& f) {
  std::vector<double> out;
  for (std::size_t i = 0; i < geo.dim(); ++i) out.push_back(geo.delta_x(f, i).value());
  return out;
}

inline std::vector<double> adapted_derivative(const HamiltonianSpec& H, const PhasePoint& point, const Jet3& f) {
  return adapted_derivative(LocalGeometry(H, point, 0), f);
}

/// R_ijk = delta N_jk / delta x^i - delta N_ik / delta x^j. Needs field order >= 1.
inline Tensor3 curvature(const LocalGeometry& geo) {
  const std::size_t n = geo.dim();
  Tensor3 r(n);
  const auto& N = geo.connection();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        r(i, j, k) = geo.delta_x(N(j, k), i).value() - geo.delta_x(N(i, k), j).value();
  return r;
}

inline Tensor3 curvature(const HamiltonianSpec& H, const PhasePoint& point) {
  return curvature(LocalGeometry(H, point, 1));
}

/// Jacobi endomorphism from the Hamiltonian directly:
///   R_jk = d2H/dp_i dx^j N_ik + d2H/dp_i dx^k N_ji + N_jl N_ik g^{li}
///          + d2H/dx^j dx^k + rho_H(N_jk).
inline Matrix jacobi_endomorphism(const LocalGeometry& geo) {
  const std::size_t n = geo.dim();
  const Matrix N = geo.connection().values();
  const Matrix g = geo.g_upper().values();
  const Matrix hpx = geo.h_px().values();
  const Matrix hxx = geo.h_xx().values();
  Matrix out(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      double s = hxx(j, k) + geo.along_rho(geo.connection()(j, k)).value();
      for (std::size_t i = 0; i < n; ++i) {
        s += hpx(i, j) * N(i, k) + hpx(i, k) * N(j, i);
        for (std::size_t l = 0; l < n; ++l) s += N(j, l) * N(i, k) * g(l, i);
      }
      out(j, k) = s;
    }
  }
  return out;
}

inline Matrix jacobi_endomorphism(const HamiltonianSpec& H, const PhasePoint& point) {
  return jacobi_endomorphism(LocalGeometry(H, point, 1));
}

/// Jacobi endomorphism as the curvature contracted with rho_H:
/// R_ij = R_kij xi^k. Agrees with jacobi_endomorphism where rho_H is horizontal.
inline Matrix jacobi_via_curvature(const LocalGeometry& geo) {
  const std::size_t n = geo.dim();
  const Tensor3 r = curvature(geo);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) out(i, j) += r(k, i, j) * geo.xi()[k].value();
  return out;
}

inline Matrix jacobi_via_curvature(const HamiltonianSpec& H, const PhasePoint& point) {
  return jacobi_via_curvature(LocalGeometry(H, point, 1));
}

struct HorizontalityCheck {
  bool horizontal = false;
  std::vector<double> residual;  ///< chi_i - xi^k N_ki
  double max_residual = 0.0;
  double tolerance = 0.0;
};

inline HorizontalityCheck is_horizontal(const LocalGeometry& geo, double tol) {
  const std::size_t n = geo.dim();
  HorizontalityCheck out;
  out.tolerance = tol;
  const Matrix N = geo.connection().values();
  for (std::size_t i = 0; i < n; ++i) {
    double r = geo.chi()[i].value();
    for (std::size_t k = 0; k < n; ++k) r -= geo.xi()[k].value() * N(k, i);
    out.residual.push_back(r);
    out.max_residual = std::max(out.max_residual, std::fabs(r));
  }
  out.horizontal = out.max_residual < tol;
  return out;
}

inline HorizontalityCheck is_horizontal(const HamiltonianSpec& H, const PhasePoint& point, double tol) {
  return is_horizontal(LocalGeometry(H, point, 0), tol);
}

struct NablaCoefficients {
  /// nabla_h(j, i): coefficient of delta/delta x^i in nabla delta/delta x^j.
  Matrix horizontal;
  /// nabla_v(j, i): coefficient of d/dp_i in nabla d/dp_j.
  Matrix vertical;
};

inline NablaCoefficients nabla_coefficients(const LocalGeometry& geo) {
  const std::size_t n = geo.dim();
  const Matrix N = geo.connection().values();
  const Matrix g = geo.g_upper().values();
  const Matrix hpx = geo.h_px().values();
  NablaCoefficients out{Matrix(n, n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double h = hpx(i, j);
      for (std::size_t k = 0; k < n; ++k) h += N(j, k) * g(k, i);
      out.horizontal(j, i) = -h;
      out.vertical(j, i) = geo.nabla_v(j, i).value();
    }
  }
  return out;
}

inline NablaCoefficients nabla_coefficients(const HamiltonianSpec& H, const PhasePoint& point) {
  return nabla_coefficients(LocalGeometry(H, point, 0));
}

/// Coefficients of the Berwald connection D on the Berwald basis
/// (delta/delta x^i, d/dp_i), with t_ij = g_ij:
///   D_{delta_i} delta_j = hh(i,j,s) delta_s,  D_{delta_i} d/dp_j = hv(i,j,r) d/dp_r,
///   D_{d/dp_i} delta_j  = vh(i,j,s) delta_s,  D_{d/dp_i} d/dp_j = vv(i,j,s) d/dp_s.
struct BerwaldCoefficients {
  Tensor3 hh, hv, vh, vv;
};

inline BerwaldCoefficients berwald_coefficients(const LocalGeometry& geo) {
  const std::size_t n = geo.dim();
  BerwaldCoefficients out{Tensor3(n), Tensor3(n), Tensor3(n), Tensor3(n)};
  const auto& N = geo.connection();
  const Matrix g_up = geo.g_upper().values();
  const Matrix g_lo = geo.g_lower().values();

  // delta g_jk / delta x^i from the exact derivatives of g_lower.
  auto delta_g = [&](std::size_t i, std::size_t j, std::size_t k) {
    double s = geo.dg_lower(geo.X(i))(j, k).value();
    for (std::size_t r = 0; r < n; ++r) s += N(i, r).value() * geo.dg_lower(geo.P(r))(j, k).value();
    return s;
  };
  auto dN_dp = [&](std::size_t i, std::size_t k, std::size_t r) { return N(i, k).derivative(geo.P(r)).value(); };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t s = 0; s < n; ++s) {
        double hh = 0.0;
        double vv = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          double inner = delta_g(i, j, k);
          for (std::size_t r = 0; r < n; ++r) inner -= g_lo(j, r) * dN_dp(i, k, r);
          hh += g_up(k, s) * inner;
          vv += g_lo(k, s) * geo.dg_upper(geo.P(i))(j, k).value();
        }
        out.hh(i, j, s) = hh;
        out.vv(i, j, s) = vv;
        out.hv(i, j, s) = -dN_dp(i, s, j);
      }
    }
  }
  return out;
}

inline BerwaldCoefficients berwald_coefficients(const HamiltonianSpec& H, const PhasePoint& point) {
  return berwald_coefficients(LocalGeometry(H, point, 1));
}

/// Components of nabla J_H for a candidate symmetric connection:
///   rho_H(g_ij) + g_kj dxi^k/dx^i - g_ik dchi_j/dp_k + 2 N_ij.
/// Vanishes exactly for the canonical connection and is affine in N.
inline Matrix nabla_J_residual(const LocalGeometry& geo, const Matrix& candidate) {
  const std::size_t n = geo.dim();
  if (static_cast<std::size_t>(candidate.rows()) != n || static_cast<std::size_t>(candidate.cols()) != n) {
    throw DimensionError("candidate connection has the wrong shape");
  }
  const Matrix g = geo.g_lower().values();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double rho_g = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        rho_g += geo.xi()[a].value() * geo.dg_lower(geo.X(a))(i, j).value() +
                 geo.chi()[a].value() * geo.dg_lower(geo.P(a))(i, j).value();
      }
      double s = rho_g + 2.0 * candidate(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        s += g(k, j) * geo.h_px()(k, i).value();  // dxi^k/dx^i = d2H/dp_k dx^i
        s += g(i, k) * geo.h_px()(k, j).value();  // -dchi_j/dp_k = d2H/dx^j dp_k
      }
      out(i, j) = s;
    }
  }
  return out;
}

inline Matrix nabla_J_residual(const HamiltonianSpec& H, const Matrix& candidate, const PhasePoint& point) {
  return nabla_J_residual(LocalGeometry(H, point, 0), candidate);
}

/// nabla applied to the vertical metric g^{jl} delta p_j (x) delta p_l, with
/// nabla delta p_j = -nabla_v(j, k) delta p_k:
///   rho_H(g^{jl}) - g^{kl} nabla_v(j, k) - g^{jk} nabla_v(l, k).
inline Matrix nabla_metric_residual(const LocalGeometry& geo) {
  const std::size_t n = geo.dim();
  const Matrix g = geo.g_upper().values();
  const Matrix nv = nabla_coefficients(geo).vertical;
  Matrix out(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      double s = geo.along_rho(geo.g_upper()(j, l)).value();
      for (std::size_t k = 0; k < n; ++k) s -= g(k, l) * nv(j, k) + g(j, k) * nv(l, k);
      out(j, l) = s;
    }
  }
  return out;
}

inline Matrix nabla_metric_residual(const HamiltonianSpec& H, const PhasePoint& point) {
  return nabla_metric_residual(LocalGeometry(H, point, 1));
}

/// Every pointwise tensor at one point.
struct GeometryReport {
  PhasePoint point;
  MetricPair metric;
  std::vector<double> xi, chi;
  Matrix connection;
  Tensor3 curvature;
  Matrix jacobi;              ///< direct formula
  Matrix jacobi_contraction;  ///< R_kij xi^k
  NablaCoefficients nabla;
  BerwaldCoefficients berwald;
  HorizontalityCheck horizontal;
  Matrix nabla_J;       ///< at the canonical connection
  Matrix nabla_metric;  ///< nabla g^{ij}
};

inline GeometryReport geometry_report(const HamiltonianSpec& H, const PhasePoint& point,
                                      double horizontal_tol = 1e-10) {
  const LocalGeometry geo(H, point, 1);
  GeometryReport r;
  r.point = point;
  r.metric = metric(geo);
  for (std::size_t i = 0; i < point.dim(); ++i) {
    r.xi.push_back(geo.xi()[i].value());
    r.chi.push_back(geo.chi()[i].value());
  }
  r.connection = connection(geo);
  r.curvature = curvature(geo);
  r.jacobi = jacobi_endomorphism(geo);
  r.jacobi_contraction = jacobi_via_curvature(geo);
  r.nabla = nabla_coefficients(geo);
  r.berwald = berwald_coefficients(geo);
  r.horizontal = is_horizontal(geo, horizontal_tol);
  r.nabla_J = nabla_J_residual(geo, r.connection);
  r.nabla_metric = nabla_metric_residual(geo);
  return r;
}

}  // namespace hamgeo
