#pragma once

// Truncated multivariate Taylor series (jets) of order at most 3.
//
// A jet stores the Taylor coefficients of a scalar function around a base
// point in the monomial basis: f(z0 + h) ~ sum_alpha c_alpha h^alpha, for
// |alpha| <= order. Monomials are ordered by degree, so the coefficients of an
// order-k jet are a prefix of those of an order-(k+1) jet over the same
// variables. Only the upper simplex of each symmetric derivative tensor is
// stored; plain partial derivatives are c_alpha * alpha!.
//
// The coefficient type is itself a template parameter. Jet<Jet<double>> is
// used to carry an order-3 expansion whose coefficients are in turn local
// Taylor models, which is how derivatives of third-order quantities are
// obtained without ever going above order 3 in a single jet.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "hamgeo/errors.hpp"

namespace hamgeo {

inline constexpr int kMaxJetOrder = 3;

namespace detail {

/// Index bookkeeping shared by all jets with the same (dim, order).
class JetLayout {
 public:
  struct Monomial {
    std::array<std::uint32_t, kMaxJetOrder> vars{};  // sorted, first `degree` used
    int degree = 0;
  };
  struct Product {
    std::uint32_t lhs, rhs, out;
  };
  struct DerivativeTerm {
    std::uint32_t from, to;
    double factor;
  };

  static const JetLayout& get(std::size_t dim, int order) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, int>, std::unique_ptr<JetLayout>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{dim, order}];
    if (!slot) slot.reset(new JetLayout(dim, order));
    return *slot;
  }

  std::size_t dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return monomials_.size(); }
  const Monomial& monomial(std::size_t k) const { return monomials_[k]; }
  double factorial(std::size_t k) const { return factorial_[k]; }
  const std::vector<Product>& products() const noexcept { return products_; }

  /// Derivative table for variable `var`: maps coefficients of this layout
  /// onto the layout of order - 1.
  const std::vector<DerivativeTerm>& derivative(std::size_t var) const {
    return derivative_[var];
  }

  /// Storage index of the unordered multi-index `vars`; any permutation maps
  /// to the same entry.
  std::size_t index(std::span<const std::size_t> vars) const {
    const std::size_t m = dim_;
    switch (vars.size()) {
      case 0:
        return 0;
      case 1:
        return 1 + vars[0];
      case 2:
        return index2_[vars[0] * m + vars[1]];
      default:
        return index3_[(vars[0] * m + vars[1]) * m + vars[2]];
    }
  }

 private:
  JetLayout(std::size_t dim, int order) : dim_(dim), order_(order) {
    const std::size_t m = dim;
    monomials_.push_back({});
    if (order >= 1) {
      for (std::uint32_t i = 0; i < m; ++i) monomials_.push_back({{i, 0, 0}, 1});
    }
    if (order >= 2) {
      index2_.assign(m * m, 0);
      for (std::uint32_t i = 0; i < m; ++i) {
        for (std::uint32_t j = i; j < m; ++j) {
          index2_[i * m + j] = index2_[j * m + i] = monomials_.size();
          monomials_.push_back({{i, j, 0}, 2});
        }
      }
    }
    if (order >= 3) {
      index3_.assign(m * m * m, 0);
      for (std::uint32_t i = 0; i < m; ++i) {
        for (std::uint32_t j = i; j < m; ++j) {
          for (std::uint32_t k = j; k < m; ++k) {
            const std::size_t idx = monomials_.size();
            std::array<std::size_t, 3> perm{i, j, k};
            do {
              index3_[(perm[0] * m + perm[1]) * m + perm[2]] = idx;
            } while (std::next_permutation(perm.begin(), perm.end()));
            monomials_.push_back({{i, j, k}, 3});
          }
        }
      }
    }

    for (const auto& mono : monomials_) {
      double f = 1.0;
      int run = 1;
      for (int d = 1; d < mono.degree; ++d) {
        run = mono.vars[d] == mono.vars[d - 1] ? run + 1 : 1;
        f *= run;
      }
      factorial_.push_back(f);
    }

    for (std::uint32_t a = 0; a < size(); ++a) {
      for (std::uint32_t b = 0; b < size(); ++b) {
        const auto& ma = monomials_[a];
        const auto& mb = monomials_[b];
        if (ma.degree + mb.degree > order) continue;
        std::vector<std::size_t> merged;
        merged.insert(merged.end(), ma.vars.begin(), ma.vars.begin() + ma.degree);
        merged.insert(merged.end(), mb.vars.begin(), mb.vars.begin() + mb.degree);
        products_.push_back({a, b, static_cast<std::uint32_t>(index(merged))});
      }
    }

    derivative_.resize(m);
    if (order >= 1) {
      const JetLayout lower_shape(m, order - 1, 0);
      for (std::size_t var = 0; var < m; ++var) {
        for (std::uint32_t k = 1; k < size(); ++k) {
          const auto& mono = monomials_[k];
          std::vector<std::size_t> rest;
          int multiplicity = 0;
          bool removed = false;
          for (int d = 0; d < mono.degree; ++d) {
            if (mono.vars[d] == var) {
              ++multiplicity;
              if (removed) rest.push_back(mono.vars[d]);
              removed = true;
            } else {
              rest.push_back(mono.vars[d]);
            }
          }
          if (multiplicity == 0) continue;
          derivative_[var].push_back(
              {k, static_cast<std::uint32_t>(lower_shape.index(rest)),
               static_cast<double>(multiplicity)});
        }
      }
    }
  }

  // Index-only constructor used while building derivative tables.
  JetLayout(std::size_t dim, int order, int) : dim_(dim), order_(order) {
    const std::size_t m = dim;
    std::size_t next = 1 + (order >= 1 ? m : 0);
    if (order >= 2) {
      index2_.assign(m * m, 0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) index2_[i * m + j] = index2_[j * m + i] = next++;
    }
  }

  std::size_t dim_;
  int order_;
  std::vector<Monomial> monomials_;
  std::vector<double> factorial_;
  std::vector<std::size_t> index2_;
  std::vector<std::size_t> index3_;
  std::vector<Product> products_;
  std::vector<std::vector<DerivativeTerm>> derivative_;
};

}  // namespace detail

template <typename T>
class Jet;

template <typename T>
struct is_jet : std::false_type {};
template <typename T>
struct is_jet<Jet<T>> : std::true_type {};

/// Value of a scalar with all derivative information stripped.
inline double primal(double v) noexcept { return v; }

template <typename T>
double primal(const Jet<T>& j) {
  return primal(j.value());
}

/// Truncated Taylor expansion in `dim` variables up to `order` (<= 3).
///
/// A jet built from a plain scalar is a *constant*: it has no layout, behaves
/// as an exact constant of unbounded order and broadcasts against any jet.
template <typename T>
class Jet {
 public:
  using scalar_type = T;
  static constexpr int kConstantOrder = std::numeric_limits<int>::max();

  Jet() : coeffs_{T(0)} {}
  Jet(const T& c) : coeffs_{c} {}  // NOLINT: implicit by design of the algebra
  template <typename A>
    requires(std::is_arithmetic_v<A> && !std::is_same_v<A, T>)
  Jet(A c) : coeffs_{T(c)} {}  // NOLINT

  /// The jet of coordinate `index` at `value`: c1 = e_index, higher terms 0.
  static Jet variable(std::size_t dim, int order, std::size_t index, const T& value) {
    if (index >= dim) throw DimensionError("jet variable index out of range");
    Jet j = zero(dim, order);
    j.coeffs_[0] = value;
    if (order >= 1) j.coeffs_[1 + index] = T(1);
    return j;
  }

  static Jet zero(std::size_t dim, int order) {
    if (order < 0 || order > kMaxJetOrder) throw OrderError("jet order must be in 0..3");
    if (dim == 0) throw DimensionError("jet needs at least one variable");
    Jet j;
    j.layout_ = &detail::JetLayout::get(dim, order);
    j.coeffs_.assign(j.layout_->size(), T(0));
    return j;
  }

  bool is_constant() const noexcept { return layout_ == nullptr; }
  int order() const noexcept { return layout_ ? layout_->order() : kConstantOrder; }
  std::size_t dim() const noexcept { return layout_ ? layout_->dim() : 0; }
  const T& value() const noexcept { return coeffs_[0]; }

  /// Raw Taylor coefficients in storage order.
  std::span<const T> coefficients() const noexcept { return coeffs_; }

  /// Taylor coefficient of the monomial named by `vars` (any order).
  T coefficient(std::span<const std::size_t> vars) const {
    check_index(vars);
    if (is_constant()) return vars.empty() ? coeffs_[0] : T(0);
    return coeffs_[layout_->index(vars)];
  }

  /// Plain partial derivative d^|vars| f / dz_vars (factorials removed).
  T partial(std::span<const std::size_t> vars) const {
    check_index(vars);
    if (is_constant()) return vars.empty() ? coeffs_[0] : T(0);
    const std::size_t k = layout_->index(vars);
    return coeffs_[k] * layout_->factorial(k);
  }
  T partial(std::initializer_list<std::size_t> vars) const {
    return partial(std::span<const std::size_t>(vars.begin(), vars.size()));
  }

  /// Jet of df/dz_var, one order lower.
  Jet derivative(std::size_t var) const {
    if (is_constant()) return Jet(T(0));
    if (var >= dim()) throw DimensionError("derivative variable out of range");
    if (order() == 0) throw OrderError("cannot differentiate an order-0 jet");
    Jet out = zero(dim(), order() - 1);
    for (const auto& t : layout_->derivative(var)) {
      out.coeffs_[t.to] += coeffs_[t.from] * t.factor;
    }
    return out;
  }

  /// Same expansion truncated to `order` (no-op if already lower).
  Jet truncated(int order) const {
    if (is_constant() || order >= this->order()) return *this;
    Jet out = zero(dim(), order);
    std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
    return out;
  }

  /// A constant re-expressed as a full jet over `dim` variables; other jets
  /// are returned unchanged.
  Jet expanded(std::size_t dim, int order) const {
    if (!is_constant()) return *this;
    Jet out = zero(dim, order);
    out.coeffs_[0] = coeffs_[0];
    return out;
  }

  /// The expansion with its constant term removed.
  Jet increment() const {
    Jet out = *this;
    out.coeffs_[0] = T(0);
    return out;
  }

  Jet operator-() const {
    Jet out = *this;
    for (auto& c : out.coeffs_) c = -c;
    return out;
  }

  Jet& operator+=(const Jet& rhs) { return *this = *this + rhs; }
  Jet& operator-=(const Jet& rhs) { return *this = *this - rhs; }
  Jet& operator*=(const Jet& rhs) { return *this = *this * rhs; }
  Jet& operator/=(const Jet& rhs) { return *this = *this / rhs; }

  friend Jet operator+(const Jet& a, const Jet& b) {
    if (a.is_constant()) return b.shifted(a.coeffs_[0]);
    if (b.is_constant()) return a.shifted(b.coeffs_[0]);
    const int order = common_order(a, b);
    Jet out = zero(a.dim(), order);
    for (std::size_t k = 0; k < out.coeffs_.size(); ++k) out.coeffs_[k] = a.coeffs_[k] + b.coeffs_[k];
    return out;
  }

  friend Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    if (a.is_constant()) return b.scaled(a.coeffs_[0]);
    if (b.is_constant()) return a.scaled(b.coeffs_[0]);
    const int order = common_order(a, b);
    Jet out = zero(a.dim(), order);
    for (const auto& t : out.layout_->products()) {
      out.coeffs_[t.out] += a.coeffs_[t.lhs] * b.coeffs_[t.rhs];
    }
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  /// f(u) given the derivatives f(u0), f'(u0), f''(u0), f'''(u0) at the
  /// constant term u0, by truncated Taylor composition.
  Jet compose(const std::array<T, 4>& derivs) const {
    if (is_constant()) return Jet(derivs[0]);
    const Jet delta = increment();
    Jet out = Jet(derivs[0]).expanded(dim(), order());
    Jet power = delta;
    double factorial = 1.0;
    for (int k = 1; k <= order(); ++k) {
      factorial *= k;
      out = out + power.scaled(derivs[k] / factorial);
      if (k < order()) power = power * delta;
    }
    return out;
  }

 private:
  static int common_order(const Jet& a, const Jet& b) {
    if (a.dim() != b.dim()) throw DimensionError("jets over different variable counts");
    return std::min(a.order(), b.order());
  }

  void check_index(std::span<const std::size_t> vars) const {
    if (vars.size() > static_cast<std::size_t>(kMaxJetOrder) ||
        (!is_constant() && static_cast<int>(vars.size()) > order())) {
      throw OrderError("multi-index of length " + std::to_string(vars.size()) +
                       " exceeds jet order " + std::to_string(order()));
    }
    if (!is_constant()) {
      for (auto v : vars) {
        if (v >= dim()) throw DimensionError("multi-index variable out of range");
      }
    }
  }

  Jet shifted(const T& c) const {
    Jet out = *this;
    out.coeffs_[0] = out.coeffs_[0] + c;
    return out;
  }

  Jet scaled(const T& c) const {
    Jet out = *this;
    for (auto& v : out.coeffs_) v = v * c;
    return out;
  }

  const detail::JetLayout* layout_ = nullptr;
  std::vector<T> coeffs_;
};

using Jet3 = Jet<double>;

// Elementary functions. Each supplies the value and first three derivatives
// at the constant term, computed in the coefficient algebra itself so that
// nested jets compose correctly.

template <typename T>
Jet<T> reciprocal(const Jet<T>& u) {
  const T& c = u.value();
  if (primal(c) == 0.0) throw DomainError("division by zero");
  const T r = T(1) / c;
  const T r2 = r * r;
  return u.compose({r, -r2, T(2) * r2 * r, T(-6) * r2 * r2});
}

template <typename T>
Jet<T> sin(const Jet<T>& u) {
  using std::cos;
  using std::sin;
  const T s = sin(u.value());
  const T c = cos(u.value());
  return u.compose({s, c, -s, -c});
}

template <typename T>
Jet<T> cos(const Jet<T>& u) {
  using std::cos;
  using std::sin;
  const T s = sin(u.value());
  const T c = cos(u.value());
  return u.compose({c, -s, -c, s});
}

template <typename T>
Jet<T> exp(const Jet<T>& u) {
  using std::exp;
  const T e = exp(u.value());
  return u.compose({e, e, e, e});
}

template <typename T>
Jet<T> log(const Jet<T>& u) {
  using std::log;
  const T& c = u.value();
  if (!(primal(c) > 0.0)) throw DomainError("ln of a non-positive argument");
  const T r = T(1) / c;
  return u.compose({log(c), r, -r * r, T(2) * r * r * r});
}

template <typename T>
Jet<T> sqrt(const Jet<T>& u) {
  using std::sqrt;
  const T& c = u.value();
  if (!(primal(c) > 0.0)) throw DomainError("sqrt of a non-positive argument");
  const T s = sqrt(c);
  const T r = T(1) / c;
  return u.compose({s, T(0.5) * s * r, T(-0.25) * s * r * r, T(0.375) * s * r * r * r});
}

}  // namespace hamgeo
