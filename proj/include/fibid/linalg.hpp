#pragma once

// Exact rational scalars, dense matrices and univariate polynomials.
//
// Everything here is exact: scalars are GMP rationals kept in lowest terms,
// and no operation ever rounds. Matrices are small (companion matrices and
// their Kronecker products), so the dense row-major layout is deliberate.

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fibid/errors.hpp"

namespace fibid {

using Integer = mpz_class;
using Scalar = mpq_class;

/// Largest matrix dimension accepted by char_poly.
inline constexpr std::size_t kCharPolyDimensionCap = 64;

/// Parses "p" or "p/q" (q > 0) into a canonical rational.
inline Scalar parse_scalar(std::string_view text) {
  auto digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  std::string_view body = text;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) body.remove_prefix(1);
  const auto slash = body.find('/');
  const std::string_view num = body.substr(0, slash);
  const std::string_view den = slash == std::string_view::npos ? std::string_view{} : body.substr(slash + 1);
  if (!digits(num) || (slash != std::string_view::npos && !digits(den))) {
    throw UsageError("not an exact rational: '" + std::string(text) + "'");
  }
  Scalar value;
  if (value.set_str(std::string(text[0] == '+' ? text.substr(1) : text), 10) != 0 || value.get_den() == 0) {
    throw UsageError("not an exact rational: '" + std::string(text) + "'");
  }
  value.canonicalize();
  return value;
}

inline std::string to_string(const Scalar& s) { return s.get_str(); }

// ---------------------------------------------------------------------------
// Poly

/// Univariate polynomial over the rationals, coefficients lowest degree first.
/// The representation is trimmed: the leading coefficient is nonzero unless
/// the polynomial is zero (empty coefficient list).
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Scalar> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Poly(std::initializer_list<Scalar> coeffs) : coeffs_(coeffs) { trim(); }

  static Poly monomial(std::size_t degree, const Scalar& c = 1) {
    std::vector<Scalar> v(degree + 1);
    v[degree] = c;
    return Poly(std::move(v));
  }

  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Scalar>& coeffs() const { return coeffs_; }

  Scalar coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Scalar(0); }
  const Scalar& leading() const {
    if (is_zero()) throw UsageError("leading coefficient of the zero polynomial");
    return coeffs_.back();
  }

  Poly monic() const {
    if (is_zero()) return *this;
    Poly out = *this;
    const Scalar lead = leading();
    for (auto& c : out.coeffs_) c /= lead;
    return out;
  }

  Scalar operator()(const Scalar& x) const {
    Scalar acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<Scalar> v(std::max(a.coeffs_.size(), b.coeffs_.size()));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.coeff(i) + b.coeff(i);
    return Poly(std::move(v));
  }
  friend Poly operator-(const Poly& a, const Poly& b) {
    std::vector<Scalar> v(std::max(a.coeffs_.size(), b.coeffs_.size()));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.coeff(i) - b.coeff(i);
    return Poly(std::move(v));
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Scalar> v(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      if (a.coeffs_[i] == 0) continue;
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return Poly(std::move(v));
  }
  friend Poly operator*(const Scalar& c, const Poly& p) {
    std::vector<Scalar> v = p.coeffs_;
    for (auto& x : v) x *= c;
    return Poly(std::move(v));
  }
  friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }

  std::string to_string(std::string_view var = "x") const {
    if (is_zero()) return "0";
    std::ostringstream out;
    bool first = true;
    for (int d = degree(); d >= 0; --d) {
      const Scalar& c = coeffs_[static_cast<std::size_t>(d)];
      if (c == 0) continue;
      const Scalar mag = abs(c);
      if (first) {
        if (c < 0) out << "-";
      } else {
        out << (c < 0 ? " - " : " + ");
      }
      first = false;
      const bool unit = mag == 1;
      if (d == 0 || !unit) out << mag.get_str();
      if (d > 0) {
        if (!unit) out << "*";
        out << var;
        if (d > 1) out << "^" << d;
      }
    }
    return out.str();
  }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
  }

  std::vector<Scalar> coeffs_;
};

/// Euclidean division: a = q*b + r with deg r < deg b.
inline std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw UsageError("polynomial division by zero");
  std::vector<Scalar> rem = a.coeffs();
  const int db = b.degree();
  if (a.degree() < db) return {Poly{}, a};
  std::vector<Scalar> quot(static_cast<std::size_t>(a.degree() - db + 1));
  const Scalar& lead = b.leading();
  for (int d = a.degree(); d >= db; --d) {
    const Scalar q = rem[static_cast<std::size_t>(d)] / lead;
    quot[static_cast<std::size_t>(d - db)] = q;
    if (q == 0) continue;
    for (int i = 0; i <= db; ++i) rem[static_cast<std::size_t>(d - db + i)] -= q * b.coeff(static_cast<std::size_t>(i));
  }
  return {Poly(std::move(quot)), Poly(std::move(rem))};
}

/// Monic greatest common divisor (zero only when both inputs are zero).
inline Poly gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

/// Monic least common multiple.
inline Poly lcm(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  return divmod(a * b, gcd(a, b)).first.monic();
}

// ---------------------------------------------------------------------------
// Matrix

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::initializer_list<std::initializer_list<Scalar>> rows) : rows_(rows.size()) {
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw UsageError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Scalar& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Scalar& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<Scalar> row(std::size_t r) const {
    return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
            data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
  }

  Scalar trace() const {
    if (!square()) throw UsageError("trace of a non-square matrix");
    Scalar t = 0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw UsageError("matrix product dimension mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Scalar& aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    }
    return out;
  }
  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw UsageError("matrix sum dimension mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
    return out;
  }
  friend Matrix operator*(const Scalar& c, const Matrix& m) {
    Matrix out = m;
    for (auto& x : out.data_) x *= c;
    return out;
  }
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const Scalar& x) { return x == 0; });
  }

  std::vector<Scalar> apply(std::span<const Scalar> v) const {
    if (v.size() != cols_) throw UsageError("matrix-vector dimension mismatch");
    std::vector<Scalar> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }

  /// Nonnegative integer power by repeated squaring.
  Matrix pow(std::uint64_t e) const {
    if (!square()) throw UsageError("power of a non-square matrix");
    Matrix result = identity(rows_);
    Matrix base = *this;
    while (e > 0) {
      if (e & 1U) result = result * base;
      e >>= 1U;
      if (e > 0) base = base * base;
    }
    return result;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Scalar> data_;
};

/// Standard Kronecker product; dimensions multiply.
inline Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Scalar& aij = a(i, j);
      if (aij == 0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

namespace detail {

// Pivot choice: largest numerator magnitude among the nonzero candidates.
inline std::optional<std::size_t> pick_pivot(const Matrix& m, std::size_t col, std::size_t from) {
  std::optional<std::size_t> best;
  for (std::size_t r = from; r < m.rows(); ++r) {
    if (m(r, col) == 0) continue;
    if (!best || mpz_cmpabs(m(r, col).get_num_mpz_t(), m(*best, col).get_num_mpz_t()) > 0) best = r;
  }
  return best;
}

inline void swap_rows(Matrix& m, std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(a, c), m(b, c));
}

}  // namespace detail

/// Solves A·x = b exactly. Returns nullopt when the system is inconsistent;
/// under-determined systems get the particular solution with every free
/// variable set to zero.
inline std::optional<std::vector<Scalar>> solve_linear(const Matrix& a, std::span<const Scalar> b) {
  if (a.rows() != b.size()) throw UsageError("solve_linear: A has " + std::to_string(a.rows()) +
                                             " rows but b has " + std::to_string(b.size()) + " entries");
  const std::size_t n = a.cols();
  Matrix aug(a.rows(), n + 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) aug(r, c) = a(r, c);
    aug(r, n) = b[r];
  }
  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < aug.rows(); ++col) {
    const auto p = detail::pick_pivot(aug, col, row);
    if (!p) continue;
    detail::swap_rows(aug, row, *p);
    const Scalar inv = 1 / aug(row, col);
    for (std::size_t c = col; c <= n; ++c) aug(row, c) *= inv;
    for (std::size_t r = 0; r < aug.rows(); ++r) {
      if (r == row || aug(r, col) == 0) continue;
      const Scalar f = aug(r, col);
      for (std::size_t c = col; c <= n; ++c) aug(r, c) -= f * aug(row, c);
    }
    pivot_cols.push_back(col);
    ++row;
  }
  for (std::size_t r = row; r < aug.rows(); ++r)
    if (aug(r, n) != 0) return std::nullopt;
  std::vector<Scalar> x(n);
  for (std::size_t i = 0; i < pivot_cols.size(); ++i) x[pivot_cols[i]] = aug(i, n);
  return x;
}

/// Exact determinant by fraction-aware Gaussian elimination.
inline Scalar determinant(Matrix m) {
  if (!m.square()) throw UsageError("determinant of a non-square matrix");
  Scalar det = 1;
  for (std::size_t col = 0; col < m.rows(); ++col) {
    const auto p = detail::pick_pivot(m, col, col);
    if (!p) return 0;
    if (*p != col) {
      detail::swap_rows(m, col, *p);
      det = -det;
    }
    det *= m(col, col);
    for (std::size_t r = col + 1; r < m.rows(); ++r) {
      if (m(r, col) == 0) continue;
      const Scalar f = m(r, col) / m(col, col);
      for (std::size_t c = col; c < m.cols(); ++c) m(r, c) -= f * m(col, c);
    }
  }
  return det;
}

/// Inverse via Gauss-Jordan; nullopt when singular.
inline std::optional<Matrix> inverse(const Matrix& m) {
  if (!m.square()) throw UsageError("inverse of a non-square matrix");
  const std::size_t n = m.rows();
  if (determinant(m) == 0) return std::nullopt;
  Matrix out(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<Scalar> e(n);
    e[c] = 1;
    auto col = solve_linear(m, e);
    if (!col) return std::nullopt;
    for (std::size_t r = 0; r < n; ++r) out(r, c) = (*col)[r];
  }
  return out;
}

namespace detail {

// det of a small matrix with polynomial entries, Laplace expansion on row 0.
inline Poly poly_det(const std::vector<std::vector<Poly>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  Poly acc;
  for (std::size_t c = 0; c < n; ++c) {
    if (m[0][c].is_zero()) continue;
    std::vector<std::vector<Poly>> minor;
    minor.reserve(n - 1);
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Poly> row;
      row.reserve(n - 1);
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(std::move(row));
    }
    Poly term = m[0][c] * poly_det(minor);
    acc = (c % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

inline Poly char_poly_expansion(const Matrix& m) {
  const std::size_t n = m.rows();
  std::vector<std::vector<Poly>> xi(n, std::vector<Poly>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) xi[r][c] = r == c ? Poly{-m(r, c), 1} : Poly{-m(r, c)};
  return poly_det(xi);
}

// Faddeev-LeVerrier: M_k = A·M_{k-1} + c_{n-k+1}·I, c_{n-k} = -tr(A·M_k)/k.
inline Poly char_poly_faddeev(const Matrix& a) {
  const std::size_t n = a.rows();
  std::vector<Scalar> c(n + 1);
  c[n] = 1;
  Matrix mk(n, n);
  const Matrix id = Matrix::identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    mk = a * mk + c[n - k + 1] * id;
    c[n - k] = -(a * mk).trace() / Scalar(static_cast<long>(k));
  }
  return Poly(std::move(c));
}

}  // namespace detail

/// det(xI - M): monic, degree = dim M. Exact cofactor expansion for dim <= 4,
/// Faddeev-LeVerrier above that, capped at kCharPolyDimensionCap.
inline Poly char_poly(const Matrix& m) {
  if (!m.square()) throw UsageError("char_poly of a non-square matrix");
  if (m.rows() == 0) return Poly{1};
  if (m.rows() > kCharPolyDimensionCap)
    throw UsageError("char_poly: dimension " + std::to_string(m.rows()) + " exceeds cap " +
                     std::to_string(kCharPolyDimensionCap));
  return m.rows() <= 4 ? detail::char_poly_expansion(m) : detail::char_poly_faddeev(m);
}

/// p(M) by Horner's rule.
inline Matrix poly_at(const Poly& p, const Matrix& m) {
  if (!m.square()) throw UsageError("poly_at of a non-square matrix");
  Matrix acc(m.rows(), m.cols());
  const Matrix id = Matrix::identity(m.rows());
  for (int d = p.degree(); d >= 0; --d) acc = acc * m + p.coeff(static_cast<std::size_t>(d)) * id;
  return acc;
}

}  // namespace fibid
