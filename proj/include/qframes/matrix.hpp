#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rational.hpp"

namespace qframes {

using RationalVector = std::vector<Rational>;

/// Dense row-major matrix over exact rationals. Sizes here are at most 6x6,
/// so the naive algorithms are fine.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

  static RationalMatrix identity(std::size_t n) {
    RationalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static RationalMatrix from_rows(const std::vector<RationalVector>& rows) {
    RationalMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < m.rows_; ++i)
      for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i].at(j);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  RationalVector row(std::size_t i) const {
    return RationalVector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                          data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }

  RationalMatrix transpose() const {
    RationalMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool is_zero() const {
    for (const auto& q : data_)
      if (q != 0) return false;
    return true;
  }

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
    RationalMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a(i, k) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
      }
    return c;
  }

  friend RationalVector operator*(const RationalMatrix& a, const RationalVector& v) {
    RationalVector out(a.rows_, Rational(0));
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * v[j];
    return out;
  }

  friend RationalMatrix operator+(RationalMatrix a, const RationalMatrix& b) {
    for (std::size_t k = 0; k < a.data_.size(); ++k) a.data_[k] += b.data_[k];
    return a;
  }
  friend RationalMatrix operator-(RationalMatrix a, const RationalMatrix& b) {
    for (std::size_t k = 0; k < a.data_.size(); ++k) a.data_[k] -= b.data_[k];
    return a;
  }
  friend RationalMatrix operator*(const Rational& s, RationalMatrix a) {
    for (auto& q : a.data_) q *= s;
    return a;
  }
  friend RationalMatrix operator-(RationalMatrix a) { return Rational(-1) * std::move(a); }

  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }
  friend bool operator!=(const RationalMatrix& a, const RationalMatrix& b) { return !(a == b); }

  /// Gauss-Jordan inverse; nullopt when singular.
  std::optional<RationalMatrix> inverse() const {
    if (rows_ != cols_) return std::nullopt;
    const std::size_t n = rows_;
    RationalMatrix a = *this;
    RationalMatrix inv = identity(n);
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      while (pivot < n && a(pivot, col) == 0) ++pivot;
      if (pivot == n) return std::nullopt;
      if (pivot != col) {
        for (std::size_t j = 0; j < n; ++j) {
          std::swap(a(col, j), a(pivot, j));
          std::swap(inv(col, j), inv(pivot, j));
        }
      }
      const Rational scale = 1 / a(col, col);
      for (std::size_t j = 0; j < n; ++j) {
        a(col, j) *= scale;
        inv(col, j) *= scale;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (i == col || a(i, col) == 0) continue;
        const Rational f = a(i, col);
        for (std::size_t j = 0; j < n; ++j) {
          a(i, j) -= f * a(col, j);
          inv(i, j) -= f * inv(col, j);
        }
      }
    }
    return inv;
  }

  Rational determinant() const {
    const std::size_t n = rows_;
    RationalMatrix a = *this;
    Rational det(1);
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      while (pivot < n && a(pivot, col) == 0) ++pivot;
      if (pivot == n) return Rational(0);
      if (pivot != col) {
        for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
        det = -det;
      }
      det *= a(col, col);
      for (std::size_t i = col + 1; i < n; ++i) {
        if (a(i, col) == 0) continue;
        const Rational f = a(i, col) / a(col, col);
        for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      }
    }
    return det;
  }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j).get_d();
    return m;
  }

  std::string to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < rows_; ++i) {
      os << "[";
      for (std::size_t j = 0; j < cols_; ++j) os << (j ? ", " : "") << (*this)(i, j).get_str();
      os << "]\n";
    }
    return os.str();
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

inline Rational dot(const RationalVector& a, const RationalVector& b) {
  Rational s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Eigen::VectorXd to_eigen(const RationalVector& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].get_d();
  return out;
}

}  // namespace qframes
