#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace farboot {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A curve stored as its coefficient vector in a fixed orthonormal basis of
/// dimension d. All entries are finite.
class FuncVec {
 public:
  FuncVec() = default;
  explicit FuncVec(std::size_t dim);
  explicit FuncVec(Eigen::VectorXd coeffs);
  FuncVec(std::initializer_list<double> coeffs);

  /// Basis vector e_j (zero-based index).
  static FuncVec basis(std::size_t dim, std::size_t j);

  std::size_t dim() const { return static_cast<std::size_t>(coeffs_.size()); }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  double operator[](std::size_t i) const { return coeffs_(static_cast<Eigen::Index>(i)); }

  FuncVec& operator+=(const FuncVec& other);
  FuncVec& operator-=(const FuncVec& other);
  FuncVec& operator*=(double s);

  friend FuncVec operator+(FuncVec a, const FuncVec& b) { return a += b; }
  friend FuncVec operator-(FuncVec a, const FuncVec& b) { return a -= b; }
  friend FuncVec operator*(double s, FuncVec a) { return a *= s; }
  friend bool operator==(const FuncVec& a, const FuncVec& b) {
    return a.coeffs_.size() == b.coeffs_.size() && a.coeffs_ == b.coeffs_;
  }

 private:
  Eigen::VectorXd coeffs_;
};

/// A bounded linear operator on the d-dimensional space, stored as its d x d
/// coefficient matrix so that applying the operator is a matrix-vector product.
class HsOp {
 public:
  HsOp() = default;
  explicit HsOp(std::size_t dim);
  explicit HsOp(Eigen::MatrixXd mat);

  static HsOp identity(std::size_t dim);
  static HsOp diagonal(std::span<const double> entries);

  std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }
  const Eigen::MatrixXd& mat() const { return mat_; }

  /// Applies the operator to x.
  FuncVec operator()(const FuncVec& x) const;

  HsOp& operator+=(const HsOp& other);
  HsOp& operator-=(const HsOp& other);
  HsOp& operator*=(double s);

  friend HsOp operator+(HsOp a, const HsOp& b) { return a += b; }
  friend HsOp operator-(HsOp a, const HsOp& b) { return a -= b; }
  friend HsOp operator*(double s, HsOp a) { return a *= s; }
  /// Composition: (a * b)(x) = a(b(x)).
  friend HsOp operator*(const HsOp& a, const HsOp& b);
  friend bool operator==(const HsOp& a, const HsOp& b) {
    return a.mat_.rows() == b.mat_.rows() && a.mat_ == b.mat_;
  }

 private:
  Eigen::MatrixXd mat_;
};

double inner(const FuncVec& x, const FuncVec& y);
double norm(const FuncVec& x);

/// Rank-one operator x -> <y, x> z, stored as z y^T.
HsOp kron(const FuncVec& y, const FuncVec& z);

HsOp adjoint(const HsOp& a);

/// outer o inner
HsOp compose(const HsOp& outer, const HsOp& inner);

/// a^k for k >= 0 (a^0 is the identity).
HsOp power(const HsOp& a, unsigned k);

/// Operator norm: largest singular value.
double op_norm(const HsOp& a);
/// Hilbert-Schmidt (Frobenius) norm.
double hs_norm(const HsOp& a);
double hs_inner(const HsOp& a, const HsOp& b);

void require_same_dim(std::size_t a, std::size_t b, const char* what);

}  // namespace farboot
