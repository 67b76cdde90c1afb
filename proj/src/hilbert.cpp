#include "farboot/hilbert.hpp"

#include <string>
#include <utility>

namespace farboot {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

FuncVec::FuncVec(std::size_t dim) : coeffs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))) {}

FuncVec::FuncVec(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {
  if (!coeffs_.allFinite()) {
    throw std::invalid_argument("FuncVec: non-finite coefficient");
  }
}

FuncVec::FuncVec(std::initializer_list<double> coeffs)
    : coeffs_(static_cast<Eigen::Index>(coeffs.size())) {
  Eigen::Index i = 0;
  for (double c : coeffs) coeffs_(i++) = c;
  if (!coeffs_.allFinite()) {
    throw std::invalid_argument("FuncVec: non-finite coefficient");
  }
}

FuncVec FuncVec::basis(std::size_t dim, std::size_t j) {
  if (j >= dim) throw std::out_of_range("FuncVec::basis: index out of range");
  FuncVec e(dim);
  e.coeffs_(static_cast<Eigen::Index>(j)) = 1.0;
  return e;
}

FuncVec& FuncVec::operator+=(const FuncVec& other) {
  require_same_dim(dim(), other.dim(), "FuncVec +");
  coeffs_ += other.coeffs_;
  return *this;
}

FuncVec& FuncVec::operator-=(const FuncVec& other) {
  require_same_dim(dim(), other.dim(), "FuncVec -");
  coeffs_ -= other.coeffs_;
  return *this;
}

FuncVec& FuncVec::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

HsOp::HsOp(std::size_t dim)
    : mat_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {}

HsOp::HsOp(Eigen::MatrixXd mat) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols()) {
    throw DimensionError("HsOp: coefficient matrix must be square");
  }
  if (!mat_.allFinite()) {
    throw std::invalid_argument("HsOp: non-finite coefficient");
  }
}

HsOp HsOp::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return HsOp(Eigen::MatrixXd::Identity(d, d));
}

HsOp HsOp::diagonal(std::span<const double> entries) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) v(static_cast<Eigen::Index>(i)) = entries[i];
  return HsOp(Eigen::MatrixXd(v.asDiagonal()));
}

FuncVec HsOp::operator()(const FuncVec& x) const {
  require_same_dim(dim(), x.dim(), "HsOp apply");
  return FuncVec(Eigen::VectorXd(mat_ * x.coeffs()));
}

HsOp& HsOp::operator+=(const HsOp& other) {
  require_same_dim(dim(), other.dim(), "HsOp +");
  mat_ += other.mat_;
  return *this;
}

HsOp& HsOp::operator-=(const HsOp& other) {
  require_same_dim(dim(), other.dim(), "HsOp -");
  mat_ -= other.mat_;
  return *this;
}

HsOp& HsOp::operator*=(double s) {
  mat_ *= s;
  return *this;
}

HsOp operator*(const HsOp& a, const HsOp& b) {
  require_same_dim(a.dim(), b.dim(), "HsOp compose");
  return HsOp(Eigen::MatrixXd(a.mat_ * b.mat_));
}

double inner(const FuncVec& x, const FuncVec& y) {
  require_same_dim(x.dim(), y.dim(), "inner");
  return x.coeffs().dot(y.coeffs());
}

double norm(const FuncVec& x) { return x.coeffs().norm(); }

HsOp kron(const FuncVec& y, const FuncVec& z) {
  require_same_dim(y.dim(), z.dim(), "kron");
  return HsOp(Eigen::MatrixXd(z.coeffs() * y.coeffs().transpose()));
}

HsOp adjoint(const HsOp& a) { return HsOp(Eigen::MatrixXd(a.mat().transpose())); }

HsOp compose(const HsOp& outer, const HsOp& inner) { return outer * inner; }

HsOp power(const HsOp& a, unsigned k) {
  HsOp result = HsOp::identity(a.dim());
  HsOp base = a;
  while (k > 0) {
    if (k & 1U) result = result * base;
    k >>= 1U;
    if (k > 0) base = base * base;
  }
  return result;
}

double op_norm(const HsOp& a) {
  if (a.dim() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.mat());
  return svd.singularValues()(0);
}

double hs_norm(const HsOp& a) { return a.mat().norm(); }

double hs_inner(const HsOp& a, const HsOp& b) {
  require_same_dim(a.dim(), b.dim(), "hs_inner");
  return a.mat().cwiseProduct(b.mat()).sum();
}

}  // namespace farboot
