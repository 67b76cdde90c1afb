#pragma once

#include "farboot/hilbert.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace farboot {

/// An equal-weight empirical measure: m atoms stored as the columns of a
/// p x m matrix. Operator atoms are embedded by flattening their d x d
/// coefficient matrix (p = d^2), which carries the Hilbert-Schmidt geometry.
class PointCloud {
 public:
  explicit PointCloud(Eigen::MatrixXd atoms);

  static PointCloud from_vectors(const std::vector<FuncVec>& xs);
  static PointCloud from_operators(const std::vector<HsOp>& ops);

  std::size_t size() const { return static_cast<std::size_t>(atoms_.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(atoms_.rows()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }

 private:
  Eigen::MatrixXd atoms_;
};

struct MallowsResult {
  double distance = 0.0;
  /// matching[i] is the index in the second cloud coupled to atom i of the first.
  std::vector<std::size_t> matching;
};

/// Squared Euclidean distances between all atom pairs.
Eigen::MatrixXd squared_distance_matrix(const PointCloud& xs, const PointCloud& ys);

/// Exact Mallows (Wasserstein-2) distance between two equal-size clouds.
MallowsResult mallows_match(const PointCloud& xs, const PointCloud& ys);
double mallows_d2(const PointCloud& xs, const PointCloud& ys);

inline constexpr std::size_t kBruteForceMaxAtoms = 8;

/// Same quantity by enumerating all m! couplings; m <= 8.
double mallows_bruteforce(const PointCloud& xs, const PointCloud& ys);

/// Mallows distance between operator clouds under the Hilbert-Schmidt
/// embedding. Since op_norm <= hs_norm pointwise, this upper-bounds the
/// distance taken with respect to the operator norm.
double mallows_operator_d2(const std::vector<HsOp>& as, const std::vector<HsOp>& bs);

}  // namespace farboot
