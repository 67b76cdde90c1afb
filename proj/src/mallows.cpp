#include "farboot/mallows.hpp"

#include "farboot/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace farboot {

PointCloud::PointCloud(Eigen::MatrixXd atoms) : atoms_(std::move(atoms)) {
  if (atoms_.cols() == 0) throw std::invalid_argument("PointCloud: empty cloud");
  if (!atoms_.allFinite()) throw std::invalid_argument("PointCloud: non-finite atom");
}

PointCloud PointCloud::from_vectors(const std::vector<FuncVec>& xs) {
  if (xs.empty()) throw std::invalid_argument("PointCloud: empty cloud");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.front().dim()), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require_same_dim(xs.front().dim(), xs[i].dim(), "PointCloud");
    m.col(static_cast<Eigen::Index>(i)) = xs[i].coeffs();
  }
  return PointCloud(std::move(m));
}

PointCloud PointCloud::from_operators(const std::vector<HsOp>& ops) {
  if (ops.empty()) throw std::invalid_argument("PointCloud: empty cloud");
  const auto d = static_cast<Eigen::Index>(ops.front().dim());
  Eigen::MatrixXd m(d * d, static_cast<Eigen::Index>(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i) {
    require_same_dim(ops.front().dim(), ops[i].dim(), "PointCloud");
    m.col(static_cast<Eigen::Index>(i)) = ops[i].mat().reshaped();
  }
  return PointCloud(std::move(m));
}

namespace {

void check_pair(const PointCloud& xs, const PointCloud& ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("mallows: clouds must have equal size (" + std::to_string(xs.size()) + " vs " +
                                std::to_string(ys.size()) + ")");
  }
  require_same_dim(xs.dim(), ys.dim(), "mallows");
}

}  // namespace

Eigen::MatrixXd squared_distance_matrix(const PointCloud& xs, const PointCloud& ys) {
  require_same_dim(xs.dim(), ys.dim(), "squared_distance_matrix");
  const auto& a = xs.atoms();
  const auto& b = ys.atoms();
  Eigen::MatrixXd cost(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.cols(); ++i) cost(i, j) = (a.col(i) - b.col(j)).squaredNorm();
  }
  return cost;
}

MallowsResult mallows_match(const PointCloud& xs, const PointCloud& ys) {
  check_pair(xs, ys);
  const Assignment a = solve_assignment(squared_distance_matrix(xs, ys));
  MallowsResult r;
  r.distance = std::sqrt(std::max(0.0, a.cost) / static_cast<double>(xs.size()));
  r.matching = a.col_for_row;
  return r;
}

double mallows_d2(const PointCloud& xs, const PointCloud& ys) { return mallows_match(xs, ys).distance; }

double mallows_bruteforce(const PointCloud& xs, const PointCloud& ys) {
  check_pair(xs, ys);
  const std::size_t m = xs.size();
  if (m > kBruteForceMaxAtoms) throw std::invalid_argument("mallows_bruteforce: at most 8 atoms");
  const Eigen::MatrixXd cost = squared_distance_matrix(xs, ys);
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(std::max(0.0, best) / static_cast<double>(m));
}

double mallows_operator_d2(const std::vector<HsOp>& as, const std::vector<HsOp>& bs) {
  return mallows_d2(PointCloud::from_operators(as), PointCloud::from_operators(bs));
}

}  // namespace farboot
