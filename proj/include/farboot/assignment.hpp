#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace farboot {

struct Assignment {
  /// col_for_row[i] is the column matched to row i.
  std::vector<std::size_t> col_for_row;
  /// Sum of the matched costs, re-accumulated from the input matrix.
  double cost = 0.0;
};

/// Exact minimum-cost perfect matching on a square cost matrix.
///
/// Shortest augmenting paths with dual potentials (the Jonker-Volgenant
/// formulation of the Hungarian method), O(m^3) worst case.
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace farboot
