#include "farboot/assignment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace farboot {

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("solve_assignment: cost matrix must be square");
  if (!cost.allFinite()) throw std::invalid_argument("solve_assignment: non-finite cost");
  const auto m = static_cast<std::size_t>(cost.rows());
  Assignment result;
  if (m == 0) return result;

  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = 0;
  // 1-based indexing; row 0 / column 0 is the virtual root of each search.
  std::vector<double> u(m + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> row_of_col(m + 1, none);
  std::vector<std::size_t> way(m + 1, 0);
  std::vector<double> min_slack(m + 1);
  std::vector<char> used(m + 1);

  for (std::size_t row = 1; row <= m; ++row) {
    row_of_col[0] = row;
    std::size_t col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t i0 = row_of_col[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = col0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col0 = col1;
    } while (row_of_col[col0] != none);
    do {
      const std::size_t col1 = way[col0];
      row_of_col[col0] = row_of_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  result.col_for_row.assign(m, 0);
  for (std::size_t j = 1; j <= m; ++j) result.col_for_row[row_of_col[j] - 1] = j - 1;
  for (std::size_t i = 0; i < m; ++i) {
    result.cost += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(result.col_for_row[i]));
  }
  return result;
}

}  // namespace farboot
