#ifndef XREG_ASSIGNMENT_HPP_
#define XREG_ASSIGNMENT_HPP_

// Maximum-profit linear assignment (Hungarian method with potentials) over
// rectangular matrices, with lexicographic tie-breaking among optima.

#include "xreg/geometry.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace xreg {

struct Assignment {
  std::vector<int> row_to_col;  // -1 for unmatched rows
  double value = 0.0;           // sum of matched profits

  Eigen::MatrixXd matrix(Eigen::Index cols) const {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(row_to_col.size()), cols);
    for (std::size_t i = 0; i < row_to_col.size(); ++i) {
      if (row_to_col[i] >= 0) x(static_cast<Eigen::Index>(i), row_to_col[i]) = 1.0;
    }
    return x;
  }

  std::size_t matched() const {
    return static_cast<std::size_t>(std::count_if(row_to_col.begin(), row_to_col.end(), [](int c) { return c >= 0; }));
  }
};

namespace detail {

// Reorders an optimal matching into the lexicographically smallest optimal
// one (row 0's column as small as possible, then row 1's, ...). Only edges
// with zero reduced cost can appear in an optimal matching, so candidates are
// swapped in along alternating cycles of that tight subgraph.
// Rows >= real_rows and columns >= real_cols are padding: which padding
// column a row takes never shows in the result, so those ties are skipped.
inline void lexicographic_optimum(const std::vector<std::vector<char>>& tight, std::vector<int>& row_col,
                                  int real_rows, int real_cols) {
  const int n = static_cast<int>(row_col.size());
  std::vector<int> col_row(n);
  for (int r = 0; r < n; ++r) col_row[row_col[r]] = r;
  std::vector<char> fixed_col(n, 0);
  std::vector<int> prev_col(n);
  std::vector<char> seen(n);
  for (int i = 0; i < real_rows; ++i) {
    for (int j = 0; j < n; ++j) {
      if (row_col[i] == j || (j >= real_cols && row_col[i] >= real_cols)) break;
      if (fixed_col[j] || !tight[i][j]) continue;
      // Re-house row col_row[j] so that the column freed by row i is reused.
      const int target = row_col[i];
      const int start = col_row[j];
      std::fill(seen.begin(), seen.end(), 0);
      std::deque<int> queue{start};
      std::vector<int> via(n, -1);  // via[row] = column through which row was reached
      std::vector<char> row_seen(n, 0);
      row_seen[start] = 1;
      int end_row = -1;
      while (!queue.empty() && end_row < 0) {
        const int r = queue.front();
        queue.pop_front();
        for (int c = 0; c < n; ++c) {
          if (!tight[r][c] || fixed_col[c] || c == j || seen[c]) continue;
          seen[c] = 1;
          prev_col[c] = r;
          if (c == target) {
            end_row = r;
            break;
          }
          const int nr = col_row[c];
          if (nr == i || row_seen[nr]) continue;
          row_seen[nr] = 1;
          via[nr] = c;
          queue.push_back(nr);
        }
      }
      if (end_row < 0) continue;
      // Shift along the path: end_row takes target, its old column passes on.
      int c = target;
      int r = end_row;
      for (;;) {
        const int old = row_col[r];
        row_col[r] = c;
        col_row[c] = r;
        if (r == start) break;
        c = old;
        r = prev_col[c];
      }
      row_col[i] = j;
      col_row[j] = i;
      break;
    }
    fixed_col[row_col[i]] = 1;
  }
}

}  // namespace detail

/// Maximizes sum(profit[i][j] * x[i][j]) over partial permutations that match
/// min(n1, n2) pairs. Among optimal assignments, returns the lexicographically
/// smallest vector of row->column choices.
inline Assignment solve_lap(const Eigen::MatrixXd& profit) {
  const auto n1 = static_cast<int>(profit.rows());
  const auto n2 = static_cast<int>(profit.cols());
  if (n1 == 0 || n2 == 0) return {std::vector<int>(static_cast<std::size_t>(n1), -1), 0.0};
  if (profit.hasNaN()) throw Error("assignment", "profit matrix contains NaN");
  if (!profit.allFinite()) throw Error("assignment", "profit matrix contains an infinite entry");

  const int n = std::max(n1, n2);
  // Square cost matrix; padding cells cost 0, which is a constant per padded
  // row/column and cannot change which real pairs are chosen.
  std::vector<double> cost(static_cast<std::size_t>(n) * n, 0.0);
  double scale = 0.0;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      cost[static_cast<std::size_t>(i) * n + j] = -profit(i, j);
      scale = std::max(scale, std::abs(profit(i, j)));
    }
  }
  auto c = [&](int i, int j) { return cost[static_cast<std::size_t>(i) * n + j]; };

  // Shortest augmenting path Hungarian, 1-based with a virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_col(n);
  for (int j = 1; j <= n; ++j) row_col[p[j] - 1] = j - 1;

  const double tol = 1e-10 * std::max(1.0, scale);
  std::vector<std::vector<char>> tight(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) tight[i][j] = (c(i, j) - u[i + 1] - v[j + 1]) <= tol;
    tight[i][row_col[i]] = 1;
  }
  detail::lexicographic_optimum(tight, row_col, n1, n2);

  Assignment out;
  out.row_to_col.assign(static_cast<std::size_t>(n1), -1);
  for (int i = 0; i < n1; ++i) {
    if (row_col[i] < n2) {
      out.row_to_col[i] = row_col[i];
      out.value += profit(i, row_col[i]);
    }
  }
  return out;
}

/// Projects a relaxed assignment onto the nearest (max inner product)
/// discrete one.
inline Assignment discretize(const Eigen::MatrixXd& relaxed) { return solve_lap(relaxed); }

}  // namespace xreg

#endif  // XREG_ASSIGNMENT_HPP_
