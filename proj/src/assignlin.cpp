#include "listing/assignlin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace listing {

LapResult solve_lap(const Matrix& sales) {
  if (!sales.is_square()) throw std::invalid_argument("solve_lap: matrix must be square");
  for (double v : sales.values())
    if (!std::isfinite(v)) throw std::invalid_argument("solve_lap: non-finite entry");

  const std::size_t n = sales.rows();
  if (n == 0) return {Assignment{}, 0.0};

  // Rows are items, columns positions; cost = -sales. 1-based arrays with a
  // virtual column 0 as in the classic potentials formulation.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = row_of_col[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -sales(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> item_at(n);
  for (std::size_t j = 1; j <= n; ++j) item_at[j - 1] = row_of_col[j] - 1;
  LapResult r{Assignment(std::move(item_at)), 0.0};
  for (std::size_t j = 0; j < n; ++j) r.value += sales(r.assignment.item_at(j), j);
  return r;
}

std::pair<Assignment, ObjectiveBreakdown> brute_force_qap(const ListingInstance& inst) {
  const std::size_t n = inst.n;
  if (n > kBruteForceLimit)
    throw SizeLimitError("brute_force_qap: n=" + std::to_string(n) + " exceeds limit " +
                         std::to_string(kBruteForceLimit));
  if (n == 0) throw std::invalid_argument("brute_force_qap: empty instance");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  // Objective evaluated inline on the raw permutation; the Assignment is
  // only materialised for improvements.
  const auto evaluate = [&](const std::vector<std::size_t>& p) {
    double s = 0.0;
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      s += inst.sales(p[j], j);
      for (std::size_t l = 0; l < n; ++l)
        if (inst.adjacency(j, l) != 0.0) d += inst.adjacency(j, l) * inst.similarity(p[j], p[l]);
    }
    return s - inst.w * d;
  };

  std::vector<std::size_t> best = perm;
  double best_value = evaluate(perm);
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double value = evaluate(perm);
    if (value > best_value) {
      best_value = value;
      best = perm;
    }
  }
  Assignment a(std::move(best));
  return {a, qap_objective(inst, a)};
}

}  // namespace listing
