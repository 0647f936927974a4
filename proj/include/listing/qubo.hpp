#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "listing/model.hpp"

namespace listing {

/// Binary decision vector. Bit var_index(i, j, n) is 1 iff item i sits at
/// position j.
using BitVector = std::vector<std::uint8_t>;

inline std::size_t var_index(std::size_t item, std::size_t position, std::size_t n) {
  return item * n + position;
}

/// Minimise x^T q x (+ offset) over binary x.
///
/// q is kept symmetric: a coupling c between distinct variables a and b is
/// stored as c/2 in both q(a, b) and q(b, a). offset is the constant that the
/// quadratic form drops, so that for feasible x
///   energy(x) + offset == -qap_objective(x).objective.
struct QuboProblem {
  /// Underlying list size when the variables form an n x n assignment grid,
  /// 0 otherwise (e.g. an arbitrary variable subset).
  std::size_t n = 0;
  Matrix q;
  double offset = 0.0;
  double m = 0.0;  ///< constraint penalty weight

  std::size_t num_vars() const { return q.rows(); }
};

struct DecodeResult {
  std::optional<Assignment> assignment;
  std::size_t row_violations = 0;  ///< items not placed exactly once
  std::size_t col_violations = 0;  ///< positions not filled exactly once

  bool feasible() const { return assignment.has_value(); }
};

/// Sales and diversity terms only: -s on the diagonal, w * f * d couplings.
Matrix build_core_matrix(const ListingInstance& inst);

/// Largest absolute QUBO coefficient of the penalty-free matrix, read in
/// upper-triangular form (diagonal q(a, a), off-diagonal q(a, b) + q(b, a)).
/// Returns 1.0 for an all-zero matrix.
double default_m(const Matrix& core);

/// Penalised QUBO of the listing QAP. m defaults to default_m of the core.
/// Throws std::invalid_argument for a negative m or an invalid instance.
QuboProblem build_qubo(const ListingInstance& inst, std::optional<double> m = std::nullopt);

/// x^T q x without the offset.
double energy(const QuboProblem& p, std::span<const std::uint8_t> x);
double energy(const Matrix& q, std::span<const std::uint8_t> x);

DecodeResult decode(std::span<const std::uint8_t> x, std::size_t n);
BitVector encode(const Assignment& a);

/// Turns any vector into a feasible encoding. Cells that are the sole 1 in
/// both their row and column are kept; the remaining items are then placed
/// greedily on the remaining positions by descending sales.
BitVector repair(std::span<const std::uint8_t> x, const QuboProblem& p,
                 const ListingInstance& inst);

/// Text export: "N offset M" then one "row col value" line per non-zero
/// upper-triangle coefficient (value = q(a, b) + q(b, a) off the diagonal).
/// Floats use the shortest round-trip decimal form.
std::string export_qubo(const QuboProblem& p);
QuboProblem import_qubo(std::string_view text);

}  // namespace listing
