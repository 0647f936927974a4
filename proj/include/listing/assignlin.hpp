#pragma once

#include <utility>

#include "listing/model.hpp"

namespace listing {

struct LapResult {
  Assignment assignment;
  double value = 0.0;  ///< sum of sales(item_at(j), j)
};

/// Maximum-weight perfect matching of items to positions (the w = 0 listing
/// problem). Shortest augmenting path Hungarian method on the negated
/// matrix, O(n^3). Throws std::invalid_argument for non-square or
/// non-finite input.
LapResult solve_lap(const Matrix& sales);

/// Largest n accepted by brute_force_qap.
inline constexpr std::size_t kBruteForceLimit = 10;

/// Exact QAP optimum by enumerating all n! permutations in lexicographic
/// order; the first maximiser wins ties. Throws SizeLimitError past
/// kBruteForceLimit.
std::pair<Assignment, ObjectiveBreakdown> brute_force_qap(const ListingInstance& inst);

}  // namespace listing
