#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "listing/model.hpp"
#include "listing/qubo.hpp"
#include "listing/rng.hpp"
#include "listing/subsolve.hpp"

namespace listing {

/// How the decomposition loop picks each round's variables.
enum class Policy {
  /// N_s x P_s: a set of items and the positions they currently occupy.
  structured,
  /// Variables with the largest single-flip energy change ("qbsolv-like").
  energy_impact,
};

std::string to_string(Policy p);
/// Accepts "structured" and "energy-impact"; throws std::invalid_argument.
Policy parse_policy(const std::string& s);

struct DecompParams {
  std::size_t n_sub = 8;  ///< items per subproblem (n_sub^2 variables)
  std::size_t repeats = 5;
  double timeout_seconds = 20.0;
  std::size_t tabu_tenure = 3;
  std::uint64_t seed = 0;
  /// Chance that a structured round draws only from the top 2 * n_sub positions.
  double top_bias = 0.5;
  /// Penalty weight; default_m when absent.
  std::optional<double> m;
};

/// Recently selected index sets, oldest first. An index stays tabu for
/// `tenure` rounds after it was selected.
class TabuList {
 public:
  explicit TabuList(std::size_t tenure) : tenure_(tenure) {}

  void push(std::vector<std::size_t> selected);

  /// Tabu indices, dropping the oldest rounds until more than `needed` of the
  /// `universe` indices remain free (exactly `needed` only when nothing is
  /// tabu or universe == needed).
  std::vector<bool> active(std::size_t universe, std::size_t needed) const;

  std::size_t rounds() const { return history_.size(); }

 private:
  std::size_t tenure_;
  std::deque<std::vector<std::size_t>> history_;
};

struct StructuredSelection {
  std::vector<std::size_t> items;      ///< sorted
  std::vector<std::size_t> positions;  ///< sorted; exactly the positions of `items`
};

/// Picks n_sub non-tabu items uniformly at random; with probability top_bias
/// the draw is restricted to items currently on the top 2 * n_sub positions
/// (when enough of them are free). Throws std::invalid_argument if n_sub > n.
StructuredSelection select_structured(const Assignment& current, std::size_t n_sub,
                                      Xoshiro256& rng, const TabuList& tabu,
                                      double top_bias = 0.5);

/// Variables ordered item-major over items x positions; a reduced QUBO over
/// them keeps an n_sub x n_sub assignment layout.
std::vector<std::size_t> structured_vars(const StructuredSelection& sel, std::size_t n);

/// Flip delta of bit k at x.
double flip_delta(const QuboProblem& p, std::span<const std::uint8_t> x, std::size_t k);

/// The `size` variables with the largest |flip delta| at x, ties to the lower
/// index, skipping any index flagged in `excluded`. Result sorted ascending.
/// Throws std::invalid_argument if size exceeds the free variable count.
std::vector<std::size_t> select_energy_impact(const QuboProblem& p,
                                              std::span<const std::uint8_t> x, std::size_t size,
                                              const std::vector<bool>& excluded = {});

/// A QUBO over `vars` with every other variable clamped to its value in x:
///   energy(reduced, y) + clamp_offset == energy(p, merge(x, vars, y)).
struct ReducedQubo {
  QuboProblem problem;
  double clamp_offset = 0.0;
  std::vector<std::size_t> vars;
};

/// Throws std::invalid_argument for duplicate or out-of-range vars.
ReducedQubo extract_subqubo(const QuboProblem& p, std::span<const std::size_t> vars,
                            std::span<const std::uint8_t> x);

BitVector merge(std::span<const std::uint8_t> x, std::span<const std::size_t> vars,
                std::span<const std::uint8_t> y);

/// A structured subproblem: items N_s, the positions P_s they hold, and the
/// clamped QUBO over N_s x P_s.
struct Subproblem {
  std::vector<std::size_t> items;
  std::vector<std::size_t> positions;
  std::vector<std::size_t> var_map;
  QuboProblem reduced;
  double clamp_offset = 0.0;
};

Subproblem make_subproblem(const QuboProblem& p, const Assignment& current,
                           const StructuredSelection& sel);

struct TraceEntry {
  std::size_t round = 0;
  double elapsed_ms = 0.0;
  /// Candidate of this round (the incumbent for round 0).
  ObjectiveBreakdown breakdown;
  bool accepted = false;
  /// Merged subsolver output was already a valid encoding before repair.
  bool raw_feasible = false;
  /// Row + column violations of the incumbent after this round.
  std::size_t incumbent_violations = 0;
};

struct SolveReport {
  Assignment best;
  ObjectiveBreakdown breakdown;
  double qubo_energy = 0.0;
  double offset = 0.0;
  std::size_t rounds = 0;
  std::vector<TraceEntry> trace;
  double elapsed_seconds = 0.0;
};

/// Subsolver seed used in round `round` of a run seeded with `seed`.
std::uint64_t round_seed(std::uint64_t seed, std::size_t round);

/// Large-neighbourhood search on the penalised QUBO, warm-started from the
/// linear assignment optimum. Each round selects a subproblem by `policy`,
/// solves it with `solver`, repairs the merged vector if needed and keeps it
/// only on strict energy improvement. Stops after params.repeats
/// consecutive non-improving rounds or params.timeout_seconds.
SolveReport solve_decomposed(const ListingInstance& inst, Policy policy, const Subsolver& solver,
                             const DecompParams& params);

/// Linear assignment over the whole list, then the top_k head re-optimised
/// as a QAP (exactly when top_k <= kBruteForceLimit, by the structured
/// decomposition otherwise). Positions >= top_k keep the LAP placement.
SolveReport two_stage_solve(const ListingInstance& inst, std::size_t top_k,
                            const Subsolver& solver, const DecompParams& params);

/// CSV: round,elapsed_ms,objective,sales_term,diversity_term,accepted
std::string trace_csv(const SolveReport& report);

}  // namespace listing
