#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "listing/qubo.hpp"

namespace listing {

struct BetaRange {
  double initial = 0.0;
  double final = 0.0;
};

struct SubsolverParams {
  std::size_t num_reads = 1000;
  std::size_t sweeps = 1000;
  /// Geometric inverse-temperature schedule; derived from q when absent.
  std::optional<BetaRange> beta_range;
  std::uint64_t seed = 0;
};

struct SubsolveOutcome {
  BitVector best;
  double best_energy = 0.0;
  std::size_t reads = 0;
  /// Fraction of reads ending on a valid assignment encoding. Always 0 for
  /// problems without an assignment layout (QuboProblem::n == 0).
  double feasible_fraction = 0.0;
};

/// Largest variable count the exhaustive solver accepts.
inline constexpr std::size_t kExhaustiveLimit = 24;

/// Global minimum over all 2^N vectors; ties go to the lexicographically
/// smallest bit string. Throws SizeLimitError past kExhaustiveLimit.
SubsolveOutcome exhaustive(const QuboProblem& p);

/// initial = ln 2 / max single-flip bound, final = ln 100 / smallest non-zero
/// coefficient magnitude.
BetaRange auto_beta_range(const Matrix& q);

/// Single-spin-flip Metropolis annealing, one chain per read. Read r draws
/// from its own xoshiro256** stream seeded with derive_seed(seed, r), so the
/// best-of-k result is a prefix minimum of a fixed sequence.
SubsolveOutcome simulated_annealing(const QuboProblem& p, const SubsolverParams& params);

/// Pluggable QUBO solver used inside the decomposition loop.
class Subsolver {
 public:
  virtual ~Subsolver() = default;
  virtual SubsolveOutcome solve(const QuboProblem& p, std::uint64_t seed) const = 0;
  virtual std::string name() const = 0;
  /// Largest problem the solver accepts, in variables.
  virtual std::size_t capacity() const = 0;
};

class ExhaustiveSolver final : public Subsolver {
 public:
  SubsolveOutcome solve(const QuboProblem& p, std::uint64_t seed) const override;
  std::string name() const override { return "exhaustive"; }
  std::size_t capacity() const override { return kExhaustiveLimit; }
};

class AnnealingSolver final : public Subsolver {
 public:
  explicit AnnealingSolver(SubsolverParams params);
  /// Runs with params() but the given seed.
  SubsolveOutcome solve(const QuboProblem& p, std::uint64_t seed) const override;
  std::string name() const override { return "sa"; }
  std::size_t capacity() const override;
  const SubsolverParams& params() const { return params_; }

 private:
  SubsolverParams params_;
};

}  // namespace listing
