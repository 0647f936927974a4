#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "listing/decomp.hpp"
#include "listing/ingest.hpp"
#include "listing/subsolve.hpp"

namespace listing {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;

/// Entry point of the `listing` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SweepRow {
  double w = 0.0;
  ObjectiveBreakdown breakdown;
};

/// Re-solves the instance for each w. Uses brute force when n <= 10 and the
/// structured decomposition otherwise.
std::vector<SweepRow> sweep_w(const ListingInstance& inst, const std::vector<double>& w_values,
                              const Subsolver& solver, const DecompParams& params);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct BenchOptions {
  std::vector<std::size_t> sizes{12, 16, 20, 24};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  SyntheticProfile profile;
  DecompParams decomp;
  SubsolverParams subsolver{100, 500, std::nullopt, 0};
};

struct BenchRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  Policy policy = Policy::structured;
  /// Penalised QUBO value energy + offset (minimised; equals -QAP objective).
  double objective = 0.0;
  double elapsed_seconds = 0.0;
  SolveReport report;
};

struct BenchSummaryRow {
  std::size_t n = 0;
  double mean_structured = 0.0;
  double mean_baseline = 0.0;
  double gap = 0.0;  ///< mean_structured - mean_baseline
};

/// Paired runs: for every (size, seed) both policies solve the same
/// synthetic instance with the same seed and budget. Rows are ordered by
/// (n, seed, policy).
std::vector<BenchRow> bench_decomp(const BenchOptions& opt);
std::vector<BenchSummaryRow> summarize_bench(const std::vector<BenchRow>& rows);
/// CSV: n,seed,policy,objective,elapsed; elapsed is omitted when
/// include_elapsed is false.
std::string bench_csv(const std::vector<BenchRow>& rows, bool include_elapsed = true);
std::string bench_summary_csv(const std::vector<BenchSummaryRow>& rows);

}  // namespace listing
