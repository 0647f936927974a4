#include "listing/subsolve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "listing/rng.hpp"

namespace listing {

namespace {

// Energies closer than this are compared by bit string instead.
bool near_tie(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)); }

// True when (e, x) should replace the incumbent (best_e, best).
bool better(double e, const BitVector& x, double best_e, const BitVector& best) {
  if (near_tie(e, best_e)) return x < best;
  return e < best_e;
}

double feasible_fraction(const QuboProblem& p, std::size_t feasible, std::size_t reads) {
  if (p.n == 0 || p.n * p.n != p.num_vars() || reads == 0) return 0.0;
  return static_cast<double>(feasible) / static_cast<double>(reads);
}

// c(a, b) = q(a, b) + q(b, a) off the diagonal, so flip updates read one row.
Matrix couplings(const Matrix& q) {
  Matrix c = Matrix::square(q.rows());
  for (std::size_t a = 0; a < q.rows(); ++a)
    for (std::size_t b = 0; b < q.cols(); ++b)
      if (a != b) c(a, b) = q(a, b) + q(b, a);
  return c;
}

void validate(const SubsolverParams& params) {
  if (params.num_reads == 0) throw std::invalid_argument("subsolver: num_reads must be positive");
  if (params.sweeps == 0) throw std::invalid_argument("subsolver: sweeps must be positive");
  if (params.beta_range) {
    const auto [b0, b1] = *params.beta_range;
    if (!(b0 > 0.0) || !(b1 > 0.0) || !(b0 < b1))
      throw std::invalid_argument("subsolver: need 0 < beta initial < beta final");
  }
}

}  // namespace

SubsolveOutcome exhaustive(const QuboProblem& p) {
  const std::size_t n = p.num_vars();
  if (n > kExhaustiveLimit)
    throw SizeLimitError("exhaustive: " + std::to_string(n) + " variables exceeds limit " +
                         std::to_string(kExhaustiveLimit));

  // Gray-code walk: one flip per step with incremental local fields
  // field[k] = sum_{b != k} (q(k, b) + q(b, k)) x_b.
  const Matrix c = couplings(p.q);
  BitVector x(n, 0);
  std::vector<double> field(n, 0.0);
  double e = 0.0;
  BitVector best = x;
  double best_e = 0.0;
  std::size_t feasible = 0;

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto k = static_cast<std::size_t>(std::countr_zero(step));
    const double sign = x[k] ? -1.0 : 1.0;
    e += sign * (p.q(k, k) + field[k]);
    x[k] ^= 1;
    const auto row = c.row(k);
    for (std::size_t b = 0; b < n; ++b) field[b] += sign * row[b];

    if (e < best_e - 1e-9 * (1.0 + std::abs(best_e))) {
      best = x;
      best_e = energy(p, x);
    } else if (near_tie(e, best_e) && x < best) {
      const double exact = energy(p, x);
      if (better(exact, x, best_e, best)) {
        best = x;
        best_e = exact;
      }
    }
  }
  if (p.n > 0 && p.n * p.n == n && decode(best, p.n).feasible()) feasible = 1;
  return {best, energy(p, best), 1, feasible_fraction(p, feasible, 1)};
}

BetaRange auto_beta_range(const Matrix& q) {
  double max_delta = 0.0;
  double min_coeff = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < q.rows(); ++a) {
    double bound = std::abs(q(a, a));
    if (q(a, a) != 0.0) min_coeff = std::min(min_coeff, std::abs(q(a, a)));
    for (std::size_t b = 0; b < q.cols(); ++b) {
      if (b == a) continue;
      const double c = std::abs(q(a, b) + q(b, a));
      bound += c;
      if (c != 0.0) min_coeff = std::min(min_coeff, c);
    }
    max_delta = std::max(max_delta, bound);
  }
  if (max_delta == 0.0) return {std::log(2.0), std::log(100.0)};
  BetaRange r{std::log(2.0) / max_delta, std::log(100.0) / min_coeff};
  if (!(r.initial < r.final)) r.final = r.initial * 50.0;
  return r;
}

SubsolveOutcome simulated_annealing(const QuboProblem& p, const SubsolverParams& params) {
  validate(params);
  const std::size_t n = p.num_vars();
  const BetaRange range = params.beta_range ? *params.beta_range : auto_beta_range(p.q);

  std::vector<double> betas(params.sweeps);
  for (std::size_t s = 0; s < params.sweeps; ++s) {
    const double t = params.sweeps == 1 ? 1.0 : static_cast<double>(s) / (params.sweeps - 1);
    betas[s] = range.initial * std::pow(range.final / range.initial, t);
  }

  const bool has_layout = p.n > 0 && p.n * p.n == n;
  SubsolveOutcome out;
  out.reads = params.num_reads;
  out.best_energy = std::numeric_limits<double>::infinity();
  std::size_t feasible = 0;

  const Matrix c = couplings(p.q);
  BitVector x(n);
  std::vector<double> field(n);
  for (std::size_t r = 0; r < params.num_reads; ++r) {
    Xoshiro256 rng(derive_seed(params.seed, r));
    for (auto& bit : x) bit = static_cast<std::uint8_t>(rng.next() >> 63);
    for (std::size_t k = 0; k < n; ++k) {
      double f = 0.0;
      for (std::size_t b = 0; b < n; ++b)
        if (x[b]) f += c(k, b);
      field[k] = f;
    }

    for (double beta : betas) {
      for (std::size_t k = 0; k < n; ++k) {
        const double sign = x[k] ? -1.0 : 1.0;
        const double delta = sign * (p.q(k, k) + field[k]);
        if (delta > 0.0 && rng.uniform() >= std::exp(-beta * delta)) continue;
        x[k] ^= 1;
        const auto row = c.row(k);
        for (std::size_t b = 0; b < n; ++b) field[b] += sign * row[b];
      }
    }

    if (has_layout && decode(x, p.n).feasible()) ++feasible;
    const double e = energy(p, x);
    if (out.best.empty() || better(e, x, out.best_energy, out.best)) {
      out.best = x;
      out.best_energy = e;
    }
  }
  out.feasible_fraction = feasible_fraction(p, feasible, params.num_reads);
  return out;
}

SubsolveOutcome ExhaustiveSolver::solve(const QuboProblem& p, std::uint64_t) const {
  return exhaustive(p);
}

AnnealingSolver::AnnealingSolver(SubsolverParams params) : params_(std::move(params)) {
  validate(params_);
}

SubsolveOutcome AnnealingSolver::solve(const QuboProblem& p, std::uint64_t seed) const {
  SubsolverParams run = params_;
  run.seed = seed;
  return simulated_annealing(p, run);
}

std::size_t AnnealingSolver::capacity() const { return std::numeric_limits<std::size_t>::max(); }

}  // namespace listing
