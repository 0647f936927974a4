#include "listing/decomp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "listing/assignlin.hpp"
#include "listing/io.hpp"

namespace listing {

std::string to_string(Policy p) {
  return p == Policy::structured ? "structured" : "energy-impact";
}

Policy parse_policy(const std::string& s) {
  if (s == "structured") return Policy::structured;
  if (s == "energy-impact" || s == "energy_impact") return Policy::energy_impact;
  throw std::invalid_argument("unknown policy '" + s + "'");
}

void TabuList::push(std::vector<std::size_t> selected) {
  if (tenure_ == 0) return;
  history_.push_back(std::move(selected));
  while (history_.size() > tenure_) history_.pop_front();
}

std::vector<bool> TabuList::active(std::size_t universe, std::size_t needed) const {
  for (std::size_t skip = 0; skip <= history_.size(); ++skip) {
    std::vector<bool> flags(universe, false);
    std::size_t count = 0;
    for (std::size_t r = skip; r < history_.size(); ++r)
      for (std::size_t idx : history_[r])
        if (idx < universe && !flags[idx]) {
          flags[idx] = true;
          ++count;
        }
    // A free pool of exactly `needed` would force the draw and, on small
    // instances, make selections alternate between two complementary sets.
    const std::size_t free = universe - count;
    if (free > needed || (free == needed && (count == 0 || universe == needed))) return flags;
  }
  return std::vector<bool>(universe, false);
}

StructuredSelection select_structured(const Assignment& current, std::size_t n_sub,
                                      Xoshiro256& rng, const TabuList& tabu, double top_bias) {
  const std::size_t n = current.size();
  if (n_sub == 0 || n_sub > n)
    throw std::invalid_argument("select_structured: need 0 < n_sub <= n");

  const std::vector<bool> is_tabu = tabu.active(n, n_sub);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i)
    if (!is_tabu[i]) pool.push_back(i);

  if (rng.uniform() < top_bias) {
    const std::size_t top = std::min(2 * n_sub, n);
    std::vector<std::size_t> head;
    for (std::size_t j = 0; j < top; ++j)
      if (!is_tabu[current.item_at(j)]) head.push_back(current.item_at(j));
    if (head.size() >= n_sub) {
      std::sort(head.begin(), head.end());
      pool = std::move(head);
    }
  }

  for (std::size_t k = 0; k < n_sub; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(pool.size() - k));
    std::swap(pool[k], pool[pick]);
  }
  StructuredSelection sel;
  sel.items.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_sub));
  std::sort(sel.items.begin(), sel.items.end());
  const auto pos = current.positions();
  for (std::size_t i : sel.items) sel.positions.push_back(pos[i]);
  std::sort(sel.positions.begin(), sel.positions.end());
  return sel;
}

std::vector<std::size_t> structured_vars(const StructuredSelection& sel, std::size_t n) {
  std::vector<std::size_t> vars;
  vars.reserve(sel.items.size() * sel.positions.size());
  for (std::size_t i : sel.items)
    for (std::size_t j : sel.positions) vars.push_back(var_index(i, j, n));
  return vars;
}

double flip_delta(const QuboProblem& p, std::span<const std::uint8_t> x, std::size_t k) {
  const auto row = p.q.row(k);
  double field = 0.0;
  for (std::size_t b = 0; b < x.size(); ++b)
    if (b != k && x[b]) field += row[b] + p.q(b, k);
  const double delta = p.q(k, k) + field;
  return x[k] ? -delta : delta;
}

std::vector<std::size_t> select_energy_impact(const QuboProblem& p,
                                              std::span<const std::uint8_t> x, std::size_t size,
                                              const std::vector<bool>& excluded) {
  const std::size_t n = p.num_vars();
  if (x.size() != n) throw std::invalid_argument("select_energy_impact: vector length mismatch");
  std::vector<std::size_t> order;
  std::vector<double> impact(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (k < excluded.size() && excluded[k]) continue;
    impact[k] = std::abs(flip_delta(p, x, k));
    order.push_back(k);
  }
  if (size > order.size())
    throw std::invalid_argument("select_energy_impact: size exceeds available variables");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return impact[a] > impact[b]; });
  order.resize(size);
  std::sort(order.begin(), order.end());
  return order;
}

ReducedQubo extract_subqubo(const QuboProblem& p, std::span<const std::size_t> vars,
                            std::span<const std::uint8_t> x) {
  const std::size_t n = p.num_vars();
  if (x.size() != n) throw std::invalid_argument("extract_subqubo: vector length mismatch");
  std::vector<bool> in_sub(n, false);
  for (std::size_t v : vars) {
    if (v >= n) throw std::invalid_argument("extract_subqubo: variable out of range");
    if (in_sub[v]) throw std::invalid_argument("extract_subqubo: duplicate variable");
    in_sub[v] = true;
  }

  std::vector<std::size_t> clamped_on;
  for (std::size_t k = 0; k < n; ++k)
    if (!in_sub[k] && x[k]) clamped_on.push_back(k);

  ReducedQubo r;
  r.vars.assign(vars.begin(), vars.end());
  r.problem.m = p.m;
  r.problem.q = Matrix::square(vars.size());
  for (std::size_t a = 0; a < vars.size(); ++a) {
    for (std::size_t b = 0; b < vars.size(); ++b) r.problem.q(a, b) = p.q(vars[a], vars[b]);
    double linear = 0.0;
    for (std::size_t k : clamped_on) linear += p.q(vars[a], k) + p.q(k, vars[a]);
    r.problem.q(a, a) += linear;
  }
  for (std::size_t k : clamped_on)
    for (std::size_t l : clamped_on) r.clamp_offset += p.q(k, l);
  return r;
}

BitVector merge(std::span<const std::uint8_t> x, std::span<const std::size_t> vars,
                std::span<const std::uint8_t> y) {
  if (vars.size() != y.size()) throw std::invalid_argument("merge: length mismatch");
  BitVector out(x.begin(), x.end());
  for (std::size_t a = 0; a < vars.size(); ++a) {
    if (vars[a] >= out.size()) throw std::invalid_argument("merge: variable out of range");
    out[vars[a]] = y[a];
  }
  return out;
}

Subproblem make_subproblem(const QuboProblem& p, const Assignment& current,
                           const StructuredSelection& sel) {
  const std::size_t n = current.size();
  if (p.n != n) throw std::invalid_argument("make_subproblem: QUBO does not match assignment");
  const auto pos = current.positions();
  std::vector<std::size_t> expected;
  for (std::size_t i : sel.items) expected.push_back(pos[i]);
  std::sort(expected.begin(), expected.end());
  if (expected != sel.positions)
    throw std::invalid_argument("make_subproblem: positions are not those held by the items");

  Subproblem sp;
  sp.items = sel.items;
  sp.positions = sel.positions;
  sp.var_map = structured_vars(sel, n);
  const BitVector x = encode(current);
  ReducedQubo r = extract_subqubo(p, sp.var_map, x);
  sp.reduced = std::move(r.problem);
  sp.reduced.n = sel.items.size();
  sp.clamp_offset = r.clamp_offset;
  return sp;
}

std::uint64_t round_seed(std::uint64_t seed, std::size_t round) {
  return derive_seed(seed ^ 0x5DEECE66DULL, round);
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_params(const ListingInstance& inst, const DecompParams& params,
                  const Subsolver& solver) {
  if (const auto errs = validate_instance(inst); !errs.empty())
    throw std::invalid_argument("solve_decomposed: invalid instance: " + errs.front());
  if (params.n_sub < 2 || params.n_sub > inst.n)
    throw std::invalid_argument("solve_decomposed: need 2 <= n_sub <= n");
  if (params.repeats < 1) throw std::invalid_argument("solve_decomposed: repeats must be >= 1");
  if (params.n_sub * params.n_sub > solver.capacity())
    throw std::invalid_argument("solve_decomposed: subproblem exceeds subsolver capacity");
}

}  // namespace

SolveReport solve_decomposed(const ListingInstance& inst, Policy policy, const Subsolver& solver,
                             const DecompParams& params) {
  check_params(inst, params, solver);
  const auto start = Clock::now();
  const std::size_t n = inst.n;
  const QuboProblem qubo = build_qubo(inst, params.m);
  const std::size_t sub_vars = params.n_sub * params.n_sub;

  Assignment current = solve_lap(inst.sales).assignment;
  BitVector x = encode(current);
  double e = energy(qubo, x);
  ObjectiveBreakdown obj = qap_objective(inst, current);

  SolveReport report;
  report.trace.push_back({0, ms_since(start), obj, true, true, 0});

  Xoshiro256 rng(params.seed);
  TabuList tabu(params.tabu_tenure);
  std::size_t stale = 0;
  std::size_t round = 0;
  while (stale < params.repeats) {
    if (std::chrono::duration<double>(Clock::now() - start).count() >= params.timeout_seconds) break;
    ++round;

    std::vector<std::size_t> vars;
    std::vector<std::size_t> tabu_entry;
    if (policy == Policy::structured) {
      const StructuredSelection sel = select_structured(current, params.n_sub, rng, tabu, params.top_bias);
      vars = structured_vars(sel, n);
      tabu_entry = sel.items;
    } else {
      vars = select_energy_impact(qubo, x, sub_vars, tabu.active(qubo.num_vars(), sub_vars));
      tabu_entry = vars;
    }

    ReducedQubo reduced = extract_subqubo(qubo, vars, x);
    if (policy == Policy::structured) reduced.problem.n = params.n_sub;
    const SubsolveOutcome out = solver.solve(reduced.problem, round_seed(params.seed, round));

    BitVector candidate = merge(x, vars, out.best);
    DecodeResult decoded = decode(candidate, n);
    const bool raw_feasible = decoded.feasible();
    if (!raw_feasible) {
      candidate = repair(candidate, qubo, inst);
      decoded = decode(candidate, n);
    }
    const Assignment cand_assignment = *decoded.assignment;
    const double cand_e = energy(qubo, candidate);
    const ObjectiveBreakdown cand_obj = qap_objective(inst, cand_assignment);

    const bool accepted = cand_e < e && cand_obj.objective > obj.objective;
    if (accepted) {
      x = std::move(candidate);
      e = cand_e;
      obj = cand_obj;
      current = cand_assignment;
      stale = 0;
    } else {
      ++stale;
    }
    tabu.push(std::move(tabu_entry));

    const DecodeResult check = decode(x, n);
    report.trace.push_back({round, ms_since(start), cand_obj, accepted, raw_feasible,
                            check.row_violations + check.col_violations});
  }

  report.best = current;
  report.breakdown = obj;
  report.qubo_energy = e;
  report.offset = qubo.offset;
  report.rounds = round;
  report.elapsed_seconds = ms_since(start) / 1000.0;
  return report;
}

SolveReport two_stage_solve(const ListingInstance& inst, std::size_t top_k,
                            const Subsolver& solver, const DecompParams& params) {
  if (const auto errs = validate_instance(inst); !errs.empty())
    throw std::invalid_argument("two_stage_solve: invalid instance: " + errs.front());
  if (top_k > inst.n) throw std::invalid_argument("two_stage_solve: top_k exceeds n");
  const auto start = Clock::now();

  const Assignment lap = solve_lap(inst.sales).assignment;
  std::vector<std::size_t> item_at(lap.items().begin(), lap.items().end());

  SolveReport report;
  report.trace.push_back({0, ms_since(start), qap_objective(inst, lap), true, true, 0});

  if (top_k >= 2) {
    ListingInstance head;
    head.n = top_k;
    head.w = inst.w;
    head.sales = Matrix::square(top_k);
    head.similarity = Matrix::square(top_k);
    head.adjacency = Matrix::square(top_k);
    for (std::size_t a = 0; a < top_k; ++a)
      for (std::size_t b = 0; b < top_k; ++b) {
        head.sales(a, b) = inst.sales(item_at[a], b);
        head.similarity(a, b) = inst.similarity(item_at[a], item_at[b]);
        head.adjacency(a, b) = inst.adjacency(a, b);
      }
    head.adjacency_band = std::min(inst.adjacency_band, top_k - 1);

    Assignment head_best;
    if (top_k <= kBruteForceLimit) {
      head_best = brute_force_qap(head).first;
    } else {
      DecompParams sub = params;
      sub.n_sub = std::min(params.n_sub, top_k);
      SolveReport r = solve_decomposed(head, Policy::structured, solver, sub);
      head_best = r.best;
      report.rounds = r.rounds;
    }
    std::vector<std::size_t> head_items(item_at.begin(), item_at.begin() + static_cast<std::ptrdiff_t>(top_k));
    for (std::size_t j = 0; j < top_k; ++j) item_at[j] = head_items[head_best.item_at(j)];
  }

  report.best = Assignment(std::move(item_at));
  report.breakdown = qap_objective(inst, report.best);
  const QuboProblem qubo = build_qubo(inst, params.m);
  report.qubo_energy = energy(qubo, encode(report.best));
  report.offset = qubo.offset;
  const bool changed = !(report.best == lap);
  report.trace.push_back({1, ms_since(start), report.breakdown, changed, true, 0});
  report.elapsed_seconds = ms_since(start) / 1000.0;
  return report;
}

std::string trace_csv(const SolveReport& report) {
  std::string out = csv_row({"round", "elapsed_ms", "objective", "sales_term", "diversity_term", "accepted"});
  for (const auto& t : report.trace)
    out += csv_row({std::to_string(t.round), format_double(t.elapsed_ms),
                    format_double(t.breakdown.objective), format_double(t.breakdown.sales_term),
                    format_double(t.breakdown.diversity_term), t.accepted ? "1" : "0"});
  return out;
}

}  // namespace listing
