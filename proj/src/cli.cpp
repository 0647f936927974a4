#include "listing/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "listing/assignlin.hpp"
#include "listing/io.hpp"

namespace listing {

std::vector<SweepRow> sweep_w(const ListingInstance& inst, const std::vector<double>& w_values,
                              const Subsolver& solver, const DecompParams& params) {
  std::vector<double> ws = w_values;
  std::sort(ws.begin(), ws.end());
  std::vector<SweepRow> rows;
  for (double w : ws) {
    ListingInstance at = inst;
    at.w = w;
    Assignment best = inst.n <= kBruteForceLimit
                          ? brute_force_qap(at).first
                          : solve_decomposed(at, Policy::structured, solver, params).best;
    rows.push_back({w, qap_objective(at, best)});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = csv_row({"w", "sales_term", "diversity_term", "objective"});
  for (const auto& r : rows)
    out += csv_row({format_double(r.w), format_double(r.breakdown.sales_term),
                    format_double(r.breakdown.diversity_term), format_double(r.breakdown.objective)});
  return out;
}

std::vector<BenchRow> bench_decomp(const BenchOptions& opt) {
  const AnnealingSolver solver(opt.subsolver);
  std::vector<BenchRow> rows;
  for (std::size_t n : opt.sizes) {
    if (n < opt.decomp.n_sub)
      throw std::invalid_argument("bench: size " + std::to_string(n) + " is below n_sub");
    for (std::uint64_t seed : opt.seeds) {
      const ListingInstance inst = generate_synthetic(n, seed, opt.profile);
      for (Policy policy : {Policy::structured, Policy::energy_impact}) {
        DecompParams params = opt.decomp;
        params.seed = seed;
        BenchRow row;
        row.n = n;
        row.seed = seed;
        row.policy = policy;
        row.report = solve_decomposed(inst, policy, solver, params);
        row.objective = row.report.qubo_energy + row.report.offset;
        row.elapsed_seconds = row.report.elapsed_seconds;
        rows.push_back(std::move(row));
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.policy < b.policy;
  });
  return rows;
}

std::vector<BenchSummaryRow> summarize_bench(const std::vector<BenchRow>& rows) {
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_size;
  for (const auto& r : rows)
    (r.policy == Policy::structured ? by_size[r.n].first : by_size[r.n].second).push_back(r.objective);
  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  std::vector<BenchSummaryRow> out;
  for (const auto& [n, pair] : by_size) {
    BenchSummaryRow s;
    s.n = n;
    s.mean_structured = mean(pair.first);
    s.mean_baseline = mean(pair.second);
    s.gap = s.mean_structured - s.mean_baseline;
    out.push_back(s);
  }
  return out;
}

std::string bench_csv(const std::vector<BenchRow>& rows, bool include_elapsed) {
  std::vector<std::string> header{"n", "seed", "policy", "objective"};
  if (include_elapsed) header.emplace_back("elapsed");
  std::string out = csv_row(header);
  for (const auto& r : rows) {
    std::vector<std::string> f{std::to_string(r.n), std::to_string(r.seed), to_string(r.policy),
                               format_double(r.objective)};
    if (include_elapsed) f.push_back(format_double(r.elapsed_seconds));
    out += csv_row(f);
  }
  return out;
}

std::string bench_summary_csv(const std::vector<BenchSummaryRow>& rows) {
  std::string out = csv_row({"n", "mean_structured", "mean_baseline", "gap"});
  for (const auto& r : rows)
    out += csv_row({std::to_string(r.n), format_double(r.mean_structured),
                    format_double(r.mean_baseline), format_double(r.gap)});
  return out;
}

namespace {

/// Input or usage problem; maps to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFlags {
  std::string subsolver = "sa";
  std::size_t num_reads = 1000;
  std::size_t sweeps = 1000;
  std::uint64_t seed = 0;
  std::size_t repeats = 5;
  double timeout = 20.0;
  std::size_t n_sub = 8;
  std::size_t tabu_tenure = 3;
  double top_bias = 0.5;
  double m = -1.0;

  void attach(CLI::App* app) {
    app->add_option("--subsolver", subsolver, "QUBO subsolver")
        ->check(CLI::IsMember({"sa", "exhaustive"}))
        ->capture_default_str();
    app->add_option("--num-reads", num_reads, "annealing reads per subproblem")->capture_default_str();
    app->add_option("--sweeps", sweeps, "sweeps per annealing read")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--repeats", repeats, "non-improving rounds before stopping")->capture_default_str();
    app->add_option("--timeout", timeout, "wall-clock limit in seconds")->capture_default_str();
    app->add_option("--n-sub", n_sub, "items per subproblem")->capture_default_str();
    app->add_option("--tabu-tenure", tabu_tenure, "rounds a selection stays tabu")->capture_default_str();
    app->add_option("--top-bias", top_bias, "chance of drawing from the top positions")
        ->capture_default_str();
    app->add_option("--m", m, "penalty weight (default: max |coefficient| rule)");
  }

  DecompParams decomp() const {
    DecompParams p;
    p.n_sub = n_sub;
    p.repeats = repeats;
    p.timeout_seconds = timeout;
    p.tabu_tenure = tabu_tenure;
    p.seed = seed;
    p.top_bias = top_bias;
    if (m >= 0.0) p.m = m;
    return p;
  }

  SubsolverParams annealing() const { return {num_reads, sweeps, std::nullopt, seed}; }

  std::unique_ptr<Subsolver> make_solver() const {
    if (subsolver == "exhaustive") return std::make_unique<ExhaustiveSolver>();
    return std::make_unique<AnnealingSolver>(annealing());
  }
};

ListingInstance load(const std::string& path) {
  try {
    return read_instance(path);
  } catch (const FormatError& e) {
    throw InputError(e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

std::vector<double> parse_w_list(const std::string& s) {
  std::vector<double> ws;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      const double w = parse_double(tok);
      if (w < 0.0) throw InputError("w must be non-negative");
      ws.push_back(w);
    } catch (const FormatError& e) {
      throw InputError(e.what());
    }
  }
  if (ws.empty()) throw InputError("empty w list");
  return ws;
}

std::string default_w_list() {
  std::string s;
  for (int k = 0; k <= 10; ++k) {
    if (k) s += ',';
    s += format_double(k / 10.0);
  }
  return s;
}

int cmd_solve(const std::string& path, const std::string& method, const std::string& policy_s,
              std::size_t top_k, const std::string& json_path, const std::string& trace_path,
              const SolverFlags& flags, std::ostream& out) {
  const ListingInstance inst = load(path);
  SolveReport report;
  if (method == "lap") {
    report.best = solve_lap(inst.sales).assignment;
  } else if (method == "exact") {
    if (inst.n > kBruteForceLimit)
      throw InputError("exact method supports n <= " + std::to_string(kBruteForceLimit));
    report.best = brute_force_qap(inst).first;
  } else {
    const auto solver = flags.make_solver();
    Policy policy = Policy::structured;
    try {
      policy = parse_policy(policy_s);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    DecompParams params = flags.decomp();
    params.n_sub = std::min(params.n_sub, inst.n);
    if (params.n_sub * params.n_sub > solver->capacity())
      throw InputError("--n-sub too large for subsolver " + solver->name());
    report = method == "two-stage" ? two_stage_solve(inst, std::min(top_k, inst.n), *solver, params)
                                   : solve_decomposed(inst, policy, *solver, params);
  }
  report.breakdown = qap_objective(inst, report.best);
  const QuboProblem qubo = build_qubo(inst, flags.m >= 0.0 ? std::optional<double>(flags.m) : std::nullopt);
  report.qubo_energy = energy(qubo, encode(report.best));
  report.offset = qubo.offset;

  out << "method: " << method;
  if (method == "decomp") out << " policy=" << policy_s;
  if (method == "decomp" || method == "two-stage")
    out << " subsolver=" << flags.subsolver << " seed=" << flags.seed << " n_sub=" << flags.n_sub;
  if (method == "two-stage") out << " top_k=" << top_k;
  out << "\n";
  out << "n: " << inst.n << "  w: " << format_double(inst.w) << "\n";
  out << "rank,item\n";
  for (std::size_t j = 0; j < inst.n; ++j) out << (j + 1) << ',' << report.best.item_at(j) << "\n";
  out << "sales_term: " << format_double(report.breakdown.sales_term) << "\n";
  out << "diversity_term: " << format_double(report.breakdown.diversity_term) << "\n";
  out << "objective: " << format_double(report.breakdown.objective) << "\n";
  out << "qubo_objective: " << format_double(report.qubo_energy + report.offset) << "\n";
  if (method == "decomp" || method == "two-stage") out << "rounds: " << report.rounds << "\n";

  if (!json_path.empty()) {
    nlohmann::json j;
    j["method"] = method;
    j["item_at"] = std::vector<std::size_t>(report.best.items().begin(), report.best.items().end());
    j["sales_term"] = report.breakdown.sales_term;
    j["diversity_term"] = report.breakdown.diversity_term;
    j["objective"] = report.breakdown.objective;
    j["qubo_objective"] = report.qubo_energy + report.offset;
    j["rounds"] = report.rounds;
    j["elapsed_seconds"] = report.elapsed_seconds;
    write_text(json_path, j.dump(2) + "\n");
  }
  if (!trace_path.empty()) write_text(trace_path, trace_csv(report));
  return kExitOk;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t v = 0;
    try {
      v = static_cast<std::size_t>(std::stoull(tok));
    } catch (const std::exception&) {
      throw InputError("bad size '" + tok + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty size list");
  return out;
}

int dispatch(const std::function<int()>& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DegenerateInputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Item-listing QAP/QUBO toolkit"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve one instance and print the ranked list");
  std::string solve_path, method = "decomp", policy = "structured", json_path, trace_path;
  std::size_t top_k = 8;
  SolverFlags solve_flags;
  solve->add_option("instance", solve_path, "instance JSON")->required();
  solve->add_option("--method", method, "lap | exact | decomp | two-stage")
      ->check(CLI::IsMember({"lap", "exact", "decomp", "two-stage"}))
      ->capture_default_str();
  solve->add_option("--policy", policy, "structured | energy-impact")
      ->check(CLI::IsMember({"structured", "energy-impact"}))
      ->capture_default_str();
  solve->add_option("--top-k", top_k, "head length for two-stage")->capture_default_str();
  solve->add_option("--json", json_path, "write a JSON report");
  solve->add_option("--trace", trace_path, "write the round trace CSV");
  solve_flags.attach(solve);

  // sweep-w
  auto* sweep = app.add_subcommand("sweep-w", "re-solve across diversity weights");
  std::string sweep_path, w_list = default_w_list(), sweep_out;
  SolverFlags sweep_flags;
  sweep->add_option("instance", sweep_path, "instance JSON")->required();
  sweep->add_option("--w-list", w_list, "comma-separated w values")->capture_default_str();
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");
  sweep_flags.attach(sweep);

  // bench-decomp
  auto* bench = app.add_subcommand("bench-decomp", "structured vs energy-impact decomposition");
  std::string sizes = "12,16,20,24", bench_out, summary_out, profile = "clustered";
  std::size_t seeds = 10;
  std::uint64_t seed_base = 1;
  double bench_w = 0.5;
  SolverFlags bench_flags;
  bench_flags.num_reads = 100;
  bench_flags.sweeps = 500;
  bench->add_option("--sizes", sizes, "comma-separated item counts")->capture_default_str();
  bench->add_option("--seeds", seeds, "number of seeds per size")->capture_default_str();
  bench->add_option("--seed-base", seed_base, "first seed")->capture_default_str();
  bench->add_option("--profile", profile, "synthetic profile")
      ->check(CLI::IsMember({"clustered", "uniform"}))
      ->capture_default_str();
  bench->add_option("--w", bench_w, "diversity weight of generated instances")->capture_default_str();
  bench->add_option("--out", bench_out, "per-run CSV path (default stdout)");
  bench->add_option("--summary", summary_out, "summary CSV path (default stderr)");
  bench_flags.attach(bench);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "build an instance from an access log");
  std::string log_path, ingest_out;
  IngestOptions ingest_opt;
  ingest->add_option("log", log_path, "access log CSV")->required();
  ingest->add_option("--area", ingest_opt.area, "area id")->required();
  ingest->add_option("--out", ingest_out, "instance JSON to write")->required();
  ingest->add_option("--n", ingest_opt.n, "list length")->capture_default_str();
  ingest->add_option("--w", ingest_opt.w, "diversity weight")->capture_default_str();
  ingest->add_option("--band", ingest_opt.band, "adjacency band")->capture_default_str();
  ingest->add_option("--alpha", ingest_opt.estimation.smoothing_alpha, "sales smoothing numerator")
      ->capture_default_str();
  ingest->add_option("--beta", ingest_opt.estimation.smoothing_beta, "sales smoothing denominator")
      ->capture_default_str();
  ingest->add_option("--min-sessions", ingest_opt.estimation.min_sessions,
                     "sessions an item needs to be listed")
      ->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
  std::size_t gen_n = 8;
  std::uint64_t gen_seed = 0;
  std::string gen_profile = "clustered", gen_out;
  SyntheticProfile gen_prof;
  gen->add_option("--n", gen_n, "items")->capture_default_str();
  gen->add_option("--seed", gen_seed, "seed")->capture_default_str();
  gen->add_option("--profile", gen_profile, "clustered | uniform")
      ->check(CLI::IsMember({"clustered", "uniform"}))
      ->capture_default_str();
  gen->add_option("--clusters", gen_prof.clusters, "planted clusters")->capture_default_str();
  gen->add_option("--w", gen_prof.w, "diversity weight")->capture_default_str();
  gen->add_option("--band", gen_prof.band, "adjacency band")->capture_default_str();
  gen->add_option("--out", gen_out, "instance JSON to write (default stdout)");

  // export-qubo
  auto* exq = app.add_subcommand("export-qubo", "write the penalised QUBO as text");
  std::string exq_path, exq_out;
  double exq_m = -1.0;
  exq->add_option("instance", exq_path, "instance JSON")->required();
  exq->add_option("--m", exq_m, "penalty weight");
  exq->add_option("--out", exq_out, "output path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  if (solve->parsed()) {
    return dispatch([&] {
      return cmd_solve(solve_path, method, policy, top_k, json_path, trace_path, solve_flags, out);
    }, err);
  }
  if (sweep->parsed()) {
    return dispatch([&] {
      const ListingInstance inst = load(sweep_path);
      const auto solver = sweep_flags.make_solver();
      DecompParams params = sweep_flags.decomp();
      params.n_sub = std::min(params.n_sub, inst.n);
      const std::string csv = sweep_csv(sweep_w(inst, parse_w_list(w_list), *solver, params));
      if (sweep_out.empty())
        out << csv;
      else
        write_text(sweep_out, csv);
      return kExitOk;
    }, err);
  }
  if (bench->parsed()) {
    return dispatch([&] {
      BenchOptions opt;
      opt.sizes = parse_sizes(sizes);
      opt.seeds.clear();
      for (std::size_t k = 0; k < seeds; ++k) opt.seeds.push_back(seed_base + k);
      opt.profile.kind = parse_profile(profile);
      opt.profile.w = bench_w;
      opt.decomp = bench_flags.decomp();
      opt.subsolver = bench_flags.annealing();
      for (std::size_t n : opt.sizes)
        if (n < opt.decomp.n_sub) throw InputError("sizes must be >= --n-sub");
      const auto rows = bench_decomp(opt);
      const std::string csv = bench_csv(rows);
      const std::string summary = bench_summary_csv(summarize_bench(rows));
      if (bench_out.empty())
        out << csv;
      else
        write_text(bench_out, csv);
      if (summary_out.empty())
        err << summary;
      else
        write_text(summary_out, summary);
      return kExitOk;
    }, err);
  }
  if (ingest->parsed()) {
    return dispatch([&] {
      std::ifstream in(log_path, std::ios::binary);
      if (!in) throw InputError("cannot open " + log_path);
      const ParseResult parsed = parse_log(in);
      const IngestSummary s = build_instance_from_log(parsed.events, ingest_opt);
      write_instance(ingest_out, s.instance);
      out << "events: " << parsed.events.size() << "\n";
      out << "malformed: " << parsed.malformed << "\n";
      out << "area_events: " << s.area_events << "\n";
      out << "items:";
      for (const auto& id : s.universe.ids()) out << ' ' << id;
      out << "\n";
      return kExitOk;
    }, err);
  }
  if (gen->parsed()) {
    return dispatch([&] {
      gen_prof.kind = parse_profile(gen_profile);
      const std::string text = dump_instance(generate_synthetic(gen_n, gen_seed, gen_prof));
      if (gen_out.empty())
        out << text;
      else
        write_text(gen_out, text);
      return kExitOk;
    }, err);
  }
  if (exq->parsed()) {
    return dispatch([&] {
      const ListingInstance inst = load(exq_path);
      const std::string text =
          export_qubo(build_qubo(inst, exq_m >= 0.0 ? std::optional<double>(exq_m) : std::nullopt));
      if (exq_out.empty())
        out << text;
      else
        write_text(exq_out, text);
      return kExitOk;
    }, err);
  }
  return kExitInput;
}

}  // namespace listing
