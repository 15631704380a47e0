// discforge command line: one subcommand per colorer plus instance
// generation and offline trace verification.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "discforge/error.hpp"
#include "discforge/experiment.hpp"
#include "discforge/instance.hpp"
#include "discforge/trace.hpp"
#include "discforge/verify.hpp"

namespace df = discforge;

namespace {

// "1..5", "3,7,9" or a mix like "1..3,10".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string part = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (part.empty()) df::fail(df::ErrorCode::kInvalidArgument, "empty entry in --seeds");
    try {
      const std::size_t dots = part.find("..");
      if (dots == std::string::npos) {
        out.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dots));
        const auto hi = std::stoull(part.substr(dots + 2));
        if (hi < lo || hi - lo > 100000) df::fail(df::ErrorCode::kInvalidArgument, "bad seed range '" + part + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      df::fail(df::ErrorCode::kInvalidArgument, "bad seed list '" + text + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct ExperimentArgs {
  df::ExperimentConfig cfg;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string in, b_in, out, trace;
  bool deterministic_twist = false;
};

void add_experiment_options(CLI::App* sub, ExperimentArgs& a) {
  auto& c = a.cfg;
  sub->add_option("--family", c.family, "Instance family (algorithm default if omitted)");
  sub->add_option("--n", c.n, "Dimension");
  sub->add_option("--m", c.m, "Rows (rademacher)");
  sub->add_option("--s", c.s, "Sparsity (regular-set-system)");
  sub->add_option("--d", c.d, "Dimension of the twisted hypercube");
  sub->add_flag("--deterministic-twist", a.deterministic_twist, "Identity matchings (plain hypercube)");
  sub->add_option("--seed", a.seed, "Single seed");
  sub->add_option("--seeds", a.seeds, "Seed list, e.g. 1..5 or 1,4,9");
  sub->add_option("--q", c.q, "Regularizer exponent (spencer)");
  sub->add_option("--eta", c.eta, "Regularizer scale (spencer, spencer-tight)");
  sub->add_option("--L", c.L, "Step-length cap");
  sub->add_option("--eps", c.eps, "Target slack over 3sqrt(3/2) (spencer-tight)");
  sub->add_option("--rho", c.rho, "Sharpened Taylor slack (spencer-tight)");
  sub->add_option("--tol", c.tol, "Power-iteration tolerance");
  sub->add_option("--t-max", c.t_max, "LLL round limit");
  sub->add_option("--trials", c.trials, "Monte Carlo samples (haar-moments)");
  sub->add_option("--in", a.in, "Instance CSV (Q for ellipsoid)");
  sub->add_option("--b-in", a.b_in, "B matrix CSV (ellipsoid)");
  sub->add_option("--out", a.out, "JSON report path (stdout if omitted)");
  sub->add_option("--trace", a.trace, "Per-step trace CSV");
  sub->add_flag("--verify", c.verify, "Replay each trace through the verifier");
  sub->add_flag("--timings", c.timings, "Include wall-clock seconds in the report");
  sub->add_option("--threads", c.threads, "Worker threads (capped by DISCFORGE_THREADS)");
}

int run_experiment_cmd(df::Algorithm alg, ExperimentArgs& a) {
  auto& c = a.cfg;
  c.algorithm = alg;
  if (!a.seeds.empty() && a.seed) df::fail(df::ErrorCode::kInvalidArgument, "use either --seed or --seeds");
  if (!a.seeds.empty()) c.seeds = parse_seeds(a.seeds);
  if (a.seed) c.seeds = {*a.seed};
  if (!a.in.empty()) c.in = a.in;
  if (!a.b_in.empty()) c.b_in = a.b_in;
  if (!a.out.empty()) c.out = a.out;
  if (!a.trace.empty()) c.trace = a.trace;
  c.twist_random = !a.deterministic_twist;
  if (alg == df::Algorithm::kHaarMoments && c.n == 64) c.n = 4;
  if (alg == df::Algorithm::kLll && c.s == 8 && c.family.empty()) c.s = 16;

  const df::Report rep = df::run_experiment(c);
  if (!c.out) std::cout << rep.json << '\n';
  std::cerr << df::to_string(alg) << ": " << rep.runs - rep.failed_runs << "/" << rep.runs
            << " runs passed\n";
  return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discforge: discrepancy minimization toolkit"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    df::Algorithm alg;
    const char* help;
  };
  const std::vector<Sub> algs = {
      {"spencer", df::Algorithm::kSpencer, "O(sqrt(n log(2m/n))) colorer for m x n instances"},
      {"spencer-tight", df::Algorithm::kSpencerTight, "Square colorer with the sign-proxy potential"},
      {"komlos", df::Algorithm::kKomlos, "Pseudorandom Komlos colorer"},
      {"beck-fiala", df::Algorithm::kBeckFiala, "Pseudorandom Beck-Fiala colorer for 0/+-1 matrices"},
      {"lll", df::Algorithm::kLll, "Resampling colorer for sparse 0/1 matrices"},
      {"ellipsoid", df::Algorithm::kEllipsoid, "Minimize ||Qx||_B"},
      {"lambda", df::Algorithm::kLambda, "Estimate the pseudorandomness parameter lambda(A)"},
      {"haar-moments", df::Algorithm::kHaarMoments, "Monte Carlo eighth moments of Haar matrices"}};
  std::vector<ExperimentArgs> args(algs.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < algs.size(); ++i) {
    CLI::App* sub = app.add_subcommand(algs[i].name, algs[i].help);
    add_experiment_options(sub, args[i]);
    subs.push_back(sub);
  }

  std::string gen_family = "gaussian", gen_out;
  int gen_n = 64, gen_s = 8, gen_d = 6;
  std::optional<int> gen_m;
  std::uint64_t gen_seed = 1;
  CLI::App* gen = app.add_subcommand("gen", "Generate an instance (CSV + meta.json sidecar)");
  gen->add_option("--family", gen_family);
  gen->add_option("--n", gen_n);
  gen->add_option("--m", gen_m);
  gen->add_option("--s", gen_s);
  gen->add_option("--d", gen_d);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out)->required();

  std::string v_trace, v_in;
  CLI::App* ver = app.add_subcommand("verify", "Replay a trace against the walk invariants");
  ver->add_option("--trace", v_trace)->required();
  ver->add_option("--in", v_in, "Instance CSV (enables potential replay)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(df::ErrorCode::kInvalidArgument);
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) return run_experiment_cmd(algs[i].alg, args[i]);

    if (gen->parsed()) {
      df::ExperimentConfig c;
      c.family = gen_family;
      c.n = gen_n;
      c.m = gen_m;
      c.s = gen_s;
      c.d = gen_d;
      c.validate();
      const df::Instance inst = df::experiment_instance(c, gen_seed);
      df::save_instance(inst, gen_out);
      std::cerr << "wrote " << gen_out << " (" << inst.rows() << "x" << inst.cols() << ")\n";
      return 0;
    }

    if (ver->parsed()) {
      std::optional<std::filesystem::path> in;
      if (!v_in.empty()) in = v_in;
      const df::Verdict v = df::verify_trace_file(v_trace, in);
      std::cout << (v.pass ? "PASS" : "FAIL") << " steps=" << v.steps << " checks=" << v.checks
                << " failures=" << v.failure_count << '\n';
      for (const auto& f : v.failures)
        std::cout << "  step " << f.step << ": " << f.invariant << ": " << f.detail << '\n';
      return v.pass ? 0 : static_cast<int>(df::ErrorCode::kInvariantViolation);
    }
  } catch (const df::Error& e) {
    std::cerr << "discforge: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "discforge: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
