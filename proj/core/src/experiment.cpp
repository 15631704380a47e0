#include "discforge/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include <json.hpp>

#include "discforge/ellipsoid.hpp"
#include "discforge/error.hpp"
#include "discforge/lll.hpp"
#include "discforge/pseudorandom.hpp"
#include "discforge/rng.hpp"
#include "discforge/spencer.hpp"
#include "discforge/trace.hpp"
#include "discforge/verify.hpp"

namespace discforge {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr long kDefaultHaarTrials = 100000;

struct RunOutcome {
  json data = json::object();
  std::vector<std::string> violations;
  int error_code = 0;
};

bool is_walk(Algorithm a) {
  return a == Algorithm::kSpencer || a == Algorithm::kSpencerTight || a == Algorithm::kKomlos ||
         a == Algorithm::kBeckFiala || a == Algorithm::kEllipsoid;
}

std::string default_family(Algorithm a) {
  switch (a) {
    case Algorithm::kSpencer:
    case Algorithm::kSpencerTight: return "rademacher";
    case Algorithm::kKomlos: return "gaussian";
    case Algorithm::kLambda: return "haar";
    case Algorithm::kBeckFiala:
    case Algorithm::kLll: return "regular-set-system";
    case Algorithm::kEllipsoid: return "random";
    case Algorithm::kHaarMoments: return "haar";
  }
  return "rademacher";
}

void check(RunOutcome& out, bool ok, const std::string& what) {
  if (!ok) out.violations.push_back(what);
}

json verdict_json(const Verdict& v) {
  json failures = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(v.failures.size(), 20); ++i) {
    const auto& f = v.failures[i];
    failures.push_back({{"step", f.step}, {"invariant", f.invariant}, {"detail", f.detail}});
  }
  return {{"pass", v.pass},
          {"checks", v.checks},
          {"steps", v.steps},
          {"failure_count", v.failure_count},
          {"failures", failures}};
}

// Writes and/or verifies a recorded walk trace.
void finish_trace(const ExperimentConfig& cfg, std::uint64_t seed, const WalkTrace& trace,
                  const Instance* inst, RunOutcome& out) {
  if (cfg.trace) {
    const fs::path p = trace_path_for(*cfg.trace, seed, cfg.seeds.size());
    write_trace(trace, p);
    out.data["trace"] = p.string();
  }
  if (cfg.verify) {
    const Verdict v = verify_trace(trace, inst);
    out.data["verify"] = verdict_json(v);
    check(out, v.pass, "verify_trace failed");
  }
}

json komlos_json(const KomlosRun& r) {
  return {{"lambda", r.lambda},
          {"lambda_eff", r.lambda_eff},
          {"eta", r.eta},
          {"discrepancy", r.discrepancy},
          {"certified", r.certified},
          {"psi_start", r.psi_start},
          {"psi_start_bound", r.psi_start_bound},
          {"psi_end", r.psi_end},
          {"max_psi_increase", r.max_psi_increase},
          {"phi_start", r.phi_start},
          {"phi_end", r.phi_end},
          {"max_phi_increase", r.max_phi_increase},
          {"max_phi_ledger", r.max_phi_ledger},
          {"max_anchor", r.max_anchor},
          {"max_anchor_excess", r.max_anchor_excess},
          {"max_threshold_error", r.max_threshold_error},
          {"max_quad_correction", r.max_quad_correction},
          {"max_quad_correction_ratio", r.max_quad_correction_ratio},
          {"max_threshold_count", r.max_threshold_count},
          {"threshold_count_cap", r.threshold_count_cap},
          {"rows_left_p", r.rows_left_p},
          {"rounding", r.rounding},
          {"max_codim_excess", r.max_codim_excess},
          {"steps", r.steps},
          {"backtracks", r.backtracks}};
}

void komlos_checks(const KomlosRun& r, RunOutcome& out) {
  check(out, r.discrepancy <= r.certified * (1 + 1e-9), "discrepancy exceeds certified bound");
  check(out, r.max_psi_increase <= 1e-8, "Psi increased during a step");
  check(out, r.max_phi_ledger <= 100.0 && r.max_phi_increase <= 100.0, "a Phi_r ledger exceeded 100");
  check(out, r.max_anchor_excess <= 1e-9, "an anchor exceeds its group potential");
  check(out, r.max_quad_correction_ratio <= 1.0 + 1e-9, "quadratic correction exceeds 4 sum B^2");
  check(out, r.max_threshold_count <= r.threshold_count_cap, "thresholded entry count above cap");
  check(out, r.max_codim_excess <= 0, "oracle codimension budget exceeded");
  check(out, r.psi_start <= r.psi_start_bound * (1 + 1e-9), "Psi_0 above its closed form");
}

RunOutcome run_one(const ExperimentConfig& cfg, std::uint64_t seed) {
  RunOutcome out;
  out.data["seed"] = seed;
  const bool tracing = cfg.verify || cfg.trace.has_value();
  const auto start = std::chrono::steady_clock::now();

  switch (cfg.algorithm) {
    case Algorithm::kSpencer:
    case Algorithm::kSpencerTight: {
      const Instance inst = experiment_instance(cfg, seed);
      SpencerOptions o;
      o.q = cfg.q;
      o.eta = cfg.eta;
      if (cfg.L) o.L = *cfg.L;
      if (cfg.eps) o.eps = *cfg.eps;
      if (cfg.rho) o.rho = *cfg.rho;
      o.seed = seed;
      o.record_trace = tracing;
      const bool tight = cfg.algorithm == Algorithm::kSpencerTight;
      SpencerRun r = tight ? spencer_color_tight(inst, o) : spencer_color(inst, o);
      const double root_n = std::sqrt(static_cast<double>(inst.cols()));
      out.data.update({{"fingerprint", inst.fingerprint()},
                       {"m", inst.rows()},
                       {"n", inst.cols()},
                       {"q", r.params.q},
                       {"eta", r.params.eta},
                       {"discrepancy", r.discrepancy},
                       {"ratio", r.discrepancy / root_n},
                       {"certified", r.certified},
                       {"theorem_bound", r.theorem_bound},
                       {"potential_start", r.potential_start},
                       {"ledger", r.ledger},
                       {"realized_increase", r.realized_increase},
                       {"rounding", r.rounding},
                       {"steps", r.steps},
                       {"min_step", r.min_step},
                       {"max_quad_ratio", r.max_quad_ratio}});
      if (tight) {
        out.data.update({{"eps", o.eps},
                         {"rho", o.rho},
                         {"c0", r.c0},
                         {"max_anchor", r.max_anchor},
                         {"reset_total", r.reset_total},
                         {"resets", r.resets},
                         {"max_alpha_tries", r.max_alpha_tries}});
      }
      check(out, r.discrepancy <= r.certified * (1 + 1e-9), "discrepancy exceeds certified bound");
      check(out, r.max_quad_ratio <= 1 + 1e-9, "quadratic form above its cap");
      if (tracing) finish_trace(cfg, seed, r.walk.trace, &inst, out);
      break;
    }
    case Algorithm::kKomlos: {
      const Instance inst = experiment_instance(cfg, seed);
      KomlosOptions o;
      if (cfg.L) o.L = *cfg.L;
      if (cfg.tol) o.tol = *cfg.tol;
      o.record_trace = tracing;
      KomlosRun r = komlos_color(inst, o);
      out.data.update({{"fingerprint", inst.fingerprint()}, {"n", inst.cols()}});
      out.data.update(komlos_json(r));
      out.data["lambda_sqrt_n"] = r.lambda * std::sqrt(static_cast<double>(inst.cols()));
      komlos_checks(r, out);
      if (tracing) finish_trace(cfg, seed, r.walk.trace, &inst, out);
      break;
    }
    case Algorithm::kBeckFiala: {
      const Instance inst = experiment_instance(cfg, seed);
      KomlosOptions o;
      if (cfg.L) o.L = *cfg.L;
      if (cfg.tol) o.tol = *cfg.tol;
      o.record_trace = tracing;
      BeckFialaRun r = beck_fiala_color(inst, o);
      const double root_s = std::sqrt(static_cast<double>(r.s));
      out.data.update({{"fingerprint", inst.fingerprint()},
                       {"n", inst.cols()},
                       {"s", r.s},
                       {"lambda", r.lambda},
                       {"lambda_scaled", r.lambda_scaled},
                       {"discrepancy", r.discrepancy},
                       {"certified", root_s * r.komlos.certified},
                       {"cert_sqrt", r.cert_sqrt},
                       {"cert_linear", r.cert_linear},
                       {"reference", r.reference},
                       {"ratio", r.discrepancy / r.reference},
                       {"steps", r.komlos.steps},
                       {"komlos", komlos_json(r.komlos)}});
      komlos_checks(r.komlos, out);
      if (tracing) finish_trace(cfg, seed, r.komlos.walk.trace, nullptr, out);
      break;
    }
    case Algorithm::kLll: {
      const Instance inst = experiment_instance(cfg, seed);
      out.data.update({{"fingerprint", inst.fingerprint()}, {"n", inst.cols()}});
      try {
        const LllRun r = lll_color(inst, seed, cfg.t_max);
        out.data.update({{"s", r.s},
                         {"threshold", r.trace.threshold},
                         {"discrepancy", r.discrepancy},
                         {"rounds", r.trace.total_rounds},
                         {"terminated", r.trace.terminated}});
        check(out, r.discrepancy <= r.trace.threshold, "a row exceeds the LLL threshold");
      } catch (const NonTermination& e) {
        out.data.update({{"s", e.partial().s},
                         {"threshold", e.partial().trace.threshold},
                         {"discrepancy", e.partial().discrepancy},
                         {"rounds", e.partial().trace.total_rounds},
                         {"terminated", false}});
        throw;
      }
      // Twisted hypercubes: report the Beck-Fiala colorer alongside.
      if (inst.family == Family::kTwistedHypercube) {
        const BeckFialaRun bf = beck_fiala_color(inst);
        out.data["beck_fiala"] = {{"discrepancy", bf.discrepancy},
                                  {"reference", bf.reference},
                                  {"lambda", bf.lambda},
                                  {"steps", bf.komlos.steps}};
      }
      break;
    }
    case Algorithm::kEllipsoid: {
      Mat q, b;
      const std::string fam = cfg.family.empty() ? default_family(cfg.algorithm) : cfg.family;
      if (cfg.in) {
        q = read_matrix_csv(*cfg.in);
        b = cfg.b_in ? read_matrix_csv(*cfg.b_in) : Mat::Identity(q.rows(), q.rows());
      } else if (fam == "identity") {
        q = Mat::Identity(cfg.n, cfg.n);
        b = Mat::Identity(cfg.n, cfg.n);
      } else {
        EllipsoidPair pair = gen_ellipsoid_geometric(cfg.n, seed);
        q = std::move(pair.q);
        b = std::move(pair.b);
      }
      EllipsoidOptions o;
      if (cfg.L) o.L = *cfg.L;
      o.record_trace = tracing;
      EllipsoidRun r = ellipsoid_color(q, b, o);
      const double root_tr = std::sqrt(std::max(0.0, r.trace_b));
      out.data.update({{"n", q.cols()},
                       {"value", r.value},
                       {"value_rotated", r.value_rotated},
                       {"trace_b", r.trace_b},
                       {"ratio", root_tr > 0 ? r.value / root_tr : 0.0},
                       {"constant", r.constant},
                       {"ledger", r.ledger},
                       {"certified", r.certified},
                       {"max_increase_ratio", r.max_increase_ratio},
                       {"steps", r.steps}});
      check(out, r.value <= r.certified * (1 + 1e-9) + 1e-12, "value exceeds certified bound");
      check(out, r.max_increase_ratio <= 8.0 + 1e-9, "per-step increase above 8 D step^2");
      check(out, std::abs(r.value - r.value_rotated) <= 1e-8 * std::max(1.0, r.value),
            "rotation changed ||Qx||_B");
      if (tracing) finish_trace(cfg, seed, r.walk.trace, nullptr, out);
      break;
    }
    case Algorithm::kLambda: {
      const Instance inst = experiment_instance(cfg, seed);
      const double lambda = lambda_param(inst.entries, cfg.tol.value_or(1e-12), seed);
      const double root_n = std::sqrt(static_cast<double>(inst.cols()));
      out.data.update({{"fingerprint", inst.fingerprint()},
                       {"n", inst.cols()},
                       {"lambda", lambda},
                       {"lambda_sqrt_n", lambda * root_n},
                       {"below_2_over_sqrt_n", lambda <= 2.0 / root_n}});
      break;
    }
    case Algorithm::kHaarMoments: {
      const long trials = cfg.trials.value_or(kDefaultHaarTrials);
      const HaarMoments h = haar_moment_estimate(cfg.n, static_cast<int>(trials), seed);
      auto entry = [](const MomentEstimate& e, double exact) {
        const double z = e.std_error > 0 ? (e.mean - exact) / e.std_error : 0.0;
        return json{{"mean", e.mean}, {"std_error", e.std_error}, {"exact", exact}, {"z", z},
                    {"within_3se", std::abs(z) <= 3.0}};
      };
      out.data.update({{"n", cfg.n},
                       {"trials", trials},
                       {"m8", entry(h.m8, haar_moment_8_exact(cfg.n))},
                       {"m44", entry(h.m44, haar_moment_44_exact(cfg.n))},
                       {"m2222", entry(h.m2222, haar_moment_2222_exact(cfg.n))}});
      break;
    }
  }

  if (cfg.timings) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    out.data["seconds"] = dt.count();
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSpencer: return "spencer";
    case Algorithm::kSpencerTight: return "spencer-tight";
    case Algorithm::kKomlos: return "komlos";
    case Algorithm::kBeckFiala: return "beck-fiala";
    case Algorithm::kLll: return "lll";
    case Algorithm::kEllipsoid: return "ellipsoid";
    case Algorithm::kLambda: return "lambda";
    case Algorithm::kHaarMoments: return "haar-moments";
  }
  return "spencer";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (Algorithm a : {Algorithm::kSpencer, Algorithm::kSpencerTight, Algorithm::kKomlos,
                      Algorithm::kBeckFiala, Algorithm::kLll, Algorithm::kEllipsoid,
                      Algorithm::kLambda, Algorithm::kHaarMoments}) {
    if (to_string(a) == name) return a;
  }
  fail(ErrorCode::kInvalidArgument, "unknown algorithm '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  const std::string alg(to_string(algorithm));
  auto only = [&](bool set, std::initializer_list<Algorithm> allowed, const char* name) {
    if (!set) return;
    if (std::find(allowed.begin(), allowed.end(), algorithm) == allowed.end())
      fail(ErrorCode::kInvalidArgument, std::string("--") + name + " does not apply to " + alg);
  };
  using A = Algorithm;
  only(q.has_value(), {A::kSpencer}, "q");
  only(eta.has_value(), {A::kSpencer, A::kSpencerTight}, "eta");
  only(L.has_value(), {A::kSpencer, A::kSpencerTight, A::kKomlos, A::kBeckFiala, A::kEllipsoid}, "L");
  only(eps.has_value(), {A::kSpencerTight}, "eps");
  only(rho.has_value(), {A::kSpencerTight}, "rho");
  only(tol.has_value(), {A::kKomlos, A::kBeckFiala, A::kLambda}, "tol");
  only(t_max.has_value(), {A::kLll}, "t-max");
  only(trials.has_value(), {A::kHaarMoments}, "trials");
  only(b_in.has_value(), {A::kEllipsoid}, "b-in");
  if ((trace || verify) && !is_walk(algorithm))
    fail(ErrorCode::kInvalidArgument, "--trace/--verify need a walk-based algorithm, not " + alg);

  require(!q || (*q > 0.0 && *q < 1.0), "--q must lie in (0,1)");
  require(!eta || *eta > 0.0, "--eta must be > 0");
  require(!L || (*L > 0.0 && *L <= 1.0), "--L must lie in (0,1]");
  require(!eps || (*eps > 0.0 && *eps <= 1.0), "--eps must lie in (0,1]");
  require(!rho || (*rho > 0.0 && *rho <= 1.0), "--rho must lie in (0,1]");
  require(!tol || (*tol > 0.0 && *tol < 1e-2), "--tol must lie in (0,1e-2)");
  require(!t_max || *t_max >= 0, "--t-max must be >= 0");
  require(!trials || (*trials >= 100 && *trials <= 100000000), "--trials must lie in [100, 1e8]");
  require(n >= 1 && n <= 8192, "--n must lie in [1, 8192]");
  require(!m || (*m >= 1 && *m <= 65536), "--m must lie in [1, 65536]");
  require(s >= 1 && s <= n, "--s must lie in [1, n]");
  require(d >= 1 && d <= 13, "--d must lie in [1, 13]");
  require(!seeds.empty(), "at least one seed is required");
  if (algorithm == A::kHaarMoments) require(n >= 2, "haar-moments needs n >= 2");
  if (algorithm == A::kEllipsoid && !family.empty())
    require(family == "random" || family == "identity", "ellipsoid families: random, identity");
  if (algorithm != A::kEllipsoid && !family.empty() && family != "file") family_from_string(family);
  if (family == "file") require(in.has_value(), "family 'file' needs --in");
}

Instance experiment_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.in) return load_instance(*cfg.in);
  const std::string name = cfg.family.empty() ? default_family(cfg.algorithm) : cfg.family;
  switch (family_from_string(name)) {
    case Family::kGaussian: return gen_gaussian(cfg.n, seed);
    case Family::kHaar: return gen_haar(cfg.n, seed);
    case Family::kRegularSetSystem: return gen_regular_system(cfg.n, cfg.s, seed);
    case Family::kTwistedHypercube:
      return gen_twisted_hypercube(cfg.d, cfg.twist_random ? TwistMode::kRandom : TwistMode::kDeterministic,
                                   seed);
    case Family::kHadamard: return gen_hadamard(cfg.n);
    case Family::kRademacher: return gen_rademacher(cfg.m.value_or(cfg.n), cfg.n, seed);
    case Family::kFile: break;
  }
  fail(ErrorCode::kInvalidArgument, "family 'file' needs --in");
}

fs::path trace_path_for(const fs::path& base, std::uint64_t seed, std::size_t seed_count) {
  if (seed_count <= 1) return base;
  fs::path p = base;
  const std::string ext = p.extension().string();
  p.replace_extension();
  return fs::path(p.string() + ".seed" + std::to_string(seed) + ext);
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DISCFORGE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) w = std::min<unsigned>(w, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(w, jobs)));
}

Report run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t jobs = config.seeds.size();
  std::vector<RunOutcome> outcomes(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      RunOutcome& o = outcomes[i];
      try {
        o = run_one(config, config.seeds[i]);
      } catch (const Error& e) {
        o.data["seed"] = config.seeds[i];
        o.data["error"] = e.what();
        o.error_code = static_cast<int>(e.code());
      } catch (const std::exception& e) {
        o.data["seed"] = config.seeds[i];
        o.data["error"] = e.what();
        o.error_code = static_cast<int>(ErrorCode::kNumerical);
      }
    }
  };
  const unsigned threads = worker_count(config.threads, jobs);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  Report rep;
  rep.runs = static_cast<int>(jobs);
  json runs = json::array();
  for (auto& o : outcomes) {
    const bool ok = o.error_code == 0 && o.violations.empty();
    o.data["invariants_ok"] = ok;
    if (!o.violations.empty()) o.data["violations"] = o.violations;
    if (o.error_code) o.data["error_code"] = o.error_code;
    if (!ok) {
      ++rep.failed_runs;
      rep.ok = false;
      if (rep.exit_code == 0 || (o.error_code && rep.exit_code == static_cast<int>(ErrorCode::kInvariantViolation)))
        rep.exit_code = o.error_code ? o.error_code : static_cast<int>(ErrorCode::kInvariantViolation);
    }
    runs.push_back(std::move(o.data));
  }

  json aggregate = json::object();
  for (const char* key : {"discrepancy", "ratio", "certified", "lambda", "lambda_sqrt_n", "c0", "steps",
                          "rounds", "value"}) {
    std::vector<double> vals;
    for (const auto& r : runs)
      if (r.contains(key) && r[key].is_number()) vals.push_back(r[key].get<double>());
    if (vals.empty()) continue;
    aggregate[key] = {{"median", median(vals)}, {"max", *std::max_element(vals.begin(), vals.end())}};
  }

  json instance = {{"family", config.in ? std::string("file")
                                        : (config.family.empty() ? default_family(config.algorithm)
                                                                 : config.family)},
                   {"n", config.n}};
  if (config.m) instance["m"] = *config.m;
  if (config.in) instance["path"] = config.in->string();
  const std::string fam = instance["family"].get<std::string>();
  if (fam == "regular-set-system" || fam == "regular") instance["s"] = config.s;
  if (fam == "twisted-hypercube" || fam == "twisted") instance["d"] = config.d;

  json overrides = json::object();
  if (config.q) overrides["q"] = *config.q;
  if (config.eta) overrides["eta"] = *config.eta;
  if (config.L) overrides["L"] = *config.L;
  if (config.eps) overrides["eps"] = *config.eps;
  if (config.rho) overrides["rho"] = *config.rho;
  if (config.tol) overrides["tol"] = *config.tol;
  if (config.t_max) overrides["t_max"] = *config.t_max;
  if (config.trials) overrides["trials"] = *config.trials;

  const json report = {{"schema", kReportSchema},
                       {"algorithm", std::string(to_string(config.algorithm))},
                       {"instance", instance},
                       {"seeds", config.seeds},
                       {"overrides", overrides},
                       {"runs", runs},
                       {"aggregate", aggregate},
                       {"ok", rep.ok}};
  rep.json = report.dump(2);
  if (config.out) {
    std::ofstream f(*config.out);
    if (!f) fail(ErrorCode::kIo, "cannot write report '" + config.out->string() + "'");
    f << rep.json << '\n';
  }
  return rep;
}

}  // namespace discforge
