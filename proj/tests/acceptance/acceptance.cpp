// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset. Exit status is 0 only if every selected
// criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "discforge/ellipsoid.hpp"
#include "discforge/instance.hpp"
#include "discforge/lll.hpp"
#include "discforge/pseudorandom.hpp"
#include "discforge/regmax.hpp"
#include "discforge/spencer.hpp"
#include "discforge/verify.hpp"

using namespace discforge;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Traced runs are collected here and replayed for criterion 11.
struct TracedRun {
  std::string label;
  Verdict verdict;
};
std::vector<TracedRun> g_traced;

void record(const std::string& label, const WalkTrace& trace, const Instance* inst = nullptr) {
  g_traced.push_back({label, verify_trace(trace, inst)});
}

Vec gaussian_vec(std::mt19937_64& rng, int m, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Vec v(m);
  for (int i = 0; i < m; ++i) v(i) = g(rng);
  return v;
}

RegParams random_params(std::mt19937_64& rng, RegKind kind) {
  static const double qs[] = {0.5, 2.0 / 3.0};
  static const double etas[] = {0.5, 1.0, 2.0};
  return {kind, qs[rng() % 2], etas[rng() % 3]};
}

Outcome regularizer_correctness() {
  std::mt19937_64 rng(101);
  double worst_fd = 0.0, worst_simplex = 0.0, worst_mult = 0.0;
  long sandwich_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 64);
    const Vec y = gaussian_vec(rng, m, 2.0);
    for (RegKind kind : {RegKind::kLq, RegKind::kEntropy}) {
      const RegParams p = random_params(rng, kind);
      const RegEval e = reg_value_grad(y, p);
      Vec fd(m);
      for (int i = 0; i < m; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(y(i)));
        Vec a = y, b = y;
        a(i) += h;
        b(i) -= h;
        fd(i) = (reg_value(a, p) - reg_value(b, p)) / (2 * h);
      }
      worst_fd = std::max(worst_fd, (fd - e.grad).lpNorm<Eigen::Infinity>() /
                                        e.grad.lpNorm<Eigen::Infinity>());
      worst_simplex = std::max({worst_simplex, std::abs(e.grad.sum() - 1.0), -e.grad.minCoeff()});
      const double M = y.maxCoeff();
      if (kind == RegKind::kLq) {
        const double residual =
            (e.multiplier - p.eta * y.array()).pow(1.0 / (p.q - 1.0)).sum() - 1.0;
        worst_mult = std::max(worst_mult, std::abs(residual));
        if (!(M <= e.value && e.value <= M + std::pow(m, 1.0 - p.q) / (p.eta * p.q)))
          ++sandwich_violations;
      } else if (!(M <= e.value && e.value <= M + std::log(double(m)) / p.eta)) {
        ++sandwich_violations;
      }
    }
  }
  Outcome o;
  o.pass = worst_fd <= 1e-5 && worst_simplex <= 1e-10 && worst_mult <= 1e-10 &&
           sandwich_violations == 0;
  o.detail = fmt("max fd rel err %.2e (<= 1e-5), simplex %.1e, multiplier %.1e (<= 1e-10), "
                 "sandwich violations %ld",
                 worst_fd, worst_simplex, worst_mult, sandwich_violations);
  return o;
}

Outcome taylor_domination() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  long violations = 0;
  double worst = -1e300;
  for (int trial = 0; trial < 5000; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 64);
    for (RegKind kind : {RegKind::kLq, RegKind::kEntropy}) {
      const RegParams p = random_params(rng, kind);
      const Vec y = gaussian_vec(rng, m, 2.0);
      const RegEval e = reg_value_grad(y, p);
      const double cap = taylor_step_cap(p);
      Vec d(m);
      for (int i = 0; i < m; ++i) d(i) = u(rng) * cap;
      const double bound = e.value + e.grad.dot(d) + hess_diag_bound(e, p).dot(d.cwiseAbs2());
      const double excess = reg_value(y + d, p) - bound;
      worst = std::max(worst, excess);
      if (excess > 1e-12 * std::max(1.0, std::abs(bound))) ++violations;
    }
  }
  return {violations == 0,
          fmt("10000 pairs, violations %ld, max excess %.2e", violations, worst)};
}

Outcome spencer_desk_scale() {
  Outcome o;
  double worst_ratio = 0.0, worst_slack = 1e300;
  for (int n : {64, 128, 256}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Instance a = gen_rademacher(n, n, seed);
      SpencerOptions opts;
      opts.record_trace = true;
      const SpencerRun r = spencer_color(a, opts);
      const double bound = r.potential_start + r.ledger;
      const double ratio = r.discrepancy / std::sqrt(double(n));
      worst_ratio = std::max(worst_ratio, ratio);
      worst_slack = std::min(worst_slack, bound - r.discrepancy);
      if (r.discrepancy > bound || ratio > 6.0) o.pass = false;
      record(fmt("spencer n=%d seed=%d", n, int(seed)), r.walk.trace, &a);
    }
  }
  o.detail = fmt("15 runs, max ||Ax||/sqrt(n) %.3f (<= 6), min (bound - ||Ax||) %.2f (>= 0)",
                 worst_ratio, worst_slack);
  return o;
}

Outcome tight_spencer() {
  Outcome o;
  const int n = 256;
  const double root = std::sqrt(double(n));
  double worst_ratio = 0.0, worst_c0 = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance a = gen_rademacher(n, n, seed);
    SpencerOptions opts;
    opts.eps = 0.3;
    opts.seed = seed;
    opts.record_trace = true;
    const SpencerRun r = spencer_color_tight(a, opts);
    const double ratio = r.discrepancy / root;
    const double rhs = kTightConstant + 0.3 + r.c0 / root;
    worst_ratio = std::max(worst_ratio, ratio);
    worst_c0 = std::max(worst_c0, r.c0);
    if (ratio > rhs || r.c0 > 32.0 || r.discrepancy >= 5.32 * root) o.pass = false;
    record(fmt("spencer-tight seed=%d", int(seed)), r.walk.trace, &a);
  }
  o.detail = fmt("max ratio %.3f vs 3sqrt(3/2)+0.3 = %.3f, max c0 %.2f (<= 32), "
                 "reference 5.32",
                 worst_ratio, kTightConstant + 0.3, worst_c0);
  return o;
}

// Dense route: top singular value of (A∘A)(I - 11^T/n).
double lambda_dense(const Mat& a) {
  const auto n = a.cols();
  const Mat p = Mat::Identity(n, n) - Mat::Constant(n, n, 1.0 / n);
  Eigen::BDCSVD<Mat> svd(a.cwiseAbs2() * p);
  return svd.singularValues()(0);
}

Outcome lambda_estimation() {
  Outcome o;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n = 16 + 12 * i;  // 16 .. 244
    Instance a;
    switch (i % 4) {
      case 0: a = gen_gaussian(n, 300 + i); break;
      case 1: a = gen_haar(n, 300 + i); break;
      case 2: a = gen_regular_system(n, 3 + i % 5, 300 + i); break;
      default: {
        std::mt19937_64 rng(300 + i);
        std::exponential_distribution<double> e(1.0);
        Mat m(n, n);
        for (auto& v : m.reshaped()) v = e(rng) / n;
        a = make_instance(m);
      }
    }
    const double dense = lambda_dense(a.entries);
    const double fast = lambda_param(a.entries);
    worst = std::max(worst, std::abs(fast - dense) / std::max(dense, 1e-300));
  }
  const double li = lambda_param(Mat::Identity(128, 128));
  const double lj = lambda_param(Mat::Ones(128, 128));
  o.pass = worst <= 1e-6 && li == 1.0 && lj == 0.0;
  o.detail = fmt("max rel err %.2e (<= 1e-6), lambda(I) - 1 = %.1e, lambda(J) = %.1e", worst,
                 li - 1.0, lj);
  return o;
}

Outcome pseudorandom_komlos() {
  Outcome o;
  int runs = 0, lambda_ok = 0;
  double worst_disc = 0.0, worst_psi = 0.0, worst_phi = -1e300, max_lambda_root = 0.0;
  for (const char* family : {"gaussian", "haar"}) {
    for (int n : {128, 256}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Instance a = std::string(family) == "gaussian" ? gen_gaussian(n, seed) : gen_haar(n, seed);
        KomlosOptions opts;
        opts.record_trace = true;
        const KomlosRun r = komlos_color(a, opts);
        ++runs;
        const double root = std::sqrt(double(n));
        if (r.lambda <= 2.0 / root) ++lambda_ok;
        max_lambda_root = std::max(max_lambda_root, r.lambda * root);
        worst_disc = std::max(worst_disc, r.discrepancy);
        worst_psi = std::max(worst_psi, r.max_psi_increase);
        worst_phi = std::max(worst_phi, r.max_phi_ledger);
        record(fmt("komlos %s n=%d seed=%d", family, n, int(seed)), r.walk.trace);
      }
    }
  }
  const bool lambda_pass = 10 * lambda_ok >= 9 * runs;
  const bool disc_pass = worst_disc <= 10.0;
  const bool psi_pass = worst_psi <= 1e-9;
  const bool phi_pass = worst_phi <= 100.0;
  o.pass = lambda_pass && disc_pass && psi_pass && phi_pass;
  o.detail = fmt("lambda <= 2/sqrt(n) in %d/%d runs [%s] (max lambda*sqrt(n) %.2f); "
                 "max ||Ax|| %.3f (<= 10) [%s]; max Psi step increase %.1e [%s]; "
                 "max Phi ledger %.2f (<= 100) [%s]",
                 lambda_ok, runs, lambda_pass ? "ok" : "FAIL", max_lambda_root, worst_disc,
                 disc_pass ? "ok" : "FAIL", worst_psi, psi_pass ? "ok" : "FAIL", worst_phi,
                 phi_pass ? "ok" : "FAIL");
  return o;
}

Outcome pseudorandom_beck_fiala() {
  Outcome o;
  double worst_ratio = 0.0;
  int worst_codim = -1 << 30;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance a = gen_regular_system(128, 8, seed);
    KomlosOptions opts;
    opts.record_trace = true;
    const BeckFialaRun r = beck_fiala_color(a, opts);
    const double cap = 20.0 * r.reference;
    worst_ratio = std::max(worst_ratio, r.discrepancy / r.reference);
    worst_codim = std::max(worst_codim, r.komlos.max_codim_excess);
    if (r.discrepancy > cap || r.komlos.max_codim_excess > 0) o.pass = false;
    record(fmt("beck-fiala seed=%d", int(seed)), r.komlos.walk.trace);
  }
  o.detail = fmt("max ||Ax|| / (sqrt(s) + min(sqrt(lambda log n), lambda)) %.3f (<= 20), "
                 "max codimension excess %d (<= 0)",
                 worst_ratio, worst_codim);
  return o;
}

Outcome lll_resampling() {
  Outcome o;
  const int n = 1024, s = 16;
  long max_rounds = 0;
  double worst = 0.0;
  const long t_max = lll_default_t_max(n);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance a = gen_regular_system(n, s, seed);
    try {
      const LllRun r = lll_color(a, seed, t_max);
      max_rounds = std::max(max_rounds, r.trace.total_rounds);
      worst = std::max(worst, r.discrepancy);
      if (!r.trace.terminated || r.discrepancy > lll_threshold(s)) o.pass = false;
    } catch (const NonTermination&) {
      o.pass = false;
      max_rounds = t_max;
    }
  }
  const ChernoffWitness w = chernoff_witness(s, 1000000, 1);
  if (w.empirical > w.bound || w.exact > w.bound) o.pass = false;
  o.detail = fmt("20 runs, max rounds %ld (t_max %ld), max row discrepancy %.0f (<= %.2f); "
                 "Chernoff %ld/%ld bad, exact %.2e, bound s^-8 = %.2e",
                 max_rounds, t_max, worst, lll_threshold(s), w.bad, w.trials, w.exact, w.bound);
  return o;
}

Outcome haar_moments() {
  Outcome o;
  double worst = 0.0;
  for (int n : {4, 8}) {
    const HaarMoments h = haar_moment_estimate(n, 100000, 7);
    const std::pair<MomentEstimate, double> cases[] = {{h.m8, haar_moment_8_exact(n)},
                                                       {h.m44, haar_moment_44_exact(n)},
                                                       {h.m2222, haar_moment_2222_exact(n)}};
    for (const auto& [est, exact] : cases) {
      const double z = std::abs(est.mean - exact) / est.std_error;
      worst = std::max(worst, z);
      if (z > 3.0) o.pass = false;
    }
  }
  o.detail = fmt("n in {4, 8}, 1e5 samples, max |estimate - exact| / SE %.2f (<= 3)", worst);
  return o;
}

Outcome ellipsoid_checks() {
  Outcome o;
  double worst = 0.0;
  for (int n : {64, 128}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const EllipsoidPair p = gen_ellipsoid_geometric(n, seed);
      EllipsoidOptions opts;
      opts.record_trace = true;
      const EllipsoidRun r = ellipsoid_color(p.q, p.b, opts);
      const double ratio = r.value / std::sqrt(r.trace_b);
      worst = std::max(worst, ratio);
      if (ratio > 4.0) o.pass = false;
      record(fmt("ellipsoid n=%d seed=%d", n, int(seed)), r.walk.trace);
    }
  }
  std::string tight;
  for (int n : {64, 128}) {
    EllipsoidOptions opts;
    opts.record_trace = true;
    const EllipsoidRun r = ellipsoid_color(Mat::Identity(n, n), Mat::Identity(n, n), opts);
    const double root = std::sqrt(double(n));
    if (r.value < root * (1 - 1e-6) || r.value > root) o.pass = false;
    tight += fmt(" n=%d: %.12g vs %.12g;", n, r.value, root);
    record(fmt("ellipsoid identity n=%d", n), r.walk.trace);
  }
  o.detail = fmt("max ||Qx||_B / sqrt(Tr B) %.3f (<= 4); identity", worst) + tight;
  return o;
}

Outcome engine_invariants() {
  Outcome o;
  long checks = 0;
  std::string first;
  int failed = 0;
  for (const auto& t : g_traced) {
    checks += t.verdict.checks;
    if (!t.verdict.pass) {
      ++failed;
      if (first.empty() && !t.verdict.failures.empty()) {
        const auto& f = t.verdict.failures.front();
        first = " first: " + t.label + " step " + std::to_string(f.step) + " " + f.invariant +
                " (" + f.detail + ")";
      }
    }
  }
  o.pass = failed == 0 && !g_traced.empty();
  o.detail = fmt("%zu traced runs, %ld checks, %d failing", g_traced.size(), checks, failed) + first;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double limit_s;  // 0: no runtime limit
  };
  const std::vector<Criterion> criteria = {
      {"regularizer correctness", regularizer_correctness, 30},
      {"Taylor domination", taylor_domination, 60},
      {"Spencer desk-scale", spencer_desk_scale, 600},
      {"tight-constant Spencer", tight_spencer, 900},
      {"lambda estimation", lambda_estimation, 120},
      {"pseudorandom Komlos", pseudorandom_komlos, 1800},
      {"pseudorandom Beck-Fiala", pseudorandom_beck_fiala, 900},
      {"LLL resampling", lll_resampling, 600},
      {"Haar moments", haar_moments, 600},
      {"ellipsoid", ellipsoid_checks, 300},
      {"engine invariants", engine_invariants, 0},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double limit = criteria[i].limit_s;
    if (limit > 0 && secs > limit) o.pass = false;
    all = all && o.pass;
    std::printf("[%s] %2d %s: %s (%.1f s", o.pass ? "PASS" : "FAIL", id, criteria[i].name,
                o.detail.c_str(), secs);
    if (limit > 0) std::printf(", limit %.0f s", limit);
    std::printf(")\n");
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
