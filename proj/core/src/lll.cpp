#include "discforge/lll.hpp"

#include <cmath>
#include <random>

#include "discforge/rng.hpp"

namespace discforge {

double lll_threshold(int s) {
  require(s >= 2, "lll: s must be >= 2");
  return 4.0 * std::sqrt(s * std::log(static_cast<double>(s)));
}

long lll_default_t_max(int n) {
  return 100L * n * static_cast<long>(std::ceil(std::log(std::max(2, n))));
}

LllRun lll_color(const Instance& a, std::uint64_t seed, std::optional<long> t_max,
                 std::optional<double> threshold) {
  const Mat& m = a.entries;
  if (!((m.array() == 0.0) || (m.array() == 1.0)).all())
    fail(ErrorCode::kInvalidInstance, "lll: entries must be 0/1");
  const int actual = std::max(max_column_nonzeros(m), max_row_nonzeros(m));
  int s = a.col_sparsity ? *a.col_sparsity : actual;
  if (actual > s)
    fail(ErrorCode::kInvalidInstance, "lll: row or column sparsity " + std::to_string(actual) +
                                          " exceeds declared s=" + std::to_string(s));
  s = std::max(s, 2);

  LllRun run;
  run.s = s;
  run.trace.threshold = threshold ? *threshold : lll_threshold(s);
  require(run.trace.threshold >= 0.0, "lll: threshold must be >= 0");
  const long limit = t_max ? *t_max : lll_default_t_max(a.cols());
  require(limit >= 0, "lll: t_max must be >= 0");

  // Row supports; each row touches at most s variables.
  std::vector<std::vector<int>> support(a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (m(i, j) != 0.0) support[i].push_back(j);

  auto rng = make_rng(seed, Stream::kAlgorithm);
  std::bernoulli_distribution coin(0.5);
  Vec x(a.cols());
  for (int j = 0; j < a.cols(); ++j) x(j) = coin(rng) ? 1.0 : -1.0;
  Vec ax = m * x;

  const double thr = run.trace.threshold;
  for (;;) {
    int first = -1;
    int bad = 0;
    for (int i = 0; i < a.rows(); ++i) {
      if (std::abs(ax(i)) > thr) {
        if (first < 0) first = i;
        ++bad;
      }
    }
    if (first < 0) {
      run.trace.terminated = true;
      break;
    }
    if (run.trace.total_rounds >= limit) {
      run.coloring = x;
      run.discrepancy = ax.cwiseAbs().maxCoeff();
      throw NonTermination(run, "lll: " + std::to_string(bad) + " bad rows left after t_max=" +
                                    std::to_string(limit) + " rounds");
    }
    run.trace.rounds.push_back({first, bad});
    ++run.trace.total_rounds;
    for (int j : support[first]) {
      const double v = coin(rng) ? 1.0 : -1.0;
      if (v != x(j)) {
        ax += (v - x(j)) * m.col(j);
        x(j) = v;
      }
    }
  }
  run.coloring = x;
  run.discrepancy = a.rows() ? ax.cwiseAbs().maxCoeff() : 0.0;
  return run;
}

ChernoffWitness chernoff_witness(int s, long trials, std::uint64_t seed) {
  require(s >= 2 && trials > 0, "chernoff_witness: need s >= 2 and trials > 0");
  ChernoffWitness w;
  w.s = s;
  w.trials = trials;
  w.bound = std::pow(static_cast<double>(s), -8.0);
  const double thr = lll_threshold(s);

  // The sum of s signs is 2b - s with b ~ Binomial(s, 1/2).
  for (int b = 0; b <= s; ++b) {
    if (std::abs(2.0 * b - s) <= thr) continue;
    w.exact += std::exp(std::lgamma(s + 1.0) - std::lgamma(b + 1.0) - std::lgamma(s - b + 1.0) -
                        s * std::log(2.0));
  }

  auto rng = make_rng(seed, Stream::kMonteCarlo);
  std::binomial_distribution<int> heads(s, 0.5);
  for (long t = 0; t < trials; ++t)
    if (std::abs(2.0 * heads(rng) - s) > thr) ++w.bad;
  w.empirical = static_cast<double>(w.bad) / static_cast<double>(trials);
  return w;
}

}  // namespace discforge
