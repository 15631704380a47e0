#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "discforge/error.hpp"
#include "discforge/instance.hpp"

namespace discforge {

struct ResampleRound {
  int row = 0;  // resampled row (smallest bad index)
  int bad = 0;  // number of bad rows when it was picked
};

struct ResampleTrace {
  std::vector<ResampleRound> rounds;
  long total_rounds = 0;
  bool terminated = false;
  double threshold = 0.0;
};

struct LllRun {
  Vec coloring;
  ResampleTrace trace;
  int s = 0;
  double discrepancy = 0.0;
};

// Thrown when t_max rounds pass with a bad row left; carries the trace and
// the last coloring.
class NonTermination : public Error {
 public:
  NonTermination(LllRun partial, const std::string& what)
      : Error(ErrorCode::kNonTermination, what), partial_(std::move(partial)) {}
  const LllRun& partial() const { return partial_; }

 private:
  LllRun partial_;
};

// 4 sqrt(s log s), natural log.
double lll_threshold(int s);

// 100 n ceil(log n).
long lll_default_t_max(int n);

// 0/1 matrix with at most s nonzeros per row and per column (s from the
// instance metadata, lifted to 2). `threshold` overrides 4 sqrt(s log s).
LllRun lll_color(const Instance& a, std::uint64_t seed, std::optional<long> t_max = std::nullopt,
                 std::optional<double> threshold = std::nullopt);

struct ChernoffWitness {
  int s = 0;
  long trials = 0;
  long bad = 0;
  double empirical = 0.0;   // bad / trials
  double exact = 0.0;       // P(|sum of s signs| > 4 sqrt(s log s)) from the binomial law
  double bound = 0.0;       // s^-8
};

// Monte Carlo estimate of the bad-row probability for a row with s ones.
ChernoffWitness chernoff_witness(int s, long trials, std::uint64_t seed);

}  // namespace discforge
