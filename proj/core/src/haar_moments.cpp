#include <cmath>

#include "discforge/error.hpp"
#include "discforge/instance.hpp"
#include "discforge/rng.hpp"

namespace discforge {

namespace {

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
  }
  MomentEstimate finish(int count) const {
    const double mean = sum / count;
    const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1));
    return {mean, std::sqrt(var / count)};
  }
};

}  // namespace

double haar_moment_8_exact(int n) {
  const double d = n;
  return 105.0 / (d * (d + 2) * (d + 4) * (d + 6));
}

double haar_moment_44_exact(int n) {
  const double d = n;
  return 9.0 / (d * (d + 2) * (d + 4) * (d + 6));
}

double haar_moment_2222_exact(int n) {
  const double d = n;
  return (d * d + 4 * d + 15) / (d * (d + 2) * (d - 1) * (d + 1) * (d + 4) * (d + 6));
}

HaarMoments haar_moment_estimate(int n, int trials, std::uint64_t seed) {
  require(n >= 2, "haar_moment_estimate: n must be >= 2");
  require(trials >= 100, "haar_moment_estimate: need at least 100 trials");
  const double nn = n;
  Accumulator a8, a44, a2222;
  for (int t = 0; t < trials; ++t) {
    // Each trial is its own instance seed so samples are independent draws.
    const Mat a = gen_haar(n, splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(t) + 1))
                      .entries;
    const Mat c = a.cwiseAbs2();
    const Mat c2 = c.cwiseAbs2();

    a8.add(c2.cwiseAbs2().sum() / (nn * nn));

    // Same row or same column, two distinct positions.
    const double row_pairs = (c2.rowwise().sum().squaredNorm() - c2.squaredNorm());
    const double col_pairs = (c2.colwise().sum().squaredNorm() - c2.squaredNorm());
    a44.add((row_pairs + col_pairs) / (2.0 * nn * nn * (nn - 1)));

    // sum over i != k, j != l of C_ij C_il C_kj C_kl by inclusion-exclusion.
    const double full = (c * c.transpose()).squaredNorm();
    const double same_row = c.rowwise().squaredNorm().squaredNorm();
    const double same_col = c.colwise().squaredNorm().squaredNorm();
    const double both = c2.squaredNorm();
    a2222.add((full - same_row - same_col + both) / (nn * nn * (nn - 1) * (nn - 1)));
  }
  return {a8.finish(trials), a44.finish(trials), a2222.finish(trials)};
}

}  // namespace discforge
