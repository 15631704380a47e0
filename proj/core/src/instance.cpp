#include "discforge/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <set>
#include <utility>

#include <Eigen/QR>

#include "discforge/error.hpp"
#include "discforge/rng.hpp"

namespace discforge {

namespace {

constexpr double kGaussianColLow = 0.8;
constexpr double kGaussianColHigh = 1.2;
constexpr int kRegularMaxAttempts = 1000;

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::kGaussian: return "gaussian";
    case Family::kHaar: return "haar";
    case Family::kRegularSetSystem: return "regular-set-system";
    case Family::kTwistedHypercube: return "twisted-hypercube";
    case Family::kHadamard: return "hadamard";
    case Family::kRademacher: return "rademacher";
    case Family::kFile: return "file";
  }
  return "file";
}

Family family_from_string(std::string_view name) {
  if (name == "gaussian") return Family::kGaussian;
  if (name == "haar") return Family::kHaar;
  if (name == "regular-set-system" || name == "regular") return Family::kRegularSetSystem;
  if (name == "twisted-hypercube" || name == "twisted") return Family::kTwistedHypercube;
  if (name == "hadamard") return Family::kHadamard;
  if (name == "rademacher") return Family::kRademacher;
  if (name == "file") return Family::kFile;
  fail(ErrorCode::kInvalidArgument, "unknown instance family '" + std::string(name) + "'");
}

double max_column_norm(const Mat& a) {
  if (a.cols() == 0) return 0.0;
  return a.colwise().norm().maxCoeff();
}

int max_column_nonzeros(const Mat& a) {
  int best = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    best = std::max(best, static_cast<int>((a.col(j).array() != 0.0).count()));
  }
  return best;
}

int max_row_nonzeros(const Mat& a) {
  int best = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    best = std::max(best, static_cast<int>((a.row(i).array() != 0.0).count()));
  }
  return best;
}

void Instance::validate() const {
  if (!entries.allFinite()) fail(ErrorCode::kInvalidInstance, "instance has non-finite entries");
  const double norm = max_column_norm(entries);
  if (norm > col_norm_bound * (1.0 + 1e-9) + 1e-300) {
    fail(ErrorCode::kInvalidInstance, "max column norm " + std::to_string(norm) +
                                          " exceeds declared bound " +
                                          std::to_string(col_norm_bound));
  }
  if (col_sparsity) {
    if (*col_sparsity < 0) fail(ErrorCode::kInvalidInstance, "negative column sparsity");
    if (max_column_nonzeros(entries) > *col_sparsity) {
      fail(ErrorCode::kInvalidInstance, "a column has more than " + std::to_string(*col_sparsity) +
                                            " nonzero entries");
    }
  }
}

std::uint64_t Instance::fingerprint() const {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(rows()) << 32 |
                               static_cast<std::uint64_t>(cols()));
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      double v = entries(i, j);
      if (v == 0.0) v = 0.0;  // fold -0.0
      std::uint64_t bits = 0;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(v));
      h = splitmix64(h ^ bits);
    }
  }
  return h;
}

Instance make_instance(Mat entries, Family family, std::uint64_t seed) {
  Instance inst;
  inst.col_norm_bound = max_column_norm(entries);
  const bool integral = (entries.array() == entries.array().round()).all();
  if (integral) inst.col_sparsity = max_column_nonzeros(entries);
  inst.entries = std::move(entries);
  inst.family = family;
  inst.seed = seed;
  inst.validate();
  return inst;
}

Instance gen_gaussian(int n, std::uint64_t seed) {
  require(n >= 2, "gen_gaussian: n must be >= 2");
  auto rng = make_rng(seed, Stream::kInstance);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  Mat a(n, n);
  for (int j = 0; j < n; ++j) {
    for (;;) {
      for (int i = 0; i < n; ++i) a(i, j) = normal(rng);
      const double norm = a.col(j).norm();
      if (norm >= kGaussianColLow && norm <= kGaussianColHigh) break;
    }
  }
  Instance inst;
  inst.entries = std::move(a);
  inst.family = Family::kGaussian;
  inst.seed = seed;
  inst.col_norm_bound = kGaussianColHigh;
  return inst;
}

Instance gen_haar(int n, std::uint64_t seed) {
  require(n >= 2, "gen_haar: n must be >= 2");
  auto rng = make_rng(seed, Stream::kInstance);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat q;
  for (;;) {
    Mat g(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Mat> qr(g);
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    const double scale = r.diagonal().cwiseAbs().maxCoeff();
    if (r.diagonal().cwiseAbs().minCoeff() < 1e-10 * scale) continue;  // near-dependent: redraw
    q = qr.householderQ() * Mat::Identity(n, n);
    for (int j = 0; j < n; ++j) {
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    const double orth_err = (q.transpose() * q - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
    if (orth_err <= 1e-8) break;
  }
  Instance inst;
  inst.entries = std::move(q);
  inst.family = Family::kHaar;
  inst.seed = seed;
  inst.col_norm_bound = 1.0;
  return inst;
}

Instance gen_regular_system(int n, int s, std::uint64_t seed) {
  require(n >= 1, "gen_regular_system: n must be >= 1");
  require(s >= 1 && s <= n, "gen_regular_system: need 1 <= s <= n");
  require((static_cast<long long>(n) * s) % 2 == 0, "gen_regular_system: n*s must be even");
  auto rng = make_rng(seed, Stream::kInstance);
  const int edges = n * s;

  for (int attempt = 0; attempt < kRegularMaxAttempts; ++attempt) {
    // Row stubs are fixed in order; column stubs are shuffled.
    std::vector<int> cols(edges);
    for (int e = 0; e < edges; ++e) cols[e] = e / s;
    std::shuffle(cols.begin(), cols.end(), rng);
    std::vector<int> rows(edges);
    for (int e = 0; e < edges; ++e) rows[e] = e / s;

    std::multiset<std::pair<int, int>> present;
    for (int e = 0; e < edges; ++e) present.emplace(rows[e], cols[e]);
    auto duplicated = [&](int e) { return present.count({rows[e], cols[e]}) > 1; };

    std::uniform_int_distribution<int> pick(0, edges - 1);
    long long budget = 100LL * edges + 1000;
    bool ok = true;
    for (int e = 0; e < edges && ok; ++e) {
      while (duplicated(e)) {
        if (--budget < 0) {
          ok = false;
          break;
        }
        const int f = pick(rng);
        if (f == e) continue;
        // Swap column endpoints of edges e and f if that creates no new duplicates.
        const std::pair<int, int> ne{rows[e], cols[f]}, nf{rows[f], cols[e]};
        if (present.count(ne) || present.count(nf)) continue;
        present.erase(present.find({rows[e], cols[e]}));
        present.erase(present.find({rows[f], cols[f]}));
        std::swap(cols[e], cols[f]);
        present.insert(ne);
        present.insert(nf);
      }
    }
    if (!ok) continue;

    Mat a = Mat::Zero(n, n);
    for (int e = 0; e < edges; ++e) a(rows[e], cols[e]) = 1.0;
    Instance inst;
    inst.entries = std::move(a);
    inst.family = Family::kRegularSetSystem;
    inst.seed = seed;
    inst.col_norm_bound = std::sqrt(static_cast<double>(s));
    inst.col_sparsity = s;
    return inst;
  }
  fail(ErrorCode::kNumerical, "gen_regular_system: duplicate repair did not converge");
}

Instance gen_twisted_hypercube(int d, TwistMode mode, std::uint64_t seed) {
  require(d >= 1, "gen_twisted_hypercube: d must be >= 1");
  require(d <= 20, "gen_twisted_hypercube: d > 20 rejected (size guard)");
  auto rng = make_rng(seed, Stream::kInstance);
  const int n = 1 << d;
  Mat a = Mat::Zero(n, n);
  // Level i duplicates the graph on [0, half) into [half, 2*half) and adds a
  // perfect matching between the two copies.
  for (int level = 1; level <= d; ++level) {
    const int half = 1 << (level - 1);
    a.block(half, half, half, half) = a.block(0, 0, half, half);
    std::vector<int> match(half);
    std::iota(match.begin(), match.end(), 0);
    if (mode == TwistMode::kRandom) std::shuffle(match.begin(), match.end(), rng);
    for (int v = 0; v < half; ++v) {
      a(v, half + match[v]) = 1.0;
      a(half + match[v], v) = 1.0;
    }
  }
  Instance inst;
  inst.entries = std::move(a);
  inst.family = Family::kTwistedHypercube;
  inst.seed = seed;
  inst.col_norm_bound = std::sqrt(static_cast<double>(d));
  inst.col_sparsity = d;
  return inst;
}

Instance gen_hadamard(int n) {
  require(n >= 1 && (n & (n - 1)) == 0, "gen_hadamard: n must be a power of two");
  Mat h(1, 1);
  h(0, 0) = 1.0;
  while (h.rows() < n) {
    const Eigen::Index k = h.rows();
    Mat next(2 * k, 2 * k);
    next << h, h, h, -h;
    h = std::move(next);
  }
  Instance inst;
  inst.entries = std::move(h);
  inst.family = Family::kHadamard;
  inst.col_norm_bound = std::sqrt(static_cast<double>(n));
  inst.col_sparsity = n;
  return inst;
}

Instance gen_rademacher(int m, int n, std::uint64_t seed) {
  require(m >= 1 && n >= 1, "gen_rademacher: dimensions must be positive");
  auto rng = make_rng(seed, Stream::kInstance);
  std::bernoulli_distribution coin(0.5);
  Mat a(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) a(i, j) = coin(rng) ? 1.0 : -1.0;
  Instance inst;
  inst.entries = std::move(a);
  inst.family = Family::kRademacher;
  inst.seed = seed;
  inst.col_norm_bound = std::sqrt(static_cast<double>(m));
  inst.col_sparsity = m;
  return inst;
}

}  // namespace discforge
