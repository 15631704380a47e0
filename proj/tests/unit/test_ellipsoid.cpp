#include <doctest.h>

#include <cmath>
#include <random>

#include "discforge/ellipsoid.hpp"
#include "discforge/error.hpp"
#include "discforge/verify.hpp"

using namespace discforge;

namespace {

struct Pair {
  Mat q;
  Mat b;
};

Pair random_pair(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Pair p{Mat(n, n), Mat(n, n)};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) p.q(i, j) = g(rng);
  p.q = p.q.colwise().normalized();
  Mat h(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) h(i, j) = g(rng);
  p.b = h * h.transpose() / n;
  return p;
}

}  // namespace

TEST_CASE("B = 0 gives value 0") {
  const Pair p = random_pair(12, 1);
  const EllipsoidRun r = ellipsoid_color(p.q, Mat::Zero(12, 12));
  CHECK(r.value == 0.0);
  CHECK(r.coloring.cwiseAbs().minCoeff() == 1.0);
}

TEST_CASE("Q = B = I gives sqrt(n)") {
  for (int n : {8, 32}) {
    const EllipsoidRun r = ellipsoid_color(Mat::Identity(n, n), Mat::Identity(n, n));
    CHECK(r.value == doctest::Approx(std::sqrt(double(n))).epsilon(1e-12));
    CHECK(r.constant == doctest::Approx(1.0));
  }
}

TEST_CASE("random geometric pair") {
  const Pair p = random_pair(40, 7);
  EllipsoidOptions o;
  o.record_trace = true;
  const EllipsoidRun r = ellipsoid_color(p.q, p.b, o);
  const double direct = std::sqrt(std::max(0.0, (p.q * r.coloring).dot(p.b * (p.q * r.coloring))));
  CHECK(r.value == doctest::Approx(direct).epsilon(1e-10));
  CHECK(r.value == doctest::Approx(r.value_rotated).epsilon(1e-9));
  CHECK(r.trace_b == doctest::Approx(p.b.trace()));
  CHECK(r.value <= r.certified + 1e-9);
  CHECK(r.max_increase_ratio <= 8.0 + 1e-9);
  CHECK(verify_trace(r.walk.trace).pass);
}

TEST_CASE("b_norm matches the quadratic form") {
  const Pair p = random_pair(10, 3);
  const Vec z = Vec::LinSpaced(10, -1.0, 2.0);
  CHECK(b_norm(p.b, z) == doctest::Approx(std::sqrt(z.dot(p.b * z))));
}

TEST_CASE("ellipsoid instance checks") {
  const Pair p = random_pair(6, 2);
  Mat not_psd = p.b;
  not_psd(0, 0) = -1.0;
  CHECK_THROWS_AS(make_ellipsoid_instance(p.q, not_psd), Error);
  Mat not_sym = p.b;
  not_sym(0, 1) += 0.5;
  CHECK_THROWS_AS(make_ellipsoid_instance(p.q, not_sym), Error);
  CHECK_THROWS_AS(make_ellipsoid_instance(2 * p.q, p.b), Error);
  CHECK_THROWS_AS(make_ellipsoid_instance(p.q, Mat::Identity(5, 5)), Error);

  const EllipsoidInstance e = make_ellipsoid_instance(p.q, p.b);
  for (Eigen::Index i = 1; i < e.d.size(); ++i) CHECK(e.d(i) <= e.d(i - 1));
  // Rotation preserves the form: sum_i d_i (q_rot x)_i^2 = ||Q x||_B^2.
  const Vec x = Vec::Ones(6);
  const Vec y = e.q_rot * x;
  CHECK(y.dot(e.d.asDiagonal() * y) == doctest::Approx(std::pow(b_norm(p.b, p.q * x), 2)));
}
