#include <doctest.h>

#include <cmath>
#include <numeric>

#include "covspec/errors.hpp"
#include "covspec/mc.hpp"

using namespace covspec;

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("inverse normal cdf against reference quantiles") {
  CHECK(rng::inverse_normal_cdf(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(rng::inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(rng::inverse_normal_cdf(0.9999) == doctest::Approx(3.719016485455709).epsilon(1e-11));
  CHECK(rng::inverse_normal_cdf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-10));
  CHECK(rng::inverse_normal_cdf(0.3) == doctest::Approx(-0.524400512708041).epsilon(1e-12));
  CHECK_THROWS_AS(rng::inverse_normal_cdf(0.0), ArgumentError);
  CHECK_THROWS_AS(rng::inverse_normal_cdf(1.0), ArgumentError);
}

TEST_CASE("counter rng is stateless and seed-sensitive") {
  CHECK(rng::uniform01(1, 7) == rng::uniform01(1, 7));
  CHECK(rng::uniform01(1, 7) != rng::uniform01(2, 7));
  CHECK(rng::uniform01(1, 7) != rng::uniform01(1, 8));
  for (int i = 0; i < 1000; ++i) {
    double u = rng::uniform01(42, static_cast<std::uint64_t>(i));
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("zero operator draws are all zero") {
  McConfig cfg{100, 5, 10};
  auto draws = sample_sqnorm(OperatorExpr::scale(0.0, parse("T T'")), 1, 32, cfg);
  for (double v : draws) CHECK(v == 0.0);
}

TEST_CASE("wiener squared-norm mean matches the trace") {
  McConfig cfg{20000, 7, 100};
  auto draws = sample_sqnorm(parse("T T'"), 1, 200, cfg);
  // E ||W||^2 = 1/2; sd of a single draw is about 0.577
  double se = std::sqrt(var_of(draws) / cfg.reps);
  CHECK(std::abs(mean_of(draws) - 0.5) < 3.0 * se + 0.01);
}

TEST_CASE("bridge squared-norm mean matches 1/6") {
  McConfig cfg{20000, 11, 100};
  auto draws = sample_sqnorm(parse("T (I - P) T'"), 1, 200, cfg);
  double se = std::sqrt(var_of(draws) / cfg.reps);
  CHECK(std::abs(mean_of(draws) - 1.0 / 6) < 3.0 * se + 0.005);
}

TEST_CASE("sample variance matches 2 sum lambda^2") {
  std::vector<double> eigs = {0.5, 0.25, 0.125, 0.0625};
  McConfig cfg{40000, 3, 4};
  auto draws = sample_quadform(eigs, cfg);
  double expect_mean = 0.9375;
  double expect_var = 0.0;
  for (double l : eigs) expect_var += 2.0 * l * l;
  CHECK(mean_of(draws) == doctest::Approx(expect_mean).epsilon(0.02));
  CHECK(var_of(draws) == doctest::Approx(expect_var).epsilon(0.05));
}

TEST_CASE("bit-identical reproducibility") {
  McConfig cfg{500, 123, 20};
  auto a = sample_sqnorm(parse("T T'"), 1, 64, cfg);
  auto b = sample_sqnorm(parse("T T'"), 1, 64, cfg);
  CHECK(a == b);
  cfg.seed = 124;
  auto c = sample_sqnorm(parse("T T'"), 1, 64, cfg);
  CHECK(a != c);
}

TEST_CASE("truncation monotonicity pathwise") {
  McConfig lo{300, 9, 30}, hi{300, 9, 60};
  auto a = sample_sqnorm(parse("T T'"), 1, 128, lo);
  auto b = sample_sqnorm(parse("T T'"), 1, 128, hi);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] >= a[i]);
}

TEST_CASE("path synthesis agrees with the eigenbasis form") {
  McConfig cfg{50, 17, 40};
  auto fast = sample_sqnorm(parse("T (I - P) T'"), 1, 100, cfg);
  auto slow = sample_sqnorm_paths(parse("T (I - P) T'"), 1, 100, cfg);
  for (std::size_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-10);
}

TEST_CASE("trunc_m beyond available modes raises") {
  McConfig cfg{10, 1, 200};
  CHECK_THROWS_AS(sample_sqnorm(parse("T (I - P) T'"), 1, 16, cfg), ArgumentError);
}

TEST_CASE("ks statistic of identical draws is zero") {
  McConfig cfg{1000, 77, 50};
  auto a = sample_sqnorm(parse("T T'"), 1, 64, cfg);
  KsResult r = two_sample_compare(a, a);
  CHECK(r.stat == 0.0);
  CHECK(r.p_approx == 1.0);
  CHECK_THROWS_AS(two_sample_compare({}, a), ArgumentError);
}

TEST_CASE("wiener vs bridge draws are rejected") {
  McConfig ca{5000, 5, 80}, cb{5000, 6, 80};
  auto a = sample_sqnorm(parse("T T'"), 1, 128, ca);
  auto b = sample_sqnorm(parse("T (I - P) T'"), 1, 128, cb);
  KsResult r = two_sample_compare(a, b);
  CHECK(r.p_approx < 1e-6);
}

TEST_CASE("equivalent pair draws are not rejected") {
  // same spectra at matched grid imply identical laws of the quadratic form
  OperatorExpr lhs = parse("(T#T) (I#I - P#P) (T#T)'");
  OperatorExpr rhs = parse("(I#I - P#P) (T#T) (T#T)' (I#I - P#P)");
  McConfig ca{8000, 21, 60}, cb{8000, 22, 60};
  auto a = sample_sqnorm(lhs, 2, 20, ca);
  auto b = sample_sqnorm(rhs, 2, 20, cb);
  KsResult r = two_sample_compare(a, b);
  CHECK(r.p_approx > 0.01);
}
