#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "covspec/catalog.hpp"
#include "covspec/equiv.hpp"
#include "covspec/errors.hpp"
#include "covspec/gof.hpp"
#include "covspec/mc.hpp"

using namespace covspec;

namespace {

Sample make_sample(int d, std::vector<double> vals, bool post = true) {
  Sample s;
  s.d = d;
  s.rows = static_cast<int>(vals.size()) / d;
  s.values = std::move(vals);
  s.post_transform = post;
  return s;
}

// Exact integral of (F_n(z) - prod z_k)^2: the cube is cut into slabs at the
// sample coordinates, where the integrand is polynomial of degree 2 per
// axis, and each slab is covered by tensor 2-point Gauss cells (exact for
// cubics). Fully independent of the closed-form statistic.
double omega2_bruteforce(const Sample& s, int points_per_axis) {
  const int d = s.d, n = s.rows;
  std::vector<std::vector<double>> cuts(static_cast<std::size_t>(d));
  std::vector<std::vector<double>> nodes(static_cast<std::size_t>(d));
  std::vector<std::vector<double>> weights(static_cast<std::size_t>(d));
  const double g1 = 0.5 - 0.5 / std::sqrt(3.0), g2 = 0.5 + 0.5 / std::sqrt(3.0);
  for (int c = 0; c < d; ++c) {
    auto& cut = cuts[static_cast<std::size_t>(c)];
    cut.push_back(0.0);
    for (int r = 0; r < n; ++r) cut.push_back(s.at(r, c));
    cut.push_back(1.0);
    std::sort(cut.begin(), cut.end());
    cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
    int per_slab = std::max(1, points_per_axis / (2 * (static_cast<int>(cut.size()) - 1)));
    for (std::size_t sl = 0; sl + 1 < cut.size(); ++sl) {
      double a = cut[sl], b = cut[sl + 1];
      double step = (b - a) / per_slab;
      for (int q = 0; q < per_slab; ++q) {
        double lo = a + q * step;
        nodes[static_cast<std::size_t>(c)].push_back(lo + g1 * step);
        weights[static_cast<std::size_t>(c)].push_back(step / 2.0);
        nodes[static_cast<std::size_t>(c)].push_back(lo + g2 * step);
        weights[static_cast<std::size_t>(c)].push_back(step / 2.0);
      }
    }
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  double total = 0.0;
  for (;;) {
    double w = 1.0, prod = 1.0;
    std::vector<double> z(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
      z[static_cast<std::size_t>(c)] = nodes[static_cast<std::size_t>(c)][idx[static_cast<std::size_t>(c)]];
      w *= weights[static_cast<std::size_t>(c)][idx[static_cast<std::size_t>(c)]];
      prod *= z[static_cast<std::size_t>(c)];
    }
    int below = 0;
    for (int r = 0; r < n; ++r) {
      bool all = true;
      for (int c = 0; c < d; ++c)
        if (s.at(r, c) > z[static_cast<std::size_t>(c)]) {
          all = false;
          break;
        }
      below += all ? 1 : 0;
    }
    double fn = static_cast<double>(below) / n;
    total += w * (fn - prod) * (fn - prod);
    int c = d - 1;
    while (c >= 0 && ++idx[static_cast<std::size_t>(c)] ==
                         nodes[static_cast<std::size_t>(c)].size()) {
      idx[static_cast<std::size_t>(c)] = 0;
      --c;
    }
    if (c < 0) break;
  }
  return total;
}

std::vector<double> uniform_cube(int n, int d, std::uint64_t seed) {
  std::vector<double> vals(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = rng::uniform01(seed, i);
  return vals;
}

}  // namespace

TEST_CASE("omega2 worked examples") {
  CHECK(omega2(make_sample(1, {0.0})) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(omega2(make_sample(1, {0.5})) == doctest::Approx(1.0 / 12).epsilon(1e-14));
  CHECK(omega2(make_sample(2, {0.0, 0.0})) == doctest::Approx(11.0 / 18).epsilon(1e-15));
}

TEST_CASE("omega2 equals the brute-force integral") {
  for (int d : {1, 2, 3}) {
    for (int rep = 0; rep < 4; ++rep) {
      int n = 3 + rep * 5;
      Sample s = make_sample(d, uniform_cube(n, d, 100 + static_cast<std::uint64_t>(10 * d + rep)));
      double closed = omega2(s);
      double brute = omega2_bruteforce(s, d == 3 ? 60 : 200);
      CHECK(std::abs(closed - brute) < 1e-10);
    }
  }
}

TEST_CASE("omega2 invariances") {
  Sample s = make_sample(2, uniform_cube(9, 2, 55));
  double base = omega2(s);
  // permute observations
  Sample perm = s;
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < 2; ++c) perm.values[static_cast<std::size_t>(2 * r + c)] =
        s.at(s.rows - 1 - r, c);
  CHECK(omega2(perm) == doctest::Approx(base).epsilon(1e-15));
  // swap the coordinate axes everywhere
  Sample sw = s;
  for (int r = 0; r < s.rows; ++r) {
    sw.values[static_cast<std::size_t>(2 * r)] = s.at(r, 1);
    sw.values[static_cast<std::size_t>(2 * r + 1)] = s.at(r, 0);
  }
  CHECK(omega2(sw) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("omega2 input validation") {
  CHECK_THROWS_AS(omega2(make_sample(1, {0.5}, false)), ArgumentError);
  CHECK_THROWS_AS(omega2(make_sample(1, {1.5})), ArgumentError);
}

TEST_CASE("rosenblatt transform") {
  Sample s = make_sample(1, {0.3, 0.7}, false);
  std::vector<MarginSpec> unif = {UniformMargin{0.0, 1.0}};
  Sample u = rosenblatt_product(s, unif);
  CHECK(u.post_transform);
  CHECK(u.at(0, 0) == doctest::Approx(0.3).epsilon(1e-15));

  std::vector<MarginSpec> expm = {ExponentialMargin{1.0}};
  Sample e = rosenblatt_product(make_sample(1, {std::log(2.0)}, false), expm);
  CHECK(e.at(0, 0) == doctest::Approx(0.5).epsilon(1e-14));

  std::vector<MarginSpec> norm = {NormalMargin{0.0, 1.0}};
  Sample z = rosenblatt_product(make_sample(1, {1.959963984540054}, false), norm);
  CHECK(z.at(0, 0) == doctest::Approx(0.975).epsilon(1e-12));

  TableMargin tbl;
  tbl.xs = {0.0, 1.0, 2.0};
  tbl.fs = {0.0, 0.25, 1.0};
  std::vector<MarginSpec> tm = {tbl};
  Sample t = rosenblatt_product(make_sample(1, {1.5}, false), tm);
  CHECK(t.at(0, 0) == doctest::Approx(0.625).epsilon(1e-14));

  TableMargin bad;
  bad.xs = {0.0, 2.0, 1.0};
  bad.fs = {0.0, 0.5, 1.0};
  std::vector<MarginSpec> bm = {bad};
  CHECK_THROWS_AS(rosenblatt_product(make_sample(1, {0.5}, false), bm), ArgumentError);
}

TEST_CASE("margins string parsing") {
  auto ms = parse_margins("exp:1.0,norm:0:1");
  CHECK(ms.size() == 2);
  CHECK(std::holds_alternative<ExponentialMargin>(ms[0]));
  CHECK(std::holds_alternative<NormalMargin>(ms[1]));
  auto us = parse_margins("uniform,uniform");
  CHECK(us.size() == 2);
  CHECK_THROWS_AS(parse_margins("cauchy:0:1"), ArgumentError);
}

TEST_CASE("imhof against chi-squared tails") {
  std::vector<double> one = {1.0};
  CHECK(pvalue_imhof(one, 3.841458820694124) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(pvalue_imhof(one, 0.0) == 1.0);
  std::vector<double> two = {1.0, 1.0};
  CHECK(pvalue_imhof(two, 5.991464547107979) == doctest::Approx(0.05).epsilon(2e-3));
  // absolute deviation under 1e-4 as well
  CHECK(std::abs(pvalue_imhof(one, 3.841458820694124) - 0.05) < 1e-4);
  CHECK(std::abs(pvalue_imhof(two, 5.991464547107979) - 0.05) < 1e-4);
  CHECK_THROWS_AS(pvalue_imhof({}, 1.0), ArgumentError);
  std::vector<double> neg = {1.0, -0.5};
  CHECK_THROWS_AS(pvalue_imhof(neg, 1.0), ArgumentError);
}

TEST_CASE("imhof is non-increasing in the threshold") {
  std::vector<double> eigs = {0.6, 0.25, 0.1, 0.05};
  double prev = 1.0;
  for (double x = 0.0; x <= 4.0; x += 0.25) {
    double p = pvalue_imhof(eigs, x);
    CHECK(p <= prev + 1e-12);
    prev = p;
  }
}

TEST_CASE("imhof matches monte carlo tails") {
  std::vector<double> eigs = {0.9, 0.4, 0.2, 0.1, 0.05};
  McConfig cfg{100000, 31, 5};
  auto draws = sample_quadform(eigs, cfg);
  for (double x : {0.5, 1.5, 3.0}) {
    double p = pvalue_imhof(eigs, x);
    double emp = static_cast<double>(std::count_if(draws.begin(), draws.end(),
                                                   [&](double v) { return v > x; })) /
                 draws.size();
    double se = std::sqrt(std::max(p * (1 - p), 1e-6) / draws.size());
    CHECK(std::abs(p - emp) < 3.5 * se);
  }
}

TEST_CASE("classical CvM five percent point at d=1") {
  // limiting law with bridge eigenvalues: P(sum > 0.46136) = 0.05
  Sample dummy = make_sample(1, {0.5});
  GofOptions opts;
  opts.modes = 2000;
  GofResult res = gof_test_uniform(dummy, opts);
  (void)res;
  double p = pvalue_imhof(res.eigenvalues, 0.46136 - res.diagnostics.tail_shift);
  CHECK(std::abs(p - 0.05) < 1e-3);
}

TEST_CASE("gof on a uniform sample does not reject") {
  Sample s = make_sample(2, uniform_cube(500, 2, 2024));
  GofResult res = gof_test_uniform(s);
  CHECK(res.p_value > 0.001);
  CHECK(res.statistic >= 0.0);
  CHECK(res.method == "imhof");
  CHECK(res.diagnostics.eigenvalues_used > 100);
}

TEST_CASE("gof rejects a concentrated sample") {
  std::vector<double> vals;
  for (int i = 0; i < 100; ++i) {
    vals.push_back(0.1 + 1e-4 * rng::uniform01(9, static_cast<std::uint64_t>(2 * i)));
    vals.push_back(0.1 + 1e-4 * rng::uniform01(9, static_cast<std::uint64_t>(2 * i + 1)));
  }
  GofResult res = gof_test_uniform(make_sample(2, vals));
  CHECK(res.p_value < 1e-4);
  // the monte carlo route agrees on the rejection
  GofOptions mc_opts;
  mc_opts.montecarlo = true;
  mc_opts.mc_reps = 20000;
  GofResult mc_res = gof_test_uniform(make_sample(2, vals), mc_opts);
  CHECK(mc_res.p_value < 5e-4);
  CHECK(mc_res.method == "montecarlo");
}

TEST_CASE("statistic kernel has the pinned-sheet spectrum") {
  // centered inverted-sheet covariance vs the pinned sheet, matrix-exact
  OperatorExpr centered_inverted = parse("(I#I - P#P) (T#T)' (T#T) (I#I - P#P)");
  OperatorExpr pinned = covariance_expr("pinned-sheet", 2).covariance;
  EquivVerdict v = check_pair(centered_inverted, pinned, 2, 24, 8, EquivMode::MatrixExact);
  CHECK(v.pass);
  CHECK(v.max_rel_dev <= 1e-9);
}

TEST_CASE("gof via the nystrom spectrum source") {
  Sample s = make_sample(2, uniform_cube(200, 2, 77));
  GofOptions opts;
  opts.spec_source = "nystrom";
  opts.modes = 24;
  GofResult res = gof_test_uniform(s, opts);
  GofResult ref = gof_test_uniform(s);
  CHECK(std::abs(res.p_value - ref.p_value) < 0.02);
}
