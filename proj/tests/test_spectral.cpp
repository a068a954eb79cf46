#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "covspec/errors.hpp"
#include "covspec/eval.hpp"
#include "covspec/grid.hpp"
#include "covspec/spectral.hpp"

using namespace covspec;
constexpr double pi = std::numbers::pi;

namespace {

double wiener_eig(int j) { return 1.0 / ((j - 0.5) * pi * ((j - 0.5) * pi)); }
double bridge_eig(int j) { return 1.0 / (j * pi * (j * pi)); }

// composite Simpson quadrature, used as the independent oracle for the
// eigenfunction projection coefficients
double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("sym_eig basics") {
  Eigen::MatrixXd d3 = Eigen::Vector3d(3.0, 1.0, 0.0).asDiagonal();
  EigenPairs e = sym_eig(d3);
  CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.values[2] == doctest::Approx(0.0).epsilon(1e-14));

  Eigen::MatrixXd m(2, 2);
  m << 2, -1, -1, 0;
  EigenPairs e2 = sym_eig(m);
  CHECK(e2.values[0] == doctest::Approx(1.0 + std::numbers::sqrt2).epsilon(1e-14));
  CHECK(e2.values[1] == doctest::Approx(1.0 - std::numbers::sqrt2).epsilon(1e-14));

  // eigenpair residuals
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd r = m * e2.vectors.col(i) - e2.values[i] * e2.vectors.col(i);
    CHECK(r.norm() < 1e-8 * m.norm());
  }

  Eigen::MatrixXd bad(2, 2);
  bad << 1, std::nan(""), 0, 1;
  CHECK_THROWS_AS(sym_eig(bad), NumericError);
}

TEST_CASE("Wiener top eigenvalue from the grid realization") {
  Eigen::VectorXd v = sym_eig_values(eval(parse("T T'"), make_grid(500, 1)).matrix);
  CHECK(std::abs(v[0] - wiener_eig(1)) / wiener_eig(1) < 1e-4);
}

TEST_CASE("Nystrom eigenvalues converge at second order") {
  auto lam1 = [](int n) {
    return sym_eig_values(eval(parse("T T'"), make_grid(n, 1)).matrix)[0];
  };
  double exact = wiener_eig(1);
  double e1 = std::abs(lam1(64) - exact);
  double e2 = std::abs(lam1(128) - exact);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("extrapolated bridge spectrum matches (j pi)^-2") {
  Spectrum s = nystrom_spectrum(parse("T (I - P) T'"), 1, 500, 3, /*extrapolate=*/true);
  for (int j = 1; j <= 3; ++j)
    CHECK(std::abs(s.values[static_cast<std::size_t>(j - 1)] - bridge_eig(j)) / bridge_eig(j) <
          1e-4);
}

TEST_CASE("identity spectrum") {
  Spectrum s = nystrom_spectrum(parse("I"), 1, 16, 1, false);
  CHECK(s.values[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("nystrom rejects non-PSD expressions") {
  CHECK_THROWS_AS(nystrom_spectrum(parse("P - I"), 1, 16, 1, false), ModelError);
}

TEST_CASE("secular solver on explicit 2x2 problems") {
  RankOneProblem p;
  p.poles = {3.0, 1.0};
  p.coeffs = {1.0, 1.0};
  p.multiplicities = {1, 1};
  Spectrum s = secular_rankone(p, 2);
  CHECK(s.values[0] == doctest::Approx(1.0 + std::numbers::sqrt2).epsilon(1e-12));
  CHECK(s.values[1] == doctest::Approx(1.0 - std::numbers::sqrt2).epsilon(1e-12));

  // zero coefficients leave the poles untouched
  RankOneProblem q;
  q.poles = {3.0, 1.0};
  q.coeffs = {0.0, 0.0};
  q.multiplicities = {1, 2};
  Spectrum sq = secular_rankone(q, 3);
  CHECK(sq.values[0] == 3.0);
  CHECK(sq.values[1] == 1.0);
  CHECK(sq.values[2] == 1.0);

  // degenerate pole with aggregated coefficient mass: deflated copy plus root
  RankOneProblem r;
  r.poles = {2.0};
  r.coeffs = {2.0};
  r.multiplicities = {2};
  Spectrum sr = secular_rankone(r, 2);
  CHECK(sr.values[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(sr.values[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("secular agrees with dense eigendecomposition on random downdates") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int rep = 0; rep < 25; ++rep) {
    int n = 5 + static_cast<int>(rng() % 46);
    std::vector<double> poles(static_cast<std::size_t>(n));
    double prev = 5.0;
    for (int i = 0; i < n; ++i) {
      prev -= 0.02 + 0.1 * u(rng);
      poles[static_cast<std::size_t>(i)] = prev + 6.0;  // keep positive
    }
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = 0.5 * u(rng);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = poles[static_cast<std::size_t>(i)];
    m -= c * c.transpose();
    Eigen::VectorXd dense = sym_eig_values(m);

    RankOneProblem p;
    p.poles = poles;
    for (int i = 0; i < n; ++i) {
      p.coeffs.push_back(c[i] * c[i]);
      p.multiplicities.push_back(1);
    }
    Spectrum s = secular_rankone(p, n);
    for (int i = 0; i < n; ++i) {
      double ref = dense[i];
      CHECK(std::abs(s.values[static_cast<std::size_t>(i)] - ref) <=
            1e-9 * std::max(1.0, std::abs(ref)));
    }
    // interlacing: every root sits at or below its pole
    for (int i = 0; i < n; ++i)
      CHECK(s.values[static_cast<std::size_t>(i)] <= poles[static_cast<std::size_t>(i)] + 1e-12);
  }
}

TEST_CASE("sheet projection coefficients validated by quadrature") {
  // c_j = <x, sqrt(2) sin((j-1/2) pi x)> claimed equal to
  // sqrt(2) (-1)^{j+1} ((j-1/2) pi)^{-2}
  for (int j = 1; j <= 10; ++j) {
    double b = (j - 0.5) * pi;
    double claimed = std::sqrt(2.0) * ((j % 2 == 1) ? 1.0 : -1.0) / (b * b);
    double quad = simpson([&](double x) { return x * std::sqrt(2.0) * std::sin(b * x); }, 0.0,
                          1.0, 4096);
    CHECK(std::abs(quad - claimed) < 1e-10);
  }
}

TEST_CASE("pinned sheet spectrum at d=1 is the bridge spectrum") {
  Spectrum s = pinned_sheet_spectrum(1, 2000, 3);
  for (int j = 1; j <= 3; ++j)
    CHECK(std::abs(s.values[static_cast<std::size_t>(j - 1)] - bridge_eig(j)) / bridge_eig(j) <
          1e-6);
  CHECK(s.parseval_deficit > 0.0);
  CHECK(s.parseval_deficit < 1e-6);
}

TEST_CASE("Parseval deficit decreases with more modes") {
  double d1 = pinned_sheet_spectrum(1, 50, 1).parseval_deficit;
  double d2 = pinned_sheet_spectrum(1, 200, 1).parseval_deficit;
  double d3 = pinned_sheet_spectrum(1, 800, 1).parseval_deficit;
  CHECK(d1 > d2);
  CHECK(d2 > d3);
  CHECK(d3 > 0.0);
}

TEST_CASE("pinned sheet leading eigenvalues for d=2 and d=3") {
  Spectrum s2 = pinned_sheet_spectrum(2, 300, 5);
  CHECK(1.0 / s2.values[0] == doctest::Approx(15.814).epsilon(0.0013));
  // all outputs nonnegative
  for (double v : s2.values) CHECK(v >= 0.0);

  Spectrum s3 = pinned_sheet_spectrum(3, 80, 1);
  CHECK(1.0 / s3.values[0] == doctest::Approx(30.196).epsilon(0.0017));
}

TEST_CASE("compare_spectra") {
  Spectrum a = pinned_sheet_spectrum(1, 100, 5);
  SpectrumMatch same = compare_spectra(a, a, 5, 1e-12);
  CHECK(same.pass);
  CHECK(same.max_rel_dev == 0.0);

  Spectrum w = nystrom_spectrum(parse("T T'"), 1, 200, 1, false);
  Spectrum b = nystrom_spectrum(parse("T (I - P) T'"), 1, 200, 1, false);
  SpectrumMatch m = compare_spectra(w, b, 1, 1e-3);
  CHECK_FALSE(m.pass);
  CHECK(m.max_rel_dev == doctest::Approx(0.75).epsilon(1e-2));

  CHECK_THROWS_AS(compare_spectra(w, b, 5, 1e-3), ArgumentError);
}

TEST_CASE("cluster detection groups symmetric duplicates") {
  // d=2 sheet eigenvalues carry the (j,k)/(k,j) degeneracy
  Spectrum s = nystrom_spectrum(parse("T T'"), 2, 24, 4, false);
  // lambda_2 = lambda_3 (the (1,2) and (2,1) products)
  REQUIRE(s.clusters.size() >= 2);
  CHECK(s.clusters[1].second - s.clusters[1].first == 2);
}

TEST_CASE("secular argument validation") {
  RankOneProblem bad;
  bad.poles = {1.0, 2.0};  // not descending
  bad.coeffs = {0.1, 0.1};
  bad.multiplicities = {1, 1};
  CHECK_THROWS_AS(secular_rankone(bad, 1), ArgumentError);
  RankOneProblem neg;
  neg.poles = {1.0};
  neg.coeffs = {-0.5};
  neg.multiplicities = {1};
  CHECK_THROWS_AS(secular_rankone(neg, 1), ArgumentError);
}
