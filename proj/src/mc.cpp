#include "covspec/mc.hpp"

#include <algorithm>
#include <cmath>

#include "covspec/errors.hpp"
#include "covspec/grid.hpp"
#include "covspec/spectral.hpp"

namespace covspec {

namespace rng {

std::uint64_t mix(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
  return (static_cast<double>(mix(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("inverse_normal_cdf: p must be in (0,1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -v : v;
}

double normal(std::uint64_t seed, std::uint64_t counter) {
  return inverse_normal_cdf(uniform01(seed, counter));
}

}  // namespace rng

namespace {

constexpr int kCounterModeBits = 20;

void check_cfg(const McConfig& cfg) {
  if (cfg.reps < 1) throw ArgumentError("mc: reps must be positive");
  if (cfg.trunc_m < 1 || cfg.trunc_m >= (1 << kCounterModeBits))
    throw ArgumentError("mc: trunc_m out of range");
}

std::vector<double> spectrum_for(const OperatorExpr& e, int d, int n, int trunc_m,
                                 const EvalOptions& opts, Eigen::MatrixXd* vectors) {
  Grid g = make_grid(n, d);
  EigenPairs eig = sym_eig(eval_matrix<double>(e, g, opts), vectors != nullptr);
  double top = eig.values.size() ? eig.values[0] : 0.0;
  if (top <= 0.0) return {};  // zero operator: no modes, all draws vanish
  double cut = 1e-12 * top;
  if (eig.values[eig.values.size() - 1] < -1e-10 * top)
    throw ModelError("covariance is not PSD: " + format(e));
  std::vector<double> lambda;
  for (int i = 0; i < eig.values.size() && static_cast<int>(lambda.size()) < trunc_m; ++i)
    if (eig.values[i] > cut) lambda.push_back(eig.values[i]);
  if (static_cast<int>(lambda.size()) < trunc_m)
    throw ArgumentError("mc: trunc_m=" + std::to_string(trunc_m) + " exceeds the " +
                        std::to_string(lambda.size()) + " available nonzero modes");
  if (vectors) *vectors = eig.vectors.leftCols(trunc_m);
  return lambda;
}

}  // namespace

std::vector<double> sample_quadform(std::span<const double> eigs, const McConfig& cfg) {
  check_cfg(cfg);
  std::vector<double> draws(static_cast<std::size_t>(cfg.reps), 0.0);
  for (int r = 0; r < cfg.reps; ++r) {
    double s = 0.0;
    const std::uint64_t base = static_cast<std::uint64_t>(r) << kCounterModeBits;
    for (std::size_t i = 0; i < eigs.size(); ++i) {
      double xi = rng::normal(cfg.seed, base + i);
      s += eigs[i] * xi * xi;
    }
    draws[static_cast<std::size_t>(r)] = s;
  }
  return draws;
}

std::vector<double> sample_sqnorm(const OperatorExpr& e, int d, int n, const McConfig& cfg,
                                  const EvalOptions& opts) {
  check_cfg(cfg);
  std::vector<double> lambda = spectrum_for(e, d, n, cfg.trunc_m, opts, nullptr);
  if (lambda.empty()) return std::vector<double>(static_cast<std::size_t>(cfg.reps), 0.0);
  return sample_quadform(lambda, cfg);
}

std::vector<double> sample_sqnorm_paths(const OperatorExpr& e, int d, int n, const McConfig& cfg,
                                        const EvalOptions& opts) {
  check_cfg(cfg);
  if (cfg.trunc_m > 50) throw ArgumentError("path synthesis cross-check is limited to 50 modes");
  Eigen::MatrixXd vectors;
  std::vector<double> lambda = spectrum_for(e, d, n, cfg.trunc_m, opts, &vectors);
  if (lambda.empty()) return std::vector<double>(static_cast<std::size_t>(cfg.reps), 0.0);
  Grid g = make_grid(n, d);
  const double vol = g.cell_volume();
  // Eigenvectors are Euclidean-orthonormal; divide by sqrt(h^d) to make them
  // orthonormal in the quadrature inner product.
  const int m = static_cast<int>(lambda.size());
  std::vector<double> draws(static_cast<std::size_t>(cfg.reps));
  Eigen::VectorXd path(vectors.rows());
  for (int r = 0; r < cfg.reps; ++r) {
    path.setZero();
    const std::uint64_t base = static_cast<std::uint64_t>(r) << kCounterModeBits;
    for (int i = 0; i < m; ++i) {
      double xi = rng::normal(cfg.seed, base + static_cast<std::uint64_t>(i));
      path += (std::sqrt(lambda[static_cast<std::size_t>(i)] / vol) * xi) * vectors.col(i);
    }
    draws[static_cast<std::size_t>(r)] = vol * path.squaredNorm();
  }
  return draws;
}

KsResult two_sample_compare(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("two_sample_compare: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  double z = d * std::sqrt(na * nb / (na + nb));
  double p;
  if (z < 0.2) {
    p = 1.0;
  } else {
    p = 0.0;
    for (int k = 1; k <= 100; ++k) {
      double term = 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * z * z);
      p += term;
      if (std::abs(term) < 1e-16) break;
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return {d, p};
}

}  // namespace covspec
