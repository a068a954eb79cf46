#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "covspec/eval.hpp"
#include "covspec/expr.hpp"

namespace covspec {

namespace rng {

/// SplitMix64 output function: a counter-based generator. Stream position
/// (seed, counter) fully determines the value, so replicates can be drawn in
/// any order or in parallel without coordination.
std::uint64_t mix(std::uint64_t seed, std::uint64_t counter);

/// Uniform draw in (0,1), 53-bit resolution, never exactly 0 or 1.
double uniform01(std::uint64_t seed, std::uint64_t counter);

/// Standard normal via the inverse CDF (Wichura's AS 241 rational
/// approximation, accurate to ~1e-15), keeping streams reproducible across
/// platforms.
double normal(std::uint64_t seed, std::uint64_t counter);

double inverse_normal_cdf(double p);

}  // namespace rng

struct McConfig {
  int reps = 10000;
  std::uint64_t seed = 0;
  int trunc_m = 100;  // KL modes kept
};

/// Draws of sum_i lambda_i xi_i^2 for the given eigenvalue list. The normal
/// deviate for (replicate r, mode i) sits at counter (r << 20) + i, so draws
/// are pathwise non-decreasing in trunc_m under a fixed seed.
std::vector<double> sample_quadform(std::span<const double> eigs, const McConfig& cfg);

/// KL Monte Carlo of the squared L2 norm of the Gaussian field with the
/// given covariance expression, truncated to cfg.trunc_m modes of the grid
/// realization.
std::vector<double> sample_sqnorm(const OperatorExpr& e, int d, int n, const McConfig& cfg,
                                  const EvalOptions& opts = {});

/// Same draws computed the long way: synthesize the field on the grid from
/// the eigenbasis and quadrate it. Agrees with sample_sqnorm to rounding;
/// intended as a cross-check (trunc_m <= 50).
std::vector<double> sample_sqnorm_paths(const OperatorExpr& e, int d, int n, const McConfig& cfg,
                                        const EvalOptions& opts = {});

struct KsResult {
  double stat = 0.0;
  double p_approx = 1.0;
};

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value.
KsResult two_sample_compare(std::span<const double> a, std::span<const double> b);

}  // namespace covspec
