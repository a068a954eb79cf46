#pragma once

#include <map>
#include <string>
#include <vector>

#include "covspec/catalog.hpp"
#include "covspec/expr.hpp"
#include "covspec/spectral.hpp"

namespace covspec {

enum class EquivMode { MatrixExact, Continuum };

struct EquivOptions {
  double matrix_exact_tol = 1e-9;
  double continuum_tol = 1e-3;
  // Matrix-exact checks rerun in long double when the double result lands in
  // the rounding gray zone; past this deviation a failure is genuine.
  double escalation_threshold = 1e-5;
  std::int64_t max_rows = 20000;
};

struct EquivVerdict {
  std::string pair_id;
  int dim = 1;
  EquivMode mode = EquivMode::MatrixExact;
  int k = 0;
  double max_rel_dev = 0.0;
  bool clusters_aligned = true;
  bool pass = false;
  std::map<int, double> deviation_by_n;  // resolution -> deviation
  std::string precision = "double";      // "double" or "longdouble"
};

/// Decide spectral equivalence of two covariance expressions at dimension d.
///
/// Matrix-exact mode compares the top-k nonzero eigenvalues of both
/// realizations on the same grid: the discretization preserves the operator
/// algebra (adjoint = transpose, flip = permutation, projector idempotency),
/// so spectra of genuinely equivalent pairs agree to rounding. Continuum mode
/// compares Richardson-extrapolated Nystrom spectra at resolutions n and 2n.
EquivVerdict check_pair(const OperatorExpr& lhs, const OperatorExpr& rhs, int d, int n, int k,
                        EquivMode mode, const EquivOptions& opts = {},
                        const std::string& pair_id = "");

/// Run the catalog suite. Per-dimension resolutions default to
/// {1: 256, 2: 40, 3: 16}; d=3 comparisons are capped at k=4.
std::vector<EquivVerdict> run_suite(const std::vector<int>& dims,
                                    std::map<int, int> n_per_dim = {}, int k = 8,
                                    const EquivOptions& opts = {});

/// JSON report (schema covspec/equiv@1).
std::string verdicts_to_json(const std::vector<EquivVerdict>& verdicts);

}  // namespace covspec
