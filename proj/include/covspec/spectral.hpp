#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covspec/eval.hpp"
#include "covspec/expr.hpp"

namespace covspec {

/// Nonzero part of an operator spectrum, sorted descending.
struct Spectrum {
  std::vector<double> values;    // descending, all > zero_cut
  double zero_cut = 0.0;         // threshold used to drop the kernel
  int grid_n = 0;                // grid resolution; 0 for the analytic/secular path
  std::vector<std::pair<int, int>> clusters;  // [begin,end) runs equal within cluster_tol
  double cluster_tol = 1e-7;     // relative tolerance used for clustering

  // diagnostics
  double parseval_deficit = 0.0;          // secular path truncation gap
  std::vector<int> extrapolation_skipped; // indices where Richardson was not applied
};

/// Rank-one downdate problem: eigenvalues of diag(poles) - c c^T with the
/// coefficient mass aggregated per group of equal poles.
struct RankOneProblem {
  std::vector<double> poles;        // strictly descending group representatives
  std::vector<double> coeffs;       // aggregated squared coefficients per group, >= 0
  std::vector<int> multiplicities;  // group sizes, >= 1
  std::optional<double> coeff_budget;  // if set, sum of coeffs must not exceed it
};

struct EigenPairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values; empty if not requested
};

/// Dense symmetric eigendecomposition (input symmetrized as (M+M^T)/2).
EigenPairs sym_eig(const Eigen::MatrixXd& m, bool want_vectors = true);

/// Values-only variants used by the verification harness.
Eigen::VectorXd sym_eig_values(const Eigen::MatrixXd& m);
Eigen::Matrix<long double, Eigen::Dynamic, 1> sym_eig_values_ld(
    const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>& m);

/// Cluster descending values into runs equal within rel_tol.
std::vector<std::pair<int, int>> cluster_values(std::span<const double> values, double rel_tol);

/// Nystrom spectrum of a covariance-type expression: top_m nonzero
/// eigenvalues of the grid realization. With extrapolate, combines
/// resolutions n and n/2 per sorted index to cancel the O(h^2) error term;
/// indices whose cluster structure differs between the two resolutions are
/// left unextrapolated and flagged.
Spectrum nystrom_spectrum(const OperatorExpr& e, int d, int n, int top_m, bool extrapolate,
                          const EvalOptions& opts = {});

/// Top eigenvalues of diag(poles) - c c^T. One secular root per gap between
/// consecutive active poles; poles of multiplicity m persist with
/// multiplicity m-1 (full multiplicity when their coefficient vanishes).
Spectrum secular_rankone(const RankOneProblem& p, int top_m);

/// Spectrum of the pinned Brownian sheet on [0,1]^d via the analytic
/// rank-one structure: poles are d-fold products of the Wiener eigenvalues
/// ((j-1/2)pi)^-2 for j <= modes_J per axis, and the downdate vector is the
/// projection of prod_k x_k onto the product eigenfunctions.
Spectrum pinned_sheet_spectrum(int d, int modes_J, int top_m);

struct SpectrumMatch {
  int k = 0;
  double max_rel_dev = 0.0;
  bool clusters_aligned = true;
  bool pass = false;
};

/// Pair the top-k values of two spectra in order and compare their relative
/// deviation against rel_tol; multiplicity clusters must align in size.
SpectrumMatch compare_spectra(const Spectrum& a, const Spectrum& b, int k, double rel_tol);

}  // namespace covspec
