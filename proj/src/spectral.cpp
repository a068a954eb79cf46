#include "covspec/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

#include "covspec/errors.hpp"
#include "covspec/grid.hpp"

namespace covspec {

namespace {

void require_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw NumericError("matrix has non-finite entries");
}

Eigen::VectorXd lapack_syev(Eigen::MatrixXd a, Eigen::MatrixXd* vectors) {
  const int n = static_cast<int>(a.rows());
  Eigen::VectorXd w(n);
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n, a.data(), n, w.data());
  if (info != 0)
    throw NumericError("dsyevd failed with info=" + std::to_string(info));
  // LAPACK returns ascending; flip to descending.
  Eigen::VectorXd desc(n);
  for (int i = 0; i < n; ++i) desc[i] = w[n - 1 - i];
  if (vectors) {
    vectors->resize(n, n);
    for (int i = 0; i < n; ++i) vectors->col(i) = a.col(n - 1 - i);
  }
  return desc;
}

}  // namespace

EigenPairs sym_eig(const Eigen::MatrixXd& m, bool want_vectors) {
  if (m.rows() != m.cols()) throw ArgumentError("sym_eig: matrix must be square");
  require_finite(m);
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  EigenPairs out;
  if (want_vectors) {
    out.values = lapack_syev(std::move(sym), &out.vectors);
  } else {
    out.values = lapack_syev(std::move(sym), nullptr);
  }
  return out;
}

Eigen::VectorXd sym_eig_values(const Eigen::MatrixXd& m) { return sym_eig(m, false).values; }

Eigen::Matrix<long double, Eigen::Dynamic, 1> sym_eig_values_ld(
    const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>& m) {
  using MatLd = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  MatLd sym = 0.5L * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatLd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("long double eigensolver failed");
  return solver.eigenvalues().reverse();
}

std::vector<std::pair<int, int>> cluster_values(std::span<const double> values, double rel_tol) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(values.size());
  int begin = 0;
  for (int i = 1; i <= n; ++i) {
    bool split = i == n;
    if (!split) {
      double scale = std::max(std::abs(values[static_cast<std::size_t>(begin)]),
                              std::abs(values[static_cast<std::size_t>(i)]));
      split = std::abs(values[static_cast<std::size_t>(begin)] -
                       values[static_cast<std::size_t>(i)]) > rel_tol * scale;
    }
    if (split) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

namespace {

std::vector<double> nonzero_descending(const Eigen::VectorXd& vals, double zero_cut) {
  std::vector<double> out;
  for (int i = 0; i < vals.size(); ++i)
    if (vals[i] > zero_cut) out.push_back(vals[i]);
  return out;
}

void check_psd(const Eigen::VectorXd& vals, const OperatorExpr& e) {
  if (vals.size() == 0) return;
  double top = vals[0];
  double bottom = vals[vals.size() - 1];
  if (bottom < -1e-10 * std::max(top, 0.0))
    throw ModelError("expression is not positive semi-definite on this grid: " + format(e) +
                     " (min eigenvalue " + std::to_string(bottom) + ")");
}

}  // namespace

Spectrum nystrom_spectrum(const OperatorExpr& e, int d, int n, int top_m, bool extrapolate,
                          const EvalOptions& opts) {
  if (top_m < 1) throw ArgumentError("nystrom_spectrum: top_m must be positive");
  if (extrapolate && (n % 2 != 0 || n < 4))
    throw ArgumentError("nystrom_spectrum: extrapolation needs an even n >= 4");
  Grid g = make_grid(n, d);
  Eigen::VectorXd vals = sym_eig_values(eval_matrix<double>(e, g, opts));
  check_psd(vals, e);
  double zero_cut = vals.size() ? 1e-12 * std::max(vals[0], 0.0) : 0.0;
  std::vector<double> fine = nonzero_descending(vals, zero_cut);
  // a rank-deficient realization yields everything it has
  top_m = std::min(top_m, static_cast<int>(fine.size()));
  if (top_m == 0) throw ModelError("nystrom_spectrum: no nonzero eigenvalues for " + format(e));
  Spectrum s;
  s.grid_n = n;
  s.zero_cut = zero_cut;
  s.values.assign(fine.begin(), fine.begin() + top_m);
  if (extrapolate) {
    Grid gc = make_grid(n / 2, d);
    Eigen::VectorXd cvals = sym_eig_values(eval_matrix<double>(e, gc, opts));
    check_psd(cvals, e);
    std::vector<double> coarse = nonzero_descending(cvals, 1e-12 * std::max(cvals[0], 0.0));
    auto fine_clusters = cluster_values(std::span(fine.data(), fine.size()), s.cluster_tol);
    auto coarse_clusters = cluster_values(std::span(coarse.data(), coarse.size()), s.cluster_tol);
    auto cluster_of = [](const std::vector<std::pair<int, int>>& cs, int idx) {
      for (const auto& c : cs)
        if (idx >= c.first && idx < c.second) return c;
      return std::pair<int, int>(-1, -1);
    };
    for (int i = 0; i < top_m; ++i) {
      bool ok = i < static_cast<int>(coarse.size()) &&
                cluster_of(fine_clusters, i) == cluster_of(coarse_clusters, i);
      if (ok) {
        // midpoint discretization converges at O(h^2): h^2-Richardson
        s.values[static_cast<std::size_t>(i)] =
            (4.0 * fine[static_cast<std::size_t>(i)] - coarse[static_cast<std::size_t>(i)]) / 3.0;
      } else {
        s.extrapolation_skipped.push_back(i);
      }
    }
    std::sort(s.values.rbegin(), s.values.rend());
  }
  s.clusters = cluster_values(s.values, s.cluster_tol);
  return s;
}

SpectrumMatch compare_spectra(const Spectrum& a, const Spectrum& b, int k, double rel_tol) {
  if (static_cast<int>(a.values.size()) < k || static_cast<int>(b.values.size()) < k)
    throw ArgumentError("compare_spectra: fewer than k nonzero values available");
  SpectrumMatch m;
  m.k = k;
  for (int i = 0; i < k; ++i) {
    double va = a.values[static_cast<std::size_t>(i)];
    double vb = b.values[static_cast<std::size_t>(i)];
    double dev = std::abs(va - vb) / std::max(std::abs(va), std::abs(vb));
    m.max_rel_dev = std::max(m.max_rel_dev, dev);
  }
  // Cluster sizes must agree over the compared prefix (clip trailing cluster at k).
  auto clip = [&](const std::vector<std::pair<int, int>>& cs) {
    std::vector<int> sizes;
    for (const auto& c : cs) {
      if (c.first >= k) break;
      sizes.push_back(std::min(c.second, k) - c.first);
    }
    return sizes;
  };
  m.clusters_aligned = clip(a.clusters) == clip(b.clusters);
  m.pass = m.clusters_aligned && m.max_rel_dev <= rel_tol;
  return m;
}

}  // namespace covspec
