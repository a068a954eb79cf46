#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "covspec/errors.hpp"
#include "covspec/spectral.hpp"

namespace covspec {

namespace {

struct SecularFn {
  std::span<const double> poles;   // active poles, descending
  std::span<const double> coeffs;  // matching squared coefficients, > 0

  // f(x) = 1 - sum c_g / (mu_g - x); strictly decreasing between poles.
  // weight collects 1 + sum |c_g / (mu_g - x)|, the computable magnitude
  // against which a residual counts as zero.
  double operator()(double x, double* weight = nullptr) const {
    double s = 0.0, w = 1.0;
    for (std::size_t g = 0; g < poles.size(); ++g) {
      double term = coeffs[g] / (poles[g] - x);
      s += term;
      w += std::abs(term);
    }
    if (weight) *weight = w;
    return 1.0 - s;
  }
};

// Root of f in (lo, hi) with f(lo+) > 0 > f(hi-) and f strictly decreasing.
// Each step solves the two-pole rational model through the bracketing poles
// with the smooth remainder frozen at the current iterate, written in
// gap-shifted coordinates so the quadratic stays well conditioned. A
// shrinking bracket plus forced bisection on stalls guards the iteration;
// the stop test is a residual negligible against the computed term sizes.
double solve_gap(const SecularFn& f, std::size_t upper_index, double lo, double hi) {
  const double a = hi;  // upper pole
  const double b = lo;  // next active pole below, or an artificial bound
  const double ca = f.coeffs[upper_index];
  const bool has_lower_pole = upper_index + 1 < f.poles.size();
  const double cb = has_lower_pole ? f.coeffs[upper_index + 1] : 0.0;
  const double gap = a - b;
  double blo = lo, bhi = hi;
  double x = 0.5 * (lo + hi);
  double prev_abs = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < 100; ++it) {
    double weight = 1.0;
    double fx = f(x, &weight);
    if (!std::isfinite(fx)) break;
    if (std::abs(fx) <= 64.0 * std::numeric_limits<double>::epsilon() * weight) break;
    if (fx > 0.0)
      blo = x;
    else
      bhi = x;
    if (bhi - blo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
    stalled = std::abs(fx) > 0.5 * prev_abs ? stalled + 1 : 0;
    prev_abs = std::abs(fx);

    double next;
    if (stalled >= 3) {
      next = 0.5 * (blo + bhi);
      stalled = 0;
    } else {
      // remainder with the bracketing pole terms removed
      double s = (1.0 - fx) - ca / (a - x) - (has_lower_pole ? cb / (b - x) : 0.0);
      double k = 1.0 - s;
      if (!has_lower_pole) {
        next = k > 0.0 ? a - ca / k : 0.5 * (blo + bhi);
      } else {
        // solve k = ca/delta - cb/(gap - delta) for delta = a - y in (0, gap)
        double bq = k * gap + ca + cb;
        double disc = std::max(bq * bq - 4.0 * k * ca * gap, 0.0);
        double delta = 2.0 * ca * gap / (bq + std::sqrt(disc));
        next = a - delta;
      }
    }
    if (!(next > blo && next < bhi)) next = 0.5 * (blo + bhi);
    if (next == x) break;
    x = next;
  }
  return x;
}

}  // namespace

Spectrum secular_rankone(const RankOneProblem& p, int top_m) {
  const std::size_t g_count = p.poles.size();
  if (g_count == 0) throw ArgumentError("secular_rankone: empty pole list");
  if (p.coeffs.size() != g_count || p.multiplicities.size() != g_count)
    throw ArgumentError("secular_rankone: mismatched field lengths");
  if (top_m < 1) throw ArgumentError("secular_rankone: top_m must be positive");
  double total_c2 = 0.0;
  for (std::size_t g = 0; g < g_count; ++g) {
    if (!(p.poles[g] > 0.0)) throw ArgumentError("secular_rankone: poles must be positive");
    if (g + 1 < g_count && !(p.poles[g] > p.poles[g + 1]))
      throw ArgumentError("secular_rankone: poles must be strictly descending");
    if (p.coeffs[g] < 0.0) throw ArgumentError("secular_rankone: negative squared coefficient");
    if (p.multiplicities[g] < 1) throw ArgumentError("secular_rankone: multiplicity must be >= 1");
    total_c2 += p.coeffs[g];
  }
  if (p.coeff_budget && total_c2 > *p.coeff_budget * (1.0 + 1e-12))
    throw ArgumentError("secular_rankone: coefficient mass exceeds the stated budget");

  std::vector<double> act_poles, act_coeffs;
  for (std::size_t g = 0; g < g_count; ++g) {
    if (p.coeffs[g] > 0.0) {
      act_poles.push_back(p.poles[g]);
      act_coeffs.push_back(p.coeffs[g]);
    }
  }
  SecularFn f{act_poles, act_coeffs};

  // Walk groups in descending pole order, emitting pole copies and the
  // secular root of the gap below each active pole. Entries are produced in
  // nearly descending order; stop once nothing above the current floor can
  // still appear.
  std::vector<double> out;
  std::size_t next_active = 0;  // index into act_poles
  for (std::size_t g = 0; g < g_count; ++g) {
    if (static_cast<int>(out.size()) >= top_m) {
      std::nth_element(out.begin(), out.begin() + (top_m - 1), out.end(), std::greater<>());
      if (out[static_cast<std::size_t>(top_m - 1)] >= p.poles[g]) break;
    }
    if (p.coeffs[g] > 0.0) {
      for (int r = 0; r < p.multiplicities[g] - 1; ++r) out.push_back(p.poles[g]);
      double hi = act_poles[next_active];
      double lo = next_active + 1 < act_poles.size() ? act_poles[next_active + 1]
                                                     : std::min(0.0, hi - total_c2) - 1.0;
      out.push_back(solve_gap(f, next_active, lo, hi));
      ++next_active;
    } else {
      for (int r = 0; r < p.multiplicities[g]; ++r) out.push_back(p.poles[g]);
    }
  }
  std::sort(out.rbegin(), out.rend());
  if (static_cast<int>(out.size()) > top_m) out.resize(static_cast<std::size_t>(top_m));

  Spectrum s;
  s.grid_n = 0;
  s.zero_cut = -std::numeric_limits<double>::infinity();
  s.values = std::move(out);
  s.clusters = cluster_values(s.values, s.cluster_tol);
  return s;
}

Spectrum pinned_sheet_spectrum(int d, int modes_J, int top_m) {
  if (d < 1) throw ArgumentError("pinned_sheet_spectrum: d must be >= 1");
  if (modes_J < 10) throw ArgumentError("pinned_sheet_spectrum: modes_J must be >= 10");
  const double pi = std::numbers::pi;
  std::vector<double> a(static_cast<std::size_t>(modes_J));
  for (int j = 1; j <= modes_J; ++j) {
    double b = (j - 0.5) * pi;
    a[static_cast<std::size_t>(j - 1)] = 1.0 / (b * b);
  }

  // Enumerate non-decreasing index tuples; each stands for its permutations,
  // so products of equal index sets are computed once and share bit-identical
  // pole values.
  struct Entry {
    double pole;
    double mult;  // number of permutations
  };
  std::vector<Entry> entries;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  auto tuple_mult = [&](const std::vector<int>& t) {
    double m = 1.0;
    int total = 1;
    int run = 1;
    for (std::size_t k = 1; k < t.size(); ++k) {
      ++total;
      m *= total;
      if (t[k] == t[k - 1])
        ++run;
      else
        run = 1;
      m /= run;
    }
    return m;
  };
  for (;;) {
    double pole = 1.0;
    for (int k = 0; k < d; ++k) pole *= a[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
    entries.push_back({pole, tuple_mult(idx)});
    int k = d - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == modes_J - 1) --k;
    if (k < 0) break;
    int v = idx[static_cast<std::size_t>(k)] + 1;
    for (int j = k; j < d; ++j) idx[static_cast<std::size_t>(j)] = v;
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& x, const Entry& y) { return x.pole > y.pole; });

  const double pow2d = std::pow(2.0, d);
  RankOneProblem p;
  double c2_sum = 0.0;
  for (std::size_t i = 0; i < entries.size();) {
    double rep = entries[i].pole;
    double mult = 0.0;
    std::size_t j = i;
    while (j < entries.size() && entries[j].pole >= rep * (1.0 - 1e-13)) {
      mult += entries[j].mult;
      ++j;
    }
    double c2 = mult * pow2d * rep * rep;
    c2_sum += c2;
    p.poles.push_back(rep);
    p.coeffs.push_back(c2);
    p.multiplicities.push_back(static_cast<int>(std::llround(mult)));
    i = j;
  }
  double budget = std::pow(3.0, -d);
  double deficit = budget - c2_sum;
  if (deficit > 1e-4)
    throw ModelError("pinned_sheet_spectrum: Parseval deficit " + std::to_string(deficit) +
                     " too large; increase modes_J");
  p.coeff_budget = budget;

  Spectrum s = secular_rankone(p, top_m);
  s.parseval_deficit = deficit;
  s.zero_cut = 0.0;
  return s;
}

}  // namespace covspec
