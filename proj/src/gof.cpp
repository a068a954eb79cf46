#include "covspec/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <array>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "covspec/detail/numfmt.hpp"
#include "covspec/errors.hpp"
#include "covspec/mc.hpp"

namespace covspec {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

std::vector<MarginSpec> parse_margins(const std::string& text) {
  std::vector<MarginSpec> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    std::string item =
        comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos);
    std::vector<std::string> parts;
    std::size_t p = 0;
    while (p <= item.size()) {
      auto colon = item.find(':', p);
      if (colon == std::string::npos) {
        parts.push_back(item.substr(p));
        break;
      }
      parts.push_back(item.substr(p, colon - p));
      p = colon + 1;
    }
    auto num = [&](std::size_t i, double dflt) {
      if (i >= parts.size() || parts[i].empty()) return dflt;
      auto parsed = detail::parse_double_prefix(parts[i]);
      if (!parsed || parsed->second != parts[i].size())
        throw ArgumentError("margins: bad numeric parameter '" + parts[i] + "'");
      return parsed->first;
    };
    const std::string& name = parts[0];
    if (name == "uniform" || name == "unif") {
      out.push_back(UniformMargin{num(1, 0.0), num(2, 1.0)});
    } else if (name == "exp" || name == "exponential") {
      out.push_back(ExponentialMargin{num(1, 1.0)});
    } else if (name == "norm" || name == "normal") {
      out.push_back(NormalMargin{num(1, 0.0), num(2, 1.0)});
    } else {
      throw ArgumentError("margins: unknown margin name '" + name + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

double margin_cdf(const MarginSpec& m, double x) {
  return std::visit(
      [&](const auto& spec) -> double {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, UniformMargin>) {
          if (!(spec.b > spec.a)) throw ArgumentError("uniform margin needs a < b");
          return (x - spec.a) / (spec.b - spec.a);
        } else if constexpr (std::is_same_v<T, ExponentialMargin>) {
          if (!(spec.rate > 0)) throw ArgumentError("exponential margin needs rate > 0");
          return x <= 0 ? 0.0 : -std::expm1(-spec.rate * x);
        } else if constexpr (std::is_same_v<T, NormalMargin>) {
          if (!(spec.sigma > 0)) throw ArgumentError("normal margin needs sigma > 0");
          return normal_cdf((x - spec.mu) / spec.sigma);
        } else {
          const auto& xs = spec.xs;
          const auto& fs = spec.fs;
          if (xs.size() < 2 || xs.size() != fs.size())
            throw ArgumentError("table margin needs matching knot lists of length >= 2");
          for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]) || !(fs[i] > fs[i - 1]))
              throw ArgumentError("table margin knots must be strictly increasing");
          if (x <= xs.front()) return fs.front();
          if (x >= xs.back()) return fs.back();
          auto it = std::upper_bound(xs.begin(), xs.end(), x);
          std::size_t hi = static_cast<std::size_t>(it - xs.begin());
          double w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
          return fs[hi - 1] + w * (fs[hi] - fs[hi - 1]);
        }
      },
      m);
}

Sample rosenblatt_product(const Sample& s, std::span<const MarginSpec> margins) {
  if (static_cast<int>(margins.size()) != s.d)
    throw ArgumentError("rosenblatt: need one margin per coordinate");
  Sample out = s;
  out.post_transform = true;
  constexpr double eps = 1e-15;
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < s.d; ++c) {
      double u = margin_cdf(margins[static_cast<std::size_t>(c)], s.at(r, c));
      if (u < 0.0) u = eps;
      if (u > 1.0) u = 1.0 - eps;
      out.values[static_cast<std::size_t>(r) * static_cast<std::size_t>(s.d) +
                 static_cast<std::size_t>(c)] = u;
    }
  return out;
}

double omega2(const Sample& s) {
  if (!s.post_transform) throw ArgumentError("omega2: sample must be transformed to the cube");
  if (s.rows < 1) throw ArgumentError("omega2: empty sample");
  const int n = s.rows, d = s.d;
  for (std::size_t i = 0; i < s.values.size(); ++i)
    if (!(s.values[i] >= 0.0 && s.values[i] <= 1.0))
      throw ArgumentError("omega2: sample values must lie in [0,1]");
  double first = std::pow(1.0 / 3.0, d);
  double mid = 0.0;
  for (int r = 0; r < n; ++r) {
    double prod = 1.0;
    for (int c = 0; c < d; ++c) {
      double x = s.at(r, c);
      prod *= (1.0 - x * x) / 2.0;
    }
    mid += prod;
  }
  double last = 0.0;
  for (int r = 0; r < n; ++r)
    for (int q = 0; q < n; ++q) {
      double prod = 1.0;
      for (int c = 0; c < d; ++c) prod *= 1.0 - std::max(s.at(r, c), s.at(q, c));
      last += prod;
    }
  return first - 2.0 * mid / n + last / (static_cast<double>(n) * n);
}

namespace {

// Imhof integrand sin(theta(u)) / (u rho(u)) split into phase and envelope:
// theta(u) = phi(u) - x u / 2 with phi = (1/2) sum atan(lambda u), and
// log rho = (1/4) sum log(1 + lambda^2 u^2).
struct ImhofParts {
  std::span<const double> eigs;
  double x;

  double phi(double u) const {
    double s = 0.0;
    for (double l : eigs) s += std::atan(l * u);
    return 0.5 * s;
  }
  double dphi(double u) const {
    double s = 0.0;
    for (double l : eigs) s += l / (1.0 + l * l * u * u);
    return 0.5 * s;
  }
  double log_rho(double u) const {
    double s = 0.0;
    for (double l : eigs) s += std::log1p(l * l * u * u);
    return 0.25 * s;
  }
  double envelope(double u) const { return std::exp(-log_rho(u)) / u; }
  double real_integrand(double u) const {
    if (u <= 0.0) return dphi(0.0) - 0.5 * x;  // limit sin(theta)/u -> theta'(0)
    return std::sin(phi(u) - 0.5 * x * u) * std::exp(-log_rho(u)) / u;
  }
};

// 15-point Gauss-Legendre rule on [-1, 1].
constexpr int kGlPoints = 15;
constexpr double kGlNode[kGlPoints] = {
    0.0,
    -0.2011940939974345, 0.2011940939974345,
    -0.3941513470775634, 0.3941513470775634,
    -0.5709721726085388, 0.5709721726085388,
    -0.7244177313601700, 0.7244177313601700,
    -0.8482065834104272, 0.8482065834104272,
    -0.9372733924007059, 0.9372733924007059,
    -0.9879925180204854, 0.9879925180204854};
constexpr double kGlWeight[kGlPoints] = {
    0.2025782419255613,
    0.1984314853271116, 0.1984314853271116,
    0.1861610000155622, 0.1861610000155622,
    0.1662692058169939, 0.1662692058169939,
    0.1395706779261543, 0.1395706779261543,
    0.1071592204671719, 0.1071592204671719,
    0.0703660474881081, 0.0703660474881081,
    0.0307532419961173, 0.0307532419961173};

double gauss_panel(const ImhofParts& f, double a, double b) {
  double c = 0.5 * (a + b), s = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < kGlPoints; ++i) acc += kGlWeight[i] * f.real_integrand(c + s * kGlNode[i]);
  return acc * s;
}

constexpr int kChebDegree = 12;

// integrals of t^k e^{-i nu t} over [-1, 1], k = 0..kChebDegree
std::array<std::complex<double>, kChebDegree + 1> monomial_moments(double nu) {
  std::array<std::complex<double>, kChebDegree + 1> m{};
  const std::complex<double> i_unit(0.0, 1.0);
  if (std::abs(nu) <= 10.0) {
    // Taylor in nu: int t^{k+j} dt is 2/(k+j+1) for even k+j
    for (int k = 0; k <= kChebDegree; ++k) {
      std::complex<double> term(1.0, 0.0), total(0.0, 0.0);
      for (int j = 0; j < 80; ++j) {
        if ((k + j) % 2 == 0) total += term * (2.0 / (k + j + 1));
        term *= -i_unit * nu / static_cast<double>(j + 1);
        if (std::abs(term) < 1e-300) break;
      }
      m[static_cast<std::size_t>(k)] = total;
    }
    return m;
  }
  // upward recurrence from integration by parts, stable for |nu| > degree
  std::complex<double> em = std::exp(-i_unit * nu);  // e^{-i nu}
  std::complex<double> ep = std::exp(i_unit * nu);
  m[0] = 2.0 * std::sin(nu) / nu;
  for (int k = 1; k <= kChebDegree; ++k) {
    double sign = k % 2 == 0 ? 1.0 : -1.0;
    m[static_cast<std::size_t>(k)] =
        (em - sign * ep) / (-i_unit * nu) +
        (static_cast<double>(k) / (i_unit * nu)) * m[static_cast<std::size_t>(k - 1)];
  }
  return m;
}

// One oscillatory panel by Filon-Chebyshev: interpolate the slowly varying
// complex amplitude (local linear phase folded out) at Chebyshev nodes and
// integrate it against the oscillation exactly. Splits itself when the
// Chebyshev tail indicates the amplitude is not yet resolved.
std::complex<double> filon_panel(const ImhofParts& f, double a, double b, double omega,
                                 int depth) {
  const double c = 0.5 * (a + b), s = 0.5 * (b - a);
  const double dphi_c = f.dphi(c);
  const double phi_c = f.phi(c);
  const std::complex<double> i_unit(0.0, 1.0);
  const int p = kChebDegree;
  std::array<std::complex<double>, kChebDegree + 1> fv;
  for (int k = 0; k <= p; ++k) {
    double t = std::cos(std::numbers::pi * k / p);
    double u = c + s * t;
    double local_phase = f.phi(u) - phi_c - dphi_c * (u - c);
    fv[static_cast<std::size_t>(k)] =
        std::exp(i_unit * local_phase - f.log_rho(u)) / u;
  }
  // DCT-I coefficients
  std::array<std::complex<double>, kChebDegree + 1> coef{};
  for (int j = 0; j <= p; ++j) {
    std::complex<double> acc(0.0, 0.0);
    for (int k = 0; k <= p; ++k) {
      double w = (k == 0 || k == p) ? 0.5 : 1.0;
      acc += w * fv[static_cast<std::size_t>(k)] * std::cos(std::numbers::pi * j * k / p);
    }
    coef[static_cast<std::size_t>(j)] = acc * (2.0 / p) * ((j == 0 || j == p) ? 0.5 : 1.0);
  }
  double scale = 0.0, tail = 0.0;
  for (int j = 0; j <= p; ++j) scale += std::abs(coef[static_cast<std::size_t>(j)]);
  tail = std::abs(coef[p - 1]) + std::abs(coef[p]);
  if (tail > 1e-10 * scale && depth > 0) {
    return filon_panel(f, a, c, omega, depth - 1) + filon_panel(f, c, b, omega, depth - 1);
  }
  // Chebyshev -> monomial (degrees this small stay well conditioned)
  std::array<std::array<double, kChebDegree + 1>, kChebDegree + 1> tmono{};
  tmono[0][0] = 1.0;
  tmono[1][1] = 1.0;
  for (int j = 2; j <= p; ++j)
    for (int k = 0; k <= j; ++k)
      tmono[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
          2.0 * (k > 0 ? tmono[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(k - 1)]
                       : 0.0) -
          tmono[static_cast<std::size_t>(j - 2)][static_cast<std::size_t>(k)];
  std::array<std::complex<double>, kChebDegree + 1> mono{};
  for (int j = 0; j <= p; ++j)
    for (int k = 0; k <= j; ++k)
      mono[static_cast<std::size_t>(k)] +=
          coef[static_cast<std::size_t>(j)] *
          tmono[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
  const double nu = (omega - dphi_c) * s;
  auto moments = monomial_moments(nu);
  std::complex<double> acc(0.0, 0.0);
  for (int k = 0; k <= p; ++k)
    acc += mono[static_cast<std::size_t>(k)] * moments[static_cast<std::size_t>(k)];
  return s * std::exp(i_unit * (phi_c - omega * c)) * acc;
}

}  // namespace

double pvalue_imhof(std::span<const double> eigs, double x) {
  if (eigs.empty()) throw ArgumentError("pvalue_imhof: empty eigenvalue list");
  for (double l : eigs)
    if (!(l > 0.0)) throw ArgumentError("pvalue_imhof: eigenvalues must be positive");
  if (x <= 0.0) return 1.0;

  ImhofParts f{eigs, x};
  const double omega = 0.5 * x;

  // upper limit: integrand envelope below 1e-10
  double upper = 1.0;
  while (f.envelope(upper) > 1e-10 && upper < 1e12) upper *= 2.0;
  {
    double lo = upper / 2.0, hi = upper;
    for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (f.envelope(mid) > 1e-10 ? lo : hi) = mid;
    }
    upper = hi;
  }

  // near the origin the complex extension is singular; cover the first
  // stretch with plain Gauss panels sized by the oscillation there
  double theta0 = std::max(std::abs(f.dphi(0.0) - omega), omega);
  double u0 = std::min(upper, std::numbers::pi / theta0);
  double integral = 0.0;
  for (int k = 0; k < 4; ++k) integral += gauss_panel(f, u0 * k / 4.0, u0 * (k + 1) / 4.0);

  // geometric Filon panels carry the rest
  std::complex<double> osc(0.0, 0.0);
  double a = u0;
  while (a < upper) {
    double b = std::min(a * 1.6, upper);
    if (upper - b < 0.25 * a) b = upper;
    osc += filon_panel(f, a, b, omega, 14);
    a = b;
  }
  integral += osc.imag();

  double p = 0.5 + integral / std::numbers::pi;
  return std::clamp(p, 0.0, 1.0);
}

namespace {

int default_modes(int d) {
  switch (d) {
    case 1: return 2000;
    case 2: return 300;
    case 3: return 80;
    default: return 40;
  }
}

// The limiting spectrum depends only on (d, J, top_m); cache it across calls.
const Spectrum& cached_sheet_spectrum(int d, int modes_J, int top_m) {
  static std::map<std::tuple<int, int, int>, Spectrum> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_tuple(d, modes_J, top_m);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, pinned_sheet_spectrum(d, modes_J, top_m)).first;
  return it->second;
}

}  // namespace

GofResult gof_test_uniform(const Sample& s, const GofOptions& opts) {
  if (!s.post_transform) throw ArgumentError("gof: sample must be transformed to the cube");
  GofResult res;
  res.n = s.rows;
  res.d = s.d;
  res.statistic = omega2(s);
  const double scaled = res.n * res.statistic;

  // limiting spectrum of the statistic kernel = pinned-sheet spectrum
  const double trace_total = std::pow(0.5, s.d) - std::pow(1.0 / 3.0, s.d);
  Spectrum spec;
  if (opts.spec_source == "secular") {
    int J = opts.modes > 0 ? opts.modes : default_modes(s.d);
    spec = cached_sheet_spectrum(s.d, J, opts.max_modes);
  } else if (opts.spec_source == "nystrom") {
    int n = opts.modes > 0 ? opts.modes : 40;
    OperatorExpr pinned = parse("T (I - P) T'");
    spec = nystrom_spectrum(pinned, s.d, n, opts.max_modes, /*extrapolate=*/false);
  } else {
    throw ArgumentError("gof: spec_source must be 'secular' or 'nystrom'");
  }
  std::vector<double> eigs;
  double kept_sum = 0.0;
  for (double l : spec.values) {
    if (l <= 1e-6 * spec.values.front()) break;
    if (static_cast<int>(eigs.size()) == opts.max_modes) break;
    eigs.push_back(l);
    kept_sum += l;
  }
  res.eigenvalues = eigs;
  res.diagnostics.eigenvalues_used = static_cast<int>(eigs.size());
  res.diagnostics.parseval_deficit = spec.parseval_deficit;
  // The dropped tail enters as its mean, a deterministic shift of the
  // statistic; the total trace is known in closed form for this kernel.
  double tail = std::max(trace_total - kept_sum, 0.0);
  res.diagnostics.tail_shift = tail;
  double x_eff = scaled - tail;

  if (opts.montecarlo) {
    res.method = "montecarlo";
    McConfig cfg;
    cfg.reps = opts.mc_reps;
    cfg.seed = opts.seed;
    cfg.trunc_m = static_cast<int>(eigs.size());
    std::vector<double> draws = sample_quadform(eigs, cfg);
    int above = 0;
    for (double v : draws)
      if (v > x_eff) ++above;
    double p = static_cast<double>(above) / draws.size();
    res.p_value = p;
    res.diagnostics.mc_std_error = std::sqrt(std::max(p * (1.0 - p), 1.0 / draws.size()) /
                                             static_cast<double>(draws.size()));
  } else {
    res.method = "imhof";
    res.p_value = pvalue_imhof(eigs, x_eff);
    res.diagnostics.integration_error = 1e-9;
  }
  return res;
}

GofResult gof_test(const Sample& s, std::span<const MarginSpec> margins, const GofOptions& opts) {
  if (s.rows < 1) throw ArgumentError("gof: empty sample");
  Sample u = s.post_transform ? s : rosenblatt_product(s, margins);
  return gof_test_uniform(u, opts);
}

}  // namespace covspec
