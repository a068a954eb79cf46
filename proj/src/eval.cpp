#include "covspec/eval.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "covspec/errors.hpp"

namespace covspec {

namespace {

std::map<std::string, std::function<double(double)>>& registry() {
  static std::map<std::string, std::function<double(double)>> reg = {
      {"one", [](double) { return 1.0; }},
      {"x", [](double x) { return x; }},
      {"sqrtx", [](double x) { return std::sqrt(x); }},
      {"1-x", [](double x) { return 1.0 - x; }},
  };
  return reg;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
Mat<Scalar> atom_matrix_t(const Atom& a, const Grid& g) {
  if (g.dim() != 1) throw ArgumentError("atom_matrix: grid must be one-dimensional");
  const int n = g.axis_points();
  const Scalar h = Scalar(1) / Scalar(n);
  Mat<Scalar> m = Mat<Scalar>::Zero(n, n);
  switch (a.kind) {
    case AtomKind::Identity:
      m.setIdentity();
      break;
    case AtomKind::LeftIntegration:
      // Cell rule with half weight on the diagonal cell: keeps T+T' = P and
      // T(constant) exact at the nodes.
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) m(i, j) = h;
        m(i, i) = h / 2;
      }
      break;
    case AtomKind::ConstProjector:
      m.setConstant(h);
      break;
    case AtomKind::Flip:
      for (int i = 0; i < n; ++i) m(i, n - 1 - i) = Scalar(1);
      break;
    case AtomKind::Multiplier: {
      auto f = multiplier_function(a.func);
      for (int i = 0; i < n; ++i) m(i, i) = Scalar(f(g.node(i)));
      break;
    }
    case AtomKind::RLIntegration: {
      // Exact per-cell integration of alpha*(x - t)^{alpha-1} over cell j,
      // valid for the weakly singular range 1/2 < alpha < 1 as well.
      const Scalar alpha = Scalar(a.alpha);
      auto pow_pos = [&](Scalar v) { return v > Scalar(0) ? std::pow(v, alpha) : Scalar(0); };
      for (int i = 0; i < n; ++i) {
        const Scalar x = (Scalar(i) + Scalar(0.5L)) * h;
        for (int j = 0; j <= i; ++j) {
          const Scalar left = Scalar(j) * h;
          const Scalar right = Scalar(j + 1) * h;
          m(i, j) = pow_pos(x - left) - pow_pos(x - right);
        }
      }
      break;
    }
    case AtomKind::PolyProjector: {
      // Gram-Schmidt on 1, x, ..., x^m in the h-weighted inner product, so
      // idempotency holds at matrix level. One re-orthogonalization pass.
      const int m_ord = a.order;
      if (m_ord + 1 > n)
        throw ArgumentError("Pn[" + std::to_string(m_ord) + "] needs a grid with more points");
      Mat<Scalar> q(n, m_ord + 1);
      for (int c = 0; c <= m_ord; ++c) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(n);
        for (int i = 0; i < n; ++i) {
          const Scalar x = (Scalar(i) + Scalar(0.5L)) * h;
          v(i) = std::pow(x, Scalar(c));
        }
        for (int pass = 0; pass < 2; ++pass)
          for (int k = 0; k < c; ++k) v -= (h * q.col(k).dot(v)) * q.col(k);
        Scalar norm = std::sqrt(h * v.dot(v));
        q.col(c) = v / norm;
      }
      m = h * (q * q.transpose());
      break;
    }
  }
  return m;
}

template <class Scalar>
Mat<Scalar> kron(const Mat<Scalar>& a, const Mat<Scalar>& b) {
  Mat<Scalar> k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

template <class Scalar>
Mat<Scalar> kron_power(const Mat<Scalar>& a, int d) {
  Mat<Scalar> out = a;
  for (int k = 1; k < d; ++k) out = kron(out, a);
  return out;
}

template <class Scalar>
struct DirectEvaluator {
  const Grid& grid;
  const EvalOptions& opts;

  Mat<Scalar> operator()(const OperatorExpr& e) const {
    return std::visit(
        [&](const auto& n) -> Mat<Scalar> {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Atom>) {
            Mat<Scalar> m1 = atom_matrix_t<Scalar>(n, grid.axis_grid());
            return grid.dim() == 1 ? m1 : kron_power(m1, grid.dim());
          } else if constexpr (std::is_same_v<T, AdjointNode>) {
            return (*this)(n.inner).transpose();
          } else if constexpr (std::is_same_v<T, ComposeNode>) {
            Mat<Scalar> acc = (*this)(n.factors.front());
            for (std::size_t i = 1; i < n.factors.size(); ++i) acc = acc * (*this)(n.factors[i]);
            return acc;
          } else if constexpr (std::is_same_v<T, TensorNode>) {
            if (static_cast<int>(n.factors.size()) != grid.dim())
              throw ArgumentError("tensor arity " + std::to_string(n.factors.size()) +
                                  " does not match grid dimension " + std::to_string(grid.dim()));
            Grid axis = grid.axis_grid();
            DirectEvaluator<Scalar> sub{axis, opts};
            Mat<Scalar> acc = sub(n.factors.front());
            for (std::size_t i = 1; i < n.factors.size(); ++i) acc = kron(acc, sub(n.factors[i]));
            return acc;
          } else if constexpr (std::is_same_v<T, ScaleNode>) {
            return Scalar(n.coeff) * (*this)(n.inner);
          } else {
            Mat<Scalar> acc = Scalar(n.terms.front().first) * (*this)(n.terms.front().second);
            for (std::size_t i = 1; i < n.terms.size(); ++i)
              acc += Scalar(n.terms[i].first) * (*this)(n.terms[i].second);
            return acc;
          }
        },
        e.node());
  }
};

// --- tensor expansion ------------------------------------------------------
//
// A term is c * (e_1 (x) ... (x) e_d) with one-dimensional factor sequences
// per axis. Composition acts axis-wise: (A(x)B)(C(x)D) = AC (x) BD.

struct TensorTerm {
  double coeff = 1.0;
  std::vector<std::vector<OperatorExpr>> axis_factors;  // composition per axis
};

struct Expansion {
  std::vector<TensorTerm> terms;
};

void check_limit(std::size_t count, int limit) {
  if (limit > 0 && count > static_cast<std::size_t>(limit))
    throw CapacityError("tensor expansion exceeds term limit");
}

Expansion expand(const OperatorExpr& e, int d, int limit, bool adjointed);

Expansion expand_product(const std::vector<OperatorExpr>& factors, int d, int limit,
                         bool adjointed) {
  // Adjoint of a product reverses the factor order.
  Expansion acc;
  acc.terms.push_back(
      {1.0, std::vector<std::vector<OperatorExpr>>(static_cast<std::size_t>(d))});
  auto step = [&](const OperatorExpr& f) {
    Expansion fe = expand(f, d, limit, adjointed);
    Expansion next;
    check_limit(acc.terms.size() * fe.terms.size(), limit);
    for (const auto& t1 : acc.terms)
      for (const auto& t2 : fe.terms) {
        TensorTerm t = t1;
        t.coeff *= t2.coeff;
        for (int k = 0; k < d; ++k) {
          auto& dst = t.axis_factors[static_cast<std::size_t>(k)];
          const auto& src = t2.axis_factors[static_cast<std::size_t>(k)];
          dst.insert(dst.end(), src.begin(), src.end());
        }
        next.terms.push_back(std::move(t));
      }
    acc = std::move(next);
  };
  if (adjointed) {
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) step(*it);
  } else {
    for (const auto& f : factors) step(f);
  }
  return acc;
}

Expansion expand(const OperatorExpr& e, int d, int limit, bool adjointed) {
  return std::visit(
      [&](const auto& n) -> Expansion {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          OperatorExpr unit = adjointed ? OperatorExpr::atom(n).adj() : OperatorExpr::atom(n);
          TensorTerm t{1.0, std::vector<std::vector<OperatorExpr>>(
                                static_cast<std::size_t>(d), {unit})};
          return Expansion{{std::move(t)}};
        } else if constexpr (std::is_same_v<T, AdjointNode>) {
          return expand(n.inner, d, limit, !adjointed);
        } else if constexpr (std::is_same_v<T, ComposeNode>) {
          return expand_product(n.factors, d, limit, adjointed);
        } else if constexpr (std::is_same_v<T, TensorNode>) {
          if (static_cast<int>(n.factors.size()) != d)
            throw ArgumentError("tensor arity does not match grid dimension");
          // Each child is a 1-d expression; expand it at d=1 and place the
          // resulting factor sequences on its own axis.
          Expansion acc;
          acc.terms.push_back(
              {1.0, std::vector<std::vector<OperatorExpr>>(static_cast<std::size_t>(d))});
          for (int k = 0; k < d; ++k) {
            Expansion child = expand(n.factors[static_cast<std::size_t>(k)], 1, limit, adjointed);
            Expansion next;
            check_limit(acc.terms.size() * child.terms.size(), limit);
            for (const auto& t1 : acc.terms)
              for (const auto& t2 : child.terms) {
                TensorTerm t = t1;
                t.coeff *= t2.coeff;
                t.axis_factors[static_cast<std::size_t>(k)] = t2.axis_factors.front();
                next.terms.push_back(std::move(t));
              }
            acc = std::move(next);
          }
          return acc;
        } else if constexpr (std::is_same_v<T, ScaleNode>) {
          Expansion inner = expand(n.inner, d, limit, adjointed);
          for (auto& t : inner.terms) t.coeff *= n.coeff;
          return inner;
        } else {
          Expansion out;
          for (const auto& [c, sub] : n.terms) {
            Expansion part = expand(sub, d, limit, adjointed);
            check_limit(out.terms.size() + part.terms.size(), limit);
            for (auto& t : part.terms) {
              t.coeff *= c;
              out.terms.push_back(std::move(t));
            }
          }
          return out;
        }
      },
      e.node());
}

template <class Scalar>
void kron_accumulate_rec(Mat<Scalar>& out, Scalar scale, const std::vector<Mat<Scalar>>& axis,
                         int level, std::int64_t row_off, std::int64_t col_off,
                         std::int64_t stride) {
  const Mat<Scalar>& a = axis[static_cast<std::size_t>(level)];
  const std::int64_t n = a.rows();
  if (level + 1 == static_cast<int>(axis.size())) {
    out.block(row_off, col_off, n, n) += scale * a;
    return;
  }
  const std::int64_t sub = stride / n;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      if (a(i, j) == Scalar(0)) continue;
      kron_accumulate_rec(out, scale * a(i, j), axis, level + 1, row_off + i * sub,
                          col_off + j * sub, sub);
    }
}

template <class Scalar>
void kron_accumulate(Mat<Scalar>& out, Scalar coeff, const std::vector<Mat<Scalar>>& axis,
                     const Grid& g) {
  kron_accumulate_rec(out, coeff, axis, 0, 0, 0, g.size());
}

void check_budget(const Grid& g, const EvalOptions& opts) {
  if (g.size() > opts.max_rows)
    throw CapacityError("dense evaluation refused: " + std::to_string(g.size()) +
                        " rows exceed the budget of " + std::to_string(opts.max_rows));
}

}  // namespace

void register_multiplier(const std::string& name, std::function<double(double)> f) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(f);
}

std::function<double(double)> multiplier_function(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) throw ArgumentError("unknown multiplier weight '" + name + "'");
  return it->second;
}

DiscreteOp atom_matrix(const Atom& a, const Grid& g) {
  return DiscreteOp{atom_matrix_t<double>(a, g), g, OperatorExpr::atom(a)};
}

namespace detail {

template <class Scalar>
Mat<Scalar> eval_direct(const OperatorExpr& e, const Grid& g, const EvalOptions& opts) {
  check_budget(g, opts);
  OperatorExpr prepared = normalize(e);
  if (g.dim() > 1 && !contains_tensor(prepared)) prepared = lift(prepared, g.dim());
  return DirectEvaluator<Scalar>{g, opts}(prepared);
}

template <class Scalar>
Mat<Scalar> eval_expanded(const OperatorExpr& e, const Grid& g, const EvalOptions& opts) {
  check_budget(g, opts);
  OperatorExpr prepared = normalize(e);
  Expansion ex = expand(prepared, g.dim(), opts.expand_term_limit, false);
  Grid axis = g.axis_grid();
  DirectEvaluator<Scalar> sub{axis, opts};
  // Repeated axis sequences are common; cache their products by printed form.
  std::map<std::string, Mat<Scalar>> cache;
  auto product_of = [&](const std::vector<OperatorExpr>& fs) -> const Mat<Scalar>& {
    OperatorExpr seq = fs.empty() ? OperatorExpr::identity() : OperatorExpr::compose(fs);
    std::string key = format(seq);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, sub(seq)).first;
    return it->second;
  };
  Mat<Scalar> out = Mat<Scalar>::Zero(g.size(), g.size());
  std::vector<Mat<Scalar>> axis_mats(static_cast<std::size_t>(g.dim()));
  for (const auto& t : ex.terms) {
    for (int k = 0; k < g.dim(); ++k)
      axis_mats[static_cast<std::size_t>(k)] = product_of(t.axis_factors[static_cast<std::size_t>(k)]);
    kron_accumulate(out, Scalar(t.coeff), axis_mats, g);
  }
  return out;
}

int expansion_term_count(const OperatorExpr& e, int d, int limit) {
  try {
    Expansion ex = expand(normalize(e), d, limit, false);
    return static_cast<int>(ex.terms.size());
  } catch (const CapacityError&) {
    return -1;
  }
}

template Mat<double> eval_direct<double>(const OperatorExpr&, const Grid&, const EvalOptions&);
template Mat<long double> eval_direct<long double>(const OperatorExpr&, const Grid&,
                                                   const EvalOptions&);
template Mat<double> eval_expanded<double>(const OperatorExpr&, const Grid&, const EvalOptions&);
template Mat<long double> eval_expanded<long double>(const OperatorExpr&, const Grid&,
                                                     const EvalOptions&);

}  // namespace detail

template <class Scalar>
Mat<Scalar> eval_matrix(const OperatorExpr& e, const Grid& g, const EvalOptions& opts) {
  if (g.dim() == 1) return detail::eval_direct<Scalar>(e, g, opts);
  int terms = detail::expansion_term_count(e, g.dim(), opts.expand_term_limit);
  if (terms > 0) return detail::eval_expanded<Scalar>(e, g, opts);
  return detail::eval_direct<Scalar>(e, g, opts);
}

template Mat<double> eval_matrix<double>(const OperatorExpr&, const Grid&, const EvalOptions&);
template Mat<long double> eval_matrix<long double>(const OperatorExpr&, const Grid&,
                                                   const EvalOptions&);

DiscreteOp eval(const OperatorExpr& e, const Grid& g, const EvalOptions& opts) {
  return DiscreteOp{eval_matrix<double>(e, g, opts), g, normalize(e)};
}

}  // namespace covspec
