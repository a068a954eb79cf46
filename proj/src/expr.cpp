#include "covspec/expr.hpp"

#include <algorithm>

#include "covspec/errors.hpp"

namespace covspec {

OperatorExpr make_expr(OperatorExpr::Node n) {
  return OperatorExpr(std::make_shared<const detail::ExprNode>(detail::ExprNode{std::move(n)}));
}

OperatorExpr OperatorExpr::atom(Atom a) {
  if (a.kind == AtomKind::RLIntegration && !(a.alpha > 0.5))
    throw ArgumentError("Ta[alpha] requires alpha > 1/2");
  if (a.kind == AtomKind::PolyProjector && a.order < 0)
    throw ArgumentError("Pn[m] requires m >= 0");
  if (a.kind == AtomKind::Multiplier && a.func.empty())
    throw ArgumentError("S[f] requires a weight name");
  return make_expr(std::move(a));
}

OperatorExpr OperatorExpr::identity() { return atom(Atom{AtomKind::Identity}); }
OperatorExpr OperatorExpr::left_integration() { return atom(Atom{AtomKind::LeftIntegration}); }
OperatorExpr OperatorExpr::right_integration() { return left_integration().adj(); }
OperatorExpr OperatorExpr::const_projector() { return atom(Atom{AtomKind::ConstProjector}); }
OperatorExpr OperatorExpr::flip() { return atom(Atom{AtomKind::Flip}); }
OperatorExpr OperatorExpr::multiplier(std::string name) {
  Atom a{AtomKind::Multiplier};
  a.func = std::move(name);
  return atom(std::move(a));
}
OperatorExpr OperatorExpr::rl_integration(double alpha) {
  Atom a{AtomKind::RLIntegration};
  a.alpha = alpha;
  return atom(std::move(a));
}
OperatorExpr OperatorExpr::poly_projector(int order) {
  Atom a{AtomKind::PolyProjector};
  a.order = order;
  return atom(std::move(a));
}

OperatorExpr OperatorExpr::compose(std::vector<OperatorExpr> factors) {
  if (factors.empty()) throw ArgumentError("compose: needs at least one factor");
  if (factors.size() == 1) return factors.front();
  return make_expr(ComposeNode{std::move(factors)});
}

OperatorExpr OperatorExpr::tensor(std::vector<OperatorExpr> factors) {
  if (factors.empty()) throw ArgumentError("tensor: needs at least one factor");
  if (factors.size() == 1) return factors.front();
  return make_expr(TensorNode{std::move(factors)});
}

OperatorExpr OperatorExpr::scale(double c, OperatorExpr e) {
  return make_expr(ScaleNode{c, std::move(e)});
}

OperatorExpr OperatorExpr::sum(std::vector<std::pair<double, OperatorExpr>> terms) {
  if (terms.empty()) throw ArgumentError("sum: needs at least one term");
  return make_expr(SumNode{std::move(terms)});
}

OperatorExpr OperatorExpr::adj() const { return make_expr(AdjointNode{*this}); }

OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b) {
  return OperatorExpr::compose({a, b});
}
OperatorExpr operator*(double c, const OperatorExpr& e) { return OperatorExpr::scale(c, e); }
OperatorExpr operator+(const OperatorExpr& a, const OperatorExpr& b) {
  return OperatorExpr::sum({{1.0, a}, {1.0, b}});
}
OperatorExpr operator-(const OperatorExpr& a, const OperatorExpr& b) {
  return OperatorExpr::sum({{1.0, a}, {-1.0, b}});
}
OperatorExpr operator-(const OperatorExpr& e) { return OperatorExpr::scale(-1.0, e); }

bool operator==(const OperatorExpr& a, const OperatorExpr& b) {
  if (a.node_ == b.node_) return true;
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na.index() != nb.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(nb);
        if constexpr (std::is_same_v<T, Atom>) {
          return x == y;
        } else if constexpr (std::is_same_v<T, ComposeNode> ||
                             std::is_same_v<T, TensorNode>) {
          return x.factors == y.factors;
        } else if constexpr (std::is_same_v<T, AdjointNode>) {
          return x.inner == y.inner;
        } else if constexpr (std::is_same_v<T, ScaleNode>) {
          return x.coeff == y.coeff && x.inner == y.inner;
        } else {
          return x.terms == y.terms;
        }
      },
      na);
}

namespace {

using Compose = ComposeNode;
using Adjoint = AdjointNode;
using Tensor = TensorNode;
using Scale = ScaleNode;
using Sum = SumNode;

}  // namespace

OperatorExpr normalize(const OperatorExpr& e) {
  return std::visit(
      [&](const auto& n) -> OperatorExpr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          return e;
        } else if constexpr (std::is_same_v<T, Adjoint>) {
          OperatorExpr inner = normalize(n.inner);
          if (const auto* a = std::get_if<Adjoint>(&inner.node())) return a->inner;
          return inner.adj();
        } else if constexpr (std::is_same_v<T, Compose>) {
          std::vector<OperatorExpr> out;
          for (const auto& f : n.factors) {
            OperatorExpr nf = normalize(f);
            if (const auto* c = std::get_if<Compose>(&nf.node()))
              out.insert(out.end(), c->factors.begin(), c->factors.end());
            else
              out.push_back(std::move(nf));
          }
          return OperatorExpr::compose(std::move(out));
        } else if constexpr (std::is_same_v<T, Tensor>) {
          std::vector<OperatorExpr> out;
          for (const auto& f : n.factors) {
            OperatorExpr nf = normalize(f);
            if (const auto* t = std::get_if<Tensor>(&nf.node()))
              out.insert(out.end(), t->factors.begin(), t->factors.end());
            else
              out.push_back(std::move(nf));
          }
          return OperatorExpr::tensor(std::move(out));
        } else if constexpr (std::is_same_v<T, Scale>) {
          double c = n.coeff;
          OperatorExpr inner = normalize(n.inner);
          while (const auto* s = std::get_if<Scale>(&inner.node())) {
            c *= s->coeff;
            inner = s->inner;
          }
          if (c == 1.0) return inner;
          return OperatorExpr::scale(c, std::move(inner));
        } else {  // Sum
          std::vector<std::pair<double, OperatorExpr>> out;
          for (const auto& [c0, t] : n.terms) {
            double c = c0;
            OperatorExpr nt = normalize(t);
            while (const auto* s = std::get_if<Scale>(&nt.node())) {
              c *= s->coeff;
              nt = s->inner;
            }
            if (const auto* inner = std::get_if<Sum>(&nt.node())) {
              for (const auto& [ci, ti] : inner->terms) out.emplace_back(c * ci, ti);
            } else {
              out.emplace_back(c, std::move(nt));
            }
          }
          if (out.size() == 1) {
            if (out.front().first == 1.0) return out.front().second;
            return OperatorExpr::scale(out.front().first, out.front().second);
          }
          return OperatorExpr::sum(std::move(out));
        }
      },
      e.node());
}

bool contains_tensor(const OperatorExpr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          return false;
        } else if constexpr (std::is_same_v<T, Tensor>) {
          return true;
        } else if constexpr (std::is_same_v<T, Adjoint>) {
          return contains_tensor(n.inner);
        } else if constexpr (std::is_same_v<T, Scale>) {
          return contains_tensor(n.inner);
        } else if constexpr (std::is_same_v<T, Compose>) {
          return std::any_of(n.factors.begin(), n.factors.end(),
                             [](const auto& f) { return contains_tensor(f); });
        } else {
          return std::any_of(n.terms.begin(), n.terms.end(),
                             [](const auto& t) { return contains_tensor(t.second); });
        }
      },
      e.node());
}

namespace {

void collect_tensor_arities(const OperatorExpr& e, std::vector<int>& arities) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Tensor>) {
          arities.push_back(static_cast<int>(n.factors.size()));
          for (const auto& f : n.factors) collect_tensor_arities(f, arities);
        } else if constexpr (std::is_same_v<T, Adjoint>) {
          collect_tensor_arities(n.inner, arities);
        } else if constexpr (std::is_same_v<T, Scale>) {
          collect_tensor_arities(n.inner, arities);
        } else if constexpr (std::is_same_v<T, Compose>) {
          for (const auto& f : n.factors) collect_tensor_arities(f, arities);
        } else if constexpr (std::is_same_v<T, Sum>) {
          for (const auto& t : n.terms) collect_tensor_arities(t.second, arities);
        }
      },
      e.node());
}

}  // namespace

int tensor_dimension(const OperatorExpr& e) {
  std::vector<int> arities;
  collect_tensor_arities(normalize(e), arities);
  if (arities.empty()) return 1;
  int d = arities.front();
  for (int a : arities)
    if (a != d) throw ArgumentError("expression mixes tensor products of different arity");
  return d;
}

OperatorExpr lift(const OperatorExpr& e, int d) {
  if (d < 1) throw ArgumentError("lift: dimension must be positive");
  if (contains_tensor(e)) throw ArgumentError("lift: expression already contains tensor products");
  if (d == 1) return e;
  return std::visit(
      [&](const auto& n) -> OperatorExpr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          std::vector<OperatorExpr> copies(static_cast<std::size_t>(d), e);
          return OperatorExpr::tensor(std::move(copies));
        } else if constexpr (std::is_same_v<T, Adjoint>) {
          return lift(n.inner, d).adj();
        } else if constexpr (std::is_same_v<T, Compose>) {
          std::vector<OperatorExpr> out;
          out.reserve(n.factors.size());
          for (const auto& f : n.factors) out.push_back(lift(f, d));
          return OperatorExpr::compose(std::move(out));
        } else if constexpr (std::is_same_v<T, Scale>) {
          return OperatorExpr::scale(n.coeff, lift(n.inner, d));
        } else if constexpr (std::is_same_v<T, Sum>) {
          std::vector<std::pair<double, OperatorExpr>> out;
          out.reserve(n.terms.size());
          for (const auto& [c, t] : n.terms) out.emplace_back(c, lift(t, d));
          return OperatorExpr::sum(std::move(out));
        } else {
          throw ArgumentError("lift: unreachable tensor node");
        }
      },
      e.node());
}

namespace {

OperatorExpr dist_adj(const OperatorExpr& e, bool adjointed) {
  return std::visit(
      [&](const auto& n) -> OperatorExpr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          return adjointed ? e.adj() : e;
        } else if constexpr (std::is_same_v<T, Adjoint>) {
          return dist_adj(n.inner, !adjointed);
        } else if constexpr (std::is_same_v<T, Compose>) {
          std::vector<OperatorExpr> out;
          out.reserve(n.factors.size());
          if (adjointed) {
            for (auto it = n.factors.rbegin(); it != n.factors.rend(); ++it)
              out.push_back(dist_adj(*it, true));
          } else {
            for (const auto& f : n.factors) out.push_back(dist_adj(f, false));
          }
          return OperatorExpr::compose(std::move(out));
        } else if constexpr (std::is_same_v<T, Tensor>) {
          std::vector<OperatorExpr> out;
          out.reserve(n.factors.size());
          for (const auto& f : n.factors) out.push_back(dist_adj(f, adjointed));
          return OperatorExpr::tensor(std::move(out));
        } else if constexpr (std::is_same_v<T, Scale>) {
          return OperatorExpr::scale(n.coeff, dist_adj(n.inner, adjointed));
        } else {
          std::vector<std::pair<double, OperatorExpr>> out;
          out.reserve(n.terms.size());
          for (const auto& [c, t] : n.terms) out.emplace_back(c, dist_adj(t, adjointed));
          return OperatorExpr::sum(std::move(out));
        }
      },
      e.node());
}

}  // namespace

OperatorExpr distribute_adjoint(const OperatorExpr& e) { return normalize(dist_adj(e, false)); }

}  // namespace covspec
