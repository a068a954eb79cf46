#include <cmath>
#include <string>

#include "covspec/detail/numfmt.hpp"
#include "covspec/expr.hpp"

namespace covspec {

namespace {

// Binding strength, tightest last: sums < scaling < tensor < composition < adjoint.
enum Level { LSum = 0, LScale = 1, LTensor = 2, LCompose = 3, LAdjoint = 4, LAtom = 5 };

int level_of(const OperatorExpr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) return LAtom;
        else if constexpr (std::is_same_v<T, AdjointNode>) return LAdjoint;
        else if constexpr (std::is_same_v<T, ComposeNode>) return LCompose;
        else if constexpr (std::is_same_v<T, TensorNode>) return LTensor;
        else if constexpr (std::is_same_v<T, ScaleNode>) return LScale;
        else return LSum;
      },
      e.node());
}

std::string atom_text(const Atom& a) {
  switch (a.kind) {
    case AtomKind::Identity: return "I";
    case AtomKind::LeftIntegration: return "T";
    case AtomKind::ConstProjector: return "P";
    case AtomKind::Flip: return "R";
    case AtomKind::Multiplier: return "S[" + a.func + "]";
    case AtomKind::RLIntegration: return "Ta[" + detail::format_double(a.alpha) + "]";
    case AtomKind::PolyProjector: return "Pn[" + std::to_string(a.order) + "]";
  }
  return "?";
}

std::string print(const OperatorExpr& e, int min_level);

std::string print_inner(const OperatorExpr& e) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          return atom_text(n);
        } else if constexpr (std::is_same_v<T, AdjointNode>) {
          return print(n.inner, LAtom) + "'";
        } else if constexpr (std::is_same_v<T, ComposeNode>) {
          std::string s;
          for (std::size_t i = 0; i < n.factors.size(); ++i) {
            if (i) s += ' ';
            s += print(n.factors[i], LAdjoint);
          }
          return s;
        } else if constexpr (std::is_same_v<T, TensorNode>) {
          std::string s;
          for (std::size_t i = 0; i < n.factors.size(); ++i) {
            if (i) s += " # ";
            s += print(n.factors[i], LCompose);
          }
          return s;
        } else if constexpr (std::is_same_v<T, ScaleNode>) {
          std::string s = n.coeff == -1.0 ? "-" : detail::format_double(n.coeff) + " ";
          return s + print(n.inner, LTensor);
        } else {
          std::string s;
          for (std::size_t i = 0; i < n.terms.size(); ++i) {
            double c = n.terms[i].first;
            if (i == 0) {
              if (c < 0) s += '-';
            } else {
              s += c < 0 ? " - " : " + ";
            }
            double mag = std::abs(c);
            if (mag != 1.0) s += detail::format_double(mag) + " ";
            s += print(n.terms[i].second, LTensor);
          }
          return s;
        }
      },
      e.node());
}

std::string print(const OperatorExpr& e, int min_level) {
  if (level_of(e) < min_level) return "(" + print_inner(e) + ")";
  return print_inner(e);
}

}  // namespace

std::string format(const OperatorExpr& e) { return print(normalize(e), LSum); }

}  // namespace covspec
