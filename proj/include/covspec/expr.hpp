#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace covspec {

/// Primitive operators of the one-dimensional calculus.
enum class AtomKind {
  Identity,        // I
  LeftIntegration, // T : (Tu)(x) = integral of u over [0,x]
  ConstProjector,  // P : projector onto constants
  Flip,            // R : (Ru)(x) = u(1-x)
  Multiplier,      // S[f] : pointwise multiplication by a named weight
  RLIntegration,   // Ta[alpha] : fractional left integration, alpha > 1/2
  PolyProjector,   // Pn[m] : projector onto polynomials of degree <= m
};

struct Atom {
  AtomKind kind = AtomKind::Identity;
  std::string func;    // Multiplier weight name
  double alpha = 0.0;  // RLIntegration exponent
  int order = 0;       // PolyProjector degree bound

  friend bool operator==(const Atom&, const Atom&) = default;
};

class OperatorExpr;
struct ComposeNode;
struct AdjointNode;
struct TensorNode;
struct ScaleNode;
struct SumNode;
using ExprVariant = std::variant<Atom, ComposeNode, AdjointNode, TensorNode, ScaleNode, SumNode>;

namespace detail {
struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;
}  // namespace detail

/// Immutable operator-algebra expression. Value type; cheap to copy.
///
/// Combinators: composition (juxtaposition), adjoint ('), tensor product (#),
/// scalar multiples and signed sums. The printed form re-parses to the
/// normalized AST.
class OperatorExpr {
 public:
  using Node = ExprVariant;

  // Atom constructors.
  static OperatorExpr atom(Atom a);
  static OperatorExpr identity();
  static OperatorExpr left_integration();
  static OperatorExpr right_integration();  // adjoint of left integration
  static OperatorExpr const_projector();
  static OperatorExpr flip();
  static OperatorExpr multiplier(std::string name);
  static OperatorExpr rl_integration(double alpha);
  static OperatorExpr poly_projector(int order);

  // Combinators.
  static OperatorExpr compose(std::vector<OperatorExpr> factors);
  static OperatorExpr tensor(std::vector<OperatorExpr> factors);
  static OperatorExpr scale(double c, OperatorExpr e);
  static OperatorExpr sum(std::vector<std::pair<double, OperatorExpr>> terms);
  OperatorExpr adj() const;

  const Node& node() const;

  friend OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b);
  friend OperatorExpr operator*(double c, const OperatorExpr& e);
  friend OperatorExpr operator+(const OperatorExpr& a, const OperatorExpr& b);
  friend OperatorExpr operator-(const OperatorExpr& a, const OperatorExpr& b);
  friend OperatorExpr operator-(const OperatorExpr& e);

  /// Structural equality (exact coefficient comparison).
  friend bool operator==(const OperatorExpr& a, const OperatorExpr& b);

 private:
  explicit OperatorExpr(detail::ExprPtr p) : node_(std::move(p)) {}
  detail::ExprPtr node_;
  friend OperatorExpr make_expr(Node n);
};

struct ComposeNode {
  std::vector<OperatorExpr> factors;
  friend bool operator==(const ComposeNode&, const ComposeNode&) = default;
};
struct AdjointNode {
  OperatorExpr inner;
  friend bool operator==(const AdjointNode&, const AdjointNode&) = default;
};
struct TensorNode {
  std::vector<OperatorExpr> factors;
  friend bool operator==(const TensorNode&, const TensorNode&) = default;
};
struct ScaleNode {
  double coeff;
  OperatorExpr inner;
  friend bool operator==(const ScaleNode&, const ScaleNode&) = default;
};
struct SumNode {
  std::vector<std::pair<double, OperatorExpr>> terms;
  friend bool operator==(const SumNode&, const SumNode&) = default;
};

namespace detail {
struct ExprNode {
  ExprVariant node;
};
}  // namespace detail

inline const OperatorExpr::Node& OperatorExpr::node() const { return node_->node; }

/// Parse DSL text. Throws ParseError on malformed input.
OperatorExpr parse(const std::string& text);

/// Canonical printed form; parse(format(e)) == normalize(e).
std::string format(const OperatorExpr& e);

/// Structural canonicalization: collapses double adjoints, flattens nested
/// composition/tensor/sum nodes and folds scalar factors. Purely syntactic;
/// no operator identities are applied.
OperatorExpr normalize(const OperatorExpr& e);

/// Replace every atom by its d-fold tensor power, preserving the surrounding
/// compose/sum structure. The input must contain no tensor nodes.
OperatorExpr lift(const OperatorExpr& e, int d);

/// Push adjoints down to atoms via (AB)* = B*A* and (A (x) B)* = A* (x) B*.
OperatorExpr distribute_adjoint(const OperatorExpr& e);

/// True if the expression contains a tensor node.
bool contains_tensor(const OperatorExpr& e);

/// Ambient dimension: tensor arity if tensor nodes occur (they must agree),
/// otherwise 1. Throws ArgumentError on inconsistent arities.
int tensor_dimension(const OperatorExpr& e);

}  // namespace covspec
