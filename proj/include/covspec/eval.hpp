#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "covspec/expr.hpp"
#include "covspec/grid.hpp"

namespace covspec {

struct EvalOptions {
  std::int64_t max_rows = 20000;  // refuse dense matrices larger than this
  int expand_term_limit = 4096;   // tensor-expansion fallback threshold
};

/// Dense realization of an expression on a grid. The matrix acts on
/// node-value vectors; with uniform weights its adjoint in the weighted
/// inner product is the plain transpose.
struct DiscreteOp {
  Eigen::MatrixXd matrix;
  Grid grid;
  OperatorExpr expr;
};

/// One-dimensional atom matrix (g.dim() must be 1).
DiscreteOp atom_matrix(const Atom& a, const Grid& g);

/// Evaluate by structural recursion; 1-d atoms auto-lift to tensor powers
/// when the grid is multi-dimensional.
DiscreteOp eval(const OperatorExpr& e, const Grid& g, const EvalOptions& opts = {});

/// Scalar-generic evaluation. `long double` is used by the verification
/// harness when double rounding would drown the deep tail of a spectrum.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eval_matrix(const OperatorExpr& e,
                                                                  const Grid& g,
                                                                  const EvalOptions& opts = {});

namespace detail {
/// Direct recursion: products are formed at full grid size.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eval_direct(const OperatorExpr& e,
                                                                  const Grid& g,
                                                                  const EvalOptions& opts);
/// Expansion into a sum of pure tensor monomials: per-axis products are
/// formed at axis size, then Kronecker-accumulated. Exact in exact
/// arithmetic; much cheaper (and better conditioned) for d >= 2.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eval_expanded(const OperatorExpr& e,
                                                                    const Grid& g,
                                                                    const EvalOptions& opts);
/// Number of tensor monomials eval_expanded would produce, or -1 past limit.
int expansion_term_count(const OperatorExpr& e, int d, int limit);
}  // namespace detail

/// Weight functions usable as S[name]. Built-ins: "one", "x", "sqrtx", "1-x".
void register_multiplier(const std::string& name, std::function<double(double)> f);
std::function<double(double)> multiplier_function(const std::string& name);

}  // namespace covspec
