#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "covspec/expr.hpp"

namespace covspec {

/// A named Gaussian process/field with its covariance expression at a fixed
/// dimension.
struct ProcessSpec {
  std::string name;
  std::map<std::string, double> params;
  std::string weight;  // multiplier name when the process carries one
  int dim = 1;
  OperatorExpr covariance = OperatorExpr::identity();
};

/// Build the covariance for a catalog name at dimension d.
///
/// Names: wiener | brownian-sheet | inverted-wiener | bridge | pinned-sheet |
/// pillow | kiefer | rl[alpha] | rl-bridge[alpha] | weighted[f] |
/// int-wiener[n] | bridged-int-wiener[n] | pinned-a[a] | centered-a[a],
/// optionally prefixed by wrappers separated with ':':
/// centered, int-left, int-right, detrended[n].
/// Example: "centered:int-right:pinned-sheet".
ProcessSpec covariance_expr(const std::string& name, int d);

enum class Exactness { MatrixExact, ContinuumOnly };

/// One displayed spectral equivalence, stored in the factored form used by
/// its proof; the right side carries an explicit flip conjugation wherever
/// the argument appeals to the x -> 1-x symmetry.
struct TheoremPair {
  std::string id;
  std::string summary;
  std::vector<int> dims;
  Exactness exactness = Exactness::MatrixExact;
  bool in_default_suite = true;
  std::function<ProcessSpec(int d)> lhs;
  std::function<ProcessSpec(int d)> rhs;
};

/// The verification registry, ordered by id.
const std::vector<TheoremPair>& theorem_pairs();

/// Lookup by exact id; throws ArgumentError when missing.
const TheoremPair& find_pair(const std::string& id);

/// All ids with the given prefix (used by the CLI --theorem option).
std::vector<std::string> pair_ids_with_prefix(const std::string& prefix);

}  // namespace covspec
