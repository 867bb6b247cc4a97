#pragma once

#include <string>
#include <vector>

#include "mmls/types.hpp"

namespace mmls {

/// Number of monomials of total degree <= m in d variables, C(m + d, d).
Index basis_size(int d, int m);

/// Exponent vectors in graded-lexicographic order: grouped by total degree,
/// and within a degree sorted by descending power of x1, then x2, and so on.
/// For d = 2, m = 2: 1, x, y, x^2, xy, y^2.
std::vector<std::vector<int>> graded_lex_exponents(int d, int m);

/// [b_1(x), ..., b_J(x)] with b_1 = 1.
Vector monomial_basis(const Eigen::Ref<const Vector>& x, int m);

/// Row i holds monomial_basis(X.row(i)).
Matrix design_matrix(const Eigen::Ref<const Matrix>& X, int m);

/// Total-degree-m polynomial map R^d -> R^nt. Row j of `coeffs` multiplies
/// the j-th graded-lex monomial.
struct PolyModel {
  static constexpr const char* kOrdering = "graded-lex";

  int dim_domain = 1;
  int degree = 0;
  Matrix coeffs;  // J x dim_range

  Index dim_range() const noexcept { return coeffs.cols(); }
  Vector evaluate(const Eigen::Ref<const Vector>& x) const;
  /// p(0): only the constant row contributes.
  Vector value_at_origin() const { return coeffs.row(0).transpose(); }

  std::string to_json() const;
  /// Throws Error(Configuration) on malformed input or unknown ordering.
  static PolyModel from_json(const std::string& text);
};

struct WlsProblem {
  Matrix X;  // N x d chart coordinates
  Matrix Y;  // N x nt targets
  Vector w;  // N nonnegative weights
};

struct FitOptions {
  /// Minimum accepted ratio of smallest to largest R diagonal after column
  /// equilibration.
  double rcond = 1e-10;
};

/// argmin_p sum_i w_i ||p(x_i) - Y_i||^2 over total degree <= m. One
/// rank-revealing factorization serves every output column. Zero-weight rows
/// are dropped before factoring.
///
/// Throws InsufficientSamples (fewer than J positive weights) or
/// RankDeficient (equilibrated rcond below threshold); the error context
/// carries the counts and the condition estimate.
PolyModel wls_fit(const WlsProblem& problem, int m, const FitOptions& options = {});

/// Dual (Backus-Gilbert) coefficients: the a minimizing sum_i a_i^2 / w_i
/// subject to sum_i a_i b_j(x_i) = b_j(x0) for all basis monomials. Then
/// sum_i a_i Y_i is the weighted LS polynomial evaluated at x0.
///
/// Every weight must be strictly positive (ZeroWeight otherwise).
Vector backus_gilbert_coeffs(const WlsProblem& problem, int m, const Eigen::Ref<const Vector>& x0,
                             const FitOptions& options = {});

}  // namespace mmls
