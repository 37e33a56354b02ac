#pragma once

// Dense spectral helpers shared by the spectral, kernel and solver modules.

#include "galu/types.hpp"

namespace galu {

/// Relative threshold below which a singular value (against the largest
/// singular value) or a Gram eigenvalue (against the largest eigenvalue) is
/// treated as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Singular values in decreasing order. Tall or wide inputs are first reduced
/// to a square triangular factor by Householder QR.
Vector singular_values(const MatrixRef& a);

/// Number of entries of `values` (non-negative, any order) above
/// kRankTolerance times the largest one.
Index numerical_rank(const VectorRef& values);

/// Eigenvalues of a symmetric matrix in increasing order.
Vector symmetric_eigenvalues(const MatrixRef& sym);

double min_eigenvalue(const MatrixRef& sym);

/// Largest singular value.
double spectral_norm(const MatrixRef& a);

/// Khatri-Rao self product: row i is x_i (x) x_i (length d^2).
Matrix khatri_rao_rows(const MatrixRef& xs);

/// Solve sym * c = rhs for symmetric positive definite `sym` via its
/// eigendecomposition. Throws NumericalError when the smallest eigenvalue is
/// not above kRankTolerance times the largest.
Vector spd_solve(const MatrixRef& sym, const VectorRef& rhs, const char* what);

/// ceil / floor of a non-negative quantity computed in floating point, with a
/// relative guard of 1e-9 so that values like 16.000000000000004 that are
/// integers up to rounding land on the integer.
Index ceil_index(double value);
Index floor_index(double value);

}  // namespace galu
