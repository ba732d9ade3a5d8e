#pragma once

#include "core/common.hpp"

namespace mldfm {

/* Columns of Q span span(M), Q'Q/T = I_k, and each column's first nonzero
   entry is positive. Throws a numeric error on rank deficiency. */
Matrix orthonormalize(const Matrix& M);

/* Eigendecomposition of a symmetric matrix with eigenvalues sorted in
   decreasing order (columns of vectors follow the same order). */
struct SymEig {
  Vector values;
  Matrix vectors;
};
SymEig sym_eig_desc(const Matrix& S);

/* Orthogonal R minimizing ||A R - target||_F (Procrustes). */
Matrix procrustes_rotation(const Matrix& A, const Matrix& target);

/* Lower-triangular Cholesky factor; failure reports a numeric error with the
   given context string. */
Matrix chol_lower(const Matrix& S, const std::string& context);

}  // namespace mldfm
