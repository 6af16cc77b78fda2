#pragma once

#include "rdmd/types.hpp"

#include <optional>

namespace rdmd {

/// Economic or truncated singular value decomposition X ~ U diag(s) V^T.
/// Singular values are nonincreasing; U and V have orthonormal columns.
struct SvdFactors {
  Matrix u;
  Vector singular_values;
  Matrix v;

  Index rank() const { return singular_values.size(); }
};

struct ComplexEigenPairs {
  ComplexVector eigenvalues;
  // Column j pairs with eigenvalues[j].
  ComplexMatrix eigenvectors;
};

/// Spectral filter shaping a regularized inverse: a hard threshold keeping the
/// leading `rank` singular values, or Tikhonov damping with parameter `lambda`.
struct FilterSpec {
  enum class Kind { Tsvd, Tikhonov };

  Kind kind = Kind::Tsvd;
  Index rank = 1;
  double lambda = 0.0;

  static FilterSpec tsvd(Index k) { return {Kind::Tsvd, k, 0.0}; }
  static FilterSpec tikhonov(double lambda) { return {Kind::Tikhonov, 0, lambda}; }
};

void require_finite(const Matrix& x, const char* what);

SvdFactors economic_svd(const Matrix& x);

/// Leading k triplets of economic_svd(x). Throws RankOutOfRange unless
/// 1 <= k <= min(rows, cols).
SvdFactors truncated_svd(const Matrix& x, Index k);

/// Orthonormal basis of col(x) with x's shape, from a Householder QR.
Matrix thin_qr_q(const Matrix& x);

/// eps * max(rows, cols) * sigma_1.
double default_rank_tol(const Vector& singular_values, Index rows, Index cols);

/// Inverts singular values above `rank_tol`, maps the rest to zero.
Vector invert_singular_values(const Vector& singular_values, double rank_tol);

Matrix pseudoinverse(const Matrix& x, std::optional<double> rank_tol = std::nullopt);

/// V diag(s / (s^2 + lambda^2)) U^T, i.e. (X^T X + lambda^2 I)^{-1} X^T.
Matrix tikhonov_inverse(const Matrix& x, double lambda);

Vector filter_factors(const Vector& singular_values, const FilterSpec& spec);

/// Filtered inverse of the singular values: f_i / s_i, zero where f_i or s_i
/// vanishes. For tsvd this also applies the pseudoinverse rank tolerance.
Vector filtered_inverse(const Vector& singular_values, const FilterSpec& spec, double rank_tol);

/// Sort key for spectra: descending magnitude, then descending real part, then
/// descending imaginary part.
bool eigen_order(const Complex& a, const Complex& b);

/// Eigenpairs of a real square matrix, sorted with eigen_order and with every
/// eigenvector phase-normalized (see normalize_columns).
ComplexEigenPairs eig_dense(const Matrix& a);

/// Scales each column to unit 2-norm and rotates it so that its
/// largest-magnitude entry (first one on ties) is real and positive. Zero
/// columns are left untouched.
void normalize_columns(ComplexMatrix& columns);

/// a * b for real a and complex b without promoting a to complex.
ComplexMatrix real_times_complex(const Matrix& a, const ComplexMatrix& b);

/// Minimum-norm least-squares solution of a x = b.
ComplexVector complex_least_squares(const ComplexMatrix& a, const ComplexVector& b);

}  // namespace rdmd
