#include "rdmd/linalg.hpp"

#include "rdmd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace rdmd {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string shape_of(const Matrix& x) {
  return std::to_string(x.rows()) + "x" + std::to_string(x.cols());
}

}  // namespace

void require_finite(const Matrix& x, const char* what) {
  require(x.rows() >= 1 && x.cols() >= 1, ErrorKind::ShapeMismatch,
          std::string(what) + " must have at least one row and one column");
  require(x.allFinite(), ErrorKind::NonFiniteInput, std::string(what) + " contains NaN or Inf");
}

SvdFactors economic_svd(const Matrix& x) {
  require_finite(x, "svd input");
  const Eigen::MatrixXd colmajor = x;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(colmajor, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) fail(ErrorKind::ConvergenceFailure, "SVD of " + shape_of(x));

  SvdFactors out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  if (!out.u.allFinite() || !out.v.allFinite() || !out.singular_values.allFinite())
    fail(ErrorKind::ConvergenceFailure, "SVD of " + shape_of(x) + " produced non-finite factors");
  return out;
}

SvdFactors truncated_svd(const Matrix& x, Index k) {
  const Index r = std::min(x.rows(), x.cols());
  require(k >= 1 && k <= r, ErrorKind::RankOutOfRange,
          "rank " + std::to_string(k) + " outside [1, " + std::to_string(r) + "]");
  SvdFactors full = economic_svd(x);
  if (k == r) return full;
  return {full.u.leftCols(k), full.singular_values.head(k), full.v.leftCols(k)};
}

Matrix thin_qr_q(const Matrix& x) {
  require(x.rows() >= x.cols(), ErrorKind::ShapeMismatch,
          "thin QR needs rows >= cols, got " + shape_of(x));
  require_finite(x, "QR input");
  const Eigen::MatrixXd colmajor = x;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(colmajor);
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(x.rows(), x.cols());
  q.applyOnTheLeft(qr.householderQ());
  return q;
}

double default_rank_tol(const Vector& singular_values, Index rows, Index cols) {
  if (singular_values.size() == 0) return 0.0;
  return kEps * static_cast<double>(std::max(rows, cols)) * singular_values(0);
}

Vector invert_singular_values(const Vector& singular_values, double rank_tol) {
  Vector inv(singular_values.size());
  for (Index i = 0; i < singular_values.size(); ++i) {
    const double s = singular_values(i);
    inv(i) = (s > rank_tol && s > 0.0) ? 1.0 / s : 0.0;
  }
  return inv;
}

Matrix pseudoinverse(const Matrix& x, std::optional<double> rank_tol) {
  if (rank_tol) require(*rank_tol >= 0.0, ErrorKind::InvalidArgument, "rank_tol must be >= 0");
  const SvdFactors f = economic_svd(x);
  const double tol = rank_tol.value_or(default_rank_tol(f.singular_values, x.rows(), x.cols()));
  const Vector inv = invert_singular_values(f.singular_values, tol);
  return f.v * inv.asDiagonal() * f.u.transpose();
}

Matrix tikhonov_inverse(const Matrix& x, double lambda) {
  require(lambda >= 0.0, ErrorKind::NegativeLambda, "lambda = " + std::to_string(lambda));
  const SvdFactors f = economic_svd(x);
  Vector damped(f.rank());
  for (Index i = 0; i < f.rank(); ++i) {
    const double s = f.singular_values(i);
    const double denom = s * s + lambda * lambda;
    damped(i) = denom > 0.0 ? s / denom : 0.0;
  }
  return f.v * damped.asDiagonal() * f.u.transpose();
}

Vector filter_factors(const Vector& singular_values, const FilterSpec& spec) {
  const Index r = singular_values.size();
  for (Index i = 0; i < r; ++i) {
    require(singular_values(i) >= 0.0, ErrorKind::InvalidArgument, "singular values must be >= 0");
    require(i == 0 || singular_values(i) <= singular_values(i - 1), ErrorKind::InvalidArgument,
            "singular values must be nonincreasing");
  }

  Vector f(r);
  if (spec.kind == FilterSpec::Kind::Tikhonov) {
    require(spec.lambda >= 0.0, ErrorKind::NegativeLambda, "lambda = " + std::to_string(spec.lambda));
    const double l2 = spec.lambda * spec.lambda;
    for (Index i = 0; i < r; ++i) {
      const double s2 = singular_values(i) * singular_values(i);
      // 0/0 at a zero singular value with lambda = 0: the component carries
      // nothing, so its filter is 0.
      f(i) = (s2 + l2) > 0.0 ? s2 / (s2 + l2) : 0.0;
    }
    return f;
  }

  require(spec.rank >= 1 && spec.rank <= r, ErrorKind::RankOutOfRange,
          "tsvd rank " + std::to_string(spec.rank) + " outside [1, " + std::to_string(r) + "]");
  const double threshold = singular_values(spec.rank - 1);
  for (Index i = 0; i < r; ++i) f(i) = singular_values(i) >= threshold ? 1.0 : 0.0;
  return f;
}

Vector filtered_inverse(const Vector& singular_values, const FilterSpec& spec, double rank_tol) {
  if (spec.kind == FilterSpec::Kind::Tsvd) {
    const Vector f = filter_factors(singular_values, spec);
    Vector inv = invert_singular_values(singular_values, rank_tol);
    return inv.cwiseProduct(f);
  }
  const Vector f = filter_factors(singular_values, spec);
  Vector inv(singular_values.size());
  for (Index i = 0; i < singular_values.size(); ++i) {
    const double s = singular_values(i);
    inv(i) = s > 0.0 ? f(i) / s : 0.0;
  }
  return inv;
}

bool eigen_order(const Complex& a, const Complex& b) {
  const double ma = std::abs(a);
  const double mb = std::abs(b);
  if (ma != mb) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

void normalize_columns(ComplexMatrix& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    auto col = columns.col(j);
    const double norm = col.norm();
    if (norm == 0.0) continue;
    Index pivot = 0;
    double best = -1.0;
    for (Index i = 0; i < col.size(); ++i) {
      const double mag = std::abs(col(i));
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    const Complex phase = std::conj(col(pivot)) / best;
    col *= phase / norm;
    col(pivot) = Complex(std::abs(col(pivot)), 0.0);
  }
}

ComplexEigenPairs eig_dense(const Matrix& a) {
  require(a.rows() == a.cols(), ErrorKind::ShapeMismatch, "eigendecomposition needs a square matrix");
  require_finite(a, "eigendecomposition input");
  const Eigen::MatrixXd colmajor = a;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(colmajor, true);
  if (solver.info() != Eigen::Success) fail(ErrorKind::ConvergenceFailure, "eigendecomposition of " + shape_of(a));

  const ComplexVector values = solver.eigenvalues();
  const Eigen::MatrixXcd vectors = solver.eigenvectors();

  std::vector<Index> order(values.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return eigen_order(values(i), values(j)); });

  ComplexEigenPairs out;
  out.eigenvalues.resize(values.size());
  out.eigenvectors.resize(vectors.rows(), vectors.cols());
  for (Index j = 0; j < values.size(); ++j) {
    out.eigenvalues(j) = values(order[j]);
    out.eigenvectors.col(j) = vectors.col(order[j]);
  }
  normalize_columns(out.eigenvectors);
  return out;
}

ComplexMatrix real_times_complex(const Matrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), ErrorKind::ShapeMismatch, "product of " + shape_of(a) + " and " +
                                                              std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  const Matrix re = a * b.real();
  const Matrix im = a * b.imag();
  ComplexMatrix out(a.rows(), b.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

ComplexVector complex_least_squares(const ComplexMatrix& a, const ComplexVector& b) {
  require(a.rows() == b.size(), ErrorKind::ShapeMismatch,
          "least squares: " + std::to_string(a.rows()) + " rows vs rhs of length " + std::to_string(b.size()));
  const Eigen::MatrixXcd colmajor = a;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(colmajor, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) fail(ErrorKind::ConvergenceFailure, "complex SVD");
  const Vector s = svd.singularValues();
  const Vector inv = invert_singular_values(s, default_rank_tol(s, a.rows(), a.cols()));
  const ComplexVector ub = svd.matrixU().adjoint() * b;
  return svd.matrixV() * (inv.cast<Complex>().asDiagonal() * ub);
}

}  // namespace rdmd
