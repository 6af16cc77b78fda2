#include "rdmd/sketch.hpp"

#include "rdmd/error.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rdmd {

Matrix gaussian_test_matrix(Index rows, Index cols, std::uint64_t seed) {
  require(rows >= 1 && cols >= 1, ErrorKind::ShapeMismatch, "test matrix needs positive dimensions");
  GaussianStream gauss(seed);
  Matrix omega(rows, cols);
  double* data = omega.data();
  for (Index i = 0; i < omega.size(); ++i) data[i] = gauss.next();
  return omega;
}

void validate_sketch(const SketchConfig& cfg, Index rows, Index cols) {
  require(cfg.target_rank >= 1, ErrorKind::RankOutOfRange, "target rank must be >= 1");
  require(cfg.oversampling >= 0, ErrorKind::InvalidArgument, "oversampling must be >= 0");
  require(cfg.power_iters >= 0, ErrorKind::InvalidArgument, "power iterations must be >= 0");
  const Index l = cfg.sketch_width();
  require(l <= std::min(rows, cols), ErrorKind::RankOutOfRange,
          "sketch width l = " + std::to_string(l) + " exceeds min(" + std::to_string(rows) + ", " +
              std::to_string(cols) + ")");
}

QBFactorization randomized_qb(const Matrix& x, const SketchConfig& cfg) {
  require_finite(x, "QB input");
  validate_sketch(cfg, x.rows(), x.cols());
  const Index l = cfg.sketch_width();

  const Matrix omega = gaussian_test_matrix(x.cols(), l, cfg.seed);
  Matrix y = x * omega;

  // Subspace iteration, re-orthonormalizing after every product.
  for (Index j = 0; j < cfg.power_iters; ++j) {
    const Matrix q = thin_qr_q(y);
    const Matrix z = thin_qr_q(x.transpose() * q);
    y.noalias() = x * z;
  }

  QBFactorization out;
  out.q = thin_qr_q(y);
  out.b.noalias() = out.q.transpose() * x;
  return out;
}

double expected_error_bound(Index k, Index p, Index q, Index m, Index n, double sigma_next) {
  require(p >= 2, ErrorKind::InvalidOversampling, "bound assumes oversampling >= 2, got " + std::to_string(p));
  require(k >= 1 && q >= 0, ErrorKind::InvalidArgument, "bound needs k >= 1 and q >= 0");
  require(std::min(m, n) >= k, ErrorKind::InvalidArgument, "bound needs min(m, n) >= k");
  require(sigma_next >= 0.0, ErrorKind::InvalidArgument, "sigma_{k+1} must be >= 0");

  const double kd = static_cast<double>(k);
  const double pd = static_cast<double>(p);
  const double l = kd + pd;
  const double tail = static_cast<double>(std::min(m, n) - k);
  const double bracket =
      1.0 + std::sqrt(kd / (pd - 1.0)) + std::numbers::e * std::sqrt(l) / pd * std::sqrt(tail);
  return std::pow(bracket, 1.0 / (2.0 * static_cast<double>(q) + 1.0)) * sigma_next;
}

SamplingOperator row_sampling_operator(Index n, Index l, const std::vector<double>& probabilities,
                                       std::uint64_t seed) {
  require(n >= 1 && l >= 1, ErrorKind::InvalidArgument, "sampling needs n >= 1 and l >= 1");
  require(static_cast<Index>(probabilities.size()) == n, ErrorKind::InvalidDistribution,
          "expected " + std::to_string(n) + " probabilities");

  std::vector<double> cumulative(probabilities.size());
  double total = 0.0;
  double compensation = 0.0;  // Neumaier
  Index last_positive = -1;
  for (Index i = 0; i < n; ++i) {
    const double p = probabilities[i];
    require(std::isfinite(p) && p >= 0.0, ErrorKind::InvalidDistribution, "probabilities must be finite and >= 0");
    if (p > 0.0) last_positive = i;
    const double t = total + p;
    compensation += std::abs(total) >= p ? (total - t) + p : (p - t) + total;
    total = t;
    cumulative[i] = total;
  }
  require(std::abs(total + compensation - 1.0) <= 1e-12, ErrorKind::InvalidDistribution,
          "probabilities sum to " + std::to_string(total + compensation));

  SamplingOperator s;
  s.source_dim = n;
  s.indices.reserve(l);
  s.scale_factors.reserve(l);
  Xoshiro256 rng(seed);
  const double ld = static_cast<double>(l);
  for (Index j = 0; j < l; ++j) {
    const double u = rng.next_unit() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    Index idx = it == cumulative.end() ? last_positive : static_cast<Index>(it - cumulative.begin());
    s.indices.push_back(idx);
    s.scale_factors.push_back(1.0 / std::sqrt(ld * probabilities[idx]));
  }
  return s;
}

SamplingOperator uniform_row_sampling(Index n, Index l, std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidArgument, "sampling needs n >= 1");
  return row_sampling_operator(n, l, std::vector<double>(n, 1.0 / static_cast<double>(n)), seed);
}

SamplingOperator identity_sampling(Index n) {
  SamplingOperator s;
  s.source_dim = n;
  s.indices.resize(n);
  for (Index i = 0; i < n; ++i) s.indices[i] = i;
  s.scale_factors.assign(n, 1.0);
  return s;
}

Matrix apply_sampling(const SamplingOperator& s, const Matrix& x) {
  require(x.rows() == s.source_dim, ErrorKind::ShapeMismatch,
          "sampling operator expects " + std::to_string(s.source_dim) + " rows, got " + std::to_string(x.rows()));
  Matrix out(s.sample_count(), x.cols());
  for (Index j = 0; j < s.sample_count(); ++j) out.row(j) = s.scale_factors[j] * x.row(s.indices[j]);
  return out;
}

}  // namespace rdmd
