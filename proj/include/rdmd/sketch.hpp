#pragma once

#include "rdmd/types.hpp"

#include <cstdint>
#include <vector>

namespace rdmd {

/// Parameters of the randomized range finder. The sketch width is
/// l = target_rank + oversampling.
struct SketchConfig {
  Index target_rank = 1;
  Index oversampling = 10;
  Index power_iters = 2;
  std::uint64_t seed = 0;

  Index sketch_width() const { return target_rank + oversampling; }
};

/// X ~ Q B with Q (n x l) orthonormal and B = Q^T X (l x m).
struct QBFactorization {
  Matrix q;
  Matrix b;
};

/// Row-sampling sketch S: row j of S X is scale_factors[j] * X.row(indices[j]).
struct SamplingOperator {
  Index source_dim = 0;
  std::vector<Index> indices;
  std::vector<double> scale_factors;

  Index sample_count() const { return static_cast<Index>(indices.size()); }
};

/// i.i.d. standard normal entries filled in row-major order from
/// GaussianStream(seed).
Matrix gaussian_test_matrix(Index rows, Index cols, std::uint64_t seed);

void validate_sketch(const SketchConfig& cfg, Index rows, Index cols);

QBFactorization randomized_qb(const Matrix& x, const SketchConfig& cfg);

/// Average-case bound on E||X - Q Q^T X||_F for a Gaussian sketch.
double expected_error_bound(Index k, Index p, Index q, Index m, Index n, double sigma_next);

SamplingOperator row_sampling_operator(Index n, Index l, const std::vector<double>& probabilities,
                                       std::uint64_t seed);
SamplingOperator uniform_row_sampling(Index n, Index l, std::uint64_t seed);
/// Every row once, in order, with unit scale.
SamplingOperator identity_sampling(Index n);

Matrix apply_sampling(const SamplingOperator& s, const Matrix& x);

}  // namespace rdmd
