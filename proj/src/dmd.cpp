#include "rdmd/dmd.hpp"

#include "rdmd/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace rdmd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

FilterSpec regularization_for(const DmdConfig& cfg) { return cfg.regularization.value_or(FilterSpec::tsvd(cfg.target_rank)); }

void check_snapshot_matrix(const Matrix& x) {
  require_finite(x, "snapshot matrix");
  require(x.cols() >= 2, ErrorKind::TooFewSnapshots,
          "need at least 2 snapshots, got " + std::to_string(x.cols()));
}

void check_rank(Index k, Index limit, const char* what) {
  require(k >= 1 && k <= limit, ErrorKind::RankOutOfRange,
          std::string(what) + " " + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");
}

double eigen_residual(const Matrix& a_tilde, const ComplexEigenPairs& eig) {
  const ComplexMatrix a = a_tilde.cast<Complex>();
  return (a * eig.eigenvectors - eig.eigenvectors * eig.eigenvalues.asDiagonal()).norm();
}

// Shared tail of every method: eigendecomposition of the projected operator.
DmdResult finish(const LowDimOperator& op, const DmdConfig& cfg, DmdMethod method) {
  DmdResult result;
  const ComplexEigenPairs eig = eig_dense(op.a_tilde);
  result.eigenvalues = eig.eigenvalues;
  result.low_dim_eigvecs = eig.eigenvectors;
  result.method = method;
  result.config = cfg;
  result.diagnostics.singular_values = op.sigma;
  result.diagnostics.eigen_residual = eigen_residual(op.a_tilde, eig);
  return result;
}

// ||A_hat W - W Lambda||_F with A_hat = X_R V Sigma^{-1} U^T, applied without
// forming the n x n operator.
double exact_mode_residual(const Matrix& right, const LowDimOperator& op, const DmdResult& r) {
  const ComplexMatrix ut_w = real_times_complex(op.u.transpose(), r.modes);
  const ComplexMatrix coeff = real_times_complex(op.v * op.inv_sigma.asDiagonal(), ut_w);
  const ComplexMatrix a_w = real_times_complex(right, coeff);
  return (a_w - r.modes * r.eigenvalues.asDiagonal()).norm();
}

// B_R V diag(inv_sigma) W_tilde.
ComplexMatrix lift_coefficients(const Matrix& b_right, const Matrix& v, const Vector& inv_sigma,
                                const ComplexMatrix& w_tilde) {
  require(b_right.cols() == v.rows() && v.cols() == inv_sigma.size() && inv_sigma.size() == w_tilde.rows(),
          ErrorKind::ShapeMismatch, "inconsistent shapes in mode recovery");
  const Matrix lift = b_right * v * inv_sigma.asDiagonal();
  return real_times_complex(lift, w_tilde);
}

ComplexMatrix normalized(ComplexMatrix modes) {
  normalize_columns(modes);
  return modes;
}

Vector first_column(const Matrix& x) { return x.col(0); }

}  // namespace

std::string_view method_name(DmdMethod method) {
  switch (method) {
    case DmdMethod::DeterministicProjected: return "deterministic_projected";
    case DmdMethod::DeterministicExact: return "deterministic_exact";
    case DmdMethod::Compressed: return "compressed";
    case DmdMethod::Randomized: return "randomized";
  }
  return "unknown";
}

std::optional<DmdMethod> parse_method(std::string_view name) {
  for (DmdMethod m : {DmdMethod::DeterministicProjected, DmdMethod::DeterministicExact, DmdMethod::Compressed,
                      DmdMethod::Randomized})
    if (method_name(m) == name) return m;
  return std::nullopt;
}

std::string_view sampling_name(SamplingKind kind) {
  return kind == SamplingKind::UniformRows ? "uniform" : "gaussian";
}

SnapshotSplit split_snapshots(const Matrix& x) {
  require(x.cols() >= 2, ErrorKind::TooFewSnapshots,
          "need at least 2 snapshots, got " + std::to_string(x.cols()));
  const Index m = x.cols() - 1;
  return {x.leftCols(m), x.rightCols(m)};
}

LowDimOperator low_dim_operator(const SnapshotSplit& split, Index k, const std::optional<FilterSpec>& regularization) {
  require(split.left.rows() == split.right.rows() && split.left.cols() == split.right.cols(),
          ErrorKind::ShapeMismatch, "left and right snapshot matrices differ in shape");
  check_rank(k, std::min(split.left.rows(), split.left.cols()), "target rank");
  require(split.left.norm() > 0.0, ErrorKind::DegenerateData, "left snapshot matrix is identically zero");

  const SvdFactors full = economic_svd(split.left);
  const double tol = default_rank_tol(full.singular_values, split.left.rows(), split.left.cols());

  LowDimOperator op;
  op.u = full.u.leftCols(k);
  op.sigma = full.singular_values.head(k);
  op.v = full.v.leftCols(k);

  const FilterSpec spec = regularization.value_or(FilterSpec::tsvd(k));
  if (spec.kind == FilterSpec::Kind::Tsvd) check_rank(spec.rank, k, "tsvd rank");
  op.inv_sigma = filtered_inverse(op.sigma, spec, tol);

  const Matrix right_v = split.right * op.v;
  op.a_tilde = op.u.transpose() * right_v * op.inv_sigma.asDiagonal();
  return op;
}

ComplexMatrix recover_modes(const Matrix& q, const Matrix& b_right, const Matrix& v, const Vector& inv_sigma,
                            const ComplexMatrix& w_tilde) {
  require(q.cols() == b_right.rows(), ErrorKind::ShapeMismatch, "basis and projected data disagree in width");
  return normalized(real_times_complex(q, lift_coefficients(b_right, v, inv_sigma, w_tilde)));
}

DmdResult dmd_deterministic(const Matrix& x, const DmdConfig& cfg) {
  require(cfg.method == DmdMethod::DeterministicProjected || cfg.method == DmdMethod::DeterministicExact,
          ErrorKind::InvalidArgument, "dmd_deterministic needs a deterministic method tag");
  check_snapshot_matrix(x);
  check_rank(cfg.target_rank, std::min(x.rows(), x.cols() - 1), "target rank");

  const auto start = Clock::now();
  const SnapshotSplit split = split_snapshots(x);
  const LowDimOperator op = low_dim_operator(split, cfg.target_rank, regularization_for(cfg));
  DmdResult result = finish(op, cfg, cfg.method);

  if (cfg.method == DmdMethod::DeterministicProjected) {
    result.modes = normalized(real_times_complex(op.u, result.low_dim_eigvecs));
  } else {
    result.modes = normalized(lift_coefficients(split.right, op.v, op.inv_sigma, result.low_dim_eigvecs));
    result.diagnostics.mode_residual = exact_mode_residual(split.right, op, result);
  }
  result.diagnostics.timings.emplace_back("decompose", seconds_since(start));
  result.amplitudes = amplitudes(result, first_column(x));
  return result;
}

namespace {

SketchConfig sketch_for(const DmdConfig& cfg) {
  SketchConfig s = cfg.sketch;
  s.target_rank = cfg.target_rank;
  return s;
}

// Low-dimensional part of randomized DMD given B = Q^T X.
struct RandomizedCore {
  LowDimOperator op;
  Matrix b_right;
};

RandomizedCore randomized_core(const Matrix& b, const DmdConfig& cfg) {
  const SnapshotSplit split = split_snapshots(b);
  check_rank(cfg.target_rank, std::min(split.left.rows(), split.left.cols()), "target rank");
  return {low_dim_operator(split, cfg.target_rank, regularization_for(cfg)), split.right};
}

ComplexMatrix randomized_low_lift(const RandomizedCore& core, const DmdConfig& cfg, const ComplexMatrix& w_tilde) {
  if (cfg.randomized_lift == ModeLift::Projected) return real_times_complex(core.op.u, w_tilde);
  return lift_coefficients(core.b_right, core.op.v, core.op.inv_sigma, w_tilde);
}

}  // namespace

DmdResult dmd_randomized(const Matrix& x, const DmdConfig& cfg) {
  require(cfg.method == DmdMethod::Randomized, ErrorKind::InvalidArgument, "dmd_randomized needs the randomized tag");
  check_snapshot_matrix(x);
  const SketchConfig sketch = sketch_for(cfg);
  check_rank(sketch.sketch_width(), std::min(x.rows(), x.cols() - 1), "sketch width");

  auto start = Clock::now();
  const QBFactorization qb = randomized_qb(x, sketch);
  const double t_qb = seconds_since(start);

  start = Clock::now();
  const RandomizedCore core = randomized_core(qb.b, cfg);
  DmdResult result = finish(core.op, cfg, DmdMethod::Randomized);
  result.modes = normalized(real_times_complex(qb.q, randomized_low_lift(core, cfg, result.low_dim_eigvecs)));
  result.diagnostics.timings.emplace_back("qb", t_qb);
  result.diagnostics.timings.emplace_back("decompose", seconds_since(start));
  result.amplitudes = amplitudes(result, first_column(x));
  return result;
}

DmdResult dmd_randomized_blocked(RowBlockSource& source, const DmdConfig& cfg) {
  require(cfg.method == DmdMethod::Randomized, ErrorKind::InvalidArgument, "blocked DMD needs the randomized tag");
  require(source.cols() >= 2, ErrorKind::TooFewSnapshots, "need at least 2 snapshots");
  const SketchConfig sketch = sketch_for(cfg);
  check_rank(sketch.sketch_width(), std::min(source.rows(), source.cols() - 1), "sketch width");

  Vector x0(source.rows());
  auto start = Clock::now();
  const BlockedQB qb = blocked_randomized_qb(source, sketch, [&](Index, const RowRange& range, const Matrix& rows) {
    x0.segment(range.start, range.count) = rows.col(0);
  });
  const double t_qb = seconds_since(start);

  start = Clock::now();
  const RandomizedCore core = randomized_core(qb.b, cfg);
  DmdResult result = finish(core.op, cfg, DmdMethod::Randomized);
  result.modes = normalized(apply_q(qb, randomized_low_lift(core, cfg, result.low_dim_eigvecs)));
  result.diagnostics.timings.emplace_back("qb", t_qb);
  result.diagnostics.timings.emplace_back("decompose", seconds_since(start));
  result.amplitudes = amplitudes(result, x0);
  return result;
}

DmdResult dmd_compressed(const Matrix& x, const DmdConfig& cfg, const SamplingOperator& s) {
  check_snapshot_matrix(x);
  require(s.source_dim == x.rows(), ErrorKind::ShapeMismatch, "sampling operator does not match the data");
  const Matrix sketched = apply_sampling(s, x);

  DmdConfig used = cfg;
  used.method = DmdMethod::Compressed;
  used.compression_dim = s.sample_count();

  const auto start = Clock::now();
  const SnapshotSplit low = split_snapshots(sketched);
  check_rank(cfg.target_rank, std::min(low.left.rows(), low.left.cols()), "target rank");
  const LowDimOperator op = low_dim_operator(low, cfg.target_rank, regularization_for(cfg));
  DmdResult result = finish(op, used, DmdMethod::Compressed);
  result.modes = normalized(lift_coefficients(x.rightCols(x.cols() - 1), op.v, op.inv_sigma, result.low_dim_eigvecs));
  result.diagnostics.timings.emplace_back("decompose", seconds_since(start));
  result.amplitudes = amplitudes(result, first_column(x));
  return result;
}

DmdResult dmd_compressed(const Matrix& x, const DmdConfig& cfg) {
  require(cfg.method == DmdMethod::Compressed, ErrorKind::InvalidArgument, "dmd_compressed needs the compressed tag");
  check_snapshot_matrix(x);
  const Index l = cfg.compression_dim;
  require(l >= cfg.target_rank, ErrorKind::RankOutOfRange,
          "compression dimension " + std::to_string(l) + " is below the target rank");

  if (cfg.sampling == SamplingKind::UniformRows) {
    require(l <= x.rows(), ErrorKind::RankOutOfRange, "uniform row sampling needs l <= n");
    return dmd_compressed(x, cfg, uniform_row_sampling(x.rows(), l, cfg.compression_seed));
  }

  const Matrix s = gaussian_test_matrix(l, x.rows(), cfg.compression_seed);
  const Matrix sketched = s * x;

  const auto start = Clock::now();
  const SnapshotSplit low = split_snapshots(sketched);
  check_rank(cfg.target_rank, std::min(low.left.rows(), low.left.cols()), "target rank");
  const LowDimOperator op = low_dim_operator(low, cfg.target_rank, regularization_for(cfg));
  DmdResult result = finish(op, cfg, DmdMethod::Compressed);
  result.modes = normalized(lift_coefficients(x.rightCols(x.cols() - 1), op.v, op.inv_sigma, result.low_dim_eigvecs));
  result.diagnostics.timings.emplace_back("decompose", seconds_since(start));
  result.amplitudes = amplitudes(result, first_column(x));
  return result;
}

DmdResult run_dmd(const Matrix& x, const DmdConfig& cfg) {
  switch (cfg.method) {
    case DmdMethod::DeterministicProjected:
    case DmdMethod::DeterministicExact: return dmd_deterministic(x, cfg);
    case DmdMethod::Randomized: return dmd_randomized(x, cfg);
    case DmdMethod::Compressed: return dmd_compressed(x, cfg);
  }
  fail(ErrorKind::InvalidArgument, "unknown method");
}

ComplexVector amplitudes(const DmdResult& result, const Vector& x0) {
  require(x0.size() == result.modes.rows(), ErrorKind::ShapeMismatch,
          "initial state has length " + std::to_string(x0.size()) + ", modes have " +
              std::to_string(result.modes.rows()) + " rows");
  return complex_least_squares(result.modes, x0.cast<Complex>());
}

Matrix reconstruct(const ComplexMatrix& modes, const ComplexVector& eigenvalues, const ComplexVector& amps,
                   Index steps) {
  require(modes.cols() == eigenvalues.size() && amps.size() == eigenvalues.size(), ErrorKind::ShapeMismatch,
          "modes, eigenvalues and amplitudes disagree in count");
  require(steps >= 0, ErrorKind::InvalidArgument, "steps must be >= 0");
  Matrix out(modes.rows(), steps);
  ComplexVector coeff = amps;
  for (Index j = 0; j < steps; ++j) {
    out.col(j) = (modes * coeff).real();
    coeff = coeff.cwiseProduct(eigenvalues);
  }
  return out;
}

Matrix reconstruct(const DmdResult& result, Index steps) {
  require(result.amplitudes.has_value(), ErrorKind::MissingAmplitudes, "result carries no amplitudes");
  return reconstruct(result.modes, result.eigenvalues, *result.amplitudes, steps);
}

double relative_reconstruction_error(const DmdResult& result, const Matrix& x) {
  const Matrix approx = reconstruct(result, x.cols());
  require(approx.rows() == x.rows(), ErrorKind::ShapeMismatch, "modes do not match the data");
  const double denom = x.norm();
  require(denom > 0.0, ErrorKind::DegenerateData, "data matrix is identically zero");
  return (x - approx).norm() / denom;
}

double eigen_match_error(const ComplexVector& reference, const ComplexVector& test) {
  require(reference.size() > 0 && test.size() > 0, ErrorKind::EmptyInput, "eigenvalue lists must be non-empty");
  const Index n = std::min(reference.size(), test.size());

  auto sorted = [](const ComplexVector& v) {
    std::vector<Complex> out(v.data(), v.data() + v.size());
    std::stable_sort(out.begin(), out.end(), eigen_order);
    return out;
  };
  std::vector<Complex> ref = sorted(reference);
  std::vector<Complex> tst = sorted(test);
  ref.resize(n);
  tst.resize(n);

  std::vector<bool> used(n, false);
  double worst = 0.0;
  for (const Complex& r : ref) {
    Index best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(r - tst[j]);
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, best_dist);
  }
  return worst;
}

}  // namespace rdmd
