#pragma once

#include "rdmd/blocked_qb.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/sketch.hpp"
#include "rdmd/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rdmd {

enum class DmdMethod { DeterministicProjected, DeterministicExact, Compressed, Randomized };
enum class SamplingKind { UniformRows, Gaussian };

/// How randomized DMD lifts low-dimensional eigenvectors back to R^n.
/// Exact is Q B_R V Sigma^{-1} W_B; Projected is Q U_B W_B.
enum class ModeLift { Exact, Projected };

std::string_view method_name(DmdMethod method);
std::optional<DmdMethod> parse_method(std::string_view name);
std::string_view sampling_name(SamplingKind kind);

struct DmdConfig {
  Index target_rank = 1;
  DmdMethod method = DmdMethod::DeterministicExact;
  /// Randomized only. Its target_rank is overwritten by `target_rank`.
  SketchConfig sketch{};
  ModeLift randomized_lift = ModeLift::Exact;
  /// Compressed only: sketch dimension l >= k and the kind of S.
  Index compression_dim = 0;
  SamplingKind sampling = SamplingKind::Gaussian;
  std::uint64_t compression_seed = 0;
  /// Defaults to tsvd(target_rank).
  std::optional<FilterSpec> regularization;
};

struct SnapshotSplit {
  Matrix left;
  Matrix right;
};

/// Rank-k projected operator and the truncated SVD of the left snapshots.
struct LowDimOperator {
  Matrix a_tilde;
  Matrix u;
  Vector sigma;
  Matrix v;
  /// Diagonal of the (filtered) Sigma^{-1} used to form a_tilde.
  Vector inv_sigma;
};

struct DmdDiagnostics {
  Vector singular_values;
  /// ||A_tilde W_tilde - W_tilde Lambda||_F.
  double eigen_residual = 0.0;
  /// Exact-mode residual ||A_hat W - W Lambda||_F with A_hat applied through the
  /// data, when the modes are exact-DMD modes of the full data.
  std::optional<double> mode_residual;
  std::vector<std::pair<std::string, double>> timings;
};

struct DmdResult {
  ComplexVector eigenvalues;
  ComplexMatrix modes;
  ComplexMatrix low_dim_eigvecs;
  std::optional<ComplexVector> amplitudes;
  DmdMethod method = DmdMethod::DeterministicExact;
  DmdConfig config;
  DmdDiagnostics diagnostics;
};

SnapshotSplit split_snapshots(const Matrix& x);

LowDimOperator low_dim_operator(const SnapshotSplit& split, Index k,
                                const std::optional<FilterSpec>& regularization = std::nullopt);

/// W = Q B_R V diag(inv_sigma) W_tilde, then phase normalized per column.
ComplexMatrix recover_modes(const Matrix& q, const Matrix& b_right, const Matrix& v, const Vector& inv_sigma,
                            const ComplexMatrix& w_tilde);

/// Projected (W = U_k W_tilde) or exact (W = X_R V_k Sigma_k^{-1} W_tilde)
/// DMD, selected by cfg.method.
DmdResult dmd_deterministic(const Matrix& x, const DmdConfig& cfg);

/// Randomized QB of the snapshot matrix, then the low-dimensional pipeline on
/// B = Q^T X.
DmdResult dmd_randomized(const Matrix& x, const DmdConfig& cfg);

/// Same as dmd_randomized but the QB comes from blocked_randomized_qb over
/// the source. The full matrix is never resident.
DmdResult dmd_randomized_blocked(RowBlockSource& source, const DmdConfig& cfg);

/// B_L = S X_L, B_R = S X_R with S drawn per cfg.sampling; modes are lifted
/// from the uncompressed X_R.
DmdResult dmd_compressed(const Matrix& x, const DmdConfig& cfg);
DmdResult dmd_compressed(const Matrix& x, const DmdConfig& cfg, const SamplingOperator& s);

/// Dispatches on cfg.method.
DmdResult run_dmd(const Matrix& x, const DmdConfig& cfg);

/// Least-squares amplitudes a with W a ~ x0.
ComplexVector amplitudes(const DmdResult& result, const Vector& x0);

/// Column j is Re(W diag(lambda^j) a), j = 0 .. steps - 1.
Matrix reconstruct(const DmdResult& result, Index steps);
Matrix reconstruct(const ComplexMatrix& modes, const ComplexVector& eigenvalues, const ComplexVector& amps,
                   Index steps);

/// ||X - reconstruct(result, cols)||_F / ||X||_F.
double relative_reconstruction_error(const DmdResult& result, const Matrix& x);

/// Greedy matching: reference values in eigen_order each claim the nearest
/// unclaimed test value (lowest index on ties). Both lists are first sorted
/// with eigen_order and truncated to the shorter length. Returns the largest
/// matched distance.
double eigen_match_error(const ComplexVector& reference, const ComplexVector& test);

}  // namespace rdmd
