#pragma once

#include "rdmd/blocked_qb.hpp"
#include "rdmd/types.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rdmd {

// ---------------------------------------------------------------------------
// Synthetic linear dynamics with known spectrum.

struct RandomSmoothProfile {
  std::uint64_t seed = 0;
};

/// exp(2 pi i f j / n) for complex eigenvalues, its real part for real ones.
struct HarmonicProfile {
  double frequency = 1.0;
};

using SpatialProfile = std::variant<RandomSmoothProfile, HarmonicProfile>;

/// One ground-truth mode. A non-real eigenvalue implies its conjugate partner,
/// which the generator adds with the conjugate profile and amplitude.
struct ModeSpec {
  Complex eigenvalue{1.0, 0.0};
  std::optional<SpatialProfile> profile;  // default: seeded smooth field
  Complex amplitude{1.0, 0.0};
};

struct SyntheticTruth {
  ComplexVector eigenvalues;
  ComplexMatrix modes;  // n x r, unit-norm columns
  ComplexVector amplitudes;
  Matrix clean_data;    // n x (m + 1)
};

/// n x (m + 1) snapshots x_j = Re(W diag(lambda^j) a).
SyntheticTruth synth_linear_dynamics(Index n, Index m, const std::vector<ModeSpec>& specs, std::uint64_t seed);

/// Sub-stream of a dataset seed used for its measurement noise.
inline constexpr std::uint64_t kNoiseSeedStream = 0x6e6f697365ULL;

/// Adds i.i.d. N(0, var(X) / snr) noise. A non-finite snr returns X unchanged.
Matrix add_noise(const Matrix& x, double snr, std::uint64_t seed);

/// Population variance of all entries.
double elementwise_variance(const Matrix& x);

// ---------------------------------------------------------------------------
// SMS: 28-byte little-endian header ("RDMD", u32 version, u64 rows, u64 cols,
// u32 dtype) followed by row-major float64 little-endian payload.

inline constexpr std::uint32_t kSmsVersion = 1;
inline constexpr std::uint32_t kSmsDtypeFloat64 = 1;
inline constexpr std::size_t kSmsHeaderBytes = 28;

struct SmsHeader {
  std::uint32_t version = kSmsVersion;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint32_t dtype = kSmsDtypeFloat64;
};

/// Writes to a temporary file next to `path` and renames it into place.
void write_sms(const Matrix& x, const std::filesystem::path& path);
Matrix read_sms(const std::filesystem::path& path);
SmsHeader read_sms_header(const std::filesystem::path& path);

/// Streams an SMS file that writes rows in order, without holding the matrix.
class SmsWriter {
 public:
  SmsWriter(const std::filesystem::path& path, Index rows, Index cols);
  ~SmsWriter();

  SmsWriter(const SmsWriter&) = delete;
  SmsWriter& operator=(const SmsWriter&) = delete;

  void write_rows(const Matrix& rows);
  /// Verifies the row count and renames the temporary into place.
  void finish();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  Index rows_;
  Index cols_;
  Index written_ = 0;
  bool finished_ = false;
};

/// Row-block reader over an SMS file; each block is one contiguous range read.
class SmsRowBlocks final : public RowBlockSource {
 public:
  SmsRowBlocks(const std::filesystem::path& path, const SmsHeader& header, Index block_count);

  const std::filesystem::path& path() const { return path_; }

 protected:
  Matrix read_rows(const RowRange& range) override;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

std::unique_ptr<SmsRowBlocks> open_row_blocks(const std::filesystem::path& path, Index block_count);

// ---------------------------------------------------------------------------
// CSV exporters: header line then one "re,im" pair per row, 17 significant
// digits.

void write_complex_csv(const ComplexVector& values, const std::filesystem::path& path);
ComplexVector read_complex_csv(const std::filesystem::path& path);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace rdmd
