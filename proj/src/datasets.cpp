#include "rdmd/datasets.hpp"

#include "rdmd/dmd.hpp"
#include "rdmd/error.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/random.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

namespace rdmd {

namespace fs = std::filesystem;

namespace {

struct ExpandedMode {
  Complex eigenvalue;
  Complex amplitude;
  std::optional<SpatialProfile> profile;
  bool conjugate_partner = false;
  std::size_t spec_index = 0;
};

// Random smooth field on [0, 1): a constant plus harmonics with coefficients
// N(0, 1) / j.
Vector smooth_field(Index n, Index harmonics, std::uint64_t seed) {
  GaussianStream gauss(seed);
  Vector f = Vector::Constant(n, gauss.next());
  for (Index j = 1; j <= harmonics; ++j) {
    const double a = gauss.next() / static_cast<double>(j);
    const double b = gauss.next() / static_cast<double>(j);
    for (Index i = 0; i < n; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(j * i) / static_cast<double>(n);
      f(i) += a * std::cos(t) + b * std::sin(t);
    }
  }
  return f;
}

ComplexVector base_profile(const ExpandedMode& mode, Index n, Index harmonics, std::uint64_t seed, Index attempt) {
  const bool real = mode.eigenvalue.imag() == 0.0;
  ComplexVector w(n);
  if (mode.profile && std::holds_alternative<HarmonicProfile>(*mode.profile)) {
    const double freq = std::get<HarmonicProfile>(*mode.profile).frequency;
    for (Index i = 0; i < n; ++i) {
      const double t = 2.0 * std::numbers::pi * freq * static_cast<double>(i) / static_cast<double>(n);
      w(i) = real ? Complex(std::cos(t), 0.0) : std::polar(1.0, t);
    }
    return w;
  }

  std::uint64_t profile_seed = derive_seed(seed, mode.spec_index + 1);
  if (mode.profile) profile_seed = std::get<RandomSmoothProfile>(*mode.profile).seed;
  profile_seed = derive_seed(profile_seed, static_cast<std::uint64_t>(attempt));
  const Vector re = smooth_field(n, harmonics, derive_seed(profile_seed, 1));
  if (real) return re.cast<Complex>();
  const Vector im = smooth_field(n, harmonics, derive_seed(profile_seed, 2));
  w.real() = re;
  w.imag() = im;
  return w;
}

double smallest_singular_value(const ComplexMatrix& w) {
  const Eigen::MatrixXcd colmajor = w;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(colmajor);
  return svd.singularValues().minCoeff();
}

void put_u32(unsigned char* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}
void put_u64(unsigned char* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}
std::uint32_t get_u32(const unsigned char* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(const unsigned char* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

std::array<unsigned char, kSmsHeaderBytes> encode_header(std::uint64_t rows, std::uint64_t cols) {
  std::array<unsigned char, kSmsHeaderBytes> h{};
  std::memcpy(h.data(), "RDMD", 4);
  put_u32(h.data() + 4, kSmsVersion);
  put_u64(h.data() + 8, rows);
  put_u64(h.data() + 16, cols);
  put_u32(h.data() + 24, kSmsDtypeFloat64);
  return h;
}

// In-place conversion between host order and little-endian float64.
void swap_to_little_endian(double* values, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    (void)values;
    (void)count;
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      auto bits = std::bit_cast<std::uint64_t>(values[i]);
      bits = __builtin_bswap64(bits);
      values[i] = std::bit_cast<double>(bits);
    }
  }
}

fs::path temp_sibling(const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  return tmp;
}

std::uint64_t payload_bytes(std::uint64_t rows, std::uint64_t cols) {
  require(rows >= 1 && cols >= 1, ErrorKind::ShapeMismatch, "SMS matrix must be at least 1x1");
  require(rows <= std::numeric_limits<std::uint64_t>::max() / 8 / cols, ErrorKind::ShapeMismatch,
          "SMS dimensions overflow");
  return rows * cols * 8;
}

}  // namespace

SyntheticTruth synth_linear_dynamics(Index n, Index m, const std::vector<ModeSpec>& specs, std::uint64_t seed) {
  require(n >= 1 && m >= 1, ErrorKind::InvalidArgument, "synthetic data needs n >= 1 and m >= 1");
  require(!specs.empty(), ErrorKind::EmptyInput, "at least one mode is required");

  std::vector<ExpandedMode> modes;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const ModeSpec& spec = specs[s];
    require(std::isfinite(spec.eigenvalue.real()) && std::isfinite(spec.eigenvalue.imag()), ErrorKind::InvalidArgument,
            "eigenvalues must be finite");
    modes.push_back({spec.eigenvalue, spec.amplitude, spec.profile, false, s});
    if (spec.eigenvalue.imag() != 0.0)
      modes.push_back({std::conj(spec.eigenvalue), std::conj(spec.amplitude), spec.profile, true, s});
  }
  const Index r = static_cast<Index>(modes.size());
  require(r <= std::min(n, m), ErrorKind::TooManyModes,
          std::to_string(r) + " modes (after conjugate completion) exceed min(n, m) = " +
              std::to_string(std::min(n, m)));

  const Index harmonics = std::max<Index>(1, std::min<Index>(std::max<Index>(8, r), n / 2));
  constexpr Index kMaxAttempts = 16;
  constexpr double kMinSingularValue = 1e-6;

  SyntheticTruth truth;
  truth.eigenvalues.resize(r);
  truth.amplitudes.resize(r);
  for (Index j = 0; j < r; ++j) {
    truth.eigenvalues(j) = modes[j].eigenvalue;
    truth.amplitudes(j) = modes[j].amplitude;
  }

  for (Index attempt = 0;; ++attempt) {
    require(attempt < kMaxAttempts, ErrorKind::DegenerateData, "could not draw linearly independent mode profiles");
    truth.modes.resize(n, r);
    for (Index j = 0; j < r; ++j) {
      const ExpandedMode& mode = modes[j];
      if (mode.conjugate_partner) {
        truth.modes.col(j) = truth.modes.col(j - 1).conjugate();
        continue;
      }
      ComplexVector w = base_profile(mode, n, harmonics, seed, attempt);
      const double norm = w.norm();
      require(norm > 0.0, ErrorKind::DegenerateData, "mode profile is identically zero");
      truth.modes.col(j) = w / norm;
    }
    if (smallest_singular_value(truth.modes) >= kMinSingularValue) break;
  }

  truth.clean_data = reconstruct(truth.modes, truth.eigenvalues, truth.amplitudes, m + 1);
  return truth;
}

double elementwise_variance(const Matrix& x) {
  const double mean = x.mean();
  return (x.array() - mean).square().mean();
}

Matrix add_noise(const Matrix& x, double snr, std::uint64_t seed) {
  if (!std::isfinite(snr)) return x;
  require(snr > 0.0, ErrorKind::InvalidArgument, "snr must be > 0");
  const double sd = std::sqrt(elementwise_variance(x) / snr);
  GaussianStream gauss(seed);
  Matrix out = x;
  double* data = out.data();
  for (Index i = 0; i < out.size(); ++i) data[i] += sd * gauss.next();
  return out;
}

// ---------------------------------------------------------------------------

SmsWriter::SmsWriter(const fs::path& path, Index rows, Index cols)
    : path_(path), tmp_(temp_sibling(path)), rows_(rows), cols_(cols) {
  payload_bytes(static_cast<std::uint64_t>(rows), static_cast<std::uint64_t>(cols));
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  require(out_.good(), ErrorKind::IoFailure, "cannot open " + tmp_.string() + " for writing");
  const auto header = encode_header(rows, cols);
  out_.write(reinterpret_cast<const char*>(header.data()), header.size());
  require(out_.good(), ErrorKind::IoFailure, "write failed on " + tmp_.string());
}

SmsWriter::~SmsWriter() {
  if (!finished_) {
    out_.close();
    std::error_code ec;
    fs::remove(tmp_, ec);
  }
}

void SmsWriter::write_rows(const Matrix& rows) {
  require(rows.cols() == cols_, ErrorKind::ShapeMismatch, "row width does not match the SMS header");
  require(written_ + rows.rows() <= rows_, ErrorKind::ShapeMismatch, "more rows than the SMS header declares");
  require_finite(rows, "SMS payload");
  std::vector<double> buffer(static_cast<std::size_t>(cols_));
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < cols_; ++j) buffer[j] = rows(i, j);
    swap_to_little_endian(buffer.data(), buffer.size());
    out_.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size() * 8));
  }
  require(out_.good(), ErrorKind::IoFailure, "write failed on " + tmp_.string());
  written_ += rows.rows();
}

void SmsWriter::finish() {
  require(written_ == rows_, ErrorKind::ShapeMismatch,
          "wrote " + std::to_string(written_) + " of " + std::to_string(rows_) + " rows");
  out_.close();
  require(!out_.fail(), ErrorKind::IoFailure, "close failed on " + tmp_.string());
  std::error_code ec;
  fs::rename(tmp_, path_, ec);
  require(!ec, ErrorKind::IoFailure, "cannot rename " + tmp_.string() + ": " + ec.message());
  finished_ = true;
}

void write_sms(const Matrix& x, const fs::path& path) {
  SmsWriter writer(path, x.rows(), x.cols());
  writer.write_rows(x);
  writer.finish();
}

SmsHeader read_sms_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::IoFailure, "cannot open " + path.string());
  std::array<unsigned char, kSmsHeaderBytes> h{};
  in.read(reinterpret_cast<char*>(h.data()), h.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got >= 4) require(std::memcmp(h.data(), "RDMD", 4) == 0, ErrorKind::BadMagic, path.string() + " is not an SMS file");
  require(got == kSmsHeaderBytes, ErrorKind::TruncatedPayload, path.string() + ": header is truncated");

  SmsHeader header;
  header.version = get_u32(h.data() + 4);
  header.rows = get_u64(h.data() + 8);
  header.cols = get_u64(h.data() + 16);
  header.dtype = get_u32(h.data() + 24);
  require(header.version == kSmsVersion, ErrorKind::UnsupportedVersion,
          path.string() + ": version " + std::to_string(header.version));
  require(header.dtype == kSmsDtypeFloat64, ErrorKind::UnsupportedVersion,
          path.string() + ": dtype code " + std::to_string(header.dtype));

  const std::uint64_t needed = kSmsHeaderBytes + payload_bytes(header.rows, header.cols);
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  require(!ec, ErrorKind::IoFailure, "cannot stat " + path.string());
  require(size >= needed, ErrorKind::TruncatedPayload,
          path.string() + ": " + std::to_string(size) + " bytes, expected " + std::to_string(needed));
  return header;
}

Matrix read_sms(const fs::path& path) {
  const SmsHeader header = read_sms_header(path);
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::IoFailure, "cannot open " + path.string());
  in.seekg(static_cast<std::streamoff>(kSmsHeaderBytes));
  Matrix x(static_cast<Index>(header.rows), static_cast<Index>(header.cols));
  in.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(x.size() * 8));
  require(static_cast<std::uint64_t>(in.gcount()) == static_cast<std::uint64_t>(x.size()) * 8,
          ErrorKind::TruncatedPayload, path.string() + ": short read");
  swap_to_little_endian(x.data(), static_cast<std::size_t>(x.size()));
  return x;
}

SmsRowBlocks::SmsRowBlocks(const fs::path& path, const SmsHeader& header, Index block_count)
    : RowBlockSource(static_cast<Index>(header.rows), static_cast<Index>(header.cols), block_count),
      path_(path),
      in_(path, std::ios::binary) {
  require(in_.good(), ErrorKind::IoFailure, "cannot open " + path.string());
}

Matrix SmsRowBlocks::read_rows(const RowRange& range) {
  const auto offset = static_cast<std::streamoff>(kSmsHeaderBytes + static_cast<std::uint64_t>(range.start) *
                                                                        static_cast<std::uint64_t>(cols()) * 8);
  in_.clear();
  in_.seekg(offset);
  Matrix rows(range.count, cols());
  in_.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(rows.size() * 8));
  require(static_cast<std::uint64_t>(in_.gcount()) == static_cast<std::uint64_t>(rows.size()) * 8,
          ErrorKind::IoFailure, path_.string() + ": short read of rows " + std::to_string(range.start));
  swap_to_little_endian(rows.data(), static_cast<std::size_t>(rows.size()));
  return rows;
}

std::unique_ptr<SmsRowBlocks> open_row_blocks(const fs::path& path, Index block_count) {
  const SmsHeader header = read_sms_header(path);
  return std::make_unique<SmsRowBlocks>(path, header, block_count);
}

// ---------------------------------------------------------------------------

void write_file_atomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::IoFailure, "cannot open " + tmp.string() + " for writing");
    out << contents;
    out.close();
    require(!out.fail(), ErrorKind::IoFailure, "write failed on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, ErrorKind::IoFailure, "cannot rename " + tmp.string() + ": " + ec.message());
}

void write_complex_csv(const ComplexVector& values, const fs::path& path) {
  std::string text = "re,im\n";
  char line[96];
  for (Index i = 0; i < values.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", values(i).real(), values(i).imag());
    text += line;
  }
  write_file_atomic(path, text);
}

ComplexVector read_complex_csv(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::IoFailure, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  require(line == "re,im", ErrorKind::IoFailure, path.string() + ": expected header 're,im'");
  std::vector<Complex> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorKind::IoFailure, path.string() + ": malformed line '" + line + "'");
    try {
      values.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      fail(ErrorKind::IoFailure, path.string() + ": malformed number in '" + line + "'");
    }
  }
  ComplexVector out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Index>(i)) = values[i];
  return out;
}

}  // namespace rdmd
