#pragma once

#include "rdmd/datasets.hpp"
#include "rdmd/error.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/random.hpp"
#include "rdmd/sketch.hpp"
#include "rdmd/types.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <stdexcept>
#include <vector>

#include <unistd.h>

namespace rdmd::test {

inline Matrix random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  return thin_qr_q(gaussian_test_matrix(rows, cols, seed));
}

/// U diag(sigma) V^T with Haar-like random orthonormal factors.
inline Matrix with_spectrum(Index rows, Index cols, const Vector& sigma, std::uint64_t seed) {
  const Index r = sigma.size();
  const Matrix u = random_orthonormal(rows, r, derive_seed(seed, 1));
  const Matrix v = random_orthonormal(cols, r, derive_seed(seed, 2));
  return u * sigma.asDiagonal() * v.transpose();
}

inline Vector geometric_spectrum(Index r, double ratio) {
  Vector s(r);
  for (Index i = 0; i < r; ++i) s(i) = std::pow(ratio, static_cast<double>(i + 1));
  return s;
}

/// Snapshots of a planar rotation by theta embedded in R^n by a random
/// injection: x_j = P R^j z0. The propagator's nonzero spectrum is e^{+-i theta}.
inline Matrix embedded_rotation(Index n, Index columns, double theta, std::uint64_t seed) {
  const Matrix p = gaussian_test_matrix(n, 2, seed);
  Matrix x(n, columns);
  for (Index j = 0; j < columns; ++j) {
    const double a = theta * static_cast<double>(j);
    Eigen::Vector2d z(std::cos(a) + 0.3 * std::sin(a), std::sin(a) - 0.3 * std::cos(a));
    x.col(j) = p * z;
  }
  return x;
}

inline ComplexVector rotation_spectrum(double theta) {
  ComplexVector v(2);
  v << std::polar(1.0, theta), std::polar(1.0, -theta);
  return v;
}

inline std::vector<ModeSpec> five_mode_spec() {
  std::vector<ModeSpec> specs(3);
  specs[0].eigenvalue = std::polar(0.99, 0.25);
  specs[1].eigenvalue = std::polar(0.95, 0.8);
  specs[2].eigenvalue = Complex(0.9, 0.0);
  return specs;
}

/// Directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("rdmd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline double orthonormality_defect(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

template <typename F>
ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::logic_error("expected an rdmd::Error");
}

}  // namespace rdmd::test
