#pragma once

#include <Eigen/Dense>

#include <complex>

namespace rdmd {

using Index = Eigen::Index;
using Complex = std::complex<double>;

// Dense storage is row-major throughout so that row blocks are contiguous both
// in memory and in the on-disk snapshot format.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

}  // namespace rdmd
