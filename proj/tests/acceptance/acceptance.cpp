// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and time limits are fixed below.

#include "test_support.hpp"

#include "rdmd/blocked_qb.hpp"
#include "rdmd/datasets.hpp"
#include "rdmd/dmd.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/sketch.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>

using namespace rdmd;
using namespace rdmd::test;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string("\"") + RDMD_CLI_PATH + "\" " + args + " >\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

DmdConfig config(DmdMethod method, Index k, Index p, Index q, std::uint64_t seed) {
  DmdConfig cfg;
  cfg.method = method;
  cfg.target_rank = k;
  cfg.sketch = {k, p, q, seed};
  cfg.compression_seed = seed;
  return cfg;
}

Outcome exact_recovery() {
  const SyntheticTruth t = synth_linear_dynamics(500, 100, five_mode_spec(), 1);
  const double det = eigen_match_error(t.eigenvalues, dmd_deterministic(t.clean_data, config(DmdMethod::DeterministicExact, 5, 0, 0, 0)).eigenvalues);
  const double rnd = eigen_match_error(t.eigenvalues, dmd_randomized(t.clean_data, config(DmdMethod::Randomized, 5, 10, 2, 7)).eigenvalues);
  DmdConfig c = config(DmdMethod::Compressed, 5, 10, 0, 7);
  c.sampling = SamplingKind::Gaussian;
  c.compression_dim = 50;
  const double cmp = eigen_match_error(t.eigenvalues, dmd_compressed(t.clean_data, c).eigenvalues);
  const double tol = 1e-6;
  return {det <= tol && rnd <= tol && cmp <= tol, "dmd " + fmt(det) + ", rdmd " + fmt(rnd) + ", cdmd " + fmt(cmp)};
}

Outcome error_bound() {
  const Index rows = 100;
  const Index cols = 80;
  const Matrix x = with_spectrum(rows, cols, geometric_spectrum(cols, 0.5), 2);
  bool ok = true;
  double worst_ratio = 0.0;
  for (Index k : {5, 10})
    for (Index p : {5, 10})
      for (Index q : {0, 1, 2}) {
        double total = 0.0;
        for (int s = 0; s < 100; ++s) {
          const QBFactorization qb = randomized_qb(x, {k, p, q, static_cast<std::uint64_t>(s)});
          total += (x - qb.q * (qb.q.transpose() * x)).norm();
        }
        const double mean = total / 100.0;
        const double bound = expected_error_bound(k, p, q, rows, cols, std::ldexp(1.0, -static_cast<int>(k + 1)));
        worst_ratio = std::max(worst_ratio, mean / bound);
        ok = ok && mean <= bound;
      }
  return {ok, "worst mean/bound " + fmt(worst_ratio) + " over 12 configurations"};
}

Outcome power_law() {
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Xoshiro256 rng(derive_seed(3, trial));
    Vector sigma(8);
    for (Index i = 0; i < 8; ++i) sigma(i) = 0.5 + 1.5 * rng.next_unit();
    std::sort(sigma.data(), sigma.data() + 8, std::greater<>());
    const Matrix x = with_spectrum(10, 8, sigma, derive_seed(4, trial));
    const Vector s = economic_svd(x).singular_values;
    for (int q : {1, 2}) {
      Matrix y = x;
      for (int j = 0; j < q; ++j) y = x * (x.transpose() * y);
      const Vector sy = economic_svd(y).singular_values;
      for (Index i = 0; i < 8; ++i) {
        const double expected = std::pow(s(i), 2 * q + 1);
        worst = std::max(worst, std::abs(sy(i) - expected) / expected);
      }
    }
  }
  return {worst <= 1e-10, "worst relative deviation " + fmt(worst) + " over 20 matrices"};
}

Outcome noise_ordering() {
  const SyntheticTruth t = synth_linear_dynamics(2000, 150, five_mode_spec(), 4);
  double det = 0.0;
  double rnd = 0.0;
  double cmp = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = derive_seed(40, s);
    const Matrix x = add_noise(t.clean_data, 10.0, derive_seed(seed, kNoiseSeedStream));
    det += eigen_match_error(t.eigenvalues, dmd_deterministic(x, config(DmdMethod::DeterministicExact, 5, 0, 0, 0)).eigenvalues);
    rnd += eigen_match_error(t.eigenvalues, dmd_randomized(x, config(DmdMethod::Randomized, 5, 20, 2, seed)).eigenvalues);
    DmdConfig c = config(DmdMethod::Compressed, 5, 20, 0, seed);
    c.sampling = SamplingKind::UniformRows;
    c.compression_dim = 25;
    cmp += eigen_match_error(t.eigenvalues, dmd_compressed(x, c).eigenvalues);
  }
  det /= seeds;
  rnd /= seeds;
  cmp /= seeds;
  return {det <= rnd && rnd < cmp, "means: dmd " + fmt(det) + ", rdmd " + fmt(rnd) + ", cdmd " + fmt(cmp)};
}

Outcome blocked_equivalence(const std::filesystem::path& dir) {
  const SyntheticTruth t = synth_linear_dynamics(512, 127, five_mode_spec(), 5);
  const auto file = dir / "blocked.sms";
  write_sms(t.clean_data, file);
  const DmdConfig cfg = config(DmdMethod::Randomized, 5, 10, 2, 11);
  double worst = 0.0;
  for (Index b : {2, 4, 8}) {
    auto source = open_row_blocks(file, b);
    worst = std::max(worst, eigen_match_error(t.eigenvalues, dmd_randomized_blocked(*source, cfg).eigenvalues));
  }
  auto single = open_row_blocks(file, 1);
  const DmdResult one = dmd_randomized_blocked(*single, cfg);
  const DmdResult ref = dmd_randomized(read_sms(file), cfg);
  const bool identical = one.eigenvalues == ref.eigenvalues && one.modes == ref.modes;
  return {worst <= 1e-6 && identical,
          "worst error over b=2,4,8 " + fmt(worst) + ", b=1 " + (identical ? "bit-identical" : "differs")};
}

Outcome memory_contract(const std::filesystem::path& dir) {
  const Index n = 8192;
  const Index cols = 200;
  const Index b = 8;
  const Index l = 15;
  const SyntheticTruth t = synth_linear_dynamics(n, cols - 1, five_mode_spec(), 6);
  const auto file = dir / "large.sms";
  write_sms(t.clean_data, file);
  const std::uintmax_t file_bytes = std::filesystem::file_size(file);
  const std::uintmax_t block_bytes = static_cast<std::uintmax_t>(n / b) * cols * 8;
  const std::uintmax_t k_bytes = static_cast<std::uintmax_t>(b * l) * cols * 8;
  const std::uintmax_t cap = 2'500'000;
  if (!(file_bytes > 4 * cap && cap >= block_bytes + k_bytes))
    return {false, "setup violates the size preconditions"};

  const std::string common = "decompose --input \"" + file.string() + "\" --method rdmd --rank 5 --seed 1 --memory-cap " +
                             std::to_string(cap);
  const int blocked = run_cli(common + " --blocks 8 --out \"" + (dir / "blocked_out").string() + "\"", dir / "blocked.log");
  const int unblocked = run_cli(common + " --out \"" + (dir / "unblocked_out").string() + "\"", dir / "unblocked.log");
  const bool refused = slurp(dir / "unblocked.log").find("MemoryCapExceeded") != std::string::npos;
  return {blocked == 0 && unblocked != 0 && refused,
          "file " + std::to_string(file_bytes) + " B, cap " + std::to_string(cap) + " B; blocked exit " +
              std::to_string(blocked) + ", unblocked exit " + std::to_string(unblocked) +
              (refused ? " (cap exceeded)" : "")};
}

Outcome regularization_filters() {
  Vector s(2);
  s << 3.0, 1.0;
  const Vector f = filter_factors(s, FilterSpec::tikhonov(1.0));
  const double filter_err = std::max(std::abs(f(0) - 0.9), std::abs(f(1) - 0.5));
  double worst = 0.0;
  const double lambda = 0.1;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = gaussian_test_matrix(8, 4, derive_seed(70, trial));
    Eigen::MatrixXd aug(12, 4);
    aug << x, lambda * Eigen::MatrixXd::Identity(4, 4);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(12, 8);
    rhs.topRows(8).setIdentity();
    const Eigen::MatrixXd oracle = aug.colPivHouseholderQr().solve(rhs);
    const Matrix t = tikhonov_inverse(x, lambda);
    worst = std::max(worst, (t - oracle).norm() / oracle.norm());
  }
  return {filter_err <= 1e-15 && worst <= 1e-10,
          "filter factors off by " + fmt(filter_err) + ", Tikhonov vs augmented solve " + fmt(worst)};
}

Outcome eigenvector_chain() {
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Xoshiro256 rng(derive_seed(80, trial));
    const Index n = 40 + static_cast<Index>(rng.next_u64() % 60);
    const Index cols = 15 + static_cast<Index>(rng.next_u64() % 20);
    const Index k = 2 + static_cast<Index>(rng.next_u64() % 5);
    const Index l = k + 5;
    const Matrix x = gaussian_test_matrix(n, cols, derive_seed(81, trial));
    const QBFactorization qb = randomized_qb(x, {k, l - k, 1, derive_seed(82, trial)});
    const SnapshotSplit split = split_snapshots(qb.b);
    const LowDimOperator op = low_dim_operator(split, k);
    const ComplexEigenPairs e = eig_dense(op.a_tilde);
    const Matrix lift = split.right * op.v * op.inv_sigma.asDiagonal();
    const Matrix a_b = lift * op.u.transpose();
    const ComplexMatrix w_b = lift.cast<Complex>() * e.eigenvectors;
    const double residual = (a_b.cast<Complex>() * w_b - w_b * e.eigenvalues.asDiagonal()).norm() / (a_b.norm() * w_b.norm());
    worst = std::max(worst, residual);
  }
  return {worst <= 1e-8, "worst relative residual " + fmt(worst) + " over 50 instances"};
}

Outcome determinism(const std::filesystem::path& dir) {
  const bool gauss = gaussian_test_matrix(200, 30, 9) == gaussian_test_matrix(200, 30, 9);
  const Matrix x = gaussian_test_matrix(150, 60, 10);
  const QBFactorization a = randomized_qb(x, {5, 10, 2, 12});
  const QBFactorization b = randomized_qb(x, {5, 10, 2, 12});
  const bool qb = a.q == b.q && a.b == b.b;

  const auto data = dir / "det.sms";
  write_sms(synth_linear_dynamics(300, 60, five_mode_spec(), 13).clean_data, data);
  bool files = true;
  std::string first;
  for (int run = 0; run < 3; ++run) {
    const auto out = dir / ("det_" + std::to_string(run));
    const int code = run_cli("decompose --input \"" + data.string() + "\" --method rdmd --rank 5 --seed 21 --out \"" +
                                 out.string() + "\"",
                             dir / "det.log");
    const std::string eig = slurp(out / "eigenvalues.csv");
    files = files && code == 0 && !eig.empty() && (run == 0 || eig == first);
    if (run == 0) first = eig;
  }
  return {gauss && qb && files, std::string("gaussian ") + (gauss ? "same" : "differs") + ", QB " +
                                    (qb ? "same" : "differs") + ", CLI eigenvalues " + (files ? "same" : "differ")};
}

}  // namespace

int main() {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("rdmd_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "exact recovery on clean rank-5 data", 5, exact_recovery},
      {2, "mean QB error within the expected bound", 30, error_bound},
      {3, "power iteration raises singular values to 2q+1", 1, power_law},
      {4, "noise ordering dmd <= rdmd < cdmd(uniform)", 60, noise_ordering},
      {5, "blocked rDMD matches ground truth; b=1 bit-identical", 10, [&] { return blocked_equivalence(dir); }},
      {6, "out-of-core run fits under the memory cap", 30, [&] { return memory_contract(dir); }},
      {7, "regularization filters match oracles", 1, regularization_filters},
      {8, "low-dimensional eigenvector chain", 5, eigenvector_chain},
      {9, "determinism of sketches, QB and CLI output", 5, [&] { return determinism(dir); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed < c.limit_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %d %s: %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                elapsed, c.limit_s, in_time ? "" : " TIMEOUT");
    std::fflush(stdout);
  }
  std::filesystem::remove_all(dir);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
