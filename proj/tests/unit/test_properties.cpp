// Randomized property checks. Each case draws its instances from a seeded
// generator so failures are reproducible from the captured trial number.

#include "test_support.hpp"

#include "rdmd/blocked_qb.hpp"
#include "rdmd/datasets.hpp"
#include "rdmd/dmd.hpp"

#include <doctest.h>

using namespace rdmd;
using namespace rdmd::test;

namespace {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed), seed_(seed) {}

  Index size(Index lo, Index hi) { return lo + static_cast<Index>(rng_.next_u64() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.next_unit(); }
  std::uint64_t seed() { return derive_seed(seed_, ++draws_); }
  Matrix matrix(Index rows, Index cols) { return gaussian_test_matrix(rows, cols, seed()); }

 private:
  Xoshiro256 rng_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
};

bool conjugate_closed(const ComplexVector& v, double tol) {
  for (Index i = 0; i < v.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < v.size(); ++j) best = std::min(best, std::abs(std::conj(v(i)) - v(j)));
    if (best > tol * std::max(1.0, std::abs(v(i)))) return false;
  }
  return true;
}

double mean_qb_error(const Matrix& x, Index k, Index p, Index q, int seeds) {
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const QBFactorization qb = randomized_qb(x, {k, p, q, static_cast<std::uint64_t>(s)});
    total += (x - qb.q * qb.b).norm();
  }
  return total / seeds;
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("SVD reconstruction and orthonormality") {
  Gen g(1);
  for (int trial = 0; trial < 25; ++trial) {
    CAPTURE(trial);
    const Index rows = g.size(1, 200);
    const Index cols = g.size(1, 200);
    const Matrix x = g.matrix(rows, cols) * g.uniform(1e-3, 1e3);
    const SvdFactors f = economic_svd(x);
    const double r = static_cast<double>(f.rank());
    CHECK(f.rank() == std::min(rows, cols));
    CHECK((x - f.u * f.singular_values.asDiagonal() * f.v.transpose()).norm() <= 1e-10 * x.norm());
    CHECK(orthonormality_defect(f.u) <= 1e-10 * std::sqrt(r));
    CHECK(orthonormality_defect(f.v) <= 1e-10 * std::sqrt(r));
    for (Index i = 1; i < f.rank(); ++i) CHECK(f.singular_values(i) <= f.singular_values(i - 1));
  }
}

TEST_CASE("truncation error lies between the optimality bounds") {
  Gen g(2);
  for (int trial = 0; trial < 25; ++trial) {
    CAPTURE(trial);
    const Matrix x = g.matrix(g.size(5, 60), g.size(5, 60));
    const Index r = std::min(x.rows(), x.cols());
    const Index k = g.size(1, r - 1);
    const SvdFactors f = truncated_svd(x, k);
    const Vector s = economic_svd(x).singular_values;
    const double err = (x - f.u * f.singular_values.asDiagonal() * f.v.transpose()).norm();
    CHECK(err >= s(k) - 1e-10);
    CHECK(err <= s.tail(r - k).norm() + 1e-10);
  }
}

TEST_CASE("pseudoinverse satisfies the Moore-Penrose identities") {
  Gen g(3);
  for (int trial = 0; trial < 25; ++trial) {
    CAPTURE(trial);
    const Index rows = g.size(2, 40);
    const Index cols = g.size(2, 40);
    const Index rank = g.size(1, std::min(rows, cols));
    Vector sigma(rank);
    for (Index i = 0; i < rank; ++i) sigma(i) = g.uniform(0.1, 10.0);
    std::sort(sigma.data(), sigma.data() + rank, std::greater<>());
    const Matrix x = with_spectrum(rows, cols, sigma, g.seed());
    const Matrix p = pseudoinverse(x);
    CHECK((x * p * x - x).norm() <= 1e-8 * x.norm());
    CHECK((p * x * p - p).norm() <= 1e-8 * p.norm());
  }
}

TEST_CASE("Tikhonov filters strictly decrease in lambda") {
  Gen g(4);
  for (int trial = 0; trial < 50; ++trial) {
    CAPTURE(trial);
    Vector s(g.size(1, 10));
    for (Index i = 0; i < s.size(); ++i) s(i) = g.uniform(0.01, 5.0);
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    const double l1 = g.uniform(0.01, 3.0);
    const double l2 = l1 + g.uniform(0.01, 3.0);
    const Vector f1 = filter_factors(s, FilterSpec::tikhonov(l1));
    const Vector f2 = filter_factors(s, FilterSpec::tikhonov(l2));
    for (Index i = 0; i < s.size(); ++i) {
      CHECK(f2(i) < f1(i));
      CHECK(f1(i) >= 0.0);
      CHECK(f1(i) <= 1.0);
    }
  }
}

TEST_CASE("eigenvalues of real matrices are closed under conjugation") {
  Gen g(5);
  for (int trial = 0; trial < 25; ++trial) {
    CAPTURE(trial);
    const Index n = g.size(1, 30);
    const Matrix a = g.matrix(n, n);
    const ComplexEigenPairs e = eig_dense(a);
    CHECK(conjugate_closed(e.eigenvalues, 1e-10));
    const ComplexMatrix residual = a.cast<Complex>() * e.eigenvectors - e.eigenvectors * e.eigenvalues.asDiagonal();
    for (Index j = 0; j < n; ++j) CHECK(residual.col(j).norm() <= 1e-8 * a.norm());
  }
}

TEST_CASE("QB bases are orthonormal and deterministic across the grid") {
  Gen g(6);
  const Matrix x = g.matrix(70, 50);
  for (Index k : {1, 5, 10})
    for (Index p : {0, 2, 10})
      for (Index q : {0, 1, 2}) {
        CAPTURE(k);
        CAPTURE(p);
        CAPTURE(q);
        const SketchConfig cfg{k, p, q, 42};
        const QBFactorization a = randomized_qb(x, cfg);
        const QBFactorization b = randomized_qb(x, cfg);
        CHECK(orthonormality_defect(a.q) <= 1e-10 * std::sqrt(static_cast<double>(k + p)));
        CHECK(a.q == b.q);
        CHECK(a.b == b.b);
      }
}

TEST_CASE("mean QB error does not grow with oversampling or power iterations") {
  const Matrix x = with_spectrum(100, 80, geometric_spectrum(80, 0.9), 17);
  const double slack = 1.05;
  for (Index q : {0, 1, 2}) {
    double previous = std::numeric_limits<double>::infinity();
    for (Index p : {0, 2, 5, 10}) {
      const double e = mean_qb_error(x, 8, p, q, 20);
      CAPTURE(p);
      CAPTURE(q);
      CHECK(e <= slack * previous);
      previous = e;
    }
  }
  for (Index p : {2, 10}) {
    double previous = std::numeric_limits<double>::infinity();
    for (Index q : {0, 1, 2, 3}) {
      const double e = mean_qb_error(x, 8, p, q, 20);
      CAPTURE(p);
      CAPTURE(q);
      CHECK(e <= slack * previous);
      previous = e;
    }
  }
}

TEST_CASE("blocked QB accuracy stays close to unblocked") {
  const Matrix x = with_spectrum(256, 128, geometric_spectrum(128, 0.5), 23);
  for (Index q : {0, 1}) {
    const SketchConfig base{8, 8, q, 0};
    double unblocked = 0.0;
    for (int s = 0; s < 20; ++s) {
      SketchConfig cfg = base;
      cfg.seed = static_cast<std::uint64_t>(s);
      const QBFactorization qb = randomized_qb(x, cfg);
      unblocked += (x - qb.q * qb.b).norm();
    }
    for (Index b : {2, 4, 8}) {
      double blocked = 0.0;
      for (int s = 0; s < 20; ++s) {
        SketchConfig cfg = base;
        cfg.seed = static_cast<std::uint64_t>(s);
        InMemoryRowBlocks source(x, b);
        const BlockedQB qb = blocked_randomized_qb(source, cfg);
        blocked += (x - apply_q(qb, qb.b)).norm();
      }
      CAPTURE(q);
      CAPTURE(b);
      CHECK(blocked <= 1.5 * unblocked);
    }
  }
}

TEST_CASE("blocked QB captures exact low rank") {
  Gen g(8);
  for (int trial = 0; trial < 10; ++trial) {
    CAPTURE(trial);
    const Index rank = g.size(1, 6);
    const Index b = g.size(1, 6);
    const Matrix x = g.matrix(30 * b, rank) * g.matrix(rank, g.size(20, 50));
    InMemoryRowBlocks source(x, b);
    const BlockedQB qb = blocked_randomized_qb(source, {rank, g.size(2, 8), g.size(0, 2), g.seed()});
    CHECK((x - assemble_q(qb) * qb.b).norm() <= 1e-8 * x.norm());
  }
}

TEST_CASE("all methods return conjugate-closed spectra") {
  Gen g(9);
  for (int trial = 0; trial < 8; ++trial) {
    CAPTURE(trial);
    const Matrix x = g.matrix(g.size(60, 120), g.size(30, 50));
    const Index k = g.size(2, 8);
    for (DmdMethod m : {DmdMethod::DeterministicProjected, DmdMethod::DeterministicExact, DmdMethod::Randomized,
                        DmdMethod::Compressed}) {
      DmdConfig cfg;
      cfg.method = m;
      cfg.target_rank = k;
      cfg.sketch.seed = g.seed();
      cfg.compression_seed = g.seed();
      cfg.compression_dim = k + 10;
      const DmdResult r = run_dmd(x, cfg);
      CHECK(conjugate_closed(r.eigenvalues, 1e-10));
      // Paired modes are conjugates of each other.
      for (Index i = 0; i < r.eigenvalues.size(); ++i) {
        if (r.eigenvalues(i).imag() <= 1e-12) continue;
        for (Index j = 0; j < r.eigenvalues.size(); ++j) {
          if (std::abs(r.eigenvalues(j) - std::conj(r.eigenvalues(i))) > 1e-10) continue;
          CHECK((r.modes.col(j) - r.modes.col(i).conjugate()).norm() <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("randomized and compressed DMD match deterministic DMD on exact low rank") {
  Gen g(10);
  for (int trial = 0; trial < 10; ++trial) {
    CAPTURE(trial);
    std::vector<ModeSpec> specs;
    const int pairs = static_cast<int>(g.size(1, 3));
    for (int i = 0; i < pairs; ++i) {
      ModeSpec s;
      s.eigenvalue = std::polar(g.uniform(0.7, 1.0), g.uniform(0.05, 2.5));
      specs.push_back(s);
    }
    const Index r = 2 * pairs;
    const Index n = g.size(60, 200);
    const SyntheticTruth t = synth_linear_dynamics(n, g.size(30, 60), specs, g.seed());
    DmdConfig cfg;
    cfg.target_rank = r;
    const DmdResult det = dmd_deterministic(t.clean_data, cfg);

    cfg.method = DmdMethod::Randomized;
    cfg.sketch.seed = g.seed();
    CHECK(eigen_match_error(det.eigenvalues, dmd_randomized(t.clean_data, cfg).eigenvalues) <= 1e-6);

    cfg.method = DmdMethod::Compressed;
    CHECK(eigen_match_error(det.eigenvalues, dmd_compressed(t.clean_data, cfg, identity_sampling(n)).eigenvalues) <=
          1e-10);
  }
}

TEST_CASE("truncation regularizes noisy DMD") {
  const SyntheticTruth t = synth_linear_dynamics(300, 60, five_mode_spec(), 12);
  const Index full = std::min(t.clean_data.rows(), t.clean_data.cols() - 1);
  double truncated = 0.0;
  double unregularized = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Matrix x = add_noise(t.clean_data, 10.0, derive_seed(99, s));
    DmdConfig cfg;
    cfg.method = DmdMethod::DeterministicProjected;
    cfg.target_rank = 5;
    truncated += eigen_match_error(t.eigenvalues, dmd_deterministic(x, cfg).eigenvalues);
    cfg.target_rank = full;
    unregularized += eigen_match_error(t.eigenvalues, dmd_deterministic(x, cfg).eigenvalues);
  }
  CHECK(truncated < unregularized);
}

TEST_CASE("noise injection is deterministic and scaled") {
  Gen g(11);
  for (int trial = 0; trial < 10; ++trial) {
    CAPTURE(trial);
    const Matrix x = g.matrix(g.size(200, 400), g.size(250, 400));
    const double snr = g.uniform(0.5, 50.0);
    const std::uint64_t seed = g.seed();
    const Matrix y = add_noise(x, snr, seed);
    CHECK(y == add_noise(x, snr, seed));
    CHECK(elementwise_variance(x) / elementwise_variance(y - x) == doctest::Approx(snr).epsilon(0.05));
  }
}

}  // TEST_SUITE
