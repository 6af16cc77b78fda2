#include "rdmd/blocked_qb.hpp"
#include "rdmd/datasets.hpp"
#include "rdmd/dmd.hpp"
#include "rdmd/error.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/random.hpp"
#include "rdmd/sketch.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace rdmd;

namespace {

DmdConfig make_config(Index rank, const std::string& method, Index oversample, Index power_iters, std::uint64_t seed,
                      std::optional<Index> compress_dim, const std::string& sampling, const std::string& recovery) {
  DmdConfig cfg;
  cfg.target_rank = rank;
  cfg.sketch = SketchConfig{rank, oversample, power_iters, seed};
  cfg.compression_seed = seed;
  cfg.compression_dim = compress_dim.value_or(rank + oversample);
  if (sampling == "uniform")
    cfg.sampling = SamplingKind::UniformRows;
  else if (sampling == "gaussian")
    cfg.sampling = SamplingKind::Gaussian;
  else
    fail(ErrorKind::InvalidArgument, "sampling must be 'uniform' or 'gaussian', got '" + sampling + "'");
  if (recovery != "exact" && recovery != "projected")
    fail(ErrorKind::InvalidArgument, "recovery must be 'exact' or 'projected', got '" + recovery + "'");
  const bool projected = recovery == "projected";
  cfg.randomized_lift = projected ? ModeLift::Projected : ModeLift::Exact;

  if (method == "dmd")
    cfg.method = projected ? DmdMethod::DeterministicProjected : DmdMethod::DeterministicExact;
  else if (method == "rdmd")
    cfg.method = DmdMethod::Randomized;
  else if (method == "cdmd")
    cfg.method = DmdMethod::Compressed;
  else
    fail(ErrorKind::InvalidArgument, "method must be 'dmd', 'rdmd' or 'cdmd', got '" + method + "'");
  return cfg;
}

FilterSpec make_filter(const std::string& kind, Index rank, double lam) {
  if (kind == "tsvd") return FilterSpec::tsvd(rank);
  if (kind == "tikhonov") return FilterSpec::tikhonov(lam);
  fail(ErrorKind::InvalidArgument, "filter kind must be 'tsvd' or 'tikhonov', got '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_rdmd, m) {
  m.doc() = "Randomized dynamic mode decomposition";

  static py::exception<Error> error_type(m, "RdmdError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      inst.attr("kind") = std::string(e.name());
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<DmdResult>(m, "DmdResult")
      .def_readonly("eigenvalues", &DmdResult::eigenvalues)
      .def_readonly("modes", &DmdResult::modes)
      .def_readonly("amplitudes", &DmdResult::amplitudes)
      .def_property_readonly("method", [](const DmdResult& r) { return std::string(method_name(r.method)); })
      .def_property_readonly("singular_values", [](const DmdResult& r) { return r.diagnostics.singular_values; })
      .def_property_readonly("eigen_residual", [](const DmdResult& r) { return r.diagnostics.eigen_residual; })
      .def_property_readonly("timings", [](const DmdResult& r) { return r.diagnostics.timings; })
      .def("reconstruct", py::overload_cast<const DmdResult&, Index>(&reconstruct), py::arg("steps"))
      .def("__repr__", [](const DmdResult& r) {
        return "<DmdResult " + std::string(method_name(r.method)) + ", " + std::to_string(r.eigenvalues.size()) +
               " modes>";
      });

  m.def("economic_svd",
        [](const Matrix& x) {
          SvdFactors f = economic_svd(x);
          return py::make_tuple(f.u, f.singular_values, f.v);
        },
        py::arg("x"), "Thin SVD; returns (U, s, V) with X = U diag(s) V^T.");
  m.def("pseudoinverse", &pseudoinverse, py::arg("x"), py::arg("rank_tol") = std::nullopt);
  m.def("tikhonov_inverse", &tikhonov_inverse, py::arg("x"), py::arg("lam"));
  m.def("filter_factors",
        [](const Vector& s, const std::string& kind, Index rank, double lam) {
          return filter_factors(s, make_filter(kind, rank, lam));
        },
        py::arg("singular_values"), py::arg("kind"), py::arg("rank") = 0, py::arg("lam") = 0.0);
  m.def("eig",
        [](const Matrix& a) {
          ComplexEigenPairs e = eig_dense(a);
          return py::make_tuple(e.eigenvalues, e.eigenvectors);
        },
        py::arg("a"), "Eigenpairs sorted by descending modulus, unit-norm vectors.");

  m.def("gaussian_test_matrix", &gaussian_test_matrix, py::arg("rows"), py::arg("cols"), py::arg("seed"));
  m.def("randomized_qb",
        [](const Matrix& x, Index rank, Index oversample, Index power_iters, std::uint64_t seed) {
          QBFactorization qb = randomized_qb(x, SketchConfig{rank, oversample, power_iters, seed});
          return py::make_tuple(qb.q, qb.b);
        },
        py::arg("x"), py::arg("rank"), py::arg("oversample") = 10, py::arg("power_iters") = 2, py::arg("seed") = 0);
  m.def("blocked_randomized_qb",
        [](const Matrix& x, Index rank, Index blocks, Index oversample, Index power_iters, std::uint64_t seed) {
          InMemoryRowBlocks source(x, blocks);
          BlockedQB qb = blocked_randomized_qb(source, SketchConfig{rank, oversample, power_iters, seed});
          return py::make_tuple(assemble_q(qb), qb.b);
        },
        py::arg("x"), py::arg("rank"), py::arg("blocks"), py::arg("oversample") = 10, py::arg("power_iters") = 2,
        py::arg("seed") = 0);
  m.def("expected_error_bound", &expected_error_bound, py::arg("k"), py::arg("p"), py::arg("q"), py::arg("m"),
        py::arg("n"), py::arg("sigma_next"));

  m.def("decompose",
        [](const Matrix& x, Index rank, const std::string& method, Index oversample, Index power_iters,
           std::uint64_t seed, std::optional<Index> compress_dim, const std::string& sampling,
           const std::string& recovery) {
          const DmdConfig cfg =
              make_config(rank, method, oversample, power_iters, seed, compress_dim, sampling, recovery);
          py::gil_scoped_release release;
          return run_dmd(x, cfg);
        },
        py::arg("x"), py::arg("rank"), py::arg("method") = "rdmd", py::arg("oversample") = 10,
        py::arg("power_iters") = 2, py::arg("seed") = 0, py::arg("compress_dim") = std::nullopt,
        py::arg("sampling") = "gaussian", py::arg("recovery") = "exact");
  m.def("decompose_file",
        [](const std::filesystem::path& path, Index rank, Index blocks, Index oversample, Index power_iters,
           std::uint64_t seed, const std::string& recovery) {
          const DmdConfig cfg =
              make_config(rank, "rdmd", oversample, power_iters, seed, std::nullopt, "gaussian", recovery);
          py::gil_scoped_release release;
          auto source = open_row_blocks(path, blocks);
          return dmd_randomized_blocked(*source, cfg);
        },
        py::arg("path"), py::arg("rank"), py::arg("blocks"), py::arg("oversample") = 10, py::arg("power_iters") = 2,
        py::arg("seed") = 0, py::arg("recovery") = "exact",
        "Blocked randomized DMD that streams row blocks from an SMS file.");

  m.def("reconstruct",
        py::overload_cast<const ComplexMatrix&, const ComplexVector&, const ComplexVector&, Index>(&reconstruct),
        py::arg("modes"), py::arg("eigenvalues"), py::arg("amplitudes"), py::arg("steps"));
  m.def("eigen_match_error", &eigen_match_error, py::arg("reference"), py::arg("test"));

  m.def("synth_linear_dynamics",
        [](Index rows, Index snapshots, const std::vector<Complex>& eigenvalues,
           std::optional<std::vector<Complex>> amplitudes, std::uint64_t seed, std::optional<double> snr) {
          if (amplitudes && amplitudes->size() != eigenvalues.size())
            fail(ErrorKind::ShapeMismatch, "amplitudes and eigenvalues differ in length");
          std::vector<ModeSpec> specs;
          for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
            ModeSpec s;
            s.eigenvalue = eigenvalues[i];
            if (amplitudes) s.amplitude = (*amplitudes)[i];
            specs.push_back(s);
          }
          SyntheticTruth t = synth_linear_dynamics(rows, snapshots - 1, specs, seed);
          Matrix x = snr ? add_noise(t.clean_data, *snr, derive_seed(seed, kNoiseSeedStream)) : t.clean_data;
          return py::make_tuple(x, t.eigenvalues, t.modes, t.amplitudes);
        },
        py::arg("rows"), py::arg("snapshots"), py::arg("eigenvalues"), py::arg("amplitudes") = std::nullopt,
        py::arg("seed") = 0, py::arg("snr") = std::nullopt,
        "Returns (X, eigenvalues, modes, amplitudes); complex eigenvalues gain their conjugates.");
  m.def("add_noise", &add_noise, py::arg("x"), py::arg("snr"), py::arg("seed"));

  m.def("write_sms", &write_sms, py::arg("x"), py::arg("path"));
  m.def("read_sms", &read_sms, py::arg("path"));
}
