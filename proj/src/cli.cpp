#include "rdmd/cli.hpp"

#include "rdmd/blocked_qb.hpp"
#include "rdmd/datasets.hpp"
#include "rdmd/dmd.hpp"
#include "rdmd/error.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/memory_cap.hpp"
#include "rdmd/random.hpp"
#include "rdmd/sketch.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <new>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace rdmd::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Argument combinations CLI11 cannot express; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json complex_list(const ComplexVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

ComplexVector parse_complex_list(const json& j) {
  ComplexVector out(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    out(static_cast<Index>(i)) = Complex(j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>());
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Truth {
  ComplexVector eigenvalues;
  std::optional<double> snr;
};

Truth load_truth(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::IoFailure, "cannot open " + path.string());
  json j;
  try {
    in >> j;
    Truth t;
    t.eigenvalues = parse_complex_list(j.at("eigenvalues"));
    if (j.contains("snr") && !j.at("snr").is_null()) t.snr = j.at("snr").get<double>();
    require(t.eigenvalues.size() > 0, ErrorKind::EmptyInput, path.string() + " lists no eigenvalues");
    return t;
  } catch (const json::exception& e) {
    fail(ErrorKind::IoFailure, path.string() + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_modes(const ComplexMatrix& modes, const fs::path& dir) {
  write_sms(modes.real(), dir / "modes_re.sms");
  write_sms(modes.imag(), dir / "modes_im.sms");
}

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return s;
}

json stats_json(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  const Stats s = stats_of(v);
  return {{"mean", s.mean}, {"std", s.std}};
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  Index rows = 0;
  Index snapshots = 0;
  std::string modes;
  std::uint64_t seed = 0;
  std::optional<double> snr;
  std::string out;
  std::optional<std::string> truth;
};

int run_synth(const SynthOptions& o, std::ostream& out) {
  require(o.snapshots >= 2, ErrorKind::TooFewSnapshots, "--snapshots must be >= 2");
  const std::vector<ModeSpec> specs = parse_mode_spec(o.modes);
  const SyntheticTruth truth = synth_linear_dynamics(o.rows, o.snapshots - 1, specs, o.seed);
  const Matrix data =
      o.snr ? add_noise(truth.clean_data, *o.snr, derive_seed(o.seed, kNoiseSeedStream)) : truth.clean_data;
  write_sms(data, o.out);

  if (o.truth) {
    json j;
    j["rows"] = o.rows;
    j["snapshots"] = o.snapshots;
    j["modes"] = o.modes;
    j["seed"] = o.seed;
    j["snr"] = optional_number(o.snr);
    j["eigenvalues"] = complex_list(truth.eigenvalues);
    j["amplitudes"] = complex_list(truth.amplitudes);
    write_file_atomic(*o.truth, dump(j));
  }
  out << "wrote " << o.out << " (" << data.rows() << "x" << data.cols() << ", " << truth.eigenvalues.size()
      << " modes)\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct DecomposeOptions {
  std::string input;
  std::string method;
  Index rank = 0;
  Index oversample = 10;
  Index power_iters = 2;
  Index blocks = 1;
  std::optional<Index> compress_dim;
  std::string sampling = "gaussian";
  std::string recovery = "exact";
  std::uint64_t seed = 0;
  std::string out = ".";
  std::optional<std::string> truth;
  std::size_t memory_cap = 0;
};

DmdConfig make_config(const DecomposeOptions& o, std::uint64_t seed) {
  DmdConfig cfg;
  cfg.target_rank = o.rank;
  cfg.sketch = SketchConfig{o.rank, o.oversample, o.power_iters, seed};
  cfg.compression_seed = seed;
  cfg.compression_dim = o.compress_dim.value_or(o.rank + o.oversample);
  cfg.sampling = o.sampling == "uniform" ? SamplingKind::UniformRows : SamplingKind::Gaussian;
  cfg.randomized_lift = o.recovery == "projected" ? ModeLift::Projected : ModeLift::Exact;
  if (o.method == "dmd")
    cfg.method = o.recovery == "projected" ? DmdMethod::DeterministicProjected : DmdMethod::DeterministicExact;
  else if (o.method == "rdmd")
    cfg.method = DmdMethod::Randomized;
  else
    cfg.method = DmdMethod::Compressed;
  return cfg;
}

json config_echo(const DecomposeOptions& o, const DmdConfig& cfg, const std::optional<double>& snr) {
  json c;
  c["method"] = o.method;
  c["k"] = o.rank;
  c["p"] = o.oversample;
  c["q"] = o.power_iters;
  c["l"] = cfg.method == DmdMethod::Compressed ? cfg.compression_dim : o.rank + o.oversample;
  c["b"] = o.blocks;
  c["seed"] = o.seed;
  c["snr"] = optional_number(snr);
  c["compress_dim"] = cfg.compression_dim;
  c["sampling"] = o.sampling;
  c["recovery"] = o.recovery;
  return c;
}

double streamed_reconstruction_error(RowBlockSource& source, const DmdResult& r) {
  double err2 = 0.0;
  double norm2 = 0.0;
  for (Index i = 0; i < source.block_count(); ++i) {
    const RowRange range = source.ranges()[i];
    const Matrix rows = source.read_block(i);
    const Matrix approx =
        reconstruct(r.modes.middleRows(range.start, range.count), r.eigenvalues, *r.amplitudes, rows.cols());
    err2 += (rows - approx).squaredNorm();
    norm2 += rows.squaredNorm();
  }
  require(norm2 > 0.0, ErrorKind::DegenerateData, "data matrix is identically zero");
  return std::sqrt(err2 / norm2);
}

int run_decompose(const DecomposeOptions& o, std::ostream& out) {
  if (o.blocks > 1 && o.method != "rdmd") throw UsageError("--blocks > 1 requires --method rdmd");
  if (o.memory_cap > 0) {
    memory::clear_refusals();
    memory::set_allocation_cap(o.memory_cap);
  }

  const auto total_start = Clock::now();
  std::optional<Truth> truth;
  if (o.truth) truth = load_truth(*o.truth);
  const DmdConfig cfg = make_config(o, o.seed);

  const SmsHeader header = read_sms_header(o.input);
  const auto n = static_cast<Index>(header.rows);
  const auto m = static_cast<Index>(header.cols);

  DmdResult result;
  double recon_error = 0.0;
  json timings;
  double peak_estimate = 0.0;
  const double l = static_cast<double>(o.rank + o.oversample);

  if (o.blocks > 1) {
    auto source = open_row_blocks(o.input, o.blocks);
    result = dmd_randomized_blocked(*source, cfg);
    const auto t = Clock::now();
    recon_error = streamed_reconstruction_error(*source, result);
    timings["reconstruction_error"] = seconds_since(t);

    double max_block = 0.0;
    for (const RowRange& r : source->ranges()) max_block = std::max(max_block, static_cast<double>(r.count));
    peak_estimate = 8.0 * (max_block * m + o.blocks * l * m + n * l) + 16.0 * n * o.rank;
  } else {
    auto t = Clock::now();
    const Matrix x = read_sms(o.input);
    timings["read"] = seconds_since(t);
    result = run_dmd(x, cfg);
    t = Clock::now();
    recon_error = relative_reconstruction_error(result, x);
    timings["reconstruction_error"] = seconds_since(t);
    peak_estimate = 8.0 * 3.0 * n * m + 16.0 * n * o.rank + (cfg.method == DmdMethod::Randomized ? 8.0 * n * l : 0.0);
  }
  for (const auto& [stage, secs] : result.diagnostics.timings) timings[stage] = secs;

  const fs::path dir(o.out);
  fs::create_directories(dir);
  auto t = Clock::now();
  write_complex_csv(result.eigenvalues, dir / "eigenvalues.csv");
  write_complex_csv(*result.amplitudes, dir / "amplitudes.csv");
  write_modes(result.modes, dir);
  timings["write"] = seconds_since(t);
  timings["total"] = seconds_since(total_start);

  json report;
  report["method"] = std::string(method_name(result.method));
  report["config"] = config_echo(o, cfg, truth ? truth->snr : std::nullopt);
  report["input"] = {{"path", o.input}, {"rows", n}, {"cols", m}};
  report["relative_reconstruction_error"] = recon_error;
  report["eigenvalues"] = complex_list(result.eigenvalues);
  report["eigen_match_error"] =
      truth ? json(eigen_match_error(truth->eigenvalues, result.eigenvalues)) : json(nullptr);
  report["diagnostics"] = {{"eigen_residual", result.diagnostics.eigen_residual},
                           {"mode_residual", optional_number(result.diagnostics.mode_residual)}};
  report["peak_memory_estimate_bytes"] = peak_estimate;
  report["timings"] = timings;
  write_file_atomic(dir / "report.json", dump(report));

  out << method_name(result.method) << ": " << result.eigenvalues.size()
      << " eigenvalues, relative reconstruction error " << recon_error << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchOptions {
  std::string input;
  Index rank = 0;
  Index seeds = 20;
  Index oversample = 10;
  Index power_iters = 2;
  std::optional<Index> compress_dim;
  std::string sampling = "uniform";
  std::uint64_t seed = 0;
  std::string out = ".";
  std::optional<std::string> truth;
};

int run_bench(const BenchOptions& o, std::ostream& out) {
  std::optional<Truth> truth;
  if (o.truth) truth = load_truth(*o.truth);
  const Matrix x = read_sms(o.input);

  struct Series {
    std::string name;
    std::vector<double> eig_err, recon_err, time_s;
  };
  std::vector<Series> series{{"dmd", {}, {}, {}}, {"rdmd", {}, {}, {}}, {"cdmd", {}, {}, {}}};
  std::ostringstream csv;
  csv << std::setprecision(17) << "method,seed,eigen_match_error,reconstruction_error,time_s\n";

  for (Index s = 0; s < o.seeds; ++s) {
    const std::uint64_t seed = derive_seed(o.seed, static_cast<std::uint64_t>(s));
    for (Series& ser : series) {
      DecomposeOptions d;
      d.method = ser.name;
      d.rank = o.rank;
      d.oversample = o.oversample;
      d.power_iters = o.power_iters;
      d.compress_dim = o.compress_dim;
      d.sampling = o.sampling;
      const DmdConfig cfg = make_config(d, seed);

      const auto t = Clock::now();
      const DmdResult r = run_dmd(x, cfg);
      const double secs = seconds_since(t);
      const double recon = relative_reconstruction_error(r, x);
      ser.recon_err.push_back(recon);
      ser.time_s.push_back(secs);
      csv << ser.name << "," << seed << ",";
      if (truth) {
        const double e = eigen_match_error(truth->eigenvalues, r.eigenvalues);
        ser.eig_err.push_back(e);
        csv << e;
      }
      csv << "," << recon << "," << secs << "\n";
    }
  }

  json report;
  report["config"] = {{"input", o.input},
                      {"k", o.rank},
                      {"p", o.oversample},
                      {"q", o.power_iters},
                      {"compress_dim", o.compress_dim.value_or(o.rank + o.oversample)},
                      {"sampling", o.sampling},
                      {"seeds", o.seeds},
                      {"seed", o.seed},
                      {"snr", optional_number(truth ? truth->snr : std::nullopt)}};
  json methods;
  for (const Series& ser : series) {
    methods[ser.name] = {{"eigen_match_error", stats_json(ser.eig_err)},
                         {"reconstruction_error", stats_json(ser.recon_err)},
                         {"time_s", stats_json(ser.time_s)}};
  }
  report["methods"] = methods;

  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_file_atomic(dir / "bench.json", dump(report));
  write_file_atomic(dir / "bench.csv", csv.str());
  out << dump(methods);
  return 0;
}

// ---------------------------------------------------------------------------

struct QbOptions {
  std::string input;
  Index rank = 0;
  Index oversample = 10;
  Index power_iters = 2;
  Index blocks = 1;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::size_t memory_cap = 0;
};

int run_qb(const QbOptions& o, std::ostream& out) {
  if (o.memory_cap > 0) {
    memory::clear_refusals();
    memory::set_allocation_cap(o.memory_cap);
  }
  const SketchConfig cfg{o.rank, o.oversample, o.power_iters, o.seed};
  const SmsHeader header = read_sms_header(o.input);
  const auto n = static_cast<Index>(header.rows);
  const auto m = static_cast<Index>(header.cols);

  double err = 0.0;
  double norm = 0.0;
  std::optional<double> sigma_next;
  const auto t = Clock::now();
  if (o.blocks > 1) {
    auto source = open_row_blocks(o.input, o.blocks);
    const BlockedQB qb = blocked_randomized_qb(*source, cfg);
    double err2 = 0.0;
    double norm2 = 0.0;
    for (Index i = 0; i < source->block_count(); ++i) {
      const Matrix rows = source->read_block(i);
      err2 += (rows - apply_q_block(qb, i, qb.b)).squaredNorm();
      norm2 += rows.squaredNorm();
    }
    err = std::sqrt(err2);
    norm = std::sqrt(norm2);
  } else {
    const Matrix x = read_sms(o.input);
    const QBFactorization qb = randomized_qb(x, cfg);
    err = (x - qb.q * qb.b).norm();
    norm = x.norm();
    const Vector sv = economic_svd(x).singular_values;
    sigma_next = o.rank < sv.size() ? sv(o.rank) : 0.0;
  }
  const double secs = seconds_since(t);

  std::optional<double> bound;
  if (sigma_next && o.oversample >= 2)
    bound = expected_error_bound(o.rank, o.oversample, o.power_iters, m, n, *sigma_next);

  json report;
  report["config"] = {{"input", o.input}, {"k", o.rank}, {"p", o.oversample}, {"q", o.power_iters},
                      {"l", o.rank + o.oversample}, {"b", o.blocks}, {"seed", o.seed}};
  report["frobenius_norm"] = norm;
  report["absolute_error"] = err;
  report["relative_error"] = norm > 0.0 ? err / norm : 0.0;
  report["sigma_next"] = optional_number(sigma_next);
  report["expected_error_bound"] = optional_number(bound);
  report["expected_error_bound_relative"] =
      bound && norm > 0.0 ? json(*bound / norm) : json(nullptr);
  report["timings"] = {{"qb", secs}};

  if (o.out) {
    const fs::path dir(*o.out);
    fs::create_directories(dir);
    write_file_atomic(dir / "qb_report.json", dump(report));
  }
  out << dump(report);
  return 0;
}

// ---------------------------------------------------------------------------

struct ReconstructOptions {
  std::string modes;
  Index steps = 0;
  std::string out;
};

int run_reconstruct(const ReconstructOptions& o, std::ostream& out) {
  const fs::path dir(o.modes);
  const Matrix re = read_sms(dir / "modes_re.sms");
  const Matrix im = read_sms(dir / "modes_im.sms");
  require(re.rows() == im.rows() && re.cols() == im.cols(), ErrorKind::ShapeMismatch,
          "modes_re.sms and modes_im.sms differ in shape");
  const ComplexVector eigenvalues = read_complex_csv(dir / "eigenvalues.csv");
  require(fs::exists(dir / "amplitudes.csv"), ErrorKind::MissingAmplitudes, (dir / "amplitudes.csv").string());
  const ComplexVector amps = read_complex_csv(dir / "amplitudes.csv");

  ComplexMatrix modes(re.rows(), re.cols());
  modes.real() = re;
  modes.imag() = im;
  const Matrix y = reconstruct(modes, eigenvalues, amps, o.steps);
  write_sms(y, o.out);
  out << "wrote " << o.out << " (" << y.rows() << "x" << y.cols() << ")\n";
  return 0;
}

}  // namespace

std::vector<ModeSpec> parse_mode_spec(std::string_view text) {
  std::vector<ModeSpec> specs;
  std::string item;
  std::stringstream stream{std::string(text)};
  while (std::getline(stream, item, ',')) {
    require(!item.empty(), ErrorKind::InvalidArgument, "empty item in mode list '" + std::string(text) + "'");
    double mag = 0.0;
    double angle = 0.0;
    double amp = 1.0;
    try {
      std::size_t pos = 0;
      mag = std::stod(item, &pos);
      std::string rest = item.substr(pos);
      if (!rest.empty() && rest.front() == '@') {
        rest.erase(0, 1);
        angle = std::stod(rest, &pos);
        rest = rest.substr(pos);
      }
      if (!rest.empty() && rest.front() == '/') {
        rest.erase(0, 1);
        amp = std::stod(rest, &pos);
        rest = rest.substr(pos);
      }
      require(rest.empty(), ErrorKind::InvalidArgument, "trailing characters in mode '" + item + "'");
    } catch (const std::logic_error&) {
      fail(ErrorKind::InvalidArgument, "cannot parse mode '" + item + "'");
    }
    ModeSpec spec;
    spec.eigenvalue = angle == 0.0 ? Complex(mag, 0.0) : std::polar(mag, angle);
    spec.amplitude = Complex(amp, 0.0);
    specs.push_back(spec);
  }
  require(!specs.empty(), ErrorKind::EmptyInput, "mode list is empty");
  return specs;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized dynamic mode decomposition toolkit", "rdmd"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic snapshots with a known spectrum");
  synth_cmd->add_option("--rows", synth.rows, "State dimension n")->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--snapshots", synth.snapshots, "Number of snapshot columns")->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--modes", synth.modes, "Comma-separated MAG[@ANGLE][/AMP] items")->required();
  synth_cmd->add_option("--seed", synth.seed, "Seed")->envname("RDMD_SEED");
  synth_cmd->add_option("--snr", synth.snr, "Signal-to-noise variance ratio (omit for clean data)")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out", synth.out, "Output SMS file")->required();
  synth_cmd->add_option("--truth", synth.truth, "Ground-truth JSON output");

  DecomposeOptions dec;
  auto* dec_cmd = app.add_subcommand("decompose", "Run one DMD method on an SMS file");
  dec_cmd->add_option("--input", dec.input, "Input SMS file")->required();
  dec_cmd->add_option("--method", dec.method, "dmd | rdmd | cdmd")->required()->check(CLI::IsMember({"dmd", "rdmd", "cdmd"}));
  dec_cmd->add_option("--rank", dec.rank, "Target rank k")->required()->check(CLI::PositiveNumber);
  dec_cmd->add_option("--oversample", dec.oversample, "Oversampling p")->capture_default_str()->check(CLI::NonNegativeNumber);
  dec_cmd->add_option("--power-iters", dec.power_iters, "Power iterations q")->capture_default_str()->check(CLI::NonNegativeNumber);
  dec_cmd->add_option("--blocks", dec.blocks, "Row blocks for out-of-core rdmd")->capture_default_str()->check(CLI::PositiveNumber);
  dec_cmd->add_option("--compress-dim", dec.compress_dim, "Sketch dimension l for cdmd (default k + p)")->check(CLI::PositiveNumber);
  dec_cmd->add_option("--sampling", dec.sampling, "cdmd sketch: uniform | gaussian")
      ->capture_default_str()
      ->check(CLI::IsMember({"uniform", "gaussian"}));
  dec_cmd->add_option("--recovery", dec.recovery, "Mode lift: exact | projected")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact", "projected"}));
  dec_cmd->add_option("--seed", dec.seed, "Seed")->envname("RDMD_SEED");
  dec_cmd->add_option("--out", dec.out, "Output directory")->capture_default_str();
  dec_cmd->add_option("--truth", dec.truth, "Ground-truth JSON from synth");
  dec_cmd->add_option("--memory-cap", dec.memory_cap, "Fail if any single allocation exceeds BYTES");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Compare dmd, rdmd and cdmd over many seeds");
  bench_cmd->add_option("--input", bench.input, "Input SMS file")->required();
  bench_cmd->add_option("--rank", bench.rank, "Target rank k")->required()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seeds", bench.seeds, "Number of seeds")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--oversample", bench.oversample, "Oversampling p")->capture_default_str()->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--power-iters", bench.power_iters, "Power iterations q")->capture_default_str()->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--compress-dim", bench.compress_dim, "cdmd sketch dimension (default k + p)")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--sampling", bench.sampling, "cdmd sketch: uniform | gaussian")
      ->capture_default_str()
      ->check(CLI::IsMember({"uniform", "gaussian"}));
  bench_cmd->add_option("--seed", bench.seed, "Base seed")->envname("RDMD_SEED");
  bench_cmd->add_option("--out", bench.out, "Output directory")->capture_default_str();
  bench_cmd->add_option("--truth", bench.truth, "Ground-truth JSON from synth");

  QbOptions qb;
  auto* qb_cmd = app.add_subcommand("qb", "Randomized QB only, with the expected error bound");
  qb_cmd->add_option("--input", qb.input, "Input SMS file")->required();
  qb_cmd->add_option("--rank", qb.rank, "Target rank k")->required()->check(CLI::PositiveNumber);
  qb_cmd->add_option("--oversample", qb.oversample, "Oversampling p")->capture_default_str()->check(CLI::NonNegativeNumber);
  qb_cmd->add_option("--power-iters", qb.power_iters, "Power iterations q")->capture_default_str()->check(CLI::NonNegativeNumber);
  qb_cmd->add_option("--blocks", qb.blocks, "Row blocks")->capture_default_str()->check(CLI::PositiveNumber);
  qb_cmd->add_option("--seed", qb.seed, "Seed")->envname("RDMD_SEED");
  qb_cmd->add_option("--out", qb.out, "Output directory for qb_report.json");
  qb_cmd->add_option("--memory-cap", qb.memory_cap, "Fail if any single allocation exceeds BYTES");

  ReconstructOptions rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Rebuild snapshots from a decompose output directory");
  rec_cmd->add_option("--modes", rec.modes, "Directory written by decompose")->required();
  rec_cmd->add_option("--steps", rec.steps, "Number of snapshots")->required()->check(CLI::PositiveNumber);
  rec_cmd->add_option("--out", rec.out, "Output SMS file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  }

  // The cap is process-wide; never let it outlive this invocation.
  struct CapGuard {
    ~CapGuard() { memory::set_allocation_cap(0); }
  } cap_guard;

  try {
    if (*synth_cmd) return run_synth(synth, out);
    if (*dec_cmd) return run_decompose(dec, out);
    if (*bench_cmd) return run_bench(bench, out);
    if (*qb_cmd) return run_qb(qb, out);
    if (*rec_cmd) return run_reconstruct(rec, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::bad_alloc&) {
    const bool capped = memory::cap_exceeded();
    const std::size_t refused = memory::largest_refused();
    const std::size_t cap = memory::allocation_cap();
    memory::set_allocation_cap(0);
    if (capped)
      err << "error: " << error_name(ErrorKind::MemoryCapExceeded) << ": allocation of " << refused
          << " bytes exceeds the cap of " << cap << " bytes\n";
    else
      err << "error: out of memory\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rdmd::cli
