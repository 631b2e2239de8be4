#include "znekit/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "format.hpp"
#include "znekit/errors.hpp"
#include "znekit/generate.hpp"
#include "znekit/inference.hpp"
#include "znekit/io.hpp"
#include "znekit/rng.hpp"
#include "znekit/scaling.hpp"
#include "znekit/sim.hpp"
#include "znekit/zne.hpp"

namespace znekit::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitFitError = 3;

// Seed-stream tags keep folding, sampling, and circuit generation decoupled.
constexpr std::uint64_t kStreamSampling = 1;
constexpr std::uint64_t kStreamCircuits = 2;
constexpr std::uint64_t kStreamZne = 3;

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string factory = "richardson";
  std::string scale_factors = "1,2,3";
  std::string folding = "random";
  int num_to_average = 1;
  std::string shots = "exact";
  std::string output;
};

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    fields.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::vector<double> parse_scale_list(const std::string& text) {
  std::vector<double> scales;
  for (const std::string& field : split(text, ',')) {
    scales.push_back(parse_double_strict(field, "scale factor"));
  }
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] >= 1.0)) {
      throw ValidationError("scale factors must be >= 1, got " + format_double(scales[i]));
    }
    if (i > 0 && !(scales[i] > scales[i - 1])) {
      throw ValidationError("scale factors must be strictly ascending");
    }
  }
  return scales;
}

ExecutionMode parse_execution_mode(const std::string& text, std::uint64_t sampling_seed) {
  if (text == "exact") return ExecutionMode::exact_mode();
  const double shots = parse_double_strict(text, "shots");
  const int n = static_cast<int>(shots);
  if (static_cast<double>(n) != shots || n < 1) {
    throw ParseError("shots must be 'exact' or a positive integer, got '" + text + "'");
  }
  return ExecutionMode::sampled(n, sampling_seed);
}

ZneConfig build_zne_config(const CommonOptions& common) {
  ZneConfig config;
  config.factory = FactorySpec::parse(common.factory, parse_scale_list(common.scale_factors));
  config.scale_noise = parse_scale_noise(common.folding);
  if (common.num_to_average < 1) throw ValidationError("num-to-average must be >= 1");
  config.num_to_average = common.num_to_average;
  config.seed = common.seed;
  return config;
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << content)) {
    throw ValidationError("cannot write output file: " + path);
  }
}

json diagnostics_json(const FitDiagnostics& d) {
  return {{"model", d.model},
          {"params", d.params},
          {"residual_norm", d.residual_norm},
          {"reduced_chi_square", d.reduced_chi_square},
          {"zne_std_error", d.zne_std_error},
          {"extrapolation_only", d.extrapolation_only}};
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) row += ',';
    row += fields[i];
  }
  row += '\n';
  return row;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string circuit_path;
  std::string observable_path;
  std::string noise = "none";
  CommonOptions common;
};

int cmd_run(const RunOptions& opt, std::ostream& out) {
  const Circuit circuit = load_circuit(opt.circuit_path);
  const Observable obs = load_observable(opt.observable_path);
  const NoiseModel noise = NoiseModel::parse(opt.noise);
  const ZneConfig config = build_zne_config(opt.common);
  const ExecutionMode mode =
      parse_execution_mode(opt.common.shots, mix_seed(opt.common.seed, {kStreamSampling}));
  const Executor executor = make_executor(noise, obs, mode);

  const ZneResult result = execute_with_zne(circuit, executor, config);
  const json report = {{"scale_factors", result.scale_factors},
                       {"raw_values", result.raw_values},
                       {"means", result.means},
                       {"zne_value", result.zne_value},
                       {"diagnostics", diagnostics_json(result.diagnostics)}};
  write_output(opt.common.output, report.dump(2) + "\n", out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
  std::string data_path;
  std::string factory = "richardson";
  std::string output;
};

int cmd_fit(const FitOptions& opt, std::ostream& out) {
  std::ifstream in(opt.data_path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + opt.data_path);
  std::string line;
  if (!std::getline(in, line) || line != "scale,value") {
    throw ParseError(opt.data_path + ": expected header 'scale,value'");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 2) {
      throw ParseError(opt.data_path + ": expected two fields per row, got '" + line + "'");
    }
    xs.push_back(parse_double_strict(fields[0], "scale"));
    ys.push_back(parse_double_strict(fields[1], "value"));
  }

  // The factory's own schedule is irrelevant when reducing recorded data.
  const FactorySpec spec = FactorySpec::parse(opt.factory, {1.0, 2.0, 3.0});
  const ReduceResult result = reduce_history(spec, xs, ys);
  const json report = {{"zne_value", result.zne_value},
                       {"diagnostics", diagnostics_json(result.diagnostics)}};
  write_output(opt.output, report.dump(2) + "\n", out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench-rb

struct RbOptions {
  int qubits = 2;
  int depth = 20;
  int trials = 50;
  std::string noise = "depolarizing:0.01";
  std::vector<std::string> factories;  // default set applied below
  CommonOptions common;
};

int cmd_bench_rb(const RbOptions& opt, std::ostream& out) {
  if (opt.qubits < 1 || opt.qubits > kUnitaryQubitGuard) {
    throw ValidationError("bench-rb supports 1..10 qubits");
  }
  if (opt.depth < 2 || opt.depth % 2 != 0) {
    throw ValidationError("bench-rb depth must be even and >= 2");
  }
  if (opt.trials < 1) throw ValidationError("bench-rb needs at least one trial");

  const NoiseModel noise = NoiseModel::parse(opt.noise);
  std::vector<std::string> factory_names = opt.factories;
  if (factory_names.empty()) factory_names = {"exp:0.25", "richardson", "linear"};
  const std::vector<double> scales = parse_scale_list(opt.common.scale_factors);
  std::vector<FactorySpec> factories;
  for (const std::string& name : factory_names) {
    factories.push_back(FactorySpec::parse(name, scales));
  }
  const Observable survival = all_zeros_projector(opt.qubits);

  std::string csv = csv_row({"record", "factory", "trial", "unmitigated", "mitigated",
                             "unmit_abs_err", "mit_abs_err", "fit_stderr", "identity_ok"});
  std::vector<double> unmit(static_cast<std::size_t>(opt.trials));
  std::vector<std::vector<double>> mitigated(factories.size());
  std::vector<std::vector<double>> fit_errs(factories.size());
  bool all_identity = true;

  for (int trial = 0; trial < opt.trials; ++trial) {
    const std::uint64_t trial_u = static_cast<std::uint64_t>(trial);
    const Circuit circuit =
        mirror_circuit(opt.qubits, opt.depth, mix_seed(opt.common.seed, {kStreamCircuits, trial_u}));
    const double identity_dev =
        (circuit_unitary(circuit) -
         Eigen::MatrixXcd::Identity(Eigen::Index{1} << opt.qubits, Eigen::Index{1} << opt.qubits))
            .cwiseAbs()
            .maxCoeff();
    const bool identity_ok = identity_dev < 1e-9;
    all_identity = all_identity && identity_ok;

    const ExecutionMode mode = parse_execution_mode(
        opt.common.shots, mix_seed(opt.common.seed, {kStreamSampling, trial_u}));
    const Executor executor = make_executor(noise, survival, mode);
    unmit[static_cast<std::size_t>(trial)] = executor(circuit);

    for (std::size_t fi = 0; fi < factories.size(); ++fi) {
      ZneConfig config;
      config.factory = factories[fi];
      config.scale_noise = parse_scale_noise(opt.common.folding);
      config.num_to_average = opt.common.num_to_average;
      config.seed = mix_seed(opt.common.seed, {kStreamZne, trial_u});
      const ZneResult result = execute_with_zne(circuit, executor, config);
      mitigated[fi].push_back(result.zne_value);
      fit_errs[fi].push_back(result.diagnostics.zne_std_error);
      csv += csv_row({"trial", factory_names[fi], std::to_string(trial),
                      format_double(unmit[static_cast<std::size_t>(trial)]),
                      format_double(result.zne_value),
                      format_double(std::abs(unmit[static_cast<std::size_t>(trial)] - 1.0)),
                      format_double(std::abs(result.zne_value - 1.0)),
                      format_double(result.diagnostics.zne_std_error),
                      identity_ok ? "1" : "0"});
    }
  }

  for (std::size_t fi = 0; fi < factories.size(); ++fi) {
    std::vector<double> unmit_err(unmit.size());
    std::vector<double> mit_err(mitigated[fi].size());
    for (std::size_t t = 0; t < unmit.size(); ++t) unmit_err[t] = std::abs(unmit[t] - 1.0);
    for (std::size_t t = 0; t < mitigated[fi].size(); ++t) {
      mit_err[t] = std::abs(mitigated[fi][t] - 1.0);
    }
    csv += csv_row({"mean", factory_names[fi], std::to_string(opt.trials),
                    format_double(mean_of(unmit)), format_double(mean_of(mitigated[fi])),
                    format_double(mean_of(unmit_err)), format_double(mean_of(mit_err)),
                    format_double(mean_of(fit_errs[fi])), all_identity ? "1" : "0"});
    csv += csv_row({"std", factory_names[fi], std::to_string(opt.trials),
                    format_double(sample_std(unmit)), format_double(sample_std(mitigated[fi])),
                    format_double(sample_std(unmit_err)), format_double(sample_std(mit_err)),
                    format_double(sample_std(fit_errs[fi])), ""});
  }

  write_output(opt.common.output, csv, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench-h2

struct H2Options {
  std::string coefficients_path;
  std::vector<std::string> noises;  // default applied below
  int theta_points = 41;
  CommonOptions common;
};

struct H2Row {
  double separation = 0.0;
  std::array<double, 6> g{};
};

std::vector<H2Row> load_h2_coefficients(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CoefficientFileError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "r,g0,g1,g2,g3,g4,g5") {
    throw CoefficientFileError(path + ": expected header 'r,g0,g1,g2,g3,g4,g5'");
  }
  std::vector<H2Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 7) {
      throw CoefficientFileError(path + ": expected 7 fields per row, got '" + line + "'");
    }
    H2Row row;
    try {
      row.separation = parse_double_strict(fields[0], "separation");
      for (int i = 0; i < 6; ++i) {
        row.g[static_cast<std::size_t>(i)] =
            parse_double_strict(fields[static_cast<std::size_t>(i) + 1], "coefficient");
      }
    } catch (const ParseError& e) {
      throw CoefficientFileError(path + ": " + e.what());
    }
    if (!rows.empty() && !(row.separation > rows.back().separation)) {
      throw CoefficientFileError(path + ": separations must be strictly increasing");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw CoefficientFileError(path + ": no coefficient rows");
  return rows;
}

Observable h2_observable(const std::array<double, 6>& g) {
  Observable obs;
  obs.terms = {{g[0], "II"}, {g[1], "ZI"}, {g[2], "IZ"},
               {g[3], "ZZ"}, {g[4], "XX"}, {g[5], "YY"}};
  return obs;
}

/// |01> reference state, then exp(-i theta X0 Y1) decomposed over the gate
/// set: basis rotations around a CNOT-conjugated RZ(2 theta).
Circuit h2_ansatz(double theta) {
  Circuit circuit;
  circuit.num_qubits = 2;
  circuit.gates = {Gate::x(1),       Gate::h(0),          Gate::sdg(1),
                   Gate::h(1),       Gate::cnot(0, 1),    Gate::rz(1, 2.0 * theta),
                   Gate::cnot(0, 1), Gate::h(0),          Gate::h(1),
                   Gate::s(1)};
  return circuit;
}

int cmd_bench_h2(const H2Options& opt, std::ostream& out) {
  const std::vector<H2Row> rows = load_h2_coefficients(opt.coefficients_path);
  if (opt.theta_points < 1) throw ValidationError("theta-points must be >= 1");
  std::vector<std::string> noise_names = opt.noises;
  if (noise_names.empty()) noise_names = {"depolarizing:0.005", "depolarizing:0.02"};
  std::vector<NoiseModel> noises;
  for (const std::string& name : noise_names) noises.push_back(NoiseModel::parse(name));

  std::vector<double> thetas;
  if (opt.theta_points == 1) {
    thetas.push_back(0.0);
  } else {
    for (int i = 0; i < opt.theta_points; ++i) {
      thetas.push_back(-std::numbers::pi / 2.0 +
                       std::numbers::pi * i / (opt.theta_points - 1.0));
    }
  }

  // Reference column: exact noiseless energies.
  std::vector<double> reference(rows.size());
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    const Observable obs = h2_observable(rows[ri].g);
    const Executor exact = make_executor(NoiseModel::none(), obs, ExecutionMode::exact_mode());
    double best = std::numeric_limits<double>::infinity();
    for (double theta : thetas) best = std::min(best, exact(h2_ansatz(theta)));
    reference[ri] = best;
  }

  std::string csv = csv_row({"record", "noise", "r", "energy_ref", "energy_unmitigated",
                             "energy_mitigated", "rel_l2_unmitigated", "rel_l2_mitigated"});
  double ref_norm = 0.0;
  for (double e : reference) ref_norm += e * e;
  ref_norm = std::sqrt(ref_norm);

  for (std::size_t ni = 0; ni < noises.size(); ++ni) {
    double unmit_ss = 0.0;
    double mit_ss = 0.0;
    std::string surface_rows;
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
      const Observable obs = h2_observable(rows[ri].g);
      const ExecutionMode mode = parse_execution_mode(
          opt.common.shots, mix_seed(opt.common.seed, {kStreamSampling, ni, ri}));
      const Executor executor = make_executor(noises[ni], obs, mode);

      double best_unmit = std::numeric_limits<double>::infinity();
      double best_mit = std::numeric_limits<double>::infinity();
      for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
        const Circuit circuit = h2_ansatz(thetas[ti]);
        best_unmit = std::min(best_unmit, executor(circuit));
        ZneConfig config = build_zne_config(opt.common);
        config.seed = mix_seed(opt.common.seed, {kStreamZne, ni, ri, ti});
        best_mit = std::min(best_mit, execute_with_zne(circuit, executor, config).zne_value);
      }
      unmit_ss += (best_unmit - reference[ri]) * (best_unmit - reference[ri]);
      mit_ss += (best_mit - reference[ri]) * (best_mit - reference[ri]);
      surface_rows += csv_row({"surface", noise_names[ni], format_double(rows[ri].separation),
                               format_double(reference[ri]), format_double(best_unmit),
                               format_double(best_mit), "", ""});
    }
    csv += surface_rows;
    csv += csv_row({"l2", noise_names[ni], "", "", "", "",
                    format_double(std::sqrt(unmit_ss) / ref_norm),
                    format_double(std::sqrt(mit_ss) / ref_norm)});
  }

  write_output(opt.common.output, csv, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

void add_common_options(CLI::App* cmd, CommonOptions& common, bool with_factory = true) {
  cmd->add_option("--seed", common.seed, "Base seed for all derived random streams");
  if (with_factory) {
    cmd->add_option("--factory", common.factory,
                    "Inference technique: linear | richardson | poly:<d> | exp[:asymptote] | "
                    "polyexp:<d> | adaexp:<scale>,<steps>");
  }
  cmd->add_option("--scale-factors", common.scale_factors,
                  "Comma-separated noise scale factors (ascending, >= 1)");
  cmd->add_option("--folding", common.folding, "Noise scaling: left | right | random | global");
  cmd->add_option("--num-to-average", common.num_to_average,
                  "Executor evaluations averaged per scale factor");
  cmd->add_option("--shots", common.shots, "'exact' or a positive shot count");
  cmd->add_option("--output", common.output, "Output path (stdout when omitted)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-noise extrapolation toolkit: unitary folding, a noisy "
               "density-matrix reference executor, and extrapolation factories."};
  app.name("znekit");
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Mitigate an observable for a circuit file");
  run->add_option("--circuit", run_opt.circuit_path, "Circuit JSON path")->required();
  run->add_option("--observable", run_opt.observable_path, "Observable JSON path")->required();
  run->add_option("--noise", run_opt.noise, "none | depolarizing:<p> | amplitude-damping:<p>");
  add_common_options(run, run_opt.common);

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand("fit", "Extrapolate recorded scale,value data");
  fit->add_option("--data", fit_opt.data_path, "CSV path with header 'scale,value'")->required();
  fit->add_option("--factory", fit_opt.factory, "Inference technique");
  fit->add_option("--output", fit_opt.output, "Output path (stdout when omitted)");

  RbOptions rb_opt;
  CLI::App* rb = app.add_subcommand(
      "bench-rb", "Mirror-circuit randomized benchmarking with and without mitigation");
  rb->add_option("--qubits", rb_opt.qubits, "Qubit count");
  rb->add_option("--depth", rb_opt.depth, "Total gate count (even; half prefix, half inverses)");
  rb->add_option("--trials", rb_opt.trials, "Number of random mirror circuits");
  rb->add_option("--noise", rb_opt.noise, "Noise model for the reference executor");
  rb->add_option("--factory", rb_opt.factories,
                 "Inference technique (repeatable; default exp:0.25, richardson, linear)");
  add_common_options(rb, rb_opt.common, /*with_factory=*/false);

  H2Options h2_opt;
  CLI::App* h2 = app.add_subcommand(
      "bench-h2", "Molecular-hydrogen energy surface with and without mitigation");
  h2->add_option("--coefficients", h2_opt.coefficients_path,
                 "CSV path with header 'r,g0,g1,g2,g3,g4,g5'")
      ->required();
  h2->add_option("--noise", h2_opt.noises,
                 "Noise model (repeatable; default depolarizing:0.005, depolarizing:0.02)");
  h2->add_option("--theta-points", h2_opt.theta_points,
                 "Ansatz angle grid size over [-pi/2, pi/2]");
  h2_opt.common.factory = "poly:2";
  h2_opt.common.num_to_average = 5;
  add_common_options(h2, h2_opt.common);

  std::vector<const char*> argv;
  argv.push_back("znekit");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (run->parsed()) return cmd_run(run_opt, out);
    if (fit->parsed()) return cmd_fit(fit_opt, out);
    if (rb->parsed()) return cmd_bench_rb(rb_opt, out);
    if (h2->parsed()) return cmd_bench_h2(h2_opt, out);
    err << "error: no subcommand given\n";
    return kExitInputError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const FitError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFitError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace znekit::cli
