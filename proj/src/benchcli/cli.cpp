#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "prism/benchcli.hpp"
#include "prism/error.hpp"
#include "prism/gemm.hpp"
#include "prism/linalg.hpp"
#include "prism/mtxb.hpp"
#include "prism/rng.hpp"
#include "prism/version.hpp"

namespace prism::benchcli {

namespace {

using nlohmann::json;

constexpr std::size_t kOracleLimit = 2048;

// Thrown for failures of the tool's own output files (exit 1).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenFlags {
  std::string kind;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
  double kappa = 1.0;
};

void add_gen_flags(CLI::App* cmd, GenFlags& g) {
  cmd->add_option("--kind", g.kind, "gaussian | wishart | prescribed | htmp");
  cmd->add_option("--rows", g.rows, "Rows (Wishart: rows of the Gaussian factor)");
  cmd->add_option("--cols", g.cols, "Columns");
  cmd->add_option("--seed", g.seed, "Generator seed");
  cmd->add_option("--values", g.values, "Singular values for prescribed, descending")
      ->delimiter(',');
  cmd->add_option("--kappa", g.kappa, "Heavy-tail parameter for htmp");
}

SpectrumSpec to_spec(const GenFlags& g) {
  SpectrumSpec s;
  s.kind = parse_ensemble(g.kind);
  s.rows = g.rows;
  s.cols = g.cols;
  s.seed = g.seed;
  s.values = g.values;
  s.kappa = g.kappa;
  return s;
}

json spec_json(const SpectrumSpec& s) {
  return {{"kind", ensemble_name(s.kind)}, {"rows", s.rows},     {"cols", s.cols},
          {"seed", s.seed},                {"values", s.values}, {"kappa", s.kappa}};
}

json versions_json() {
  return {{"prism", std::string(kLibraryVersion)},
          {"prng", std::string(CounterRng::kName)},
          {"prng_version", CounterRng::kVersion},
          {"mtxb", kMtxbVersion}};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

void save_matrix(const std::string& path, const Mat& a) {
  try {
    write_mtxb_file(path, a);
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
}

// ---- gen -------------------------------------------------------------------

int cmd_gen(const GenFlags& g, const std::string& out_path, std::ostream& out) {
  if (g.kind.empty()) throw ConfigError("gen: --kind is required");
  const Mat a = generate(to_spec(g));
  save_matrix(out_path, a);
  out << "rows " << a.rows() << "\ncols " << a.cols() << '\n';
  if (std::min(a.rows(), a.cols()) <= kOracleLimit) {
    const auto s = reference_svd(a.rows() >= a.cols() ? a : transpose(a)).s.values;
    out << "sigma_max " << s.front() << "\nsigma_min " << s.back() << '\n';
  } else {
    out << "sigma summary skipped (min(rows, cols) > " << kOracleLimit << ")\n";
  }
  return 0;
}

// ---- run -------------------------------------------------------------------

struct SolveFlags {
  std::string function = "polar";
  std::string strategies = "taylor,prism-exact";
  unsigned degree = 1;
  double tol = 1e-8;
  std::size_t max_iters = 100;
  std::vector<double> interval;
  bool unconstrained = false;
  bool no_normalize = false;
  std::size_t spec_iters = 0;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--function", f.function,
                  "sign | sqrt | invsqrt | polar | invproot[:p] | inverse-db | inverse-cheb");
  cmd->add_option("--strategies", f.strategies,
                  "Comma list: taylor, prism-exact, prism-sketched[:p[:seed]], "
                  "fixed:a1,a2[:cycle], fixed-triples:a,b,c;...[:cycle]");
  cmd->add_option("--degree", f.degree, "Surrogate degree d (1 or 2 have default intervals)");
  cmd->add_option("--tol", f.tol, "Stop when ||R||_F <= tol * sqrt(n)");
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap");
  cmd->add_option("--interval", f.interval, "Alpha search interval lo,hi")
      ->delimiter(',')
      ->expected(2);
  cmd->add_flag("--unconstrained", f.unconstrained, "Search alpha over a wide interval");
  cmd->add_flag("--no-normalize", f.no_normalize, "Skip the input scaling by 1/||A||_F");
  cmd->add_option("--spec-est-iters", f.spec_iters,
                  "Power iterations for the per-step ||R||_2 estimate (0 = off)");
}

IterationOptions to_options(const SolveFlags& f) {
  IterationOptions o;
  o.degree = f.degree;
  o.tol_fro = f.tol;
  o.max_iters = f.max_iters;
  if (!f.interval.empty()) o.interval = AlphaInterval(f.interval[0], f.interval[1]);
  o.unconstrained = f.unconstrained;
  o.normalize_input = !f.no_normalize;
  o.spectral_estimate_iters = f.spec_iters;
  return o;
}

json options_json(const IterationOptions& o) {
  json j = {{"degree", o.degree},
            {"tol_fro", o.tol_fro},
            {"max_iters", o.max_iters},
            {"normalize_input", o.normalize_input},
            {"unconstrained", o.unconstrained},
            {"spectral_estimate_iters", o.spectral_estimate_iters}};
  if (o.interval) j["interval"] = {o.interval->lower, o.interval->upper};
  return j;
}

int cmd_run(const GenFlags& g, const std::string& in_path, const SolveFlags& sf,
            std::size_t repeats, const std::string& csv_path, std::string json_path,
            const std::string& result_path, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.function = parse_function(sf.function);
  cfg.strategies = parse_strategy_list(sf.strategies);
  cfg.opts = to_options(sf);
  cfg.repeats = repeats;
  cfg.input_path = in_path;
  if (!g.kind.empty()) cfg.spec = to_spec(g);
  validate(cfg);

  const Mat input = cfg.spec ? generate(*cfg.spec) : read_matrix_file(cfg.input_path);
  Mat first;
  const auto runs = run_experiment(cfg, input, result_path.empty() ? nullptr : &first);

  if (csv_path.empty()) {
    write_csv(out, runs);
  } else {
    auto f = open_output(csv_path);
    write_csv(f, runs);
    if (!f) throw IoError("write to '" + csv_path + "' failed");
    if (json_path.empty()) json_path = csv_path + ".json";
  }

  bool all_converged = true;
  json jruns = json::array();
  json sketch_seeds = json::array();
  for (const auto& r : runs) {
    all_converged = all_converged && r.status == termination_name(Termination::Converged);
    json jr = {{"strategy", r.strategy},
               {"strategy_index", r.strategy_index},
               {"repeat", r.repeat},
               {"status", r.status},
               {"iterations", r.report.iterations()}};
    if (!r.report.records.empty()) {
      jr["final_residual_fro"] = r.report.records.back().residual_fro;
      jr["wall_ns"] = r.report.records.back().wall_ns;
    }
    if (r.report.interval) jr["interval"] = {r.report.interval->lower, r.report.interval->upper};
    if (r.sketch_seed) {
      jr["sketch_seed"] = *r.sketch_seed;
      sketch_seeds.push_back({{"strategy_index", r.strategy_index},
                              {"repeat", r.repeat},
                              {"seed", *r.sketch_seed}});
    }
    if (!r.error.empty()) jr["error"] = r.error;
    jruns.push_back(std::move(jr));
  }

  if (!json_path.empty()) {
    json strategies = json::array();
    for (const auto& s : cfg.strategies) strategies.push_back(strategy_name(s));
    json config = {{"function", function_name(cfg.function)},
                   {"strategies", strategies},
                   {"strategies_arg", sf.strategies},
                   {"repeats", cfg.repeats},
                   {"options", options_json(cfg.opts)},
                   {"threads", kernel_threads()}};
    if (cfg.spec) config["input"] = {{"generated", spec_json(*cfg.spec)}};
    else config["input"] = {{"path", cfg.input_path}};
    json seeds = {{"sketch", sketch_seeds}};
    if (cfg.spec) seeds["input"] = cfg.spec->seed;
    const json report = {{"config", config},
                         {"versions", versions_json()},
                         {"seeds", seeds},
                         {"runs", jruns}};
    auto f = open_output(json_path);
    f << report.dump(2) << '\n';
    if (!f) throw IoError("write to '" + json_path + "' failed");
  }
  if (!result_path.empty() && !first.empty()) save_matrix(result_path, first);
  return all_converged ? 0 : 3;
}

// ---- sweep -----------------------------------------------------------------

// n x n input whose singular values (eigenvalues for the symmetric functions) fall
// geometrically from 1 to sigma_min / sigma_max.
Mat sweep_input(const FunctionSpec& f, std::size_t n, double ratio, std::uint64_t seed) {
  std::vector<double> s(n, 1.0);
  for (std::size_t i = 1; i < n; ++i)
    s[i] = std::pow(ratio, static_cast<double>(i) / static_cast<double>(n - 1));
  if (f.kind == Function::Polar || f.kind == Function::InverseCheb)
    return prescribed_spectrum_matrix(s, n, n, seed);
  const Mat q = householder_qr(gaussian_matrix(n, n, seed)).q;
  Mat qs = q;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) qs(i, j) *= s[j];
  return symmetrize(mat_mul(qs, transpose(q)));
}

int cmd_sweep(const std::string& vary, const std::vector<std::string>& value_args, std::size_t n,
              double sigma_max, std::uint64_t seed, const SolveFlags& sf,
              const std::string& out_path, std::ostream& out) {
  if (vary != "sigma-min") throw ConfigError("sweep: only --vary sigma-min is supported");
  std::vector<double> values;
  for (const auto& v : value_args) {
    if (v.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw ConfigError("sweep: '" + v + "' is not a number");
    }
  }
  if (values.empty()) throw ConfigError("sweep: --values must list at least one sigma_min");
  if (n == 0) throw ConfigError("sweep: --n must be >= 1");
  if (!(sigma_max > 0.0)) throw ConfigError("sweep: --sigma-max must be positive");
  for (double v : values)
    if (!(v > 0.0) || v > sigma_max)
      throw ConfigError("sweep: each sigma_min must lie in (0, sigma_max]");
  const FunctionSpec fn = parse_function(sf.function);
  const auto strategies = parse_strategy_list(sf.strategies);
  IterationOptions opts = to_options(sf);
  // The input is built with ||A||_2 = 1 already, so the Frobenius scaling would only
  // shrink the spectrum.
  opts.normalize_input = false;

  std::ofstream file;
  if (!out_path.empty()) file = open_output(out_path);
  std::ostream& csv = out_path.empty() ? out : file;
  csv << kSweepCsvHeader << '\n';
  bool all_converged = true;
  for (double sigma_min : values) {
    const Mat a = sweep_input(fn, n, sigma_min / sigma_max, seed);
    double first_wall = 0.0;
    for (std::size_t si = 0; si < strategies.size(); ++si) {
      std::string status;
      std::size_t iters = 0;
      std::int64_t wall = 0;
      try {
        const auto rep = solve(a, fn, strategies[si], opts).report;
        status = termination_name(rep.termination);
        iters = rep.iterations();
        wall = rep.records.back().wall_ns;
      } catch (const SingularityError&) {
        status = "error";
      } catch (const DefinitenessError&) {
        status = "error";
      } catch (const NumericalInstabilityError&) {
        status = "error";
      }
      all_converged = all_converged && status == "converged";
      if (si == 0) first_wall = static_cast<double>(wall);
      const double speedup = wall > 0 ? first_wall / static_cast<double>(wall) : 1.0;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", sigma_min);
      csv << buf << ',' << strategy_name(strategies[si]) << ',' << iters << ',' << wall << ',';
      std::snprintf(buf, sizeof buf, "%.6g", speedup);
      csv << buf << ',' << status << '\n';
    }
  }
  if (!csv) throw IoError("write to sweep output failed");
  return all_converged ? 0 : 3;
}

// ---- oracle ----------------------------------------------------------------

Mat oracle_value(const Mat& a, const std::string& name) {
  if (name == "polar") {
    return a.rows() >= a.cols() ? reference_polar(a) : transpose(reference_polar(transpose(a)));
  }
  if (name == "inverse" || name == "inverse-cheb")
    return reference_matrix_function(a, {MatrixFunction::Inverse});
  if (name == "inverse-db") return reference_matrix_function(a, {MatrixFunction::InvSqrt});
  const FunctionSpec f = parse_function(name);
  switch (f.kind) {
    case Function::Sign: return reference_matrix_function(a, {MatrixFunction::Sign});
    case Function::Sqrt: return reference_matrix_function(a, {MatrixFunction::Sqrt});
    case Function::InvSqrt: return reference_matrix_function(a, {MatrixFunction::InvSqrt});
    case Function::InvPRoot:
      return f.p == 1 ? reference_matrix_function(a, {MatrixFunction::Inverse})
                      : reference_matrix_function(a, {MatrixFunction::InvPRoot, f.p});
    default: break;
  }
  throw ConfigError("oracle: unsupported function '" + name + "'");
}

int cmd_oracle(const std::string& function, const std::string& in_path,
               const std::string& out_path, const std::string& check_path, std::ostream& out) {
  const auto dims = peek_matrix_dims(in_path);
  if (std::min(dims.rows, dims.cols) > kOracleLimit)
    throw ConfigError("oracle scale exceeded: min(rows, cols) = " +
                      std::to_string(std::min(dims.rows, dims.cols)) + " > " +
                      std::to_string(kOracleLimit));
  const Mat ref = oracle_value(read_matrix_file(in_path), function);
  if (!out_path.empty()) save_matrix(out_path, ref);
  if (!check_path.empty()) {
    const Mat cand = read_matrix_file(check_path);
    if (cand.rows() != ref.rows() || cand.cols() != ref.cols())
      throw ShapeError("oracle --check: candidate is " + std::to_string(cand.rows()) + "x" +
                       std::to_string(cand.cols()) + ", reference is " +
                       std::to_string(ref.rows()) + "x" + std::to_string(ref.cols()));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", frob_norm(cand - ref));
    out << "discrepancy_fro " << buf << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polynomial-fit accelerated matrix function iterations", "prism"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kLibraryVersion));

  GenFlags gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an input matrix file");
  add_gen_flags(gen_cmd, gen);
  gen_cmd->add_option("--out", gen_out, "Output MTXB path")->required();

  GenFlags run_gen;
  SolveFlags run_solve;
  std::string run_in, run_csv, run_json, run_result;
  std::size_t repeats = 1;
  auto* run_cmd = app.add_subcommand("run", "Solve one input with each strategy");
  add_gen_flags(run_cmd, run_gen);
  add_solve_flags(run_cmd, run_solve);
  run_cmd->add_option("--in", run_in, "Input matrix (MTXB or text)");
  run_cmd->add_option("--repeats", repeats, "Solves per strategy");
  run_cmd->add_option("--csv", run_csv, "CSV output path (default: standard output)");
  run_cmd->add_option("--json", run_json, "JSON report path (default: <csv>.json)");
  run_cmd->add_option("--result", run_result,
                      "Write the output of the first strategy, first repeat (MTXB)");

  std::string vary = "sigma-min", sweep_out;
  std::vector<std::string> sweep_values;
  std::size_t sweep_n = 256;
  double sigma_max = 1.0;
  std::uint64_t sweep_seed = 0;
  SolveFlags sweep_solve;
  auto* sweep_cmd = app.add_subcommand("sweep", "Iterations and time across sigma_min");
  add_solve_flags(sweep_cmd, sweep_solve);
  sweep_cmd->add_option("--vary", vary, "Swept parameter (sigma-min)");
  sweep_cmd->add_option("--values", sweep_values, "sigma_min grid")->delimiter(',')->required();
  sweep_cmd->add_option("--n", sweep_n, "Matrix size");
  sweep_cmd->add_option("--sigma-max", sigma_max, "Largest singular value");
  sweep_cmd->add_option("--seed", sweep_seed, "Seed of the singular vectors");
  sweep_cmd->add_option("--out", sweep_out, "CSV output path (default: standard output)");

  std::string oracle_fn, oracle_in, oracle_out, oracle_check;
  auto* oracle_cmd = app.add_subcommand("oracle", "Reference result by direct factorization");
  oracle_cmd->add_option("--function", oracle_fn,
                         "sign | sqrt | invsqrt | invproot[:p] | inverse | polar")
      ->required();
  oracle_cmd->add_option("--in", oracle_in, "Input matrix")->required();
  oracle_cmd->add_option("--out", oracle_out, "Output MTXB path");
  oracle_cmd->add_option("--check", oracle_check, "Candidate to compare with the reference");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, gen_out, out);
    if (*run_cmd)
      return cmd_run(run_gen, run_in, run_solve, repeats, run_csv, run_json, run_result, out);
    if (*sweep_cmd)
      return cmd_sweep(vary, sweep_values, sweep_n, sigma_max, sweep_seed, sweep_solve,
                       sweep_out, out);
    if (*oracle_cmd) return cmd_oracle(oracle_fn, oracle_in, oracle_out, oracle_check, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const SingularityError& e) {
    err << "singularity error: " << e.what() << '\n';
    return 3;
  } catch (const DefinitenessError& e) {
    err << "definiteness error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalInstabilityError& e) {
    err << "numerical instability: " << e.what() << '\n';
    return 3;
  } catch (const DegenerateInputError& e) {
    err << "degenerate input: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace prism::benchcli
