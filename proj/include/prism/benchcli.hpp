#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prism/genmat.hpp"
#include "prism/iterations.hpp"
#include "prism/mat.hpp"

namespace prism::benchcli {

enum class Function { Sign, Sqrt, InvSqrt, Polar, InvPRoot, InverseDb, InverseCheb };

struct FunctionSpec {
  Function kind = Function::Polar;
  unsigned p = 1;  // InvPRoot only
};

// sign, sqrt, invsqrt, polar, invproot[:p], inverse-db, inverse-cheb. ConfigError otherwise.
FunctionSpec parse_function(const std::string& text);
std::string function_name(const FunctionSpec& f);

// taylor | prism-exact | prism-sketched[:p[:seed]] | fixed:a1,a2,...[:cycle]
//        | fixed-triples:a,b,c;a,b,c;...[:cycle]
CoefficientStrategy parse_strategy(const std::string& text);
// Comma-separated strategies. A token that does not start with a letter continues the
// coefficient list of the strategy before it, so "taylor,fixed:1,0.5" is two entries.
std::vector<CoefficientStrategy> parse_strategy_list(const std::string& text);

/// One `run` invocation: every strategy is solved `repeats` times on the same input.
struct ExperimentConfig {
  FunctionSpec function;
  std::optional<SpectrumSpec> spec;  // generated input, or
  std::string input_path;            // a matrix file
  std::vector<CoefficientStrategy> strategies;
  IterationOptions opts;
  std::size_t repeats = 1;
};

// ConfigError unless strategies is non-empty, repeats >= 1 and exactly one input is set.
void validate(const ExperimentConfig& cfg);

// Dispatches to the solver for f. For inverse-db the primary output is a^{-1/2}; taylor
// selects the classical alpha = 1/2 and both PRISM strategies the adaptive alpha.
IterationResult solve(const Mat& a, const FunctionSpec& f, const CoefficientStrategy& strategy,
                      const IterationOptions& opts);

// Repeat r > 0 of a sketched strategy draws its sketches from derive_seed(seed, r).
CoefficientStrategy strategy_for_repeat(const CoefficientStrategy& s, std::size_t repeat);

struct RunOutcome {
  std::size_t strategy_index = 0;
  std::string strategy;
  std::size_t repeat = 0;
  std::optional<std::uint64_t> sketch_seed;
  std::string status;  // termination name, or "error"
  std::string error;
  ConvergenceReport report;
};

// Cells run in (strategy, repeat) order. Numerical exceptions become status "error".
// first_result, when given, receives the primary output of strategy 0, repeat 0.
std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg, const Mat& input,
                                       Mat* first_result = nullptr);

inline constexpr std::string_view kCsvHeader =
    "strategy,repeat,iter,residual_fro,residual_spec_est,alpha,wall_ns";
void write_csv(std::ostream& out, const std::vector<RunOutcome>& runs);

inline constexpr std::string_view kSweepCsvHeader =
    "sigma_min,strategy,iterations,wall_ns,speedup,status";

// Entry point of the `prism` tool. Returns the process exit code:
// 0 success, 1 I/O failure, 2 usage or format error, 3 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prism::benchcli
