#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ostream>

#include "prism/benchcli.hpp"
#include "prism/error.hpp"
#include "prism/rng.hpp"

namespace prism::benchcli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError(what + ": '" + s + "' is not a number");
  return v;
}

std::uint64_t parse_count(const std::string& s, const std::string& what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ConfigError(what + ": '" + s + "' is not a non-negative integer");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + s + "' is out of range");
  }
}

// Splits "name:rest" into the name and the remaining colon-separated fields.
std::pair<std::string, std::vector<std::string>> split_head(const std::string& text) {
  auto parts = split(text, ':');
  std::string head = parts.front();
  parts.erase(parts.begin());
  return {head, parts};
}

bool parse_cycle_flag(const std::vector<std::string>& fields, std::size_t at,
                      const std::string& text) {
  if (fields.size() <= at) return false;
  if (fields.size() > at + 1 || fields[at] != "cycle")
    throw ConfigError("strategy '" + text + "': expected ':cycle' after the coefficients");
  return true;
}

}  // namespace

FunctionSpec parse_function(const std::string& text) {
  const auto [head, fields] = split_head(text);
  FunctionSpec f;
  if (head == "invproot") {
    f.kind = Function::InvPRoot;
    if (fields.size() > 1) throw ConfigError("function '" + text + "': expected invproot[:p]");
    if (!fields.empty()) f.p = static_cast<unsigned>(parse_count(fields[0], "invproot p"));
    if (f.p == 0) throw ConfigError("invproot: p must be >= 1");
    return f;
  }
  if (!fields.empty()) throw ConfigError("function '" + text + "' takes no parameters");
  if (head == "sign") f.kind = Function::Sign;
  else if (head == "sqrt") f.kind = Function::Sqrt;
  else if (head == "invsqrt") f.kind = Function::InvSqrt;
  else if (head == "polar") f.kind = Function::Polar;
  else if (head == "inverse-db") f.kind = Function::InverseDb;
  else if (head == "inverse-cheb") f.kind = Function::InverseCheb;
  else throw ConfigError("unknown function '" + text + "'");
  return f;
}

std::string function_name(const FunctionSpec& f) {
  switch (f.kind) {
    case Function::Sign: return "sign";
    case Function::Sqrt: return "sqrt";
    case Function::InvSqrt: return "invsqrt";
    case Function::Polar: return "polar";
    case Function::InvPRoot: return "invproot:" + std::to_string(f.p);
    case Function::InverseDb: return "inverse-db";
    case Function::InverseCheb: return "inverse-cheb";
  }
  return "unknown";
}

CoefficientStrategy parse_strategy(const std::string& text) {
  const auto [head, fields] = split_head(text);
  if (head == "taylor" || head == "prism-exact") {
    if (!fields.empty()) throw ConfigError("strategy '" + text + "' takes no parameters");
    return head == "taylor" ? CoefficientStrategy{Taylor{}} : CoefficientStrategy{PrismExact{}};
  }
  if (head == "prism-sketched") {
    if (fields.size() > 2)
      throw ConfigError("strategy '" + text + "': expected prism-sketched[:p[:seed]]");
    PrismSketched s;
    if (!fields.empty()) s.p = parse_count(fields[0], "sketch rows");
    if (fields.size() > 1) s.seed = parse_count(fields[1], "sketch seed");
    if (s.p == 0) throw ConfigError("sketch rows p must be >= 1");
    return s;
  }
  if (head == "fixed") {
    if (fields.empty() || fields[0].empty())
      throw ConfigError("strategy '" + text + "': expected fixed:a1,a2,...");
    FixedSchedule f;
    for (const auto& a : split(fields[0], ',')) f.alphas.push_back(parse_double(a, "fixed alpha"));
    f.cycle = parse_cycle_flag(fields, 1, text);
    return f;
  }
  if (head == "fixed-triples") {
    if (fields.empty() || fields[0].empty())
      throw ConfigError("strategy '" + text + "': expected fixed-triples:a,b,c;...");
    FixedSchedule f;
    for (const auto& t : split(fields[0], ';')) {
      const auto abc = split(t, ',');
      if (abc.size() != 3)
        throw ConfigError("strategy '" + text + "': each triple needs three coefficients");
      f.triples.push_back({parse_double(abc[0], "triple a"), parse_double(abc[1], "triple b"),
                           parse_double(abc[2], "triple c")});
    }
    f.cycle = parse_cycle_flag(fields, 1, text);
    return f;
  }
  throw ConfigError("unknown strategy '" + text + "'");
}

std::vector<CoefficientStrategy> parse_strategy_list(const std::string& text) {
  std::vector<std::string> items;
  for (const auto& tok : split(text, ',')) {
    if (!tok.empty() && std::isalpha(static_cast<unsigned char>(tok.front())))
      items.push_back(tok);
    else if (!items.empty())
      items.back() += "," + tok;
    else
      throw ConfigError("strategy list '" + text + "' must start with a strategy name");
  }
  std::vector<CoefficientStrategy> out;
  for (const auto& item : items) out.push_back(parse_strategy(item));
  return out;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.strategies.empty()) throw ConfigError("at least one strategy is required");
  if (cfg.repeats == 0) throw ConfigError("repeats must be >= 1");
  if (cfg.spec.has_value() == !cfg.input_path.empty())
    throw ConfigError("give exactly one input: a matrix file or generator flags");
}

IterationResult solve(const Mat& a, const FunctionSpec& f, const CoefficientStrategy& strategy,
                      const IterationOptions& opts) {
  auto swap_outputs = [](IterationResult r) {
    std::swap(r.primary, *r.secondary);
    return r;
  };
  switch (f.kind) {
    case Function::Sign: return sign_iterate(a, strategy, opts);
    case Function::Sqrt: return sqrt_coupled_iterate(a, strategy, opts);
    case Function::InvSqrt: return swap_outputs(sqrt_coupled_iterate(a, strategy, opts));
    case Function::Polar: return polar_iterate(a, strategy, opts);
    case Function::InvPRoot: return inverse_proot_iterate(a, f.p, strategy, opts);
    case Function::InverseDb:
      if (std::holds_alternative<FixedSchedule>(strategy) ||
          std::holds_alternative<PrismSketched>(strategy))
        throw ConfigError("inverse-db accepts taylor (classical) or prism-exact (adaptive)");
      return swap_outputs(db_newton_sqrt(a, is_prism(strategy), opts));
    case Function::InverseCheb: return chebyshev_inverse_iterate(a, strategy, opts);
  }
  throw ConfigError("unknown function");
}

CoefficientStrategy strategy_for_repeat(const CoefficientStrategy& s, std::size_t repeat) {
  if (const auto* ps = std::get_if<PrismSketched>(&s); ps && repeat > 0)
    return PrismSketched{ps->p, derive_seed(ps->seed, repeat)};
  return s;
}

std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg, const Mat& input,
                                       Mat* first_result) {
  validate(cfg);
  std::vector<RunOutcome> runs;
  for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      const CoefficientStrategy s = strategy_for_repeat(cfg.strategies[si], r);
      RunOutcome run;
      run.strategy_index = si;
      run.strategy = strategy_name(cfg.strategies[si]);
      run.repeat = r;
      if (const auto* ps = std::get_if<PrismSketched>(&s)) run.sketch_seed = ps->seed;
      try {
        IterationResult res = solve(input, cfg.function, s, cfg.opts);
        run.report = std::move(res.report);
        if (first_result && si == 0 && r == 0) *first_result = std::move(res.primary);
        run.status = termination_name(run.report.termination);
      } catch (const SingularityError& e) {
        run.status = "error";
        run.error = e.what();
      } catch (const DefinitenessError& e) {
        run.status = "error";
        run.error = e.what();
      } catch (const NumericalInstabilityError& e) {
        run.status = "error";
        run.error = e.what();
      }
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

void write_csv(std::ostream& out, const std::vector<RunOutcome>& runs) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << kCsvHeader << '\n';
  for (const auto& run : runs)
    for (const auto& rec : run.report.records) {
      out << run.strategy << ',' << run.repeat << ',' << rec.k << ',' << num(rec.residual_fro)
          << ',' << (rec.residual_spec ? num(*rec.residual_spec) : "") << ','
          << (rec.alpha ? num(*rec.alpha) : "") << ',' << rec.wall_ns << '\n';
    }
}

}  // namespace prism::benchcli
