#include "emerge/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "emerge/domination.hpp"
#include "emerge/json_io.hpp"
#include "emerge/kernels.hpp"
#include "emerge/oracle.hpp"
#include "emerge/subclasses.hpp"
#include "emerge/transport.hpp"
#include "emerge/version.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace emerge::cli {

namespace {

using io::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitBoundary = 2;
constexpr int kExitSolver = 3;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

void write_atomic(const std::filesystem::path& path,
                  const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open output file " + tmp.string());
    }
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

json load_scenario(const std::filesystem::path& path, std::string& hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("scenario file not readable: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  hash = fnv1a_hex(bytes);
  return json::parse(bytes);
}

json envelope(const std::string& kind, const std::string& hash,
              double verdict_tol) {
  return json{{"tool", "emerge"},
              {"version", kVersion},
              {"kind", kind},
              {"scenario_hash", hash},
              {"tolerances",
               json{{"verdict", verdict_tol},
                    {"duality_gap", kLpTol},
                    {"weak_duality", 1e-8},
                    {"coupling", kCouplingTol},
                    {"domination_check", 1e-8},
                    {"arithmetic", kArithmeticTol},
                    {"monte_carlo_band", "3 standard errors"}}}};
}

struct BuiltRule {
  subclasses::RuleFn fn;
  std::size_t arity = 0;
  std::string id;
  json echo;
};

subclasses::Calibrator calibrator_from_json(const json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  const double cap = spec.value("cap", 1e6);
  if (kind == "inverse_sqrt") {
    return subclasses::Calibrator::from_function(
        [](double p) { return p > 0.0 ? 0.5 / std::sqrt(p) : 1e300; }, cap);
  }
  if (kind == "constant") {
    return subclasses::Calibrator::from_function([](double) { return 1.0; },
                                                 cap);
  }
  if (kind == "table") {
    std::vector<double> grid, values;
    for (const auto& v : spec.at("p_grid")) grid.push_back(v.get<double>());
    for (const auto& v : spec.at("values")) values.push_back(v.get<double>());
    std::optional<double> c;
    if (spec.contains("cap")) c = spec.at("cap").get<double>();
    return subclasses::Calibrator(std::move(grid), std::move(values), c);
  }
  throw std::invalid_argument("field 'calibrators.kind' unknown: " + kind);
}

subclasses::MarginalModel survival_from_json(const json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "exponential") {
    const double theta = spec.at("theta").get<double>();
    const std::size_t resolution = spec.value("resolution", std::size_t{512});
    return subclasses::MarginalModel::from_survival_function(
        [](double x) { return std::exp(-x); }, theta, resolution);
  }
  if (kind == "table") {
    std::vector<double> grid, values;
    for (const auto& v : spec.at("x_grid")) grid.push_back(v.get<double>());
    for (const auto& v : spec.at("survival")) values.push_back(v.get<double>());
    return subclasses::MarginalModel(std::move(grid), std::move(values));
  }
  throw std::invalid_argument("field 'survivals.kind' unknown: " + kind);
}

BuiltRule rule_from_json(const json& spec) {
  BuiltRule rule;
  rule.id = spec.at("id").get<std::string>();
  rule.echo = spec;
  if (rule.id == "weighted") {
    Weights lambda = io::weights_from_json(spec.at("lambda"));
    rule.arity = lambda.arity();
    rule.fn = [lambda](const std::vector<double>& e) {
      return weighted_merge(lambda, EValueVector(e));
    };
    return rule;
  }
  if (rule.id == "product") {
    const auto i = spec.at("i").get<std::size_t>();
    const auto j = spec.at("j").get<std::size_t>();
    const double sigma_ij = spec.at("sigma_ij").get<double>();
    rule.arity = spec.at("arity").get<std::size_t>();
    const std::size_t arity = rule.arity;
    subclasses::SecondMomentBound sigma(std::vector<std::vector<double>>(
        arity, std::vector<double>(arity, sigma_ij)));
    rule.fn = [i, j, sigma](const std::vector<double>& e) {
      return subclasses::product_merge(i, j, sigma, EValueVector(e));
    };
    return rule;
  }
  if (rule.id == "identical") {
    const double lambda = spec.at("lambda_scalar").get<double>();
    rule.arity = spec.at("arity").get<std::size_t>();
    rule.fn = [lambda](const std::vector<double>& e) {
      return subclasses::identical_merge(lambda, EValueVector(e));
    };
    return rule;
  }
  if (rule.id == "exchangeable") {
    const double beta = spec.at("beta").get<double>();
    rule.arity = spec.at("arity").get<std::size_t>();
    rule.fn = [beta](const std::vector<double>& e) {
      return subclasses::exchangeable_merge(beta, EValueVector(e));
    };
    return rule;
  }
  if (rule.id == "mixture") {
    rule.arity = spec.at("arity").get<std::size_t>();
    const std::size_t arity = rule.arity;
    std::vector<std::vector<double>> matrix(arity,
                                            std::vector<double>(arity, 1.0));
    if (spec.contains("sigma")) {
      matrix.clear();
      for (const auto& row : spec.at("sigma")) {
        matrix.emplace_back();
        for (const auto& v : row) matrix.back().push_back(v.get<double>());
      }
    }
    subclasses::SecondMomentBound sigma(std::move(matrix));
    std::vector<subclasses::MixtureTerm> terms;
    for (const auto& t : spec.at("terms")) {
      subclasses::MixtureTerm term;
      term.weight = t.at("weight").get<double>();
      if (t.contains("lambda")) {
        term.lambda = io::weights_from_json(t.at("lambda"));
      } else {
        term.i = t.at("i").get<std::size_t>();
        term.j = t.at("j").get<std::size_t>();
      }
      terms.push_back(std::move(term));
    }
    rule.fn = [terms, sigma](const std::vector<double>& e) {
      return subclasses::mixture_merge(terms, sigma, EValueVector(e));
    };
    return rule;
  }
  if (rule.id == "calibrated") {
    Weights lambda = io::weights_from_json(spec.at("lambda"));
    rule.arity = lambda.arity();
    std::vector<subclasses::Calibrator> calibrators;
    for (const auto& c : spec.at("calibrators")) {
      calibrators.push_back(calibrator_from_json(c));
    }
    std::vector<subclasses::MarginalModel> survivals;
    for (const auto& s : spec.at("survivals")) {
      survivals.push_back(survival_from_json(s));
    }
    if (calibrators.size() != rule.arity || survivals.size() != rule.arity) {
      throw std::invalid_argument(
          "fields 'calibrators'/'survivals' must match the lambda arity");
    }
    rule.fn = [lambda, calibrators, survivals](const std::vector<double>& e) {
      return subclasses::calibrated_merge(lambda, calibrators, survivals,
                                          EValueVector(e));
    };
    return rule;
  }
  throw std::invalid_argument("field 'rule.id' names an unknown rule: " +
                              rule.id);
}

std::unique_ptr<subclasses::Sampler> sampler_from_json(const json& spec) {
  const std::string id = spec.at("id").get<std::string>();
  if (id == "iid_exponential") {
    return std::make_unique<subclasses::IidExponentialSampler>(
        spec.at("arity").get<std::size_t>());
  }
  if (id == "permutation") {
    std::vector<double> base;
    for (const auto& v : spec.at("base")) base.push_back(v.get<double>());
    return std::make_unique<subclasses::PermutationSampler>(std::move(base));
  }
  if (id == "identical_exponential") {
    return std::make_unique<subclasses::IdenticalExponentialSampler>(
        spec.at("arity").get<std::size_t>());
  }
  throw std::invalid_argument("field 'sampler.id' names an unknown sampler: " +
                              id);
}

std::vector<DiscreteDistribution> marginals_from_json(const json& j) {
  std::vector<DiscreteDistribution> out;
  for (const auto& m : j) out.push_back(io::distribution_from_json(m));
  return out;
}

int exit_for_verdict(transport::Verdict v) {
  return v == transport::Verdict::boundary ? kExitBoundary : kExitOk;
}

// --- kind handlers -------------------------------------------------------

int handle_merge(const json& scenario, json& report) {
  BuiltRule rule = rule_from_json(scenario.at("rule"));
  std::vector<double> e;
  for (const auto& v : scenario.at("e")) e.push_back(v.get<double>());
  if (e.size() != rule.arity) {
    throw std::invalid_argument("field 'e' does not match the rule arity");
  }
  report["result"] = json{{"rule", rule.echo}, {"e", e},
                          {"value", rule.fn(e)}};
  return kExitOk;
}

int handle_validity(const json& scenario, json& report, double verdict_tol,
                    bool with_dual_tables) {
  GridFunction f = io::grid_from_json(scenario.at("F"));
  auto marginals = marginals_from_json(scenario.at("marginals"));
  auto cert = transport::worst_case_expectation(f, marginals, verdict_tol);
  json result = io::to_json(cert);
  result["verdict_tolerance"] = verdict_tol;
  if (with_dual_tables) {
    // Rescale so the target is bounded by 1, then normalize the dual.
    const double scale = std::max(1.0, f.max_value());
    std::vector<double> scaled_values = f.values();
    for (double& v : scaled_values) v /= scale;
    GridFunction scaled(f.theta(), f.axes(), std::move(scaled_values));
    std::vector<std::vector<double>> scaled_phi = cert.dual.components();
    for (auto& table : scaled_phi) {
      for (double& v : table) v /= scale;
    }
    transport::SeparableDual scaled_dual(std::move(scaled_phi), scaled);
    auto normalized = transport::normalize_dual(scaled_dual, scaled);
    result["normalized_dual"] = io::to_json(normalized);
    result["normalization_scale"] = scale;
  }
  report["result"] = std::move(result);
  return exit_for_verdict(cert.verdict);
}

std::string duality_csv(const json& result) {
  std::ostringstream csv;
  csv << "axis,position,phi\n";
  const auto& tables = result.at("dual").at("tables");
  for (std::size_t k = 0; k < tables.size(); ++k) {
    for (std::size_t i = 0; i < tables[k].size(); ++i) {
      csv << k << "," << i << ","
          << format_double(tables[k][i].get<double>()) << "\n";
    }
  }
  return csv.str();
}

std::string dominate_csv(const json& result) {
  std::ostringstream csv;
  csv << "k,T,h,lambda\n";
  const auto& per_k = result.at("per_k");
  const auto& lambda = result.at("lambda");
  for (std::size_t k = 0; k < per_k.size(); ++k) {
    csv << (k + 1) << "," << format_double(per_k[k].at("T").get<double>())
        << "," << format_double(per_k[k].at("h").get<double>()) << ","
        << format_double(lambda[k].get<double>()) << "\n";
  }
  csv << "const,,," << format_double(lambda.back().get<double>()) << "\n";
  csv << "max_violation,"
      << format_double(result.at("max_violation").get<double>()) << ",,\n";
  return csv.str();
}

int handle_dominate(const json& scenario, json& report, double verdict_tol) {
  GridFunction f = io::grid_from_json(scenario.at("F"));
  const double epsilon = scenario.at("epsilon").get<double>();
  domination::DominateOptions options;
  options.validity_tol = verdict_tol;
  if (scenario.contains("check_family")) {
    options.check_family = scenario.at("check_family").get<bool>();
  }
  if (scenario.contains("symmetrize")) {
    options.symmetrize = scenario.at("symmetrize").get<bool>();
  }
  try {
    auto result = domination::dominate(f, epsilon, options);
    json body = io::to_json(result);
    body["verdict"] = "dominated";
    body["max_violation_tolerance"] = 1e-8;
    report["result"] = std::move(body);
    return kExitOk;
  } catch (const domination::NotValidError& err) {
    json marginals = json::array();
    for (const auto& mu : err.marginals()) marginals.push_back(io::to_json(mu));
    report["result"] =
        json{{"verdict", "not_valid"},
             {"worst_case_expectation", err.worst_expectation()},
             {"certifying_marginals", marginals},
             {"verdict_tolerance", verdict_tol},
             {"message", err.what()}};
    return kExitOk;
  }
}

int handle_simulate(const json& scenario, json& report,
                    const RunOptions& options) {
  BuiltRule rule = rule_from_json(scenario.at("rule"));
  auto sampler = sampler_from_json(scenario.at("sampler"));
  if (sampler->arity() != rule.arity) {
    throw std::invalid_argument(
        "field 'sampler' arity does not match field 'rule'");
  }
  const std::uint64_t seed =
      options.seed.value_or(scenario.value("seed", std::uint64_t{0}));
  const std::size_t reps = options.replications.value_or(
      scenario.value("replications", std::size_t{1000000}));
  auto mc = subclasses::mc_mean(rule.fn, *sampler, reps, seed);

  const double band = 3.0 * mc.std_error;
  const bool valid = mc.estimate <= 1.0 + band;
  json result{{"rule", rule.echo},
              {"sampler", sampler->describe()},
              {"replications", mc.replications},
              {"estimate", mc.estimate},
              {"std_error", mc.std_error},
              {"threshold", 1.0},
              {"band", band},
              {"verdict", valid ? "valid" : "invalid"}};
  if (rule.id == "exchangeable") {
    const double beta = rule.echo.at("beta").get<double>();
    result["tail_probability"] = mc.estimate / beta;
    result["tail_std_error"] = mc.std_error / beta;
    result["markov_bound"] = 1.0 / beta;
    result["admissibility"] = "unknown (open question)";
    if (scenario.contains("witnesses")) {
      Weights lambda =
          io::weights_from_json(scenario.at("witnesses").at("lambda"));
      std::vector<double> candidates;
      for (const auto& v : scenario.at("witnesses").at("candidates")) {
        candidates.push_back(v.get<double>());
      }
      auto w = subclasses::incomparability_witnesses(beta, lambda, candidates);
      if (w) {
        result["incomparability"] =
            json{{"verdict", "incomparable"},
                 {"where_rule_larger", w->where_beta_larger.values()},
                 {"rule_value", w->beta_value_at_larger},
                 {"merge_value", w->merge_value_at_larger},
                 {"where_rule_smaller", w->where_beta_smaller.values()},
                 {"rule_value_smaller", w->beta_value_at_smaller},
                 {"merge_value_smaller", w->merge_value_at_smaller}};
      } else {
        result["incomparability"] = json{{"verdict", "not_found"}};
      }
    }
  }
  if (scenario.contains("improvement")) {
    const auto& spec = scenario.at("improvement");
    Weights lambda = io::weights_from_json(spec.at("lambda"));
    const double bonus = spec.at("bonus").get<double>();
    const std::size_t coordinate = spec.value("coordinate", std::size_t{0});
    const double above = spec.at("above").get<double>();
    auto improvement = [lambda, bonus, coordinate,
                        above](const std::vector<double>& e) {
      return weighted_merge(lambda, EValueVector(e)) +
             (e.at(coordinate) > above ? bonus : 0.0);
    };
    auto base = [lambda](const std::vector<double>& e) {
      return weighted_merge(lambda, EValueVector(e));
    };
    auto check = subclasses::full_support_admissibility_check(
        base, improvement, *sampler, reps, seed);
    const char* verdict =
        check.verdict == subclasses::AdmissibilityVerdict::improvement_rejected
            ? "inadmissible improvement rejected"
        : check.verdict == subclasses::AdmissibilityVerdict::no_improvement
            ? "no improvement"
            : "inconclusive";
    result["improvement_check"] =
        json{{"estimate", check.improvement_estimate.estimate},
             {"std_error", check.improvement_estimate.std_error},
             {"verdict", verdict},
             {"note", check.note}};
  }
  report["seed"] = seed;
  report["result"] = std::move(result);
  return kExitOk;
}

std::string simulate_csv(const json& result) {
  std::ostringstream csv;
  csv << "replications,estimate,std_error,verdict\n";
  csv << result.at("replications").get<std::size_t>() << ","
      << format_double(result.at("estimate").get<double>()) << ","
      << format_double(result.at("std_error").get<double>()) << ","
      << result.at("verdict").get<std::string>() << "\n";
  return csv.str();
}

int handle_oracle_check(const json& scenario, json& report) {
  const auto& spec = scenario.at("instance");
  GridFunction f = io::grid_from_json(spec.at("F"));
  auto marginals = marginals_from_json(spec.at("marginals"));
  oracle::SmallInstance instance(f, marginals);
  const unsigned passes = scenario.value("refinement_passes", 8u);
  const double oracle_value = oracle::enumerate_couplings_value(instance, passes);
  auto cert = transport::worst_case_expectation(f, marginals);
  const double difference = cert.primal_value - oracle_value;
  // K <= 2 enumerations are exact; the K = 3 scan certifies a lower bound.
  const bool exact = marginals.size() <= 2;
  const bool agree = exact ? std::fabs(difference) <= 1e-8
                           : difference >= -1e-8;
  report["result"] = json{{"oracle_value", oracle_value},
                          {"lp_value", cert.primal_value},
                          {"difference", difference},
                          {"oracle_exact", exact},
                          {"tolerance", 1e-8},
                          {"verdict", agree ? "agree" : "mismatch"}};
  return agree ? kExitOk : kExitBoundary;
}

struct ScheduleCell {
  double epsilon = 0.0;
  double theta = 0.0;
  bool ok = false;
  std::string error;
  json body;
};

int handle_schedule(const json& scenario, json& report, double verdict_tol,
                    std::string* csv_out) {
  if (scenario.at("kind").get<std::string>() != "dominate") {
    throw std::invalid_argument("schedule requires a scenario of kind 'dominate'");
  }
  const auto& block = scenario.at("schedule");
  std::vector<double> epsilons, thetas;
  for (const auto& v : block.at("epsilon_ladder")) {
    epsilons.push_back(v.get<double>());
  }
  for (const auto& v : block.at("theta_ladder")) thetas.push_back(v.get<double>());
  if (epsilons.empty() || thetas.empty()) {
    throw std::invalid_argument(
        "fields 'epsilon_ladder' and 'theta_ladder' must be nonempty");
  }
  auto monotone = [](const std::vector<double>& xs) {
    return std::is_sorted(xs.begin(), xs.end()) ||
           std::is_sorted(xs.rbegin(), xs.rend());
  };
  if (!monotone(epsilons) || !monotone(thetas)) {
    throw std::invalid_argument(
        "fields 'epsilon_ladder' and 'theta_ladder' must be sorted");
  }
  const auto& f_spec = scenario.at("F");
  if (!f_spec.contains("function") || !f_spec.contains("resolution")) {
    throw std::invalid_argument(
        "schedule requires field 'F' with 'function' and 'resolution' so the "
        "grid can be rebuilt per theta");
  }
  const std::size_t resolution = f_spec.at("resolution").get<std::size_t>();
  const std::size_t arity = f_spec.at("arity").get<std::size_t>();

  std::vector<ScheduleCell> cells;
  for (double eps : epsilons) {
    for (double theta : thetas) {
      cells.push_back({eps, theta, false, "", json()});
    }
  }
  int max_cells = kernels::max_threads();
  if (const char* env = std::getenv("EMERGE_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) max_cells = parsed;
  }
  const long long n_cells = static_cast<long long>(cells.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) \
    num_threads(std::max(1, std::min<int>(max_cells, static_cast<int>(n_cells))))
#endif
  for (long long c = 0; c < n_cells; ++c) {
    ScheduleCell& cell = cells[static_cast<std::size_t>(c)];
    try {
      json spec = f_spec;
      spec["theta"] = cell.theta;
      spec["arity"] = arity;
      spec["resolution"] = resolution;
      GridFunction f = io::grid_from_json(spec);
      domination::DominateOptions options;
      options.validity_tol = verdict_tol;
      auto result = domination::dominate(f, cell.epsilon, options);
      cell.body = io::to_json(result);
      cell.ok = true;
    } catch (const std::exception& err) {
      cell.error = err.what();
    }
  }

  json rows = json::array();
  std::ostringstream csv;
  csv << "epsilon,theta,status,sum_T,max_violation";
  for (std::size_t k = 0; k < arity; ++k) csv << ",lambda_" << (k + 1);
  csv << ",lambda_const\n";
  bool any_failed = false;
  for (const auto& cell : cells) {
    json row{{"epsilon", cell.epsilon}, {"theta", cell.theta}};
    csv << format_double(cell.epsilon) << "," << format_double(cell.theta);
    if (cell.ok) {
      row["status"] = "ok";
      row["report"] = cell.body;
      csv << ",ok," << format_double(cell.body.at("sum_T").get<double>()) << ","
          << format_double(cell.body.at("max_violation").get<double>());
      for (const auto& entry : cell.body.at("lambda")) {
        csv << "," << format_double(entry.get<double>());
      }
    } else {
      any_failed = true;
      row["status"] = "error";
      row["error"] = cell.error;
      csv << ",error,,";
      for (std::size_t k = 0; k <= arity; ++k) csv << ",";
    }
    csv << "\n";
    rows.push_back(std::move(row));
  }
  report["result"] = json{{"cells", rows},
                          {"epsilon_ladder", epsilons},
                          {"theta_ladder", thetas}};
  *csv_out = csv.str();
  return any_failed ? kExitBoundary : kExitOk;
}

int write_error_report(const std::filesystem::path& out_dir, json report,
                       const std::string& type, const std::string& message,
                       int code) {
  report["error"] = json{{"type", type}, {"message", message}};
  std::error_code ignore;
  std::filesystem::create_directories(out_dir, ignore);
  try {
    write_atomic(out_dir / "report.json", report.dump(2) + "\n");
  } catch (const std::exception&) {
    // Nothing else to do; the exit status still reports the failure.
  }
  return code;
}

int dispatch(const std::filesystem::path& scenario_path,
             const std::filesystem::path& out_dir, const RunOptions& options,
             bool as_schedule, bool require_oracle_kind) {
  std::string hash;
  json report;
  try {
    json scenario = load_scenario(scenario_path, hash);
    const std::string kind = scenario.at("kind").get<std::string>();
    const double verdict_tol = options.verdict_tol.value_or(kLpTol);
    report = envelope(as_schedule ? kind + "-schedule" : kind, hash,
                      verdict_tol);
    if (require_oracle_kind && kind != "oracle-check") {
      throw std::invalid_argument(
          "field 'kind' must be 'oracle-check' for this verb");
    }
    std::filesystem::create_directories(out_dir);

    int code = kExitOk;
    std::string csv;
    if (as_schedule) {
      code = handle_schedule(scenario, report, verdict_tol, &csv);
    } else if (kind == "merge") {
      code = handle_merge(scenario, report);
    } else if (kind == "validity") {
      code = handle_validity(scenario, report, verdict_tol, false);
    } else if (kind == "duality") {
      code = handle_validity(scenario, report, verdict_tol, true);
      csv = duality_csv(report.at("result"));
    } else if (kind == "dominate") {
      code = handle_dominate(scenario, report, verdict_tol);
      if (report.at("result").value("verdict", "") == "dominated") {
        csv = dominate_csv(report.at("result"));
      }
    } else if (kind == "simulate") {
      code = handle_simulate(scenario, report, options);
      csv = simulate_csv(report.at("result"));
    } else if (kind == "oracle-check") {
      code = handle_oracle_check(scenario, report);
    } else {
      throw std::invalid_argument("field 'kind' names an unknown kind: " + kind);
    }
    write_atomic(out_dir / "report.json", report.dump(2) + "\n");
    if (!csv.empty()) {
      write_atomic(out_dir / "report.csv", csv);
    }
    return code;
  } catch (const lp::SolverError& err) {
    return write_error_report(out_dir, report, "solver", err.what(),
                              kExitSolver);
  } catch (const json::exception& err) {
    return write_error_report(out_dir, report, "input", err.what(), kExitInput);
  } catch (const std::invalid_argument& err) {
    return write_error_report(out_dir, report, "input", err.what(), kExitInput);
  } catch (const std::domain_error& err) {
    return write_error_report(out_dir, report, "input", err.what(), kExitInput);
  } catch (const std::exception& err) {
    return write_error_report(out_dir, report, "solver", err.what(),
                              kExitSolver);
  }
}

}  // namespace

int run(const std::filesystem::path& scenario_path,
        const std::filesystem::path& out_dir, const RunOptions& options) {
  return dispatch(scenario_path, out_dir, options, false, false);
}

int schedule(const std::filesystem::path& scenario_path,
             const std::filesystem::path& out_dir, const RunOptions& options) {
  return dispatch(scenario_path, out_dir, options, true, false);
}

int oracle_check(const std::filesystem::path& scenario_path,
                 const std::filesystem::path& out_dir,
                 const RunOptions& options) {
  return dispatch(scenario_path, out_dir, options, false, true);
}

}  // namespace emerge::cli
