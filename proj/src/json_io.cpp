#include "emerge/json_io.hpp"

#include <algorithm>
#include <functional>

namespace emerge::io {

namespace {

std::vector<double> doubles(const json& j, const char* field) {
  if (!j.is_array()) {
    throw std::invalid_argument(std::string("field '") + field +
                                "' must be an array of numbers");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

using PointFn = std::function<double(std::span<const double>)>;

PointFn named_function(const json& spec, std::size_t arity) {
  const std::string id = spec.at("id").get<std::string>();
  if (id == "max") {
    return [](std::span<const double> e) {
      double m = 0.0;
      for (double v : e) m = std::max(m, v);
      return m;
    };
  }
  if (id == "product") {
    return [](std::span<const double> e) {
      double p = 1.0;
      for (double v : e) p *= v;
      return p;
    };
  }
  if (id == "constant") {
    const double c = spec.at("value").get<double>();
    return [c](std::span<const double>) { return c; };
  }
  if (id == "weighted") {
    Weights lambda = weights_from_json(spec.at("lambda"));
    if (lambda.arity() != arity) {
      throw std::invalid_argument(
          "field 'function.lambda' does not match the grid arity");
    }
    return [lambda](std::span<const double> e) {
      double m = lambda.constant_weight();
      for (std::size_t k = 0; k < e.size(); ++k) m += lambda.entry(k) * e[k];
      return m;
    };
  }
  if (id == "min_weighted" || id == "mixture_weighted") {
    std::vector<Weights> lambdas;
    for (const auto& item : spec.at("lambdas")) {
      lambdas.push_back(weights_from_json(item));
      if (lambdas.back().arity() != arity) {
        throw std::invalid_argument(
            "field 'function.lambdas' does not match the grid arity");
      }
    }
    if (lambdas.empty()) {
      throw std::invalid_argument("field 'function.lambdas' must be nonempty");
    }
    if (id == "min_weighted") {
      return [lambdas](std::span<const double> e) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& lambda : lambdas) {
          double m = lambda.constant_weight();
          for (std::size_t k = 0; k < e.size(); ++k) {
            m += lambda.entry(k) * e[k];
          }
          best = std::min(best, m);
        }
        return best;
      };
    }
    std::vector<double> mix = doubles(spec.at("weights"), "function.weights");
    if (mix.size() != lambdas.size()) {
      throw std::invalid_argument(
          "field 'function.weights' must match 'function.lambdas'");
    }
    return [lambdas, mix](std::span<const double> e) {
      double total = 0.0;
      for (std::size_t t = 0; t < lambdas.size(); ++t) {
        double m = lambdas[t].constant_weight();
        for (std::size_t k = 0; k < e.size(); ++k) {
          m += lambdas[t].entry(k) * e[k];
        }
        total += mix[t] * m;
      }
      return total;
    };
  }
  throw std::invalid_argument("field 'function.id' names an unknown function: " +
                              id);
}

}  // namespace

json to_json(const Weights& w) { return json{{"entries", w.entries()}}; }

Weights weights_from_json(const json& j) {
  if (j.is_array()) return Weights(doubles(j, "lambda"));
  return Weights(doubles(j.at("entries"), "entries"));
}

json to_json(const DiscreteDistribution& d) {
  return json{{"atoms", d.atoms()}, {"probs", d.probs()}};
}

DiscreteDistribution distribution_from_json(const json& j) {
  return DiscreteDistribution(doubles(j.at("atoms"), "atoms"),
                              doubles(j.at("probs"), "probs"));
}

json to_json(const GridFunction& f) {
  json axes = json::array();
  for (const auto& axis : f.axes()) axes.push_back(axis);
  return json{
      {"theta", f.theta()}, {"axes", axes}, {"values", f.values()}};
}

GridFunction grid_from_json(const json& j) {
  const double theta = j.at("theta").get<double>();
  std::vector<std::vector<double>> axes;
  if (j.contains("axes")) {
    for (const auto& axis : j.at("axes")) {
      axes.push_back(doubles(axis, "axes"));
    }
  } else {
    const std::size_t arity = j.at("arity").get<std::size_t>();
    const std::size_t resolution = j.at("resolution").get<std::size_t>();
    axes.assign(arity, make_axis(theta, resolution));
  }
  if (j.contains("values")) {
    return GridFunction(theta, std::move(axes),
                        doubles(j.at("values"), "values"));
  }
  if (!j.contains("function")) {
    throw std::invalid_argument(
        "grid function needs either field 'values' or field 'function'");
  }
  PointFn f = named_function(j.at("function"), axes.size());
  return grid_sample(f, theta, std::move(axes));
}

json to_json(const Coupling& coupling) {
  json support = json::array();
  for (const auto& entry : coupling.entries()) {
    support.push_back(json{{"index", entry.index}, {"mass", entry.mass}});
  }
  json marginals = json::array();
  for (const auto& mu : coupling.marginals()) marginals.push_back(to_json(mu));
  return json{{"marginals", marginals}, {"support", support}};
}

json to_json(const transport::SeparableDual& dual) {
  json tables = json::array();
  for (const auto& table : dual.components()) tables.push_back(table);
  return json{{"tables", tables},
              {"normalized", dual.normalized()},
              {"min_domination_slack", dual.min_domination_slack()}};
}

json to_json(const transport::TransportCertificate& cert) {
  return json{{"primal_value", cert.primal_value},
              {"dual_value", cert.dual_value},
              {"gap", cert.gap},
              {"verdict", verdict_name(cert.verdict)},
              {"coupling", to_json(cert.coupling)},
              {"dual", to_json(cert.dual)},
              {"lp", json{{"primal_residual", cert.lp_primal_residual},
                          {"dual_residual", cert.lp_dual_residual},
                          {"iterations", cert.lp_iterations}}}};
}

json to_json(const domination::DominationReport& report) {
  json per_k = json::array();
  for (const auto& [t, h] : report.per_k) {
    per_k.push_back(json{{"T", t}, {"h", h}});
  }
  return json{{"lambda", report.lambda.entries()},
              {"epsilon", report.epsilon},
              {"theta", report.theta},
              {"max_violation", report.max_violation},
              {"per_k", per_k},
              {"sum_T", report.sum_T}};
}

const char* verdict_name(transport::Verdict v) {
  switch (v) {
    case transport::Verdict::valid:
      return "valid";
    case transport::Verdict::invalid:
      return "invalid";
    case transport::Verdict::boundary:
      return "boundary";
  }
  return "boundary";
}

}  // namespace emerge::io
