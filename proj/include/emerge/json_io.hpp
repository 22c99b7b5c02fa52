#pragma once

#include <json.hpp>

#include "emerge/core.hpp"
#include "emerge/domination.hpp"
#include "emerge/transport.hpp"

// JSON encodings of the domain types, shared by the scenario runner and the
// report writers.
namespace emerge::io {

using json = nlohmann::json;

json to_json(const Weights& w);
Weights weights_from_json(const json& j);

json to_json(const DiscreteDistribution& d);
DiscreteDistribution distribution_from_json(const json& j);

json to_json(const GridFunction& f);
// Accepts either explicit {theta, axes, values} or a named function
// {theta, function: {id, ...}} with axes or {arity, resolution}.
GridFunction grid_from_json(const json& j);

json to_json(const Coupling& coupling);
json to_json(const transport::SeparableDual& dual);
json to_json(const transport::TransportCertificate& cert);
json to_json(const domination::DominationReport& report);

const char* verdict_name(transport::Verdict v);

}  // namespace emerge::io
