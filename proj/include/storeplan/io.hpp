#pragma once

#include <string>

#include "json.hpp"
#include "storeplan/admm.hpp"
#include "storeplan/agg_model.hpp"
#include "storeplan/aggregation.hpp"
#include "storeplan/extreme_days.hpp"
#include "storeplan/harness.hpp"
#include "storeplan/valuation.hpp"

// JSON forms of the library types. Readers throw Error(kInvalidInput) on
// malformed documents; all vectors are plain arrays and matrices are arrays
// of rows.
namespace storeplan::io {

using Json = nlohmann::json;

// Instance: {"cyclic", "demand": [n], "generators": [{"name", "var_cost",
// "cap_cost", "availability"}], "storage": {"door_cost", "room_cost"}}.
// var_cost and availability may be scalars (broadcast over hours);
// "n_hours" is optional and checked against demand when present.
SystemInstance InstanceFromJson(const Json& j);
Json ToJson(const SystemInstance& instance);

// Aggregation: {"gamma", "w", "q", "P", "demand", "availability",
// "var_cost", "cyclic"}. P is either dense (S rows of S numbers) or sparse
// (S rows of [col, value] pairs); ToJson writes the sparse form.
Aggregation AggregationFromJson(const Json& j);
Json ToJson(const Aggregation& agg);

Json ToJson(const SolveResult& result);
Json ToJson(const AggSolveResult& result);
SolveResult SolveResultFromJson(const Json& j);

Json ToJson(const KktReport& report);
Json ToJson(const LosslessReport& report);
Json ToJson(const ValueReport& report);
Json ToJson(const VertexCover& cover, const CumulativeDayset& cds);
Json ToJson(const AdmmTrace& trace);
Json ToJson(const ComparisonReport& report);

// Scenario: {"name", "instance": path or inline instance, "synthetic":
// {"profile", "n_hours", "regions", "seed", "cyclic"}, "methods": ["full",
// {"method": "rep-days", "k", "selection", "linkage"}, {"method": "admm",
// "scheme", "beta", ...}], "carbon": {"price", "emission_rates": {name:
// rate}}, "storage": {"door_cost", "room_cost"}, "sweep": [...],
// "threads"}. A relative instance path is resolved against base_dir.
Scenario ScenarioFromJson(const Json& j, const std::string& base_dir = ".");
MethodSpec MethodFromJson(const Json& j);
AdmmConfig AdmmConfigFromJson(const Json& j, AdmmConfig base = {});
SyntheticSpec SyntheticFromJson(const Json& j);

Json ReadJsonFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

SystemInstance ReadInstance(const std::string& path);
Aggregation ReadAggregation(const std::string& path);
Scenario ReadScenario(const std::string& path);

}  // namespace storeplan::io
