#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "storeplan/admm.hpp"
#include "storeplan/aggregation.hpp"
#include "storeplan/error.hpp"
#include "storeplan/extreme_days.hpp"
#include "storeplan/instance.hpp"

namespace storeplan {

enum class Profile { kPeaky, kSeasonal, kAlternatingDays, kIid };

Profile ParseProfile(const std::string& name);  // peaky | seasonal | alternating-days | iid
std::string ProfileName(Profile profile);

struct SyntheticSpec {
  Profile profile = Profile::kSeasonal;
  int n_hours = 8760;
  int regions = 1;
  std::uint64_t seed = 1;
  bool cyclic = true;
};

// Each region contributes a load series and one wind and one solar
// generator ("wind_<k>", "solar_<k>"); a dispatchable "base" and "peak"
// unit serve the summed load. Capacity costs are annual figures scaled by
// n/8760, so economics do not depend on the horizon length.
struct SyntheticData {
  SystemInstance instance;
  std::vector<RegionSeries> regions;
  int extreme_day = -1;  // peaky only: the planted scarcity day
};

// Deterministic in the spec. Day-structured profiles (all but iid) throw
// kIndivisibleHorizon unless 24 divides n.
SyntheticData GenerateSynthetic(const SyntheticSpec& spec);

struct MethodSpec {
  enum class Kind { kFull, kIdentity, kLossless, kRepDays, kSystemStates, kAdjacent, kAdmm };
  Kind kind = Kind::kFull;
  int k = 0;  // days for rep-days, states for system-states and adjacent
  DaySelection selection = DaySelection::kKMeansMedoid;
  DayLinkage linkage = DayLinkage::kIsolated;
  AdmmConfig admm;
  std::string label;  // defaults to a name built from the fields
  std::string Label() const;
};

// full | identity | lossless | rep-days | system-states | adjacent | admm
MethodSpec::Kind ParseMethodKind(const std::string& name);
std::string MethodKindName(MethodSpec::Kind kind);

// Variable-cost adder price * rate_g, rates keyed by generator name.
struct CarbonPrice {
  double price = 0.0;
  std::map<std::string, double> emission_rates;
};

SystemInstance ApplyCarbonPrice(const SystemInstance& instance, const CarbonPrice& carbon);

struct Scenario {
  std::string name;
  std::optional<std::string> instance_path;  // resolved by the caller (I/O layer)
  std::optional<SyntheticSpec> synthetic;
  std::optional<SystemInstance> instance;  // takes precedence when set
  std::vector<MethodSpec> methods;
  std::optional<CarbonPrice> carbon;
  std::optional<StorageSpec> storage;  // replaces the instance's storage costs
  std::vector<double> sweep;  // storage room costs for the marginal-value curve
  int threads = 1;            // method rows solved concurrently

  // Throws kInvalidInput: no methods, no instance source, bad sweep.
  void Validate() const;
  // The instance the methods run on (storage override and carbon adder
  // applied).
  SystemInstance ResolveInstance() const;
};

struct MethodOutcome {
  std::string label;
  bool ok = false;
  std::string error;
  std::optional<ErrorCode> error_code;
  double room = 0.0;  // u
  double door = 0.0;  // t
  double objective = 0.0;
  double energy_value = 0.0;
  double capacity_value = 0.0;
  double seconds = 0.0;
  int num_states = 0;     // hours represented by distinct LP periods
  bool converged = true;  // admm only
};

// Solves one method and values its (expanded) solution. Errors are caught
// and reported in the outcome.
MethodOutcome RunMethod(const SystemInstance& instance, const MethodSpec& method);

struct SweepPoint {
  double room_cost = 0.0;
  double room = 0.0;
  bool ok = false;
};

struct SweepCurve {
  std::string label;
  std::vector<SweepPoint> points;
};

// Per-method rows; the baseline (first "full" row when present) keeps
// absolute values and every other row is divided by it.
struct ComparisonReport {
  std::string scenario;
  std::vector<MethodOutcome> rows;
  int baseline = -1;
  std::vector<SweepCurve> sweep;

  // Value of a field relative to the baseline; 1.0 for the baseline row
  // itself, NaN without a baseline or when the baseline value is 0.
  double Relative(int row, double MethodOutcome::*field) const;
  std::string ToText() const;
  std::string ToCsv() const;
  std::string SweepCsv() const;  // label,room_cost,room,ok
  bool all_ok() const;
};

ComparisonReport RunComparison(const Scenario& scenario);

}  // namespace storeplan
