#include "storeplan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "storeplan/agg_model.hpp"
#include "storeplan/valuation.hpp"

namespace storeplan {

Profile ParseProfile(const std::string& name) {
  if (name == "peaky") return Profile::kPeaky;
  if (name == "seasonal") return Profile::kSeasonal;
  if (name == "alternating-days") return Profile::kAlternatingDays;
  if (name == "iid") return Profile::kIid;
  throw Error(ErrorCode::kInvalidInput, "unknown profile '" + name + "'");
}

std::string ProfileName(Profile profile) {
  switch (profile) {
    case Profile::kPeaky: return "peaky";
    case Profile::kSeasonal: return "seasonal";
    case Profile::kAlternatingDays: return "alternating-days";
    case Profile::kIid: return "iid";
  }
  return "unknown";
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// Annual cost figures (currency per MW-year or MWh-year) and running costs.
constexpr double kBaseVar = 25.0, kBaseCap = 180000.0;
constexpr double kPeakVar = 150.0, kPeakCap = 50000.0;
constexpr double kWindCap = 130000.0, kSolarCap = 80000.0;
constexpr double kDoorCap = 40000.0, kRoomCap = 12000.0;

// Uniform draws straight from the engine so sequences do not depend on the
// standard library's distribution implementations.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : eng_(seed) {}
  double U() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double U(double lo, double hi) { return lo + (hi - lo) * U(); }
  int Index(int n) { return static_cast<int>(U() * n) % n; }

 private:
  std::mt19937_64 eng_;
};

double Clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct RegionParams {
  double load = 1.0;
  double wind_cf = 0.3;
  double solar_amp = 0.8;
  double evening = 0.2;
};

double LoadShape(int hd, double evening) {
  const double x = (hd - 19.0) / 2.5;
  return 0.75 + 0.15 * std::sin(2 * kPi * (hd - 9) / 24.0) + evening * std::exp(-x * x);
}

double SolarBell(int hd) {
  if (hd <= 6 || hd >= 18) return 0.0;
  return std::sin(kPi * (hd - 6) / 12.0);
}

double LoadSeason(int yday) { return 1.0 + 0.15 * std::cos(2 * kPi * (yday - 200) / 365.0); }
double SolarSeason(int yday) { return 0.65 + 0.35 * std::cos(2 * kPi * (yday - 172) / 365.0); }
double WindSeason(int yday) { return 1.0 + 0.3 * std::cos(2 * kPi * yday / 365.0); }

// One day of (load, wind, solar) for a region under given weather.
void FillDay(const RegionParams& p, int yday, double load_noise, double wind_level,
             double cloud, Draw& rng, double hourly_noise, RegionSeries& out, int first) {
  for (int hd = 0; hd < 24; ++hd) {
    const int h = first + hd;
    out.load[h] = p.load * LoadShape(hd, p.evening) * LoadSeason(yday) * (1 + load_noise) *
                  (1 + hourly_noise * (rng.U() - 0.5));
    out.wind[h] = Clamp01(wind_level * WindSeason(yday) + hourly_noise * 4 * (rng.U() - 0.5));
    out.solar[h] = Clamp01(p.solar_amp * SolarBell(hd) * SolarSeason(yday) * cloud);
  }
}

void WeatherYear(const std::vector<RegionParams>& params, int days, Draw& rng, double noise,
                 std::vector<RegionSeries>& regions) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    double wind = params[k].wind_cf;
    for (int d = 0; d < days; ++d) {
      wind = Clamp01(0.6 * wind + 0.4 * params[k].wind_cf * 2 * rng.U());
      const double cloud = 1.0 - noise * 6 * rng.U();
      const double load_noise = noise * 2 * (rng.U() - 0.5);
      FillDay(params[k], d % 365, load_noise, wind, std::max(0.1, cloud), rng, noise, regions[k],
              24 * d);
    }
  }
}

}  // namespace

SyntheticData GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.n_hours < 1) throw Error(ErrorCode::kInvalidInput, "n_hours must be positive");
  if (spec.regions < 1) throw Error(ErrorCode::kInvalidInput, "regions must be positive");
  const int n = spec.n_hours;
  if (spec.profile != Profile::kIid && n % 24 != 0) {
    throw Error(ErrorCode::kIndivisibleHorizon,
                ProfileName(spec.profile) + " needs a whole number of days");
  }
  Draw rng(spec.seed);
  std::vector<RegionParams> params(spec.regions);
  for (auto& p : params) {
    p.load = rng.U(4.0, 12.0);
    p.wind_cf = rng.U(0.25, 0.45);
    p.solar_amp = rng.U(0.7, 1.0);
    p.evening = rng.U(0.1, 0.3);
  }
  SyntheticData data;
  for (int k = 0; k < spec.regions; ++k) {
    data.regions.push_back({"region_" + std::to_string(k), Eigen::VectorXd::Zero(n),
                            Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)});
  }
  const int days = n / 24;
  switch (spec.profile) {
    case Profile::kSeasonal:
      WeatherYear(params, days, rng, 0.05, data.regions);
      break;
    case Profile::kPeaky: {
      WeatherYear(params, days, rng, 0.02, data.regions);
      // One long, dark, windless and high-demand day away from the ends.
      data.extreme_day = days > 2 ? 1 + rng.Index(days - 2) : 0;
      const int first = 24 * data.extreme_day;
      for (auto& r : data.regions) {
        for (int hd = 0; hd < 24; ++hd) {
          const double spike = hd >= 16 && hd <= 21 ? 1.6 : 1.3;
          r.load[first + hd] *= spike;
          r.wind[first + hd] *= 0.05;
          r.solar[first + hd] *= 0.15;
        }
      }
      break;
    }
    case Profile::kAlternatingDays: {
      // A sunny calm summer day and a cloudy windy winter day.
      std::vector<RegionSeries> templ;
      for (int k = 0; k < spec.regions; ++k) {
        RegionSeries t{"", Eigen::VectorXd(48), Eigen::VectorXd(48), Eigen::VectorXd(48)};
        FillDay(params[k], 172, 0.0, 0.15, 1.0, rng, 0.05, t, 0);
        FillDay(params[k], 355, 0.0, 0.6, 0.35, rng, 0.05, t, 24);
        templ.push_back(std::move(t));
      }
      for (int k = 0; k < spec.regions; ++k) {
        for (int d = 0; d < days; ++d) {
          const int src = 24 * (d % 2);
          data.regions[k].load.segment(24 * d, 24) = templ[k].load.segment(src, 24);
          data.regions[k].wind.segment(24 * d, 24) = templ[k].wind.segment(src, 24);
          data.regions[k].solar.segment(24 * d, 24) = templ[k].solar.segment(src, 24);
        }
      }
      break;
    }
    case Profile::kIid:
      for (int k = 0; k < spec.regions; ++k) {
        for (int h = 0; h < n; ++h) {
          data.regions[k].load[h] = params[k].load * rng.U(0.6, 1.4);
          data.regions[k].wind[h] = rng.U();
          data.regions[k].solar[h] = 0.9 * rng.U();
        }
      }
      break;
  }

  SystemInstance& inst = data.instance;
  inst.grid = {n, spec.cyclic};
  inst.demand = Eigen::VectorXd::Zero(n);
  for (const auto& r : data.regions) inst.demand += r.load;
  const double scale = n / 8760.0;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  inst.generators.push_back(MakeGenerator("base", n, kBaseVar, kBaseCap * scale, ones));
  inst.generators.push_back(MakeGenerator("peak", n, kPeakVar, kPeakCap * scale, ones));
  for (int k = 0; k < spec.regions; ++k) {
    inst.generators.push_back(MakeGenerator("wind_" + std::to_string(k), n, 0.0,
                                            kWindCap * scale, data.regions[k].wind));
    inst.generators.push_back(MakeGenerator("solar_" + std::to_string(k), n, 0.0,
                                            kSolarCap * scale, data.regions[k].solar));
  }
  inst.storage = {kDoorCap * scale, kRoomCap * scale};
  inst.Validate();
  return data;
}

MethodSpec::Kind ParseMethodKind(const std::string& name) {
  using K = MethodSpec::Kind;
  if (name == "full") return K::kFull;
  if (name == "identity") return K::kIdentity;
  if (name == "lossless") return K::kLossless;
  if (name == "rep-days") return K::kRepDays;
  if (name == "system-states") return K::kSystemStates;
  if (name == "adjacent") return K::kAdjacent;
  if (name == "admm") return K::kAdmm;
  throw Error(ErrorCode::kInvalidInput, "unknown method '" + name + "'");
}

std::string MethodKindName(MethodSpec::Kind kind) {
  using K = MethodSpec::Kind;
  switch (kind) {
    case K::kFull: return "full";
    case K::kIdentity: return "identity";
    case K::kLossless: return "lossless";
    case K::kRepDays: return "rep-days";
    case K::kSystemStates: return "system-states";
    case K::kAdjacent: return "adjacent";
    case K::kAdmm: return "admm";
  }
  return "unknown";
}

std::string MethodSpec::Label() const {
  if (!label.empty()) return label;
  std::ostringstream os;
  os << MethodKindName(kind);
  switch (kind) {
    case Kind::kRepDays:
      os << "(" << k << "," << DaySelectionName(selection) << "," << DayLinkageName(linkage)
         << ")";
      break;
    case Kind::kSystemStates:
    case Kind::kAdjacent:
      os << "(" << k << ")";
      break;
    case Kind::kAdmm:
      os << "(" << BlockSchemeName(admm.scheme) << ",beta=" << admm.beta << ")";
      break;
    default:
      break;
  }
  return os.str();
}

SystemInstance ApplyCarbonPrice(const SystemInstance& instance, const CarbonPrice& carbon) {
  SystemInstance out = instance;
  for (const auto& [name, rate] : carbon.emission_rates) {
    auto it = std::find_if(out.generators.begin(), out.generators.end(),
                           [&](const GeneratorSpec& g) { return g.name == name; });
    if (it == out.generators.end()) {
      throw Error(ErrorCode::kInvalidInput, "emission rate for unknown generator '" + name + "'");
    }
    it->var_cost.array() += carbon.price * rate;
  }
  return out;
}

void Scenario::Validate() const {
  if (methods.empty()) throw Error(ErrorCode::kInvalidInput, "scenario has no methods");
  if (!instance && !synthetic) {
    throw Error(ErrorCode::kInvalidInput,
                instance_path ? "instance file '" + *instance_path + "' was not loaded"
                              : "scenario has no instance source");
  }
  for (double c : sweep) {
    if (!(c > 0)) throw Error(ErrorCode::kInvalidInput, "sweep points must be positive");
  }
  if (threads < 1) throw Error(ErrorCode::kInvalidInput, "threads must be at least 1");
  if (carbon && carbon->price < 0) {
    throw Error(ErrorCode::kInvalidInput, "carbon price must be nonnegative");
  }
}

SystemInstance Scenario::ResolveInstance() const {
  Validate();
  SystemInstance inst = instance ? *instance : GenerateSynthetic(*synthetic).instance;
  if (storage) inst.storage = *storage;
  if (carbon) inst = ApplyCarbonPrice(inst, *carbon);
  inst.Validate();
  return inst;
}

namespace {

using Clock = std::chrono::steady_clock;
using K = MethodSpec::Kind;

Aggregation BuildAggregation(const SystemInstance& inst, const MethodSpec& m) {
  switch (m.kind) {
    case K::kIdentity: return AggregateIdentity(inst);
    case K::kLossless: return CompressLossless(inst);
    case K::kRepDays: return RepresentativeDaysAggregation(inst, m.k, m.linkage, m.selection);
    case K::kSystemStates: return SystemStates(inst, m.k);
    case K::kAdjacent: return AdjacentClusters(inst, m.k);
    default: break;
  }
  throw Error(ErrorCode::kInvalidInput, "method has no aggregation");
}

void Value(const SolveResult& hourly, const SystemInstance& inst, MethodOutcome& out) {
  ValuationOptions opts;
  opts.require_kkt = false;
  opts.enforce_identities = false;
  const ValueSplit split = EnergyCapacitySplit(hourly, inst, opts);
  out.energy_value = split.energy_value;
  out.capacity_value = split.capacity_value;
}

// Runs `jobs` tasks over at most `threads` workers.
template <class F>
void Parallel(int jobs, int threads, F&& f) {
  if (threads <= 1 || jobs <= 1) {
    for (int i = 0; i < jobs; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(threads, jobs); ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < jobs; i = next++) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

MethodOutcome RunMethod(const SystemInstance& inst, const MethodSpec& method) {
  MethodOutcome out;
  out.label = method.Label();
  const auto t0 = Clock::now();
  try {
    if (method.kind == K::kFull) {
      const SolveResult res = SolveCore(inst);
      out.room = res.u;
      out.door = res.t;
      out.objective = res.objective;
      out.num_states = inst.num_hours();
      Value(res, inst, out);
    } else if (method.kind == K::kAdmm) {
      const AdmmResult ar = AdmmSolve(inst, method.admm);
      out.room = ar.result.u;
      out.door = ar.result.t;
      out.objective = ar.result.objective;
      out.num_states = inst.num_hours();
      out.converged = ar.converged();
      Value(ar.result, inst, out);
    } else {
      const Aggregation agg = BuildAggregation(inst, method);
      const AggSolveResult ar = SolveAggregated(inst, agg);
      out.room = ar.u;
      out.door = ar.t;
      out.objective = ar.objective;
      out.num_states = agg.num_states();
      Value(ExpandSolution(ar, agg), inst, out);
    }
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
    out.error_code = e.code();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

double ComparisonReport::Relative(int row, double MethodOutcome::*field) const {
  if (baseline < 0) return std::numeric_limits<double>::quiet_NaN();
  if (row == baseline) return 1.0;
  const double b = rows[baseline].*field;
  const double v = rows[row].*field;
  // Values this close to zero on both sides count as equal.
  const double tiny = 1e-9 * std::max(1.0, std::abs(rows[baseline].objective));
  if (std::abs(b) <= tiny) {
    return std::abs(v) <= tiny ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  }
  return v / b;
}

bool ComparisonReport::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const MethodOutcome& r) { return r.ok; });
}

namespace {

const std::vector<std::pair<const char*, double MethodOutcome::*>>& Fields() {
  static const std::vector<std::pair<const char*, double MethodOutcome::*>> fields = {
      {"room", &MethodOutcome::room},
      {"door", &MethodOutcome::door},
      {"objective", &MethodOutcome::objective},
      {"energy_value", &MethodOutcome::energy_value},
      {"capacity_value", &MethodOutcome::capacity_value},
      {"seconds", &MethodOutcome::seconds},
  };
  return fields;
}

}  // namespace

std::string ComparisonReport::ToText() const {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.label.size());
  std::ostringstream os;
  if (!scenario.empty()) os << "scenario: " << scenario << "\n";
  os << std::left << std::setw(static_cast<int>(width) + 2) << "method" << std::right
     << std::setw(8) << "states";
  for (const auto& [name, field] : Fields()) os << std::setw(16) << name;
  os << "  status\n";
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    const MethodOutcome& r = rows[i];
    os << std::left << std::setw(static_cast<int>(width) + 2) << r.label << std::right
       << std::setw(8) << r.num_states;
    for (const auto& [name, field] : Fields()) {
      std::ostringstream cell;
      if (!r.ok) {
        cell << "-";
      } else if (i == baseline || baseline < 0) {
        cell << std::setprecision(6) << r.*field + 0.0;  // no "-0"
      } else {
        cell << std::fixed << std::setprecision(4) << Relative(i, field) << "x";
      }
      os << std::setw(16) << cell.str();
    }
    os << "  " << (r.ok ? (r.converged ? "ok" : "not converged") : r.error) << "\n";
  }
  return os.str();
}

std::string ComparisonReport::ToCsv() const {
  std::ostringstream os;
  os.precision(12);
  os << "method,basis,states";
  for (const auto& [name, field] : Fields()) os << "," << name;
  os << ",ok,converged,error\n";
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    const MethodOutcome& r = rows[i];
    const bool absolute = i == baseline || baseline < 0;
    os << r.label << "," << (absolute ? "absolute" : "relative") << "," << r.num_states;
    for (const auto& [name, field] : Fields()) {
      os << ",";
      if (r.ok) os << (absolute ? r.*field : Relative(i, field));
    }
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << "," << r.ok << "," << r.converged << "," << err << "\n";
  }
  return os.str();
}

std::string ComparisonReport::SweepCsv() const {
  std::ostringstream os;
  os.precision(12);
  os << "method,room_cost,room,ok\n";
  for (const auto& c : sweep) {
    for (const auto& p : c.points) {
      os << c.label << "," << p.room_cost << "," << p.room << "," << p.ok << "\n";
    }
  }
  return os.str();
}

ComparisonReport RunComparison(const Scenario& scenario) {
  const SystemInstance inst = scenario.ResolveInstance();
  ComparisonReport rep;
  rep.scenario = scenario.name;
  const int m = static_cast<int>(scenario.methods.size());
  rep.rows.resize(m);
  Parallel(m, scenario.threads,
           [&](int i) { rep.rows[i] = RunMethod(inst, scenario.methods[i]); });
  for (int i = 0; i < m; ++i) {
    if (scenario.methods[i].kind == K::kFull && rep.rows[i].ok) {
      rep.baseline = i;
      break;
    }
  }
  if (!scenario.sweep.empty()) {
    const int p = static_cast<int>(scenario.sweep.size());
    rep.sweep.resize(m);
    for (int i = 0; i < m; ++i) {
      rep.sweep[i].label = rep.rows[i].label;
      rep.sweep[i].points.resize(p);
    }
    Parallel(m * p, scenario.threads, [&](int job) {
      const int i = job / p, j = job % p;
      SystemInstance priced = inst;
      priced.storage.room_cost = scenario.sweep[j];
      const MethodOutcome o = RunMethod(priced, scenario.methods[i]);
      rep.sweep[i].points[j] = {scenario.sweep[j], o.room, o.ok};
    });
  }
  return rep;
}

}  // namespace storeplan
