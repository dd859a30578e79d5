// storeplan: command-line front end for planning solves, aggregation,
// valuation, ADMM and method comparisons.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "storeplan/admm.hpp"
#include "storeplan/agg_model.hpp"
#include "storeplan/aggregation.hpp"
#include "storeplan/error.hpp"
#include "storeplan/extreme_days.hpp"
#include "storeplan/harness.hpp"
#include "storeplan/io.hpp"
#include "storeplan/model_core.hpp"
#include "storeplan/valuation.hpp"

using namespace storeplan;

namespace {

// Exit statuses; solver failures are distinguishable from bad input.
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitUnbounded = 5;
constexpr int kExitOther = 1;

int ExitFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasible: return kExitInfeasible;
    case ErrorCode::kNumericalFailure: return kExitNumerical;
    case ErrorCode::kUnbounded: return kExitUnbounded;
    case ErrorCode::kInvalidInput:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kIndivisibleHorizon:
    case ErrorCode::kKTooLarge: return kExitInput;
    default: return kExitOther;
  }
}

void Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
  } else {
    io::WriteTextFile(path, text);
  }
}

struct AdmmFlags {
  bool enabled = false;
  std::string blocks = "day";
  double beta = 1.0;
  int max_iters = AdmmConfig{}.max_iters;
  std::optional<double> eps;
  int threads = 1;
  bool fixed_beta = false;
  std::string trace;

  void Add(CLI::App* app, bool with_switch) {
    if (with_switch) app->add_flag("--admm", enabled, "Solve by ADMM decomposition");
    app->add_option("--blocks", blocks, "Dispatch block scheme: hour, day, week or single")
        ->check(CLI::IsMember({"hour", "day", "week", "single"}));
    app->add_option("--beta", beta, "ADMM penalty (initial value when adaptive)");
    app->add_option("--max-iters", max_iters, "ADMM iteration limit");
    app->add_option("--eps", eps, "Primal and dual residual tolerance");
    app->add_option("--threads", threads, "Concurrent dispatch block solves");
    app->add_flag("--fixed-beta", fixed_beta, "Disable residual balancing");
    app->add_option("--trace", trace, "Write the iteration trace as CSV");
  }

  AdmmConfig Config() const {
    AdmmConfig cfg;
    cfg.scheme = ParseBlockScheme(blocks);
    cfg.beta = beta;
    cfg.max_iters = max_iters;
    if (eps) cfg.eps_primal = cfg.eps_dual = *eps;
    cfg.threads = threads;
    cfg.adaptive_beta = !fixed_beta;
    cfg.Validate();
    return cfg;
  }
};

void PrintSummary(const SolveResult& r, const SystemInstance& inst) {
  std::printf("objective   %.10g\n", r.objective);
  for (int g = 0; g < inst.num_generators(); ++g) {
    std::printf("z[%s]%*s%.6g\n", inst.generators[g].name.c_str(),
                std::max(1, 8 - static_cast<int>(inst.generators[g].name.size())), "", r.z[g]);
  }
  std::printf("door t      %.6g\nroom u      %.6g\n", r.t, r.u);
}

int CmdSolve(const std::string& path, const std::string& out, bool no_storage, bool audit,
             const AdmmFlags& admm) {
  const SystemInstance inst = io::ReadInstance(path);
  SolveResult res;
  if (admm.enabled) {
    const AdmmResult ar = AdmmSolve(inst, admm.Config());
    if (!admm.trace.empty()) io::WriteTextFile(admm.trace, ar.trace.ToCsv());
    res = ar.result;
    const auto& last = ar.trace.iterations.back();
    std::printf("admm        %s after %zu iterations (primal %.3g, dual %.3g)\n",
                ar.converged() ? "converged" : "NOT converged", ar.trace.iterations.size(),
                last.primal_residual, last.dual_residual);
  } else {
    res = no_storage ? SolveCoreWithoutStorage(inst) : SolveCore(inst);
  }
  PrintSummary(res, inst);
  if (audit) {
    const KktReport rep = AuditKkt(inst, res);
    std::printf("kkt audit   %s\n", rep.ok() ? "ok" : rep.Summary(5).c_str());
  }
  if (!out.empty()) io::WriteTextFile(out, io::ToJson(res).dump(1) + "\n");
  return 0;
}

int CmdAggregate(const std::string& path, const std::string& method, int k,
                 const std::string& selection, const std::string& linkage, const std::string& out,
                 bool solve, const std::string& result_out, double tol) {
  const SystemInstance inst = io::ReadInstance(path);
  MethodSpec m;
  m.kind = ParseMethodKind(method);
  m.k = k;
  m.selection = ParseDaySelection(selection);
  m.linkage = ParseDayLinkage(linkage);
  Aggregation agg;
  switch (m.kind) {
    case MethodSpec::Kind::kIdentity: agg = AggregateIdentity(inst); break;
    case MethodSpec::Kind::kLossless: agg = CompressLossless(inst, tol); break;
    case MethodSpec::Kind::kRepDays:
      agg = RepresentativeDaysAggregation(inst, k, m.linkage, m.selection);
      break;
    case MethodSpec::Kind::kSystemStates: agg = SystemStates(inst, k); break;
    case MethodSpec::Kind::kAdjacent: agg = AdjacentClusters(inst, k); break;
    default: throw Error(ErrorCode::kInvalidInput, "'" + method + "' is not an aggregation");
  }
  const LosslessReport check = CheckLossless(agg, inst, tol);
  std::printf("states      %d of %d hours\n", agg.num_states(), inst.num_hours());
  std::printf("lossless    %s\n", check.lossless() ? "yes" : "no");
  if (!check.lossless()) std::printf("%s\n", check.Summary(5).c_str());
  if (!out.empty()) io::WriteTextFile(out, io::ToJson(agg).dump(1) + "\n");
  if (solve) {
    const AggSolveResult ar = SolveAggregated(inst, agg);
    std::printf("objective   %.10g\ndoor t      %.6g\nroom u      %.6g\n", ar.objective, ar.t, ar.u);
    for (const auto& c : AggregatedIdentities(ar, agg, inst)) {
      std::printf("identity    %-16s %.8g vs %.8g%s\n", c.name.c_str(), c.lhs, c.rhs,
                  c.asserted ? (c.holds ? "  holds" : "  FAILS") : "  (not asserted)");
    }
    if (!result_out.empty()) io::WriteTextFile(result_out, io::ToJson(ar).dump(1) + "\n");
  }
  return 0;
}

int CmdCompare(const std::string& path, const std::string& csv, const std::string& sweep_csv,
               const std::string& json_out) {
  const Scenario sc = io::ReadScenario(path);
  const ComparisonReport rep = RunComparison(sc);
  std::cout << rep.ToText();
  if (!csv.empty()) Emit(csv, rep.ToCsv());
  if (!sweep_csv.empty()) Emit(sweep_csv, rep.SweepCsv());
  if (!json_out.empty()) Emit(json_out, io::ToJson(rep).dump(1));
  int code = 0;
  for (const auto& r : rep.rows) {
    if (!r.ok && r.error_code) code = std::max(code, ExitFor(*r.error_code));
    if (!r.ok && !r.error_code) code = std::max(code, kExitOther);
  }
  return code;
}

int CmdExtremeDays(const std::string& path, int regions, int n, std::uint64_t seed,
                   double radius, const std::string& out, const std::string& table) {
  std::vector<RegionSeries> series;
  if (!path.empty()) {
    series.push_back(RegionFromInstance(io::ReadInstance(path)));
  } else {
    SyntheticSpec spec;
    spec.profile = Profile::kSeasonal;
    spec.n_hours = n;
    spec.regions = regions;
    spec.seed = seed;
    series = GenerateSynthetic(spec).regions;
  }
  const CumulativeDayset cds = CumulativeDays(series);
  const VertexCover cover = SelectExtremeDays(cds, radius);
  std::printf("days        %d\nregions     %d\nradius      %g\nchosen      %zu\nuncoverable %d\n",
              cds.num_days(), cds.num_regions(), radius, cover.chosen_days.size(),
              cover.num_uncoverable());
  if (!out.empty()) Emit(out, io::ToJson(cover, cds).dump(1));
  if (!table.empty()) {
    // One row per (day, region): scatter-ready coordinates and chosen flag.
    std::vector<char> chosen(cds.num_days(), 0);
    for (int d : cover.chosen_days) chosen[d] = 1;
    std::ostringstream os;
    os << "day,region,load,wind,solar,chosen\n";
    for (int d = 0; d < cds.num_days(); ++d) {
      for (int r = 0; r < cds.num_regions(); ++r) {
        os << d << "," << cds.regions[r] << "," << cds.days(d, 3 * r) << ","
           << cds.days(d, 3 * r + 1) << "," << cds.days(d, 3 * r + 2) << ","
           << static_cast<int>(chosen[d]) << "\n";
      }
    }
    Emit(table, os.str());
  }
  return 0;
}

int CmdValuation(const std::string& path, const std::string& result_path, const std::string& out,
                 const std::string& hours_csv) {
  const SystemInstance inst = io::ReadInstance(path);
  const SolveResult res =
      result_path.empty() ? SolveCore(inst) : io::SolveResultFromJson(io::ReadJsonFile(result_path));
  ValuationOptions opts;
  opts.enforce_identities = false;
  const ValueReport rep = ValueStorage(res, inst, opts);
  std::printf("room u      %.6g\ndoor t      %.6g\n", res.u, res.t);
  for (const auto& c : rep.checks) {
    std::printf("identity    %-16s %.8g vs %.8g%s\n", c.name.c_str(), c.lhs, c.rhs,
                c.asserted ? (c.holds ? "  holds" : "  FAILS") : "  (not asserted)");
  }
  std::printf("cycles      %zu\nenergy      %.8g\ncapacity    %.8g\n", rep.cycles.cycles.size(),
              rep.energy_value, rep.capacity_value);
  if (!out.empty()) Emit(out, io::ToJson(rep).dump(1));
  if (!hours_csv.empty()) {
    ValuationOptions loose = opts;
    loose.require_kkt = false;
    const auto rel = OmegaPriceRelation(res, inst, loose);
    std::ostringstream os;
    os.precision(12);
    os << "hour,lambda,omega,delta_c,delta_d,tau,r,s,scarcity_premium,active\n";
    for (int h = 0; h < inst.num_hours(); ++h) {
      os << h << "," << res.lambda[h] << "," << res.omega[h] << "," << res.delta_c[h] << ","
         << res.delta_d[h] << "," << res.tau[h] << "," << res.r[h] << "," << res.s[h] << ","
         << rep.scarcity_premium[h] << "," << rel[h].active << "\n";
    }
    Emit(hours_csv, os.str());
  }
  bool failed = false;
  for (const auto& c : rep.checks) failed |= c.asserted && !c.holds;
  return failed ? kExitOther : 0;
}

int CmdGenerate(const std::string& profile, int n, int regions, std::uint64_t seed, bool acyclic,
                const std::string& out, const std::string& regions_out) {
  SyntheticSpec spec;
  spec.profile = ParseProfile(profile);
  spec.n_hours = n;
  spec.regions = regions;
  spec.seed = seed;
  spec.cyclic = !acyclic;
  const SyntheticData data = GenerateSynthetic(spec);
  Emit(out, io::ToJson(data.instance).dump(1));
  if (!regions_out.empty()) {
    io::Json rs = io::Json::array();
    for (const auto& r : data.regions) {
      rs.push_back({{"name", r.name},
                    {"load", std::vector<double>(r.load.data(), r.load.data() + r.load.size())},
                    {"wind", std::vector<double>(r.wind.data(), r.wind.data() + r.wind.size())},
                    {"solar", std::vector<double>(r.solar.data(), r.solar.data() + r.solar.size())}});
    }
    io::WriteTextFile(regions_out, rs.dump(1) + "\n");
  }
  if (data.extreme_day >= 0) std::fprintf(stderr, "extreme day %d\n", data.extreme_day);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacity planning with storage: solves, aggregation, valuation and ADMM"};
  app.require_subcommand(1);

  std::string instance, out, result_out, csv, sweep_csv, json_out, table, result_path;
  bool no_storage = false, audit = false;
  AdmmFlags admm_solve, admm_cmd;

  auto* solve = app.add_subcommand("solve", "Solve the full-resolution planning LP");
  solve->add_option("instance", instance, "Instance JSON")->required();
  solve->add_option("-o,--out", out, "Write the solution as JSON");
  solve->add_flag("--no-storage", no_storage, "Force t = u = 0");
  solve->add_flag("--audit", audit, "Run the KKT audit on the result");
  admm_solve.Add(solve, true);

  std::string method = "lossless", selection = "kmeans-medoid", linkage = "isolated";
  int k = 0;
  bool agg_solve = false;
  double tol = 0.0;
  auto* aggregate = app.add_subcommand("aggregate", "Build a temporal aggregation");
  aggregate->add_option("instance", instance, "Instance JSON")->required();
  aggregate->add_option("--method", method,
                        "identity, lossless, rep-days, system-states or adjacent");
  aggregate->add_option("-k", k, "Days or states");
  aggregate->add_option("--selection", selection, "kmeans-medoid or peak-median");
  aggregate->add_option("--linkage", linkage, "isolated or chained");
  aggregate->add_option("--tol", tol, "Tolerance for profile equality");
  aggregate->add_option("-o,--out", out, "Write the aggregation as JSON");
  aggregate->add_flag("--solve", agg_solve, "Solve the aggregated LP");
  aggregate->add_option("--result", result_out, "Write the aggregated solution as JSON");

  std::string scenario;
  auto* compare = app.add_subcommand("compare", "Run a scenario's method comparison");
  compare->add_option("scenario", scenario, "Scenario JSON")->required();
  compare->add_option("--csv", csv, "Write the report as CSV ('-' for stdout)");
  compare->add_option("--sweep-csv", sweep_csv, "Write the marginal-value sweep as CSV");
  compare->add_option("--json", json_out, "Write the report as JSON");

  int regions = 1, n = 8760;
  std::uint64_t seed = 1;
  double radius = 0.0;
  auto* extreme = app.add_subcommand("extreme-days", "Select days covering extreme vertices");
  extreme->add_option("instance", instance, "Instance JSON (one region); omit for synthetic data");
  extreme->add_option("--regions", regions, "Synthetic regions");
  extreme->add_option("-n", n, "Synthetic horizon in hours");
  extreme->add_option("--seed", seed, "Synthetic seed");
  extreme->add_option("--radius", radius, "Cover radius in normalized units")->required();
  extreme->add_option("-o,--out", out, "Write the cover as JSON");
  extreme->add_option("--table", table, "Write day coordinates and chosen flags as CSV");

  auto* valuation = app.add_subcommand("valuation", "Storage marginal values and identities");
  valuation->add_option("instance", instance, "Instance JSON")->required();
  valuation->add_option("--result", result_path, "Use a saved solution instead of solving");
  valuation->add_option("-o,--out", out, "Write the value report as JSON");
  valuation->add_option("--hours", csv, "Write hourly prices as CSV");

  auto* admm = app.add_subcommand("admm", "Solve by ADMM and emit the trace");
  admm->add_option("instance", instance, "Instance JSON")->required();
  admm->add_option("-o,--out", out, "Write the solution as JSON");
  admm_cmd.Add(admm, false);

  std::string profile = "seasonal", regions_out;
  bool acyclic = false;
  auto* generate = app.add_subcommand("generate", "Write a synthetic instance");
  generate->add_option("--profile", profile, "peaky, seasonal, alternating-days or iid");
  generate->add_option("-n", n, "Horizon in hours");
  generate->add_option("--regions", regions, "Regions");
  generate->add_option("--seed", seed, "Seed");
  generate->add_flag("--acyclic", acyclic, "Storage starts empty instead of wrapping");
  generate->add_option("-o,--out", out, "Instance JSON path ('-' for stdout)");
  generate->add_option("--regions-out", regions_out, "Write the regional series as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return CmdSolve(instance, out, no_storage, audit, admm_solve);
    if (*aggregate) {
      return CmdAggregate(instance, method, k, selection, linkage, out, agg_solve, result_out, tol);
    }
    if (*compare) return CmdCompare(scenario, csv, sweep_csv, json_out);
    if (*extreme) return CmdExtremeDays(instance, regions, n, seed, radius, out, table);
    if (*valuation) return CmdValuation(instance, result_path, out, csv);
    if (*admm) {
      admm_cmd.enabled = true;
      if (admm_cmd.trace.empty()) admm_cmd.trace = "-";
      const SystemInstance inst = io::ReadInstance(instance);
      const AdmmResult ar = AdmmSolve(inst, admm_cmd.Config());
      Emit(admm_cmd.trace, ar.trace.ToCsv());
      if (!out.empty()) io::WriteTextFile(out, io::ToJson(ar.result).dump(1) + "\n");
      std::fprintf(stderr, "%s after %zu iterations, objective %.10g\n",
                   ar.converged() ? "converged" : "not converged", ar.trace.iterations.size(),
                   ar.result.objective);
      return 0;
    }
    if (*generate) return CmdGenerate(profile, n, regions, seed, acyclic, out, regions_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "storeplan: %s\n", e.what());
    return ExitFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "storeplan: %s\n", e.what());
    return kExitOther;
  }
  return 0;
}
