#include "storeplan/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "storeplan/error.hpp"

namespace storeplan::io {

namespace {

[[noreturn]] void Bad(const std::string& what) { throw Error(ErrorCode::kInvalidInput, what); }

const Json& Field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) Bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

double Number(const Json& j, const char* what) {
  if (!j.is_number()) Bad(std::string(what) + " must be a number");
  return j.get<double>();
}

template <class T>
T Get(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    Bad(std::string("field '") + key + "' has the wrong type");
  }
}

Eigen::VectorXd Vector(const Json& j, const char* what) {
  if (!j.is_array()) Bad(std::string(what) + " must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = Number(j[i], what);
  return v;
}

// A scalar broadcasts over n entries.
Eigen::VectorXd Series(const Json& j, Eigen::Index n, const char* what) {
  if (j.is_number()) return Eigen::VectorXd::Constant(n, j.get<double>());
  Eigen::VectorXd v = Vector(j, what);
  if (v.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " length differs from demand");
  }
  return v;
}

Eigen::MatrixXd Rows(const Json& j, const char* what) {
  if (!j.is_array()) Bad(std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) Bad(std::string(what) + " rows are ragged");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = Number(j[i][c], what);
  }
  return m;
}

Json Array(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json Array(const Eigen::VectorXi& v) { return Json(std::vector<int>(v.data(), v.data() + v.size())); }

Json RowsJson(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(Array(Eigen::VectorXd(m.row(i))));
  return out;
}

Json Checks(const std::vector<IdentityCheck>& checks) {
  Json out = Json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"asserted", c.asserted},
                   {"holds", c.holds}});
  }
  return out;
}

// NaN is not representable in JSON.
Json Num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

SystemInstance InstanceFromJson(const Json& j) {
  SystemInstance inst;
  inst.demand = Vector(Field(j, "demand"), "demand");
  const auto n = inst.demand.size();
  inst.grid.n_hours = static_cast<int>(n);
  inst.grid.cyclic = Get(j, "cyclic", true);
  if (j.contains("n_hours") && Get(j, "n_hours", 0) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "n_hours differs from the demand length");
  }
  const Json& gens = Field(j, "generators");
  if (!gens.is_array()) Bad("generators must be an array");
  for (const auto& g : gens) {
    GeneratorSpec spec;
    spec.name = Get<std::string>(g, "name", "g" + std::to_string(inst.generators.size()));
    spec.var_cost = Series(Field(g, "var_cost"), n, "var_cost");
    spec.cap_cost = Number(Field(g, "cap_cost"), "cap_cost");
    spec.availability = Series(g.contains("availability") ? g.at("availability") : Json(1.0), n,
                               "availability");
    inst.generators.push_back(std::move(spec));
  }
  const Json& st = Field(j, "storage");
  inst.storage.door_cost = Number(Field(st, "door_cost"), "door_cost");
  inst.storage.room_cost = Number(Field(st, "room_cost"), "room_cost");
  inst.Validate();
  return inst;
}

Json ToJson(const SystemInstance& inst) {
  Json gens = Json::array();
  for (const auto& g : inst.generators) {
    gens.push_back({{"name", g.name},
                    {"var_cost", Array(g.var_cost)},
                    {"cap_cost", g.cap_cost},
                    {"availability", Array(g.availability)}});
  }
  return {{"n_hours", inst.num_hours()},
          {"cyclic", inst.grid.cyclic},
          {"demand", Array(inst.demand)},
          {"generators", gens},
          {"storage", {{"door_cost", inst.storage.door_cost}, {"room_cost", inst.storage.room_cost}}}};
}

Aggregation AggregationFromJson(const Json& j) {
  Aggregation agg;
  const Eigen::VectorXd gamma = Vector(Field(j, "gamma"), "gamma");
  agg.gamma = gamma.cast<int>();
  if (!gamma.isApprox(agg.gamma.cast<double>())) Bad("gamma must hold integers");
  agg.w = Vector(Field(j, "w"), "w");
  agg.q = Vector(Field(j, "q"), "q");
  agg.demand = Vector(Field(j, "demand"), "demand");
  agg.availability = Rows(Field(j, "availability"), "availability");
  agg.var_cost = Rows(Field(j, "var_cost"), "var_cost");
  agg.cyclic = Get(j, "cyclic", true);
  const Json& p = Field(j, "P");
  const auto S = agg.w.size();
  if (!p.is_array() || static_cast<Eigen::Index>(p.size()) != S) Bad("P needs one row per state");
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < S; ++i) {
    const Json& row = p[i];
    if (!row.is_array()) Bad("P rows must be arrays");
    const bool dense = static_cast<Eigen::Index>(row.size()) == S &&
                       std::all_of(row.begin(), row.end(), [](const Json& e) { return e.is_number(); });
    if (dense) {
      for (Eigen::Index c = 0; c < S; ++c) {
        const double v = row[c].get<double>();
        if (v != 0.0) trip.emplace_back(static_cast<int>(i), static_cast<int>(c), v);
      }
    } else {
      for (const auto& e : row) {
        if (!e.is_array() || e.size() != 2) Bad("sparse P entries are [col, value] pairs");
        const int c = e[0].get<int>();
        if (c < 0 || c >= S) Bad("P column out of range");
        trip.emplace_back(static_cast<int>(i), c, Number(e[1], "P"));
      }
    }
  }
  agg.P.resize(S, S);
  agg.P.setFromTriplets(trip.begin(), trip.end());
  agg.Validate();
  return agg;
}

Json ToJson(const Aggregation& agg) {
  Json p = Json::array();
  for (int i = 0; i < agg.P.outerSize(); ++i) {
    Json row = Json::array();
    for (SparseRowMatrix::InnerIterator it(agg.P, i); it; ++it) {
      row.push_back(Json::array({it.col(), it.value()}));
    }
    p.push_back(row);
  }
  return {{"num_states", agg.num_states()},
          {"cyclic", agg.cyclic},
          {"gamma", Array(agg.gamma)},
          {"w", Array(agg.w)},
          {"q", Array(agg.q)},
          {"P", p},
          {"demand", Array(agg.demand)},
          {"availability", RowsJson(agg.availability)},
          {"var_cost", RowsJson(agg.var_cost)}};
}

Json ToJson(const SolveResult& r) {
  return {{"objective", r.objective},
          {"cyclic", r.cyclic},
          {"storage_fixed", r.storage_fixed},
          {"z", Array(r.z)},
          {"t", r.t},
          {"u", r.u},
          {"x", RowsJson(r.x)},
          {"r", Array(r.r)},
          {"s", Array(r.s)},
          {"lambda", Array(r.lambda)},
          {"rho", RowsJson(r.rho)},
          {"omega", Array(r.omega)},
          {"delta_c", Array(r.delta_c)},
          {"delta_d", Array(r.delta_d)},
          {"tau", Array(r.tau)},
          {"iterations", r.iterations},
          {"relative_gap", r.relative_gap}};
}

Json ToJson(const AggSolveResult& r) {
  Json j = ToJson(static_cast<const SolveResult&>(r));
  j["num_states"] = r.num_states();
  return j;
}

SolveResult SolveResultFromJson(const Json& j) {
  SolveResult r;
  r.objective = Number(Field(j, "objective"), "objective");
  r.cyclic = Get(j, "cyclic", true);
  r.storage_fixed = Get(j, "storage_fixed", false);
  r.z = Vector(Field(j, "z"), "z");
  r.t = Number(Field(j, "t"), "t");
  r.u = Number(Field(j, "u"), "u");
  r.x = Rows(Field(j, "x"), "x");
  r.r = Vector(Field(j, "r"), "r");
  r.s = Vector(Field(j, "s"), "s");
  r.lambda = Vector(Field(j, "lambda"), "lambda");
  r.rho = Rows(Field(j, "rho"), "rho");
  r.omega = Vector(Field(j, "omega"), "omega");
  r.delta_c = Vector(Field(j, "delta_c"), "delta_c");
  r.delta_d = Vector(Field(j, "delta_d"), "delta_d");
  r.tau = Vector(Field(j, "tau"), "tau");
  r.iterations = Get(j, "iterations", 0);
  r.relative_gap = Get(j, "relative_gap", 0.0);
  return r;
}

Json ToJson(const KktReport& rep) {
  Json v = Json::array();
  for (const auto& x : rep.violations) {
    v.push_back({{"condition", x.condition}, {"hour", x.hour}, {"generator", x.generator},
                 {"magnitude", x.magnitude}});
  }
  return {{"ok", rep.ok()}, {"violations", v}};
}

Json ToJson(const LosslessReport& rep) {
  Json v = Json::array();
  for (const auto& x : rep.violations) {
    v.push_back({{"condition", x.condition}, {"states", x.states}, {"hours", x.hours},
                 {"magnitude", x.magnitude}, {"detail", x.detail}});
  }
  return {{"lossless", rep.lossless()}, {"violations", v}};
}

Json ToJson(const ValueReport& rep) {
  Json cycles = Json::array();
  for (const auto& c : rep.cycles.cycles) {
    cycles.push_back({{"start", c.start}, {"end", c.end}, {"value", c.value}});
  }
  return {{"room_rent_sum", rep.room_rent_sum},
          {"door_rent_sum", rep.door_rent_sum},
          {"omega_pos_diff_sum", rep.omega_pos_diff_sum},
          {"checks", Checks(rep.checks)},
          {"cycles", cycles},
          {"no_zero_soc", rep.cycles.no_zero_soc},
          {"cycle_value_sum", rep.cycles.value_sum},
          {"energy_value", rep.energy_value},
          {"capacity_value", rep.capacity_value},
          {"scarcity_premium", Array(rep.scarcity_premium)},
          {"undispatched_hours", rep.undispatched_hours}};
}

Json ToJson(const VertexCover& cover, const CumulativeDayset& cds) {
  Json vertices = Json::array();
  for (const auto& v : cover.vertices) {
    vertices.push_back({{"region", cds.regions.at(v.region)},
                        {"corner", {v.corner[0], v.corner[1], v.corner[2]}},
                        {"assigned_day", v.assigned_day},
                        {"distance", Num(v.distance)},
                        {"uncoverable", v.uncoverable}});
  }
  return {{"radius", cover.radius},
          {"num_days", cds.num_days()},
          {"regions", cds.regions},
          {"chosen_days", cover.chosen_days},
          {"num_uncoverable", cover.num_uncoverable()},
          {"vertices", vertices}};
}

Json ToJson(const AdmmTrace& trace) {
  Json it = Json::array();
  for (const auto& r : trace.iterations) {
    it.push_back({{"iter", r.iter},
                  {"primal_residual", r.primal_residual},
                  {"dual_residual", r.dual_residual},
                  {"objective", r.objective},
                  {"seconds", r.seconds},
                  {"beta", r.beta}});
  }
  return {{"converged", trace.converged}, {"iterations", it}};
}

Json ToJson(const ComparisonReport& rep) {
  static const std::vector<std::pair<const char*, double MethodOutcome::*>> fields = {
      {"room", &MethodOutcome::room},
      {"door", &MethodOutcome::door},
      {"objective", &MethodOutcome::objective},
      {"energy_value", &MethodOutcome::energy_value},
      {"capacity_value", &MethodOutcome::capacity_value},
      {"seconds", &MethodOutcome::seconds}};
  Json rows = Json::array();
  for (int i = 0; i < static_cast<int>(rep.rows.size()); ++i) {
    const MethodOutcome& r = rep.rows[i];
    Json abs, rel;
    for (const auto& [name, f] : fields) {
      abs[name] = r.*f;
      rel[name] = Num(rep.Relative(i, f));
    }
    Json row = {{"method", r.label}, {"ok", r.ok},          {"converged", r.converged},
                {"states", r.num_states}, {"absolute", abs}, {"relative", rel}};
    if (!r.ok) row["error"] = r.error;
    rows.push_back(row);
  }
  Json sweep = Json::array();
  for (const auto& c : rep.sweep) {
    Json pts = Json::array();
    for (const auto& p : c.points) {
      pts.push_back({{"room_cost", p.room_cost}, {"room", p.room}, {"ok", p.ok}});
    }
    sweep.push_back({{"method", c.label}, {"points", pts}});
  }
  return {{"scenario", rep.scenario},
          {"baseline", rep.baseline < 0 ? Json(nullptr) : Json(rep.rows[rep.baseline].label)},
          {"rows", rows},
          {"sweep", sweep}};
}

AdmmConfig AdmmConfigFromJson(const Json& j, AdmmConfig cfg) {
  if (j.contains("scheme")) cfg.scheme = ParseBlockScheme(Get<std::string>(j, "scheme", ""));
  if (j.contains("blocks")) cfg.scheme = ParseBlockScheme(Get<std::string>(j, "blocks", ""));
  cfg.beta = Get(j, "beta", cfg.beta);
  cfg.max_iters = Get(j, "max_iters", cfg.max_iters);
  cfg.eps_primal = Get(j, "eps_primal", cfg.eps_primal);
  cfg.eps_dual = Get(j, "eps_dual", cfg.eps_dual);
  if (j.contains("eps")) cfg.eps_primal = cfg.eps_dual = Get(j, "eps", 0.0);
  cfg.threads = Get(j, "threads", cfg.threads);
  cfg.adaptive_beta = Get(j, "adaptive_beta", cfg.adaptive_beta);
  cfg.adapt_iters = Get(j, "adapt_iters", cfg.adapt_iters);
  cfg.relaxation = Get(j, "relaxation", cfg.relaxation);
  cfg.Validate();
  return cfg;
}

MethodSpec MethodFromJson(const Json& j) {
  MethodSpec m;
  if (j.is_string()) {
    m.kind = ParseMethodKind(j.get<std::string>());
  } else {
    if (!Field(j, "method").is_string()) Bad("method must be a string");
    m.kind = ParseMethodKind(j.at("method").get<std::string>());
    m.k = Get(j, "k", 0);
    if (j.contains("selection")) m.selection = ParseDaySelection(Get<std::string>(j, "selection", ""));
    if (j.contains("linkage")) m.linkage = ParseDayLinkage(Get<std::string>(j, "linkage", ""));
    m.label = Get<std::string>(j, "label", "");
    if (m.kind == MethodSpec::Kind::kAdmm) m.admm = AdmmConfigFromJson(j);
  }
  using K = MethodSpec::Kind;
  if ((m.kind == K::kRepDays || m.kind == K::kSystemStates || m.kind == K::kAdjacent) && m.k < 1) {
    Bad(MethodKindName(m.kind) + " needs k >= 1");
  }
  return m;
}

SyntheticSpec SyntheticFromJson(const Json& j) {
  SyntheticSpec s;
  if (!Field(j, "profile").is_string()) Bad("profile must be a string");
  s.profile = ParseProfile(j.at("profile").get<std::string>());
  s.n_hours = Get(j, "n_hours", s.n_hours);
  s.regions = Get(j, "regions", s.regions);
  s.seed = Get<std::uint64_t>(j, "seed", s.seed);
  s.cyclic = Get(j, "cyclic", s.cyclic);
  return s;
}

Scenario ScenarioFromJson(const Json& j, const std::string& base_dir) {
  if (!j.is_object()) Bad("scenario must be an object");
  Scenario sc;
  sc.name = Get<std::string>(j, "name", "");
  if (j.contains("instance")) {
    const Json& src = j.at("instance");
    if (src.is_string()) {
      std::filesystem::path p(src.get<std::string>());
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      sc.instance_path = p.string();
      sc.instance = ReadInstance(p.string());
    } else {
      sc.instance = InstanceFromJson(src);
    }
  }
  if (j.contains("synthetic")) sc.synthetic = SyntheticFromJson(j.at("synthetic"));
  const Json& methods = Field(j, "methods");
  if (!methods.is_array()) Bad("methods must be an array");
  for (const auto& m : methods) sc.methods.push_back(MethodFromJson(m));
  if (j.contains("carbon")) {
    const Json& c = j.at("carbon");
    CarbonPrice cp;
    cp.price = Number(Field(c, "price"), "carbon price");
    if (c.contains("emission_rates")) {
      for (const auto& [name, rate] : c.at("emission_rates").items()) {
        cp.emission_rates[name] = Number(rate, "emission rate");
      }
    }
    sc.carbon = cp;
  }
  if (j.contains("storage")) {
    const Json& st = j.at("storage");
    sc.storage = StorageSpec{Number(Field(st, "door_cost"), "door_cost"),
                             Number(Field(st, "room_cost"), "room_cost")};
  }
  if (j.contains("sweep")) {
    const Eigen::VectorXd s = Vector(j.at("sweep"), "sweep");
    sc.sweep.assign(s.data(), s.data() + s.size());
  }
  sc.threads = Get(j, "threads", 1);
  sc.Validate();
  return sc;
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Bad("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    Bad("'" + path + "' is not valid JSON: " + e.what());
  }
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) Bad("cannot write '" + path + "'");
  out << text;
}

SystemInstance ReadInstance(const std::string& path) { return InstanceFromJson(ReadJsonFile(path)); }

Aggregation ReadAggregation(const std::string& path) {
  return AggregationFromJson(ReadJsonFile(path));
}

Scenario ReadScenario(const std::string& path) {
  return ScenarioFromJson(ReadJsonFile(path),
                          std::filesystem::path(path).parent_path().string().empty()
                              ? "."
                              : std::filesystem::path(path).parent_path().string());
}

}  // namespace storeplan::io
