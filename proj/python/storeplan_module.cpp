#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "storeplan/admm.hpp"
#include "storeplan/agg_model.hpp"
#include "storeplan/aggregation.hpp"
#include "storeplan/error.hpp"
#include "storeplan/extreme_days.hpp"
#include "storeplan/harness.hpp"
#include "storeplan/io.hpp"
#include "storeplan/model_core.hpp"
#include "storeplan/valuation.hpp"

namespace py = pybind11;
using namespace storeplan;

namespace {

// Reports cross the boundary as plain dicts through their JSON form.
py::object ToPy(const io::Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

io::Json FromPy(const py::object& o) {
  const py::object text = py::module_::import("json").attr("dumps")(o);
  return io::Json::parse(text.cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_storeplan, m) {
  m.doc() = "Capacity planning LP with storage: aggregation, valuation and ADMM";

  // The type lives as a module attribute; the translator keeps a borrowed handle.
  static PyObject* error_type = py::exception<Error>(m, "StoreplanError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(ErrorCodeName(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::class_<GeneratorSpec>(m, "GeneratorSpec")
      .def(py::init([](std::string name, Eigen::VectorXd var_cost, double cap_cost,
                       Eigen::VectorXd availability) {
             return GeneratorSpec{std::move(name), std::move(var_cost), cap_cost,
                                  std::move(availability)};
           }),
           py::arg("name"), py::arg("var_cost"), py::arg("cap_cost"), py::arg("availability"))
      .def_readwrite("name", &GeneratorSpec::name)
      .def_readwrite("var_cost", &GeneratorSpec::var_cost)
      .def_readwrite("cap_cost", &GeneratorSpec::cap_cost)
      .def_readwrite("availability", &GeneratorSpec::availability);

  py::class_<StorageSpec>(m, "StorageSpec")
      .def(py::init([](double door, double room) { return StorageSpec{door, room}; }),
           py::arg("door_cost") = 0.0, py::arg("room_cost") = 0.0)
      .def_readwrite("door_cost", &StorageSpec::door_cost)
      .def_readwrite("room_cost", &StorageSpec::room_cost);

  py::class_<SystemInstance>(m, "SystemInstance")
      .def(py::init([](Eigen::VectorXd demand, std::vector<GeneratorSpec> gens,
                       StorageSpec storage, bool cyclic) {
             SystemInstance inst;
             inst.grid = {static_cast<int>(demand.size()), cyclic};
             inst.demand = std::move(demand);
             inst.generators = std::move(gens);
             inst.storage = storage;
             inst.Validate();
             return inst;
           }),
           py::arg("demand"), py::arg("generators"), py::arg("storage"), py::arg("cyclic") = true)
      .def_static("from_dict", [](const py::object& d) { return io::InstanceFromJson(FromPy(d)); })
      .def_static("load", &io::ReadInstance, py::arg("path"))
      .def("to_dict", [](const SystemInstance& s) { return ToPy(io::ToJson(s)); })
      .def_property_readonly("n_hours", &SystemInstance::num_hours)
      .def_property_readonly("cyclic", [](const SystemInstance& s) { return s.grid.cyclic; })
      .def_readwrite("demand", &SystemInstance::demand)
      .def_readwrite("generators", &SystemInstance::generators)
      .def_readwrite("storage", &SystemInstance::storage)
      .def("validate", &SystemInstance::Validate);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("x", &SolveResult::x)
      .def_readonly("z", &SolveResult::z)
      .def_readonly("t", &SolveResult::t)
      .def_readonly("u", &SolveResult::u)
      .def_readonly("r", &SolveResult::r)
      .def_readonly("s", &SolveResult::s)
      .def_readonly("lambda_", &SolveResult::lambda)
      .def_readonly("rho", &SolveResult::rho)
      .def_readonly("omega", &SolveResult::omega)
      .def_readonly("delta_c", &SolveResult::delta_c)
      .def_readonly("delta_d", &SolveResult::delta_d)
      .def_readonly("tau", &SolveResult::tau)
      .def_readonly("objective", &SolveResult::objective)
      .def_readonly("cyclic", &SolveResult::cyclic)
      .def("to_dict", [](const SolveResult& r) { return ToPy(io::ToJson(r)); });

  py::class_<AggSolveResult, SolveResult>(m, "AggSolveResult")
      .def_property_readonly("num_states", &AggSolveResult::num_states);

  py::class_<Aggregation>(m, "Aggregation")
      .def_readonly("gamma", &Aggregation::gamma)
      .def_readonly("w", &Aggregation::w)
      .def_readonly("q", &Aggregation::q)
      .def_property_readonly("P", [](const Aggregation& a) { return Eigen::MatrixXd(a.P); })
      .def_readonly("demand", &Aggregation::demand)
      .def_property_readonly("num_states", &Aggregation::num_states)
      .def_static("from_dict", [](const py::object& d) { return io::AggregationFromJson(FromPy(d)); })
      .def("to_dict", [](const Aggregation& a) { return ToPy(io::ToJson(a)); });

  m.def("solve_core", [](const SystemInstance& i) { return SolveCore(i); }, py::arg("instance"),
        py::call_guard<py::gil_scoped_release>());
  m.def("solve_core_without_storage", [](const SystemInstance& i) { return SolveCoreWithoutStorage(i); },
        py::arg("instance"), py::call_guard<py::gil_scoped_release>());
  m.def("audit_kkt",
        [](const SystemInstance& i, const SolveResult& r, double tol) {
          return ToPy(io::ToJson(AuditKkt(i, r, tol)));
        },
        py::arg("instance"), py::arg("result"), py::arg("tol") = kKktTol);

  m.def("aggregate_identity", &AggregateIdentity, py::arg("instance"));
  m.def("compress_lossless", &CompressLossless, py::arg("instance"), py::arg("tol") = 0.0);
  m.def("check_lossless",
        [](const Aggregation& a, const SystemInstance& i, double tol) {
          return ToPy(io::ToJson(CheckLossless(a, i, tol)));
        },
        py::arg("aggregation"), py::arg("instance"), py::arg("tol") = 0.0);
  m.def("representative_days",
        [](const SystemInstance& i, int k, const std::string& linkage, const std::string& sel) {
          return RepresentativeDaysAggregation(i, k, ParseDayLinkage(linkage), ParseDaySelection(sel));
        },
        py::arg("instance"), py::arg("k"), py::arg("linkage") = "isolated",
        py::arg("selection") = "kmeans-medoid");
  m.def("system_states", &SystemStates, py::arg("instance"), py::arg("k"));
  m.def("adjacent_clusters", &AdjacentClusters, py::arg("instance"), py::arg("k"));
  m.def("adjacent_lossless_threshold", &AdjacentLosslessThreshold, py::arg("instance"),
        py::arg("tol") = 0.0);
  m.def("solve_aggregated",
        [](const SystemInstance& i, const Aggregation& a) { return SolveAggregated(i, a); },
        py::arg("instance"), py::arg("aggregation"), py::call_guard<py::gil_scoped_release>());
  m.def("expand_solution", &ExpandSolution, py::arg("result"), py::arg("aggregation"));

  m.def("value_storage",
        [](const SolveResult& r, const SystemInstance& i, bool require_kkt, bool enforce) {
          ValuationOptions o;
          o.require_kkt = require_kkt;
          o.enforce_identities = enforce;
          return ToPy(io::ToJson(ValueStorage(r, i, o)));
        },
        py::arg("result"), py::arg("instance"), py::arg("require_kkt") = true,
        py::arg("enforce_identities") = true);
  m.def("energy_capacity_split",
        [](const SolveResult& r, const SystemInstance& i, bool require_kkt) {
          ValuationOptions o;
          o.require_kkt = require_kkt;
          const ValueSplit s = EnergyCapacitySplit(r, i, o);
          return py::dict(py::arg("energy_value") = s.energy_value,
                          py::arg("capacity_value") = s.capacity_value,
                          py::arg("scarcity_premium") = s.scarcity_premium,
                          py::arg("undispatched_hours") = s.undispatched_hours);
        },
        py::arg("result"), py::arg("instance"), py::arg("require_kkt") = true);

  m.def("admm_solve",
        [](const SystemInstance& i, const py::object& cfg) {
          AdmmConfig c = cfg.is_none() ? AdmmConfig{} : io::AdmmConfigFromJson(FromPy(cfg));
          AdmmResult ar;
          {
            py::gil_scoped_release release;
            ar = AdmmSolve(i, c);
          }
          return py::make_tuple(ar.result, ToPy(io::ToJson(ar.trace)));
        },
        py::arg("instance"), py::arg("config") = py::none(),
        "Returns (SolveResult, trace dict). config keys: scheme, beta, max_iters, eps_primal, "
        "eps_dual, threads, adaptive_beta, adapt_iters, relaxation.");

  m.def("cumulative_days",
        [](const SystemInstance& i) { return CumulativeDays({RegionFromInstance(i)}).days; },
        py::arg("instance"));
  m.def("select_extreme_days",
        [](const Eigen::MatrixXd& days, double radius) {
          CumulativeDayset cds;
          cds.days = days;
          if (days.cols() % 3 != 0) throw Error(ErrorCode::kDimensionMismatch, "need 3 columns per region");
          for (Eigen::Index k = 0; k < days.cols() / 3; ++k) cds.regions.push_back("region_" + std::to_string(k));
          return ToPy(io::ToJson(SelectExtremeDays(cds, radius), cds));
        },
        py::arg("days"), py::arg("radius"),
        "days: D x 3R matrix of normalized (load, wind, solar) per region.");

  m.def("generate_synthetic",
        [](const std::string& profile, int n, int regions, std::uint64_t seed, bool cyclic) {
          SyntheticSpec s{ParseProfile(profile), n, regions, seed, cyclic};
          return GenerateSynthetic(s).instance;
        },
        py::arg("profile"), py::arg("n_hours"), py::arg("regions") = 1, py::arg("seed") = 1,
        py::arg("cyclic") = true);
  m.def("synthetic_cumulative_days",
        [](const std::string& profile, int n, int regions, std::uint64_t seed) {
          SyntheticSpec s{ParseProfile(profile), n, regions, seed, true};
          return CumulativeDays(GenerateSynthetic(s).regions).days;
        },
        py::arg("profile"), py::arg("n_hours"), py::arg("regions"), py::arg("seed") = 1);
  m.def("run_comparison",
        [](const py::object& scenario, const std::string& base_dir) {
          const Scenario sc = io::ScenarioFromJson(FromPy(scenario), base_dir);
          ComparisonReport rep;
          {
            py::gil_scoped_release release;
            rep = RunComparison(sc);
          }
          return ToPy(io::ToJson(rep));
        },
        py::arg("scenario"), py::arg("base_dir") = ".");
}
