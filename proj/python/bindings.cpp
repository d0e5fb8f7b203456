#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "finsler/bregman.hpp"
#include "finsler/calibration.hpp"
#include "finsler/commands.hpp"
#include "finsler/config.hpp"
#include "finsler/energy.hpp"
#include "finsler/errors.hpp"
#include "finsler/grid.hpp"
#include "finsler/morrey.hpp"
#include "finsler/norms.hpp"
#include "finsler/variational.hpp"

namespace py = pybind11;
using namespace finsler;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) {
  const auto buf = a.request();
  const auto* p = static_cast<const double*>(buf.ptr);
  return std::vector<double>(p, p + buf.size);
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

// Flat node values in grid order, first axis fastest.
GridFunction grid_function(const GridPtr& g, const Array& values) {
  auto v = to_vec(values);
  if (v.size() != g->size()) {
    throw ArgumentError("expected " + std::to_string(g->size()) + " node values, got " +
                        std::to_string(v.size()));
  }
  return GridFunction(g, std::move(v));
}

GridFunction grid_function_or(const GridPtr& g, const py::object& values, double fill) {
  if (values.is_none()) return GridFunction(g, fill);
  if (py::isinstance<py::float_>(values) || py::isinstance<py::int_>(values)) {
    return GridFunction(g, values.cast<double>());
  }
  return grid_function(g, values.cast<Array>());
}

std::vector<std::uint8_t> node_set(const GridPtr& g, const py::array_t<std::uint8_t, py::array::forcecast>& a) {
  const auto buf = a.request();
  if (static_cast<std::size_t>(buf.size) != g->size()) throw ArgumentError("node set has the wrong size");
  const auto* p = static_cast<const std::uint8_t*>(buf.ptr);
  return std::vector<std::uint8_t>(p, p + buf.size);
}

SolverConfig solver(double tol, std::size_t restarts, std::uint64_t seed, std::size_t max_iter) {
  SolverConfig cfg;
  cfg.tol = tol;
  cfg.restarts = restarts;
  cfg.seed = seed;
  cfg.max_iter = max_iter;
  return cfg;
}

py::dict solve_dict(const SolveResult& r) {
  py::dict d;
  d["value"] = r.value;
  d["converged"] = r.converged;
  d["infinite"] = r.infinite;
  d["supercritical"] = r.supercritical;
  d["iterations"] = r.iterations;
  d["stationarity"] = r.stationarity;
  d["minimizer"] = to_array(r.minimizer.values());
  d["history"] = to_array(r.history);
  return d;
}

py::object json_to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json py_to_json(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anisotropic p-energies: norms, Bregman estimates, capacities and Hardy constants";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SamplingError>(m, "SamplingError", PyExc_RuntimeError);
  py::register_exception<SetupError>(m, "SetupError", PyExc_RuntimeError);

  py::class_<ExponentPair>(m, "ExponentPair")
      .def(py::init<double, double>(), py::arg("p"), py::arg("s"))
      .def_property_readonly("p", &ExponentPair::p)
      .def_property_readonly("s", &ExponentPair::s)
      .def_property_readonly("m", &ExponentPair::m)
      .def_property_readonly("M", &ExponentPair::M);

  py::class_<NormFamily>(m, "NormFamily")
      .def_static("weighted_s", &NormFamily::weighted_s, py::arg("s"), py::arg("a"))
      .def_static("matrix", [](const Eigen::MatrixXd& A) { return NormFamily::matrix(A); }, py::arg("A"))
      .def_static("combined", &NormFamily::combined, py::arg("s"), py::arg("a"), py::arg("A"))
      .def_property_readonly("dim", &NormFamily::dim)
      .def_property_readonly("s", &NormFamily::s);

  m.def("norm", [](const Array& xi, const NormFamily& fam, const ExponentPair& ep) {
    return norm(to_vec(xi), fam, ep);
  }, py::arg("xi"), py::arg("fam"), py::arg("ep"));
  m.def("lagrangian_F", [](const Array& xi, const NormFamily& fam, const ExponentPair& ep) {
    return lagrangian_F(to_vec(xi), fam, ep);
  }, py::arg("xi"), py::arg("fam"), py::arg("ep"));
  m.def("operator_A", [](const Array& xi, const NormFamily& fam, const ExponentPair& ep) {
    return to_array(operator_A(to_vec(xi), fam, ep));
  }, py::arg("xi"), py::arg("fam"), py::arg("ep"));
  m.def("structure_constants", [](const NormFamily& fam, const ExponentPair& ep) {
    const auto c = structure_constants(fam, ep);
    py::dict d;
    d["kappa"] = c.kappa;
    d["nu"] = c.nu;
    d["alpha"] = c.alpha;
    d["beta"] = c.beta;
    return d;
  }, py::arg("fam"), py::arg("ep"));

  m.def("scalar_bregman", &scalar_bregman, py::arg("p"), py::arg("x"), py::arg("y"));
  m.def("bregman_distance", [](const NormFamily& fam, const ExponentPair& ep, const Array& xi, const Array& eta) {
    return bregman_distance(fam, ep, to_vec(xi), to_vec(eta));
  }, py::arg("fam"), py::arg("ep"), py::arg("xi"), py::arg("eta"));
  m.def("estimate_constants", [](const std::string& lemma, const NormFamily& fam, const ExponentPair& ep,
                                 std::size_t N, std::uint64_t seed) {
    const LemmaId id = lemma_from_string(lemma);
    EstimateReport r;
    {
      py::gil_scoped_release release;
      r = estimate_equivalence_constants(id, fam, ep, SamplerConfig{}, N, seed);
    }
    py::dict d;
    d["lemma"] = to_string(r.lemma);
    d["c_hat"] = r.c_hat;
    d["C_hat"] = r.C_hat;
    d["samples"] = r.sample_count;
    d["violations"] = r.violation_count;
    return d;
  }, py::arg("lemma"), py::arg("fam"), py::arg("ep"), py::arg("N") = 100000, py::arg("seed") = 0);

  py::class_<GridDomain, std::shared_ptr<GridDomain>>(m, "Grid")
      .def_static("unit_box", [](std::size_t dim, std::size_t cells) {
        return std::make_shared<GridDomain>(GridDomain::unit_box(dim, cells));
      }, py::arg("dim"), py::arg("cells"))
      .def_property_readonly("dim", &GridDomain::dim)
      .def_property_readonly("h", &GridDomain::h)
      .def_property_readonly("size", &GridDomain::size)
      .def_property_readonly("shape", [](const GridDomain& g) {
        std::vector<std::size_t> s(g.shape().begin(), g.shape().begin() + g.dim());
        return s;
      })
      .def_property_readonly("mask_count", &GridDomain::mask_count)
      .def_property_readonly("mask", [](const GridDomain& g) {
        return py::array_t<std::uint8_t>(static_cast<py::ssize_t>(g.size()), g.mask().data());
      })
      .def("coords", [](const GridDomain& g) {
        py::array_t<double> out({static_cast<py::ssize_t>(g.size()), static_cast<py::ssize_t>(g.dim())});
        auto r = out.mutable_unchecked<2>();
        double x[3];
        for (std::size_t i = 0; i < g.size(); ++i) {
          g.coords(i, x);
          for (std::size_t a = 0; a < g.dim(); ++a) r(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(a)) = x[a];
        }
        return out;
      }, "node coordinates, one row per node");

  m.def("energy_Q", [](const std::shared_ptr<GridDomain>& g, const Array& phi, const NormFamily& fam,
                       const ExponentPair& ep, const py::object& V) {
    const GridPtr gp = g;
    return energy_Q(grid_function(gp, phi), fam, ep, grid_function_or(gp, V, 0.0));
  }, py::arg("grid"), py::arg("phi"), py::arg("fam"), py::arg("ep"), py::arg("V") = py::none());

  m.def("hardy_constant", [](const std::shared_ptr<GridDomain>& g, const NormFamily& fam, const ExponentPair& ep,
                             const py::object& weight, const py::object& V, double tol, std::size_t restarts,
                             std::uint64_t seed, std::size_t max_iter) {
    const GridPtr gp = g;
    const HardyProblem prob{gp, fam, ep, grid_function_or(gp, V, 0.0), grid_function_or(gp, weight, 1.0)};
    SolveResult r;
    {
      py::gil_scoped_release release;
      r = hardy_constant(prob, solver(tol, restarts, seed, max_iter));
    }
    return solve_dict(r);
  }, py::arg("grid"), py::arg("fam"), py::arg("ep"), py::arg("weight") = py::none(), py::arg("V") = py::none(),
     py::arg("tol") = 1e-8, py::arg("restarts") = 3, py::arg("seed") = 0, py::arg("max_iter") = 50000);

  m.def("capacity", [](const std::shared_ptr<GridDomain>& g, const NormFamily& fam, const ExponentPair& ep,
                       const py::array_t<std::uint8_t, py::array::forcecast>& K, const py::object& obstacle,
                       const py::object& V, double tol, std::size_t restarts, std::uint64_t seed,
                       std::size_t max_iter) {
    const GridPtr gp = g;
    const CapacityProblem prob{gp, fam, ep, grid_function_or(gp, V, 0.0), node_set(gp, K),
                               grid_function_or(gp, obstacle, 1.0)};
    SolveResult r;
    {
      py::gil_scoped_release release;
      r = capacity(prob, solver(tol, restarts, seed, max_iter));
    }
    return solve_dict(r);
  }, py::arg("grid"), py::arg("fam"), py::arg("ep"), py::arg("K"), py::arg("obstacle") = py::none(),
     py::arg("V") = py::none(), py::arg("tol") = 1e-8, py::arg("restarts") = 3, py::arg("seed") = 0,
     py::arg("max_iter") = 50000);

  m.def("morrey_norm", [](const std::shared_ptr<GridDomain>& g, const Array& f, double p, double q,
                          std::size_t level) {
    const GridPtr gp = g;
    const auto r = morrey_norm(grid_function(gp, f), MorreySpec{p, q}, MorreyLattice::refined(level));
    py::dict d;
    d["value"] = r.value;
    d["best_radius"] = r.best_radius;
    d["centers"] = r.centers;
    d["radii"] = r.radii;
    return d;
  }, py::arg("grid"), py::arg("f"), py::arg("p"), py::arg("q"), py::arg("level") = 0);

  m.def("schema", [] { return json_to_py(experiment_schema()); }, "the experiment config schema");
  m.def("normalize_config", [](const py::object& cfg) { return json_to_py(normalize_config(py_to_json(cfg))); },
        py::arg("config"), "validates a config and fills in defaults");
  m.def("run", [](const py::object& cfg) {
    const Json doc = normalize_config(py_to_json(cfg));
    CommandOutput out;
    {
      py::gil_scoped_release release;
      out = run_command(doc);
    }
    py::dict files;
    for (const auto& f : out.files) files[py::str(f.name)] = py::bytes(f.content);
    py::dict external;
    for (const auto& f : out.external) external[py::str(f.name)] = py::bytes(f.content);
    py::dict d;
    d["status"] = out.status;
    d["files"] = files;
    d["external"] = external;
    d["lines"] = out.lines;
    return d;
  }, py::arg("config"), "runs one experiment in memory; nothing is written to disk");
}
