#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hypoguard/cli.hpp"
#include "hypoguard/error.hpp"
#include "hypoguard/guarantees.hpp"

namespace py = pybind11;
using namespace hypoguard;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-time error bounds for kinetic samplers";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<AdmissibilityError>(m, "AdmissibilityError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<BernsteinPair>(m, "BernsteinPair")
      .def(py::init([](double v, double b) {
             BernsteinPair p{v, b};
             p.validate();
             return p;
           }),
           py::arg("v"), py::arg("b"))
      .def_readonly("v", &BernsteinPair::v)
      .def_readonly("b", &BernsteinPair::b)
      .def("__repr__", [](const BernsteinPair& p) {
        std::ostringstream out;
        out.precision(17);
        out << "BernsteinPair(v=" << p.v << ", b=" << p.b << ")";
        return out.str();
      });

  m.def("psi", &psi, py::arg("pair"), py::arg("lam"));
  m.def("psi_star", &psi_star, py::arg("pair"), py::arg("r"));
  m.def("psi_star_inv", &psi_star_inv, py::arg("pair"), py::arg("eta"));

  m.def(
      "lambda_of_eps",
      [](double lambda_p, double lambda_q, double R0, double eps) {
        return lambda_of_eps({lambda_p, lambda_q, R0, eps});
      },
      py::arg("lambda_p"), py::arg("lambda_q"), py::arg("R0"), py::arg("eps"));
  m.def("eps_max", &eps_max, py::arg("lambda_q"), py::arg("lambda_p"), py::arg("R0"));
  m.def("optimal_eps", &optimal_eps, py::arg("lambda_q"), py::arg("lambda_p"), py::arg("R0"),
        py::arg("cap") = kDefaultEpsCap);

  m.def(
      "bernstein_from_hypo",
      [](double lambda_p, double lambda_q, double R0, double eps, double mean, double variance, double sup_norm,
         double dmu_norm) {
        const HypoBernstein hb = bernstein_from_hypo({lambda_p, lambda_q, R0, eps}, {mean, variance, sup_norm}, dmu_norm);
        py::dict d;
        d["pair"] = hb.pair;
        d["N"] = hb.N;
        d["Lambda"] = hb.derived.Lambda;
        d["c"] = hb.derived.c;
        d["C"] = hb.derived.C;
        d["alpha"] = hb.derived.alpha;
        return d;
      },
      py::arg("lambda_p"), py::arg("lambda_q"), py::arg("R0"), py::arg("eps"), py::arg("mean"), py::arg("variance"),
      py::arg("sup_norm"), py::arg("dmu_norm") = 1.0);

  m.def(
      "confidence_radius",
      [](const BernsteinPair& pair, double N, double delta, double T) {
        const ConfidenceReport r = confidence_radius(pair, pair, N, delta, T);
        return py::make_tuple(r.r_minus, r.r_plus);
      },
      py::arg("pair"), py::arg("N"), py::arg("delta"), py::arg("T"));
  m.def("concentration_bound", &concentration_bound, py::arg("pair"), py::arg("c"), py::arg("dmu_norm"),
        py::arg("r"), py::arg("T"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a command line; returns (exit_code, stdout, stderr).");
}
