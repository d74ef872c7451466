#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pgamarket/errors.hpp"
#include "pgamarket/simulator.hpp"
#include "pgamarket/stage1.hpp"
#include "pgamarket/stage2.hpp"
#include "pgamarket/stage3.hpp"

namespace py = pybind11;
using namespace pgamarket;

PYBIND11_MODULE(_pgamarket, m) {
  m.doc() = "Priority-fee DEX market equilibrium and simulation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());

  py::class_<ValuationModel>(m, "ValuationModel")
      .def_static("uniform_on_fee_to_max", &ValuationModel::uniform_on_fee_to_max, py::arg("pi"),
                  py::arg("v_bar"))
      .def_static("uniform_on_zero_to_max", &ValuationModel::uniform_on_zero_to_max,
                  py::arg("v_bar"))
      .def_static("truncated_exponential", &ValuationModel::truncated_exponential,
                  py::arg("rate"), py::arg("v_bar"))
      .def_static("scaled_beta", &ValuationModel::scaled_beta, py::arg("a"), py::arg("b"),
                  py::arg("v_bar"))
      .def_property_readonly("v_bar", &ValuationModel::v_bar)
      .def("cdf", &ValuationModel::cdf)
      .def("density", &ValuationModel::density)
      .def("quantile", &ValuationModel::quantile);

  py::class_<Stage3Solution>(m, "Stage3Solution")
      .def_static(
          "solve",
          [](const ValuationModel& model, int M, double pi) {
            return Stage3Solution::solve(model, M, pi);
          },
          py::arg("model"), py::arg("M"), py::arg("pi"))
      .def_property_readonly("M", &Stage3Solution::M)
      .def_property_readonly("pi", &Stage3Solution::pi)
      .def_property_readonly("cutoff", &Stage3Solution::cutoff)
      .def("q_tilde", &Stage3Solution::q_tilde)
      .def("phi_per_depth", &Stage3Solution::phi_per_depth)
      .def("fee", [](const Stage3Solution& s, double depth, double v) {
        return fee_equilibrium(s, depth, v);
      });

  py::class_<MarketParams>(m, "MarketParams")
      .def(py::init([](double pi, double theta, double N, double C, const ValuationModel& model) {
             MarketParams p;
             p.pi = pi;
             p.theta = theta;
             p.N = N;
             p.C = C;
             p.model = model;
             p.validate();
             return p;
           }),
           py::arg("pi"), py::arg("theta"), py::arg("N"), py::arg("C"), py::arg("model"))
      .def_readonly("pi", &MarketParams::pi)
      .def_readonly("theta", &MarketParams::theta)
      .def_readonly("N", &MarketParams::N)
      .def_readonly("C", &MarketParams::C);

  m.def(
      "solve_cutoff",
      [](const ValuationModel& model, int M, double pi) { return solve_cutoff(model, M, pi); },
      py::arg("model"), py::arg("M"), py::arg("pi"));
  m.def("s_m", &s_m);
  m.def(
      "liquidity_star",
      [](const MarketParams& p, const Stage3Solution& s) {
        const auto eq = liquidity_star(p, s);
        py::dict d;
        d["M"] = eq.M;
        d["s_M"] = eq.s_M;
        d["L_star"] = eq.L_star;
        d["viable"] = eq.viable;
        d["shutdown"] = eq.shutdown;
        d["aggregate_volume"] = eq.aggregate_volume;
        d["end_price"] = eq.end_price;
        return d;
      },
      py::arg("params"), py::arg("sol"));
  m.def("liquidity_limit", &liquidity_limit);
  m.def("uniform_liquidity_closed_form", &uniform_liquidity_closed_form);
  m.def("h_of_m", &h_of_m, py::arg("params"), py::arg("M"));
  m.def(
      "equilibrium_m",
      [](const MarketParams& p, int m_cap, int workers) {
        const auto out = equilibrium_m(p, m_cap, workers);
        py::dict d;
        d["m_star"] = out.m_star ? py::object(py::int_(*out.m_star)) : py::object(py::none());
        d["binding"] = out.binding;
        d["scanned_to"] = out.scanned_to;
        d["h_values"] = out.h_values;
        return d;
      },
      py::arg("params"), py::arg("m_cap") = 10000, py::arg("workers") = 1);
  m.def("expected_end_price", &expected_end_price);
  m.def("aggregate_volume", &aggregate_volume, py::arg("sol"), py::arg("depth"));
  m.def("deviation_payoff", &deviation_payoff, py::arg("sol"), py::arg("depth"), py::arg("v"),
        py::arg("q_dev"), py::arg("phi_dev"), py::arg("C"));
  m.def(
      "run_monte_carlo",
      [](const Stage3Solution& s, double depth, const MarketParams& p, std::uint64_t n_blocks,
         std::uint64_t seed, int workers) {
        py::gil_scoped_release release;
        const auto r = run_monte_carlo(s, depth, p, n_blocks, seed, workers);
        py::gil_scoped_acquire acquire;
        py::dict est;
        for (const auto& [k, e] : r.estimates) est[py::str(k)] = py::make_tuple(e.mean, e.std_error);
        py::list prof;
        for (const auto& rv : r.rank_volume_profile) prof.append(py::make_tuple(rv.rank, rv.mean_volume, rv.count));
        py::dict d;
        d["n_blocks"] = r.n_blocks;
        d["seed"] = r.seed;
        d["estimates"] = est;
        d["rank_volume_profile"] = prof;
        return d;
      },
      py::arg("sol"), py::arg("depth"), py::arg("params"), py::arg("n_blocks"), py::arg("seed"),
      py::arg("workers") = 1);
  m.def(
      "amm_approximation_error",
      [](double depth, double pi, const std::vector<double>& grid) {
        py::list rows;
        for (const auto& r : amm_approximation_error(depth, pi, grid)) {
          rows.append(py::make_tuple(r.q_over_L, r.slippage_rel_error, r.impact_rel_error));
        }
        return rows;
      },
      py::arg("depth"), py::arg("pi"), py::arg("q_over_L_grid"));
}
