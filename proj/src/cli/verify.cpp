#include "pgamarket/cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "pgamarket/errors.hpp"
#include "pgamarket/simulator.hpp"
#include "pgamarket/stage1.hpp"
#include "pgamarket/stage2.hpp"
#include "pgamarket/stage3.hpp"

namespace pgamarket::cli {

namespace {

std::string describe(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream os;
  os.precision(9);
  bool first = true;
  for (const auto& [name, value] : items) {
    if (!first) os << ", ";
    os << name << " = " << value;
    first = false;
  }
  return os.str();
}

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {name, false, std::string("error: ") + e.what()};
  }
}

CheckResult within_3se(const std::string& name, const Estimate& est, double target) {
  const double z = est.std_error > 0.0 ? (est.mean - target) / est.std_error : 0.0;
  const bool ok = std::fabs(est.mean - target) <= 3.0 * est.std_error;
  return {name, ok,
          describe({{"mean", est.mean}, {"std_error", est.std_error}, {"target", target},
                    {"z", z}})};
}

}  // namespace

std::vector<CheckResult> run_verify(const RunConfig& cfg, const MarketParams& params, int M,
                                    std::uint64_t n_blocks, std::uint64_t seed, int workers) {
  if (n_blocks < kMinVerifyBlocks) {
    throw ConfigError("insufficient replications: verify needs n_blocks >= 100000");
  }
  std::vector<CheckResult> checks;
  const auto sol = Stage3Solution::solve(params.model, M, params.pi);
  const auto eq = liquidity_star(params, sol);
  const bool uniform = params.model.family() == ValuationFamily::UniformOnFeeToMax;
  const double v_bar = params.model.v_bar();

  checks.push_back(guarded("cutoff_equation", [&] {
    const double residual = cutoff_residual(params.model, M, params.pi, sol.cutoff());
    bool ok = std::fabs(residual) <= 1e-10;
    double closed = sol.cutoff();
    if (uniform) {
      const double m = static_cast<double>(M);
      closed = v_bar - (v_bar - params.pi) * std::log(m) / (m - 1.0);
      ok = ok && std::fabs(closed - sol.cutoff()) <= 1e-9;
    }
    return CheckResult{"cutoff_equation", ok,
                       describe({{"cutoff", sol.cutoff()}, {"residual", residual},
                                 {"closed_form", closed}})};
  }));

  checks.push_back(guarded("aggregate_volume_identity", [&] {
    const double quad = aggregate_volume(sol, 1.0);
    const double closed = M * (sol.cutoff() - params.pi) / (2.0 * (M - 1));
    return CheckResult{"aggregate_volume_identity",
                       std::fabs(quad - closed) <= 1e-8 * std::fabs(closed),
                       describe({{"quadrature", quad}, {"closed_form", closed}})};
  }));

  checks.push_back(guarded("liquidity_closed_form", [&] {
    if (!uniform) return CheckResult{"liquidity_closed_form", true, "skipped: family is not uniform on [pi, v_bar]"};
    const double closed = uniform_liquidity_closed_form(params, M);
    const double rel = std::fabs(closed - eq.L_star) / std::max(1e-300, std::fabs(closed));
    return CheckResult{"liquidity_closed_form", rel <= 1e-8,
                       describe({{"generic", eq.L_star}, {"closed_form", closed}, {"rel", rel}})};
  }));

  checks.push_back(guarded("zero_profit_residual", [&] {
    if (!eq.viable) return CheckResult{"zero_profit_residual", true, "skipped: market not viable"};
    const double residual = noise_revenue(params, eq.L_star) - eq.L_star * M * eq.s_M;
    return CheckResult{"zero_profit_residual",
                       std::fabs(residual) <= 1e-6 * params.pi * params.N,
                       describe({{"residual", residual}})};
  }));

  const double depth = cfg.depth ? *cfg.depth : eq.L_star;

  checks.push_back(guarded("volume_ode", [&] {
    if (!(depth > 0.0)) return CheckResult{"volume_ode", false, "no positive depth"};
    double worst = 0.0;
    const double h = 1e-5;
    for (int i = 1; i <= 20; ++i) {
      const double v = sol.cutoff() + (v_bar - sol.cutoff()) * i / 21.0;
      worst = std::max(worst, volume_ode_residual(sol, depth, v, h));
    }
    return CheckResult{"volume_ode", worst < 1e-6, describe({{"max_residual", worst}})};
  }));

  checks.push_back(guarded("entry_profit_consistency", [&] {
    const double h = h_of_m(params, M);
    const double hu = h_of_m_unsimplified(params, M);
    if (!std::isfinite(h)) {
      return CheckResult{"entry_profit_consistency", !std::isfinite(hu), "market not viable"};
    }
    const double rel = std::fabs(h - hu) / std::max(1e-300, std::fabs(h));
    return CheckResult{"entry_profit_consistency", rel <= 1e-8,
                       describe({{"H", h}, {"unsimplified", hu}, {"rel", rel}})};
  }));

  if (!(depth > 0.0)) {
    checks.push_back({"monte_carlo", false, "market not viable and no depth configured"});
    return checks;
  }

  const double y0 = cfg.y0 ? *cfg.y0 : depth;
  SimReport report;
  try {
    report = run_monte_carlo(sol, depth, params, n_blocks, seed, workers, y0);
  } catch (const std::exception& e) {
    checks.push_back({"monte_carlo", false, std::string("error: ") + e.what()});
    return checks;
  }
  const double s = s_m(sol);
  checks.push_back(within_3se("mc_end_price", report.estimates.at("end_price"),
                              expected_end_price(sol)));
  checks.push_back(within_3se("mc_aggregate_volume", report.estimates.at("aggregate_volume"),
                              depth * M * (sol.cutoff() - params.pi) / (2.0 * (M - 1))));
  checks.push_back(within_3se("mc_lp_loss", report.estimates.at("lp_loss"), -depth * M * s));
  checks.push_back(within_3se("mc_active_count", report.estimates.at("active_count"),
                              M * params.model.survival(sol.cutoff())));

  checks.push_back(guarded("rank_volume_monotonicity", [&] {
    const auto mono = rank_volume_monotonicity(report);
    return CheckResult{"rank_volume_monotonicity",
                       mono.strictly_decreasing && mono.correlation == -1.0,
                       describe({{"ranks", static_cast<double>(mono.ranks)},
                                 {"correlation", mono.correlation}})};
  }));

  const std::vector<double> valuations = {std::min(sol.cutoff() + 0.05, v_bar),
                                          0.5 * (sol.cutoff() + v_bar), v_bar - 0.01};
  for (std::size_t i = 0; i < valuations.size(); ++i) {
    const std::string name = "best_response_" + std::to_string(i + 1);
    checks.push_back(guarded(name, [&] {
      const double v = valuations[i];
      if (!(v > sol.cutoff())) return CheckResult{name, true, "skipped: valuation below cutoff"};
      const auto br =
          best_response_scan(sol, depth, params, v, {}, cfg.br_samples, seed + i + 1, workers);
      return CheckResult{name, br.passed,
                         describe({{"v", v}, {"max_gain", br.max_gain},
                                   {"max_gain_se", br.max_gain_se},
                                   {"max_analytic_z", br.max_analytic_z}})};
    }));
  }
  return checks;
}

}  // namespace pgamarket::cli
