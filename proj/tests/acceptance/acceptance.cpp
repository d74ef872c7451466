// Acceptance battery: one line per criterion, tolerances fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "pgamarket/blocktime.hpp"
#include "pgamarket/cli/commands.hpp"
#include "pgamarket/simulator.hpp"
#include "pgamarket/stage1.hpp"

using namespace pgamarket;
using nlohmann::json;

namespace {

constexpr double kPi = 0.1;
constexpr double kVBar = 1.0;
constexpr double kN = 1000.0;
constexpr double kTheta = 10.0;

struct Outcome {
  bool passed;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

MarketParams running(double N = kN, double C = 0.0) {
  MarketParams p;
  p.pi = kPi;
  p.theta = kTheta;
  p.N = N;
  p.C = C;
  p.model = ValuationModel::uniform_on_fee_to_max(kPi, kVBar);
  return p;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

Outcome cutoff_closed_form() {
  constexpr double kTol = 1e-9;
  double worst = 0.0;
  for (int M : {2, 3, 5, 10, 50, 200}) {
    const double closed = kVBar - (kVBar - kPi) * std::log(M) / (M - 1.0);
    worst = std::max(worst, std::fabs(solve_cutoff(running().model, M, kPi) - closed));
  }
  return {worst <= kTol, fmt("max |cutoff - closed form| = %.3g", worst)};
}

Outcome aggregate_volume_identity() {
  constexpr double kRelTol = 1e-8;
  constexpr double kDepth = 100.0;
  const std::vector<std::pair<double, double>> supports = {
      {0.0, 1.0}, {0.05, 1.0}, {0.1, 1.0}, {0.2, 2.0}, {0.5, 3.0}};
  double worst = 0.0;
  int points = 0;
  for (const auto& [pi, v_bar] : supports) {
    for (int M : {2, 3, 7, 25}) {
      const auto sol = Stage3Solution::solve(ValuationModel::uniform_on_fee_to_max(pi, v_bar), M, pi);
      const double quad = kDepth * M * sol.volume_mean();
      const double closed = kDepth * M * (sol.cutoff() - pi) / (2.0 * (M - 1));
      worst = std::max(worst, std::fabs(quad - closed) / closed);
      ++points;
    }
  }
  return {worst <= kRelTol && points == 20,
          fmt("max relative gap = %.3g", worst) + " over " + std::to_string(points) + " points"};
}

Outcome end_price_limits() {
  constexpr double kLimitTol = 1e-4;
  bool increasing = true;
  bool below = true;
  double prev = 0.0;
  for (int M = 2; M <= 1000; ++M) {
    const double p = expected_end_price(Stage3Solution::solve(running().model, M, kPi));
    increasing = increasing && p > prev;
    below = below && p < kVBar - kPi;
    prev = p;
  }
  const double far = expected_end_price(Stage3Solution::solve(running().model, 100000, kPi));
  const double gap = std::fabs(far - (kVBar - kPi));
  return {increasing && below && gap <= kLimitTol,
          std::string("increasing=") + (increasing ? "yes" : "no") +
              " below=" + (below ? "yes" : "no") + fmt(", |price(1e5) - (v_bar - pi)| = %.3g", gap)};
}

Outcome s_m_oracle() {
  constexpr double kTarget = 0.0581794;
  constexpr double kTol = 1e-6;
  const double s = s_m(Stage3Solution::solve(running().model, 2, kPi));
  return {std::fabs(s - kTarget) <= kTol, fmt("s_M = %.10f", s)};
}

Outcome closed_form_liquidity() {
  constexpr double kRelTol = 1e-8;
  constexpr double kTarget = 849.41;
  constexpr double kAbsTol = 0.01;
  double worst = 0.0;
  double generic2 = 0.0;
  double closed2 = 0.0;
  for (int M : {2, 3, 5, 10, 50, 200}) {
    const auto p = running();
    const double generic = liquidity_star(p, Stage3Solution::solve(p.model, M, kPi)).L_star;
    const double closed = uniform_liquidity_closed_form(p, M);
    worst = std::max(worst, std::fabs(generic - closed) / std::fabs(closed));
    if (M == 2) {
      generic2 = generic;
      closed2 = closed;
    }
  }
  const bool at2 = std::fabs(generic2 - kTarget) <= kAbsTol && std::fabs(closed2 - kTarget) <= kAbsTol;
  return {worst <= kRelTol && at2, fmt("max relative gap = %.3g", worst) +
                                       fmt(", L*(2) = %.6f", generic2) + fmt(" / %.6f", closed2)};
}

Outcome limit_from_above() {
  constexpr double kLimitTarget = 319.22;
  constexpr double kLimitTol = 0.01;
  constexpr double kConvergence = 0.01;
  const auto p = running();
  const double limit = liquidity_limit(p);
  std::vector<int> Ms;
  for (int M = 2; M <= 100; ++M) Ms.push_back(M);
  for (int M : {200, 500, 1000, 2000, 5000, 10000}) Ms.push_back(M);
  bool above = true;
  double last = 0.0;
  for (int M : Ms) {
    last = liquidity_star(p, Stage3Solution::solve(p.model, M, kPi)).L_star;
    above = above && last > limit;
  }
  const double rel = (last - limit) / limit;
  return {above && std::fabs(limit - kLimitTarget) <= kLimitTol && rel <= kConvergence,
          fmt("limit = %.6f", limit) + std::string(", above for all ") + std::to_string(Ms.size()) +
              " M: " + (above ? "yes" : "no") + fmt(", (L*(1e4) - limit) / limit = %.3g", rel)};
}

Outcome volume_ode() {
  constexpr double kResidualTol = 1e-6;
  constexpr double kStep = 1e-5;
  constexpr double kRatioLo = 3.5;
  constexpr double kRatioHi = 4.5;
  const auto p = running();
  const auto sol = Stage3Solution::solve(p.model, 2, kPi);
  const double depth = liquidity_star(p, sol).L_star;
  double worst = 0.0;
  double ratio_lo = 1e300;
  double ratio_hi = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double v = sol.cutoff() + (kVBar - sol.cutoff()) * i / 21.0;
    worst = std::max(worst, volume_ode_residual(sol, depth, v, kStep));
    // Truncation error dominates only for coarse steps; roundoff takes over near 1e-5.
    for (double h : {1e-2, 5e-3}) {
      const double r = volume_ode_residual(sol, depth, v, h) / volume_ode_residual(sol, depth, v, h / 2);
      ratio_lo = std::min(ratio_lo, r);
      ratio_hi = std::max(ratio_hi, r);
    }
  }
  return {worst < kResidualTol && ratio_lo >= kRatioLo && ratio_hi <= kRatioHi,
          fmt("max residual (h=1e-5, L=L*) = %.3g", worst) + fmt(", halving ratios in [%.3f", ratio_lo) +
              fmt(", %.3f]", ratio_hi)};
}

Outcome entry_statics() {
  constexpr double kH2Target = 23.951;
  constexpr double kH2Tol = 0.01;
  constexpr int kCap = 10000;
  const double h2 = h_of_m(running(), 2);
  const bool h2_ok = std::fabs(h2 - kH2Target) <= kH2Tol;

  // Full table to the cap; H is evaluated at every M.
  std::vector<double> H(kCap + 1, 0.0);
  {
    const int w = workers();
    std::vector<std::thread> pool;
    for (int t = 0; t < w; ++t) {
      pool.emplace_back([&, t] {
        for (int M = 2 + t; M <= kCap; M += w) H[M] = h_of_m(running(), M);
      });
    }
    for (auto& th : pool) th.join();
  }
  int m0 = -1;
  for (int M = kCap; M >= 2 && H[M] < 0.0; --M) m0 = M;
  double max_tail = -1e300;
  for (int M = kCap / 2; M <= kCap; ++M) max_tail = std::max(max_tail, H[M]);

  const std::vector<double> Cs = {0.5, 1.0, 2.0, 5.0, 10.0};
  const std::vector<double> Ns = {250.0, 500.0, 1000.0, 2000.0, 4000.0};
  std::vector<std::vector<int>> grid(Ns.size(), std::vector<int>(Cs.size(), 0));
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    const auto table = equilibrium_m(running(Ns[i], Cs.front()), kCap, workers()).h_values;
    for (std::size_t j = 0; j < Cs.size(); ++j) {
      const auto m = m_star_from_table(table, Cs[j]);
      grid[i][j] = m ? *m : 1;
    }
  }
  bool mono = true;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    for (std::size_t j = 0; j < Cs.size(); ++j) {
      if (j > 0 && grid[i][j] > grid[i][j - 1]) mono = false;
      if (i > 0 && grid[i][j] < grid[i - 1][j]) mono = false;
    }
  }
  std::ostringstream d;
  d << fmt("H(2) = %.6f", h2) << " (target 23.951); "
    << (m0 > 0 ? "H < 0 from M0 = " + std::to_string(m0) : std::string("no M0 <= 10000 with H(M) < 0 beyond it"))
    << fmt(", max H on [5000, 10000] = %.3g", max_tail) << "; m_star monotone on 5x5 (N, C) grid: "
    << (mono ? "yes" : "no");
  return {h2_ok && m0 > 0 && mono, d.str()};
}

Outcome monte_carlo() {
  constexpr std::uint64_t kBlocks = 1000000;
  constexpr std::uint64_t kSeed = 20240611;
  constexpr double kSigmas = 3.0;
  const auto p = running();
  const auto sol = Stage3Solution::solve(p.model, 2, kPi);
  const auto eq = liquidity_star(p, sol);
  const auto r = run_monte_carlo(sol, eq.L_star, p, kBlocks, kSeed, workers());
  const std::vector<std::pair<std::string, double>> targets = {
      {"end_price", expected_end_price(sol)},
      {"aggregate_volume", aggregate_volume(sol, eq.L_star)},
      {"lp_loss", -eq.L_star * 2 * eq.s_M},
      {"active_count", 2 * p.model.survival(sol.cutoff())}};
  bool ok = true;
  std::ostringstream d;
  for (const auto& [name, target] : targets) {
    const auto& e = r.estimates.at(name);
    const double z = (e.mean - target) / e.std_error;
    ok = ok && std::fabs(z) <= kSigmas;
    d << name << fmt(" z=%.2f ", z);
  }
  return {ok, d.str()};
}

Outcome best_response() {
  constexpr std::uint64_t kSamples = 100000;
  const auto p = running();
  const auto sol = Stage3Solution::solve(p.model, 3, kPi);
  const double depth = liquidity_star(p, sol).L_star;
  bool ok = true;
  std::ostringstream d;
  std::uint64_t seed = 91;
  for (double v : {sol.cutoff() + 0.05, 0.8, kVBar - 0.01}) {
    const auto br = best_response_scan(sol, depth, p, v, {21, 21, 2.0}, kSamples, seed++, workers());
    ok = ok && br.passed;
    const std::size_t eq_cell = static_cast<std::size_t>(br.eq_q_index) * 21 + br.eq_phi_index;
    double rival = -1e300;
    for (std::size_t c = 0; c < br.cells.size(); ++c) {
      if (c != eq_cell) rival = std::max(rival, br.cells[c].gain_over_equilibrium.mean);
    }
    d << fmt("v=%.4f: ", v) << (br.equilibrium_is_max ? "max" : "NOT max")
      << fmt(" (best gain %.3g", br.max_gain) << fmt(" se %.3g", br.max_gain_se)
      << fmt(", closest rival %.3g)", rival)
      << (br.analytic_agrees ? " analytic ok" : " analytic MISMATCH") << fmt(" max z %.2f; ", br.max_analytic_z);
  }
  return {ok, d.str()};
}

Outcome rank_profile() {
  constexpr std::uint64_t kBlocks = 100000;
  const auto p = running();
  bool ok = true;
  std::ostringstream d;
  for (int M : {2, 5, 10}) {
    const auto sol = Stage3Solution::solve(p.model, M, kPi);
    const double depth = liquidity_star(p, sol).L_star;
    const auto r = run_monte_carlo(sol, depth, p, kBlocks, 500 + M, workers());
    const auto mono = rank_volume_monotonicity(r);
    ok = ok && mono.strictly_decreasing && mono.correlation == -1.0;
    d << "M=" << M << ": " << mono.ranks << " ranks, corr " << fmt("%.3f", mono.correlation) << "; ";
  }
  return {ok, d.str()};
}

Outcome block_time() {
  constexpr double kEps = 1e-6;
  const auto fam = default_block_time_family(kPi);
  const std::vector<double> grid = {6, 12, 24, 48, 96};
  bool cut_ok = true;
  for (int M : {2, 5, 10}) cut_ok = cut_ok && cutoff_vs_T(fam, M, kPi, grid).strictly_increasing;
  bool linf_ok = true;
  double prev = 1e300;
  for (double T : grid) {
    const double L = limit_liquidity_vs_T(fam, kPi, kTheta, T);
    linf_ok = linf_ok && L < prev;
    prev = L;
  }
  const double T_bar =
      shutdown_time(fam, kPi, kTheta, {1.0, 1e4, numerics::Sign::Positive, numerics::Sign::Negative});
  const bool sign_ok = limit_liquidity_vs_T(fam, kPi, kTheta, T_bar - kEps) > 0.0 &&
                       limit_liquidity_vs_T(fam, kPi, kTheta, T_bar + kEps) < 0.0;
  return {cut_ok && linf_ok && sign_ok && std::isfinite(T_bar),
          std::string("cutoff increasing: ") + (cut_ok ? "yes" : "no") + ", L_inf decreasing: " +
              (linf_ok ? "yes" : "no") + fmt(", shutdown T = %.6f", T_bar) + ", sign change: " +
              (sign_ok ? "yes" : "no")};
}

Outcome amm_linearization() {
  constexpr double kSmallTol = 2e-4;
  const std::vector<double> grid = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  const auto rows = amm_approximation_error(849.41, kPi, grid);
  bool increasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    increasing = increasing && rows[i].slippage_rel_error > rows[i - 1].slippage_rel_error &&
                 rows[i].impact_rel_error > rows[i - 1].impact_rel_error;
  }
  const bool vanishing = rows.front().slippage_rel_error <= kSmallTol && rows.front().impact_rel_error <= kSmallTol;
  return {increasing && vanishing,
          fmt("slippage error %.3g", rows.front().slippage_rel_error) +
              fmt(" -> %.3g", rows.back().slippage_rel_error) +
              fmt(", impact error %.3g", rows.front().impact_rel_error) +
              fmt(" -> %.3g", rows.back().impact_rel_error)};
}

std::pair<int, std::string> cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str()};
}

Outcome determinism() {
  const std::string cfg = PGAMARKET_SOURCE_DIR "/configs/running.json";
  const auto one = cli({"simulate", "--config", cfg, "--seed", "4242", "--n-blocks", "200000", "--workers", "1"});
  const auto eight = cli({"simulate", "--config", cfg, "--seed", "4242", "--n-blocks", "200000", "--workers", "8"});
  auto a = json::parse(one.second);
  auto b = json::parse(eight.second);
  a.erase("config");
  b.erase("config");
  const bool same = one.first == 0 && eight.first == 0 && a.dump() == b.dump();

  bool reproduced = true;
  std::string which;
  const std::vector<std::vector<std::string>> runs = {
      {"simulate", "--config", cfg, "--seed", "4242", "--n-blocks", "20000", "--workers", "8"},
      {"solve", "--config", cfg, "--C", "5"},
      {"sweep", "--config", cfg, "--M-range", "2:8"},
      {"blocktime", "--config", cfg, "--M", "5"}};
  for (const auto& args : runs) {
    const auto first = cli(args);
    const std::string path = "/tmp/pgamarket_acceptance_report.json";
    std::ofstream(path) << first.second;
    const auto again = cli({args[0], "--config", path});
    if (first.first != 0 || again.second != first.second) {
      reproduced = false;
      which += args[0] + " ";
    }
  }
  return {same && reproduced, std::string("workers 1 vs 8 identical: ") + (same ? "yes" : "no") +
                                  ", reports reproduce from embedded config: " +
                                  (reproduced ? "yes" : "no (" + which + ")")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "cutoff closed form", 1.0, cutoff_closed_form},
      {2, "aggregate volume identity", 5.0, aggregate_volume_identity},
      {3, "end price monotone with limit", 10.0, end_price_limits},
      {4, "S_M oracle", 1.0, s_m_oracle},
      {5, "closed-form liquidity", 5.0, closed_form_liquidity},
      {6, "liquidity limit from above", 5.0, limit_from_above},
      {7, "volume ODE residual", 2.0, volume_ode},
      {8, "entry profit and comparative statics", 60.0, entry_statics},
      {9, "Monte Carlo unbiasedness", 300.0, monte_carlo},
      {10, "best response", 300.0, best_response},
      {11, "rank volume profile", 60.0, rank_profile},
      {12, "block-time statics", 10.0, block_time},
      {13, "AMM linearization", 1.0, amm_linearization},
      {14, "determinism", 60.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.passed && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %2d %-38s %s [%.2f s / %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
