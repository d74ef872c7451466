#include "pgamarket/blocktime.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "pgamarket/errors.hpp"
#include "pgamarket/stage2.hpp"
#include "pgamarket/stage3.hpp"

namespace pgamarket {

namespace {

constexpr int kFosdGrid = 256;

}  // namespace

CutoffTable cutoff_vs_T(const BlockTimeFamily& family, int M, double pi,
                        const std::vector<double>& T_grid, int workers) {
  if (T_grid.empty()) throw DomainError("T grid is empty");
  for (std::size_t i = 0; i < T_grid.size(); ++i) {
    if (!(T_grid[i] > 0.0)) throw DomainError("block times must be positive");
    if (i > 0 && !(T_grid[i] > T_grid[i - 1])) {
      throw DomainError("T grid must be strictly increasing without duplicates");
    }
  }

  CutoffTable table;
  table.rows.resize(T_grid.size());
  std::vector<std::exception_ptr> errors(T_grid.size());
  auto solve_at = [&](std::size_t i) {
    try {
      table.rows[i] = {T_grid[i], solve_cutoff(family.F_of_T(T_grid[i]), M, pi)};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  workers = std::max(1, workers);
  for (std::size_t start = 0; start < T_grid.size(); start += static_cast<std::size_t>(workers)) {
    const std::size_t stop = std::min(T_grid.size(), start + static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (std::size_t i = start; i < stop; ++i) {
      if (workers == 1) {
        solve_at(i);
      } else {
        pool.emplace_back(solve_at, i);
      }
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::ostringstream diag;
  diag.precision(9);
  table.strictly_increasing = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto fosd = fosd_check(family, T_grid[i - 1], T_grid[i], kFosdGrid);
    if (!fosd.dominates) {
      diag << "F(.;" << T_grid[i] << ") does not dominate F(.;" << T_grid[i - 1] << ")";
      if (fosd.violating_v) diag << " at v = " << *fosd.violating_v;
      diag << "; ";
    }
    if (!(table.rows[i].cutoff > table.rows[i - 1].cutoff)) {
      table.strictly_increasing = false;
      diag << "cutoff not increasing between T = " << T_grid[i - 1] << " and T = " << T_grid[i]
           << " (" << table.rows[i - 1].cutoff << " -> " << table.rows[i].cutoff << "); ";
    }
  }
  table.diagnostic = diag.str();
  if (table.diagnostic.size() >= 2) table.diagnostic.resize(table.diagnostic.size() - 2);
  return table;
}

double limit_liquidity_vs_T(const BlockTimeFamily& family, double pi, double theta, double T) {
  const double width = family.v_bar_of_T(T) - pi;
  if (!(width > 0.0)) throw DomainError("v_bar(T) must exceed pi");
  return 8.0 * pi * family.N_of_T(T) / (3.0 * width * width) - theta;
}

double liquidity_vs_T(const BlockTimeFamily& family, int M, double pi, double theta, double T) {
  MarketParams params;
  params.pi = pi;
  params.theta = theta;
  params.N = family.N_of_T(T);
  params.model = family.F_of_T(T);
  const auto sol = Stage3Solution::solve(params.model, M, pi);
  return liquidity_star(params, sol).L_star;
}

double shutdown_time(const BlockTimeFamily& family, double pi, double theta,
                     const numerics::Bracket& T_hint) {
  auto f = [&](double T) { return limit_liquidity_vs_T(family, pi, theta, T); };
  const double at_lo = f(T_hint.lo);
  const double at_hi = f(T_hint.hi);
  if (!(at_lo > 0.0 && at_hi < 0.0)) {
    std::ostringstream os;
    os << "limit liquidity does not change sign on [" << T_hint.lo << ", " << T_hint.hi
       << "]: " << at_lo << " -> " << at_hi;
    throw NoSignChange(os.str());
  }
  return numerics::find_root(
      f, {T_hint.lo, T_hint.hi, numerics::Sign::Positive, numerics::Sign::Negative},
      {1e-10, 1e-12, 300});
}

}  // namespace pgamarket
