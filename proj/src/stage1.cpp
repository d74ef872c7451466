#include "pgamarket/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "pgamarket/errors.hpp"

namespace pgamarket {

namespace {

constexpr int kConsecutiveMisses = 10;

struct ViableSolution {
  Stage3Solution sol;
  MarketEquilibrium eq;
};

std::optional<ViableSolution> solve_viable(const MarketParams& params, int M) {
  if (M < 2) throw DomainError("M must be at least 2");
  params.validate();
  auto sol = Stage3Solution::solve(params.model, M, params.pi);
  auto eq = liquidity_star(params, sol);
  if (!eq.viable) return std::nullopt;
  return ViableSolution{std::move(sol), eq};
}

}  // namespace

double h_of_m(const MarketParams& params, int M) {
  const auto s = solve_viable(params, M);
  if (!s) return -std::numeric_limits<double>::infinity();
  const double m1 = static_cast<double>(M - 1);
  const ValuationModel& model = s->sol.model();
  const double integral = s->sol.integrate_dF(
      [&](double v, double q) { return q * q * (1.0 - 2.0 * m1 * model.survival(v)); },
      s->sol.cutoff(), model.v_bar());
  return s->eq.L_star * integral;
}

double h_of_m_unsimplified(const MarketParams& params, int M) {
  const auto s = solve_viable(params, M);
  if (!s) return -std::numeric_limits<double>::infinity();
  const Stage3Solution& sol = s->sol;
  const double m1 = static_cast<double>(M - 1);
  const double lo = sol.cutoff();
  const double hi = sol.model().v_bar();
  const double surplus =
      sol.integrate_dF([&](double v, double q) { return q * (v - sol.pi() - q); }, lo, hi);
  const double queue = sol.integrate_dF(
      [&](double v, double q) {
        return sol.phi_per_depth(v) / (2.0 * m1) + q * sol.volume_mean_above(v);
      },
      lo, hi);
  return s->eq.L_star * (surplus - 2.0 * m1 * queue);
}

std::optional<int> m_star_from_table(const std::vector<std::pair<int, double>>& h_values,
                                     double C) {
  std::optional<int> best;
  int misses = 0;
  for (const auto& [M, h] : h_values) {
    if (C <= h) {
      best = M;
      misses = 0;
    } else if (M == 2) {
      return std::nullopt;
    } else if (++misses >= kConsecutiveMisses) {
      break;
    }
  }
  return best;
}

EntryOutcome equilibrium_m(const MarketParams& params, int m_cap, int workers) {
  if (m_cap < 2) throw DomainError("m_cap must be at least 2");
  params.validate();
  workers = std::max(1, workers);

  EntryOutcome out;
  out.m_cap = m_cap;
  int misses = 0;
  bool done = false;
  for (int start = 2; start <= m_cap && !done; start += workers) {
    const int stop = std::min(m_cap, start + workers - 1);
    std::vector<double> batch(static_cast<std::size_t>(stop - start + 1));
    std::vector<std::exception_ptr> errors(batch.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      auto task = [&, i] {
        try {
          batch[i] = h_of_m(params, start + static_cast<int>(i));
        } catch (...) {
          errors[i] = std::current_exception();
        }
      };
      if (workers == 1) {
        task();
      } else {
        pool.emplace_back(task);
      }
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (std::size_t i = 0; i < batch.size() && !done; ++i) {
      const int M = start + static_cast<int>(i);
      const double h = batch[i];
      out.h_values.emplace_back(M, h);
      out.scanned_to = M;
      if (params.C <= h) {
        out.m_star = M;
        misses = 0;
      } else if (M == 2) {
        done = true;
      } else if (++misses >= kConsecutiveMisses) {
        done = true;
      }
    }
  }
  if (!out.m_star) return out;
  if (out.scanned_to == m_cap && *out.m_star == m_cap) {
    throw ScanCapHit("C <= H(m_cap): raise m_cap to certify the largest entry count");
  }
  for (const auto& [M, h] : out.h_values) {
    if (M == *out.m_star + 1) out.binding = params.C > h;
  }
  return out;
}

}  // namespace pgamarket
