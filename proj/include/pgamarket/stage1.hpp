#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pgamarket/stage2.hpp"

namespace pgamarket {

struct EntryOutcome {
  std::optional<int> m_star;  // empty means no entry: H(2) < C
  std::vector<std::pair<int, double>> h_values;
  bool binding = false;  // H(m_star) >= C > H(m_star + 1)
  int scanned_to = 0;
  int m_cap = 0;
};

/// Ex-ante trading profit per informed trader at the zero-profit depth.
/// Returns -infinity when the market is not viable at M.
double h_of_m(const MarketParams& params, int M);

/// Same quantity from the wealth decomposition before the cross terms cancel:
/// L* [ int q(v - pi - q) dF - 2 (M-1) int ( int_{v_M}^v q^2 dF + q(v) int_v q dF ) dF(v) ].
double h_of_m_unsimplified(const MarketParams& params, int M);

/// Scans M = 2..m_cap and returns the largest M with C <= H(M). The scan stops
/// once H(M) < C for 10 consecutive M. Evaluations run in batches of
/// `workers` threads; the result does not depend on `workers`.
EntryOutcome equilibrium_m(const MarketParams& params, int m_cap = 10000, int workers = 1);

/// Largest M in a scanned table with C <= H(M), under the same stopping rule.
std::optional<int> m_star_from_table(const std::vector<std::pair<int, double>>& h_values,
                                     double C);

}  // namespace pgamarket
