#pragma once

#include <string>
#include <vector>

#include "pgamarket/numerics.hpp"
#include "pgamarket/valuations.hpp"

namespace pgamarket {

struct CutoffRow {
  double T = 0.0;
  double cutoff = 0.0;
};

struct CutoffTable {
  std::vector<CutoffRow> rows;
  bool strictly_increasing = false;
  std::string diagnostic;  // empty when the family is dominance-ordered and the table increases
};

/// Cutoff at each block time. T_grid must be positive and strictly increasing.
CutoffTable cutoff_vs_T(const BlockTimeFamily& family, int M, double pi,
                        const std::vector<double>& T_grid, int workers = 1);

/// 8 pi N(T) / (3 (v_bar(T) - pi)^2) - theta.
double limit_liquidity_vs_T(const BlockTimeFamily& family, double pi, double theta, double T);

/// Zero-profit depth at finite M and block time T.
double liquidity_vs_T(const BlockTimeFamily& family, int M, double pi, double theta, double T);

/// Block time at which the large-M depth reaches zero; the limit depth must be
/// positive at T_hint.lo and negative at T_hint.hi.
double shutdown_time(const BlockTimeFamily& family, double pi, double theta,
                     const numerics::Bracket& T_hint);

}  // namespace pgamarket
