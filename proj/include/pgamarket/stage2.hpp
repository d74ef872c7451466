#pragma once

#include "pgamarket/stage3.hpp"
#include "pgamarket/valuations.hpp"

namespace pgamarket {

/// Exogenous scalars of one economy.
struct MarketParams {
  double pi = 0.1;
  double theta = 10.0;
  double N = 1000.0;
  double C = 0.0;
  ValuationModel model = ValuationModel::uniform_on_fee_to_max(0.1, 1.0);

  void validate() const;
};

struct MarketEquilibrium {
  int M = 0;
  double s_M = 0.0;
  double L_star = 0.0;
  bool viable = false;
  bool shutdown = false;  // |L*| within abs_tol: the market is on the boundary
  double aggregate_volume = 0.0;
  double end_price = 0.0;
};

/// Integral of q_tilde^2 dF plus (cutoff - pi)^2 / (4 (M-1)).
double s_m(const Stage3Solution& sol);

/// Zero-profit depth pi N / (M s_M) - theta. Non-viable economies keep the
/// negative value.
MarketEquilibrium liquidity_star(const MarketParams& params, const Stage3Solution& sol,
                                 double abs_tol = 1e-12);

/// 8 pi N / (3 (v_bar - pi)^2) - theta.
double liquidity_limit(const MarketParams& params);

/// Closed-form depth for valuations uniform on [pi, v_bar].
double uniform_liquidity_closed_form(const MarketParams& params, int M);

double lp_wealth_change(double depth, double delta, double y0);

/// pi N L / (L + theta).
double noise_revenue(const MarketParams& params, double depth);

}  // namespace pgamarket
