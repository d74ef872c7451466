#include "pgamarket/stage2.hpp"

#include <cmath>
#include <sstream>

#include "pgamarket/errors.hpp"

namespace pgamarket {

void MarketParams::validate() const {
  if (!(pi >= 0.0)) throw DomainError("pi must be nonnegative");
  if (!(pi < model.v_bar())) throw DomainError("pi must be below v_bar");
  if (!(theta >= 0.0)) throw DomainError("theta must be nonnegative");
  if (!(N >= 0.0)) throw DomainError("N must be nonnegative");
  if (!(C >= 0.0)) throw DomainError("C must be nonnegative");
  if (model.family() == ValuationFamily::UniformOnFeeToMax && model.lower_support() != pi) {
    throw DomainError("uniform_fee_to_max support must start at pi");
  }
}

double s_m(const Stage3Solution& sol) {
  const double m1 = static_cast<double>(sol.M() - 1);
  const double gap = sol.cutoff() - sol.pi();
  return sol.volume_second_moment() + gap * gap / (4.0 * m1);
}

MarketEquilibrium liquidity_star(const MarketParams& params, const Stage3Solution& sol,
                                 double abs_tol) {
  params.validate();
  if (sol.M() < 2) throw DomainError("M must be at least 2");
  const double s = s_m(sol);
  if (!(s > 0.0)) throw DomainError("s_M must be positive");

  MarketEquilibrium eq;
  eq.M = sol.M();
  eq.s_M = s;
  eq.L_star = params.pi * params.N / (static_cast<double>(eq.M) * s) - params.theta;
  eq.end_price = expected_end_price(sol);
  if (std::fabs(eq.L_star) <= abs_tol) {
    eq.L_star = 0.0;
    eq.shutdown = true;
  }
  eq.viable = eq.L_star >= 0.0;
  if (eq.viable && eq.L_star > 0.0) {
    eq.aggregate_volume = aggregate_volume(sol, eq.L_star);
    const double revenue = noise_revenue(params, eq.L_star);
    const double loss = eq.L_star * eq.M * s;
    if (std::fabs(revenue - loss) > 1e-8 * std::fabs(revenue)) {
      std::ostringstream os;
      os.precision(12);
      os << "zero-profit residual " << revenue - loss << " at L* = " << eq.L_star;
      throw ConsistencyError(os.str());
    }
  }
  return eq;
}

double liquidity_limit(const MarketParams& params) {
  const double width = params.model.v_bar() - params.pi;
  if (!(width > 0.0)) throw DomainError("pi must be below v_bar");
  return 8.0 * params.pi * params.N / (3.0 * width * width) - params.theta;
}

double uniform_liquidity_closed_form(const MarketParams& params, int M) {
  if (params.model.family() != ValuationFamily::UniformOnFeeToMax) {
    throw DomainError("closed-form liquidity requires valuations uniform on [pi, v_bar]");
  }
  if (M < 2) throw DomainError("M must be at least 2");
  params.validate();
  const double m = static_cast<double>(M);
  const double m1 = m - 1.0;
  const double lg = std::log(m);
  const double width = params.model.v_bar() - params.pi;
  const double bracket = m1 * (3.0 * m - 5.0) - 2.0 * (2.0 * m - 3.0) * lg + 2.0 * lg * lg;
  return 8.0 * params.pi * params.N * m1 * m1 * m1 / (m * width * width * bracket) - params.theta;
}

double lp_wealth_change(double depth, double delta, double y0) {
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  return -delta * delta / depth + 2.0 * y0 * delta / depth;
}

double noise_revenue(const MarketParams& params, double depth) {
  if (!(depth >= 0.0)) throw DomainError("depth must be nonnegative");
  if (depth == 0.0) return 0.0;
  return params.pi * params.N * depth / (depth + params.theta);
}

}  // namespace pgamarket
