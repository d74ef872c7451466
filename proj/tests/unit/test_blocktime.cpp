#include <cmath>

#include "doctest.h"
#include "pgamarket/blocktime.hpp"
#include "pgamarket/errors.hpp"

using namespace pgamarket;

TEST_CASE("cutoff increases with block time") {
  const auto fam = default_block_time_family(0.1);
  for (int M : {2, 5, 10}) {
    const auto t = cutoff_vs_T(fam, M, 0.1, {6, 12, 24, 48});
    CHECK(t.strictly_increasing);
    CHECK(t.diagnostic.empty());
    CHECK(t.rows.size() == 4);
  }
  // Uniform support: the cutoff is v_bar(T) - (v_bar(T) - pi) log M / (M - 1).
  const auto t = cutoff_vs_T(fam, 5, 0.1, {12});
  CHECK(t.rows[0].cutoff == doctest::Approx(1.9 - 1.8 * std::log(5.0) / 4.0).epsilon(1e-12));
}

TEST_CASE("cutoff table is worker independent") {
  const auto fam = default_block_time_family(0.1);
  const auto a = cutoff_vs_T(fam, 3, 0.1, {6, 12, 24, 48}, 1);
  const auto b = cutoff_vs_T(fam, 3, 0.1, {6, 12, 24, 48}, 4);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].cutoff == b.rows[i].cutoff);
}

TEST_CASE("grid preconditions") {
  const auto fam = default_block_time_family(0.1);
  CHECK_THROWS_AS(cutoff_vs_T(fam, 2, 0.1, {6, 12, 12}), DomainError);
  CHECK_THROWS_AS(cutoff_vs_T(fam, 2, 0.1, {0, 12}), DomainError);
}

TEST_CASE("constant family fails with a diagnostic") {
  BlockTimeFamily flat;
  flat.v_bar_of_T = [](double) { return 1.0; };
  flat.N_of_T = [](double) { return 1000.0; };
  flat.F_of_T = [](double) { return ValuationModel::uniform_on_fee_to_max(0.1, 1.0); };
  const auto t = cutoff_vs_T(flat, 3, 0.1, {6, 12, 24});
  CHECK_FALSE(t.strictly_increasing);
  CHECK(t.diagnostic.find("not increasing") != std::string::npos);
  CHECK(t.diagnostic.find("does not dominate") != std::string::npos);
}

TEST_CASE("limit liquidity") {
  const auto fam = default_block_time_family(0.1);
  const double at_T0 = 8.0 * 0.1 * 1000.0 * std::exp(-0.12) / (3.0 * 1.8 * 1.8) - 10.0;
  CHECK(limit_liquidity_vs_T(fam, 0.1, 10.0, 12.0) == doctest::Approx(at_T0).epsilon(1e-13));
  double prev = 1e300;
  for (double T : {1.0, 6.0, 12.0, 24.0, 48.0, 96.0, 500.0}) {
    const double L = limit_liquidity_vs_T(fam, 0.1, 10.0, T);
    CHECK(L < prev);
    prev = L;
  }
  DefaultBlockTimeParams none;
  none.N0 = 0.0;
  CHECK(limit_liquidity_vs_T(default_block_time_family(0.1, none), 0.1, 10.0, 12.0) == -10.0);

  BlockTimeFamily low;
  low.v_bar_of_T = [](double) { return 0.1; };
  low.N_of_T = [](double) { return 1.0; };
  CHECK_THROWS_AS(limit_liquidity_vs_T(low, 0.1, 10.0, 1.0), DomainError);
}

TEST_CASE("shutdown time") {
  const auto fam = default_block_time_family(0.1);
  const numerics::Bracket b{1.0, 1e4, numerics::Sign::Positive, numerics::Sign::Negative};
  const double T = shutdown_time(fam, 0.1, 10.0, b);
  CHECK(T > 48.0);
  CHECK(T < 96.0);
  CHECK(limit_liquidity_vs_T(fam, 0.1, 10.0, T - 1e-6) > 0.0);
  CHECK(limit_liquidity_vs_T(fam, 0.1, 10.0, T + 1e-6) < 0.0);

  BlockTimeFamily steady;
  steady.v_bar_of_T = [](double) { return 1.0; };
  steady.N_of_T = [](double) { return 1000.0; };
  steady.F_of_T = [](double) { return ValuationModel::uniform_on_fee_to_max(0.1, 1.0); };
  CHECK_THROWS_AS(shutdown_time(steady, 0.1, 0.0, b), NoSignChange);
}

TEST_CASE("finite-M depth against block time") {
  const auto fam = default_block_time_family(0.1);
  const double L = liquidity_vs_T(fam, 5, 0.1, 10.0, 12.0);
  CHECK(L > limit_liquidity_vs_T(fam, 0.1, 10.0, 12.0));
}
