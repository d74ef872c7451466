#include <cmath>

#include "doctest.h"
#include "pgamarket/errors.hpp"
#include "pgamarket/numerics.hpp"
#include "pgamarket/valuations.hpp"

using namespace pgamarket;

namespace {

std::vector<ValuationModel> all_models() {
  return {ValuationModel::uniform_on_fee_to_max(0.1, 1.0),
          ValuationModel::uniform_on_zero_to_max(1.5),
          ValuationModel::truncated_exponential(2.0, 1.0),
          ValuationModel::truncated_exponential(-1.5, 2.0),
          ValuationModel::scaled_beta(2.0, 3.0, 1.2)};
}

}  // namespace

TEST_CASE("density integrates to one and matches the cdf") {
  for (const auto& m : all_models()) {
    CAPTURE(to_string(m.family()));
    const double lo = m.lower_support();
    const double mass = numerics::integrate([&](double v) { return m.density(v); }, lo, m.v_bar());
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    for (double p : {0.1, 0.37, 0.5, 0.9}) {
      const double v = lo + p * (m.v_bar() - lo);
      const double c = numerics::integrate([&](double u) { return m.density(u); }, lo, v);
      CHECK(m.cdf(v) == doctest::Approx(c).epsilon(1e-10));
      CHECK(m.cdf(v) + m.survival(v) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("quantile inverts the cdf") {
  for (const auto& m : all_models()) {
    CAPTURE(to_string(m.family()));
    for (double p : {0.0, 0.01, 0.25, 0.5, 0.75, 0.999, 1.0}) {
      CHECK(m.cdf(m.quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
    CHECK_THROWS_AS(m.quantile(-0.1), DomainError);
    CHECK_THROWS_AS(m.quantile(1.1), DomainError);
  }
}

TEST_CASE("cdf is clamped outside the support") {
  const auto m = ValuationModel::uniform_on_fee_to_max(0.1, 1.0);
  CHECK(m.cdf(0.05) == 0.0);
  CHECK(m.cdf(2.0) == 1.0);
  CHECK(m.cdf(0.55) == doctest::Approx(0.5));
  CHECK(m.density(1.5) == 0.0);
}

TEST_CASE("sampling is reproducible per stream") {
  const auto m = ValuationModel::scaled_beta(2.0, 2.0, 1.0);
  RandomStream a(7, 3);
  RandomStream b(7, 3);
  RandomStream c(7, 4);
  const double x = m.sample(a);
  CHECK(x == m.sample(b));
  CHECK(x != m.sample(c));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_WITH_AS(ValuationModel::uniform_on_fee_to_max(1.0, 1.0), "pi must be below v_bar",
                       DomainError);
  CHECK_THROWS_AS(ValuationModel::scaled_beta(0.5, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(ValuationModel::uniform_on_zero_to_max(0.0), DomainError);
  CHECK_THROWS_AS(valuation_family_from_string("lognormal"), DomainError);
  CHECK(valuation_family_from_string("scaled_beta") == ValuationFamily::ScaledBeta);
}

TEST_CASE("upper tail compliance") {
  CHECK(ValuationModel::uniform_on_fee_to_max(0.1, 1.0).upper_tail_compliant(0.1));
  // Density rising towards v_bar exceeds 1/(v_bar - pi) there.
  CHECK_FALSE(ValuationModel::truncated_exponential(-3.0, 1.0).upper_tail_compliant(0.1));
}

TEST_CASE("default block-time family is dominance ordered") {
  const auto fam = default_block_time_family(0.1);
  CHECK(fam.v_bar_of_T(12.0) == doctest::Approx(1.9));
  CHECK(fam.N_of_T(0.0) == doctest::Approx(1000.0));
  const auto r = fosd_check(fam, 6.0, 12.0, 256);
  CHECK(r.dominates);
  CHECK_FALSE(r.violating_v.has_value());
  CHECK_THROWS_AS(fosd_check(fam, 12.0, 12.0, 10), DomainError);

  BlockTimeFamily flat;
  flat.v_bar_of_T = [](double) { return 1.0; };
  flat.N_of_T = [](double) { return 1000.0; };
  flat.F_of_T = [](double) { return ValuationModel::uniform_on_fee_to_max(0.1, 1.0); };
  const auto f = fosd_check(flat, 6.0, 12.0, 16);
  CHECK_FALSE(f.dominates);
  REQUIRE(f.violating_v.has_value());
}
