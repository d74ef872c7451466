#include <cmath>

#include "doctest.h"
#include "pgamarket/errors.hpp"
#include "pgamarket/stage1.hpp"

using namespace pgamarket;

namespace {

MarketParams running(double N = 1000.0, double C = 0.0) {
  MarketParams p;
  p.pi = 0.1;
  p.theta = 10.0;
  p.N = N;
  p.C = C;
  p.model = ValuationModel::uniform_on_fee_to_max(0.1, 1.0);
  return p;
}

}  // namespace

TEST_CASE("entry profit against the high-precision oracle") {
  CHECK(h_of_m(running(), 2) == doctest::Approx(22.9201946642999).epsilon(1e-10));
  CHECK(h_of_m(running(), 5) == doctest::Approx(3.79996756322926).epsilon(1e-10));
}

TEST_CASE("simplified and unsimplified entry profit agree") {
  for (int M : {2, 5, 10}) {
    CAPTURE(M);
    CHECK(h_of_m_unsimplified(running(), M) == doctest::Approx(h_of_m(running(), M)).epsilon(1e-9));
  }
  auto beta = running();
  beta.pi = 0.05;
  beta.model = ValuationModel::scaled_beta(2.0, 3.0, 1.0);
  CHECK(h_of_m_unsimplified(beta, 3) == doctest::Approx(h_of_m(beta, 3)).epsilon(1e-9));
}

TEST_CASE("non-viable M gives -inf") {
  CHECK(h_of_m(running(1.0), 2) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(h_of_m(running(), 1), DomainError);
}

TEST_CASE("entry count") {
  const auto none = equilibrium_m(running(1000.0, 22.93), 200);
  CHECK_FALSE(none.m_star.has_value());

  const auto out = equilibrium_m(running(1000.0, 5.0), 200);
  REQUIRE(out.m_star.has_value());
  CHECK(*out.m_star == 4);
  CHECK(out.binding);
  for (const auto& [M, h] : out.h_values) {
    if (M == *out.m_star) CHECK(h >= 5.0);
    if (M == *out.m_star + 1) CHECK(h < 5.0);
  }
  CHECK(m_star_from_table(out.h_values, 5.0) == out.m_star);
  CHECK(m_star_from_table(out.h_values, 30.0) == std::nullopt);
}

TEST_CASE("scan is independent of the worker count") {
  const auto a = equilibrium_m(running(1000.0, 0.5), 200, 1);
  const auto b = equilibrium_m(running(1000.0, 0.5), 200, 3);
  CHECK(a.m_star == b.m_star);
  REQUIRE(a.h_values.size() == b.h_values.size());
  for (std::size_t i = 0; i < a.h_values.size(); ++i) {
    CHECK(a.h_values[i].second == b.h_values[i].second);
  }
}

TEST_CASE("scan cap") {
  CHECK_THROWS_AS(equilibrium_m(running(1000.0, 0.001), 20), ScanCapHit);
  CHECK_THROWS_AS(equilibrium_m(running(), 1), DomainError);
}

TEST_CASE("entry count comparative statics") {
  std::optional<int> prev;
  for (double C : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const auto m = equilibrium_m(running(1000.0, C), 1000).m_star;
    REQUIRE(m.has_value());
    if (prev) CHECK(*m <= *prev);
    prev = m;
  }
  prev.reset();
  for (double N : {200.0, 500.0, 1000.0, 2000.0}) {
    const auto m = equilibrium_m(running(N, 2.0), 1000).m_star;
    REQUIRE(m.has_value());
    if (prev) CHECK(*m >= *prev);
    prev = m;
  }
}
