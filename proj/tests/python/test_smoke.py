import math

import pytest

import pgamarket as pg


@pytest.fixture(scope="module")
def running():
    model = pg.ValuationModel.uniform_on_fee_to_max(0.1, 1.0)
    params = pg.MarketParams(pi=0.1, theta=10.0, N=1000.0, C=0.0, model=model)
    sol = pg.Stage3Solution.solve(model, 2, 0.1)
    return model, params, sol


def test_cutoff(running):
    model, _, sol = running
    assert sol.cutoff == pytest.approx(1.0 - 0.9 * math.log(2.0), abs=1e-12)
    assert pg.solve_cutoff(model, 5, 0.1) == pytest.approx(1.0 - 0.9 * math.log(5.0) / 4.0, abs=1e-12)


def test_liquidity(running):
    _, params, sol = running
    eq = pg.liquidity_star(params, sol)
    assert eq["viable"]
    assert eq["L_star"] == pytest.approx(849.410257566976, rel=1e-11)
    assert pg.uniform_liquidity_closed_form(params, 2) == pytest.approx(eq["L_star"], rel=1e-10)
    assert pg.s_m(sol) == pytest.approx(0.0581794312550469, rel=1e-10)


def test_entry(running):
    _, params, _ = running
    assert pg.h_of_m(params, 2) == pytest.approx(22.9201946642999, rel=1e-9)


def test_monte_carlo(running):
    _, params, sol = running
    report = pg.run_monte_carlo(sol, 849.41, params, 20000, 3, 2)
    mean, se = report["estimates"]["end_price"]
    assert abs(mean - pg.expected_end_price(sol)) < 4 * se
    again = pg.run_monte_carlo(sol, 849.41, params, 20000, 3, 1)
    assert again["estimates"] == report["estimates"]


def test_errors():
    with pytest.raises(pg.DomainError, match="pi must be below v_bar"):
        pg.ValuationModel.uniform_on_fee_to_max(1.0, 1.0)


def test_amm():
    rows = pg.amm_approximation_error(100.0, 0.1, [1e-3, 1e-2, 1e-1])
    errors = [r[1] for r in rows]
    assert errors == sorted(errors)
