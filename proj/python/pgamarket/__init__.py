"""Equilibrium solver and Monte Carlo verifier for priority-fee DEX markets."""

from ._pgamarket import (
    ValuationModel,
    Stage3Solution,
    MarketParams,
    solve_cutoff,
    s_m,
    liquidity_star,
    liquidity_limit,
    uniform_liquidity_closed_form,
    h_of_m,
    equilibrium_m,
    expected_end_price,
    aggregate_volume,
    deviation_payoff,
    run_monte_carlo,
    amm_approximation_error,
    Error,
    DomainError,
)

__all__ = [
    "ValuationModel",
    "Stage3Solution",
    "MarketParams",
    "solve_cutoff",
    "s_m",
    "liquidity_star",
    "liquidity_limit",
    "uniform_liquidity_closed_form",
    "h_of_m",
    "equilibrium_m",
    "expected_end_price",
    "aggregate_volume",
    "deviation_payoff",
    "run_monte_carlo",
    "amm_approximation_error",
    "Error",
    "DomainError",
]
