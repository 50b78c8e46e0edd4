"""Bass-style adoption dynamics, with an optional cost-gap response term.

The annual recursion is
    n(t) = max(0, (p*(m - N) + q*(N/m)*(m - N)) * x(t))
    N(t+1) = min(m, N(t) + n(t))
where x(t) = 1 + beta * lifecycle_premium(t) when a premium series is
supplied and 1 otherwise. Large positive premiums with beta < 0 can push
x(t) negative; flows are clamped at zero rather than allowing disadoption.

Units follow the calibration data: vehicles are counted in thousands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .trajectory import PremiumSeries


@dataclass(frozen=True)
class BassParams:
    """p: innovation rate (1/yr), q: imitation rate (1/yr), m: market
    potential (thousand vehicles), beta: cost-gap influence coefficient."""

    p: float
    q: float
    m: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not self.p > 0:
            raise ValueError("p must be > 0")
        if self.q < 0:
            raise ValueError("q must be >= 0")
        if not self.m > 0:
            raise ValueError("m must be > 0")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")


@dataclass(frozen=True)
class AdoptionState:
    """One simulated year: cumulative adopters entering the year, plus the
    year's new adopters."""

    year: int
    cumulative: float
    new_adopters: float


def decision_coefficient(delta_p3: float, beta: float) -> float:
    """Purchase-decision multiplier driven by the lifecycle cost gap."""
    return 1.0 + delta_p3 * beta


def bass_step(params: BassParams, cumulative: float, x: float = 1.0) -> float:
    """One annual adoption increment, clamped at zero."""
    remaining = params.m - cumulative
    flow = (params.p * remaining
            + params.q * (cumulative / params.m) * remaining) * x
    return max(0.0, flow)


def raw_bass_step(params: BassParams, cumulative: float, x: float = 1.0) -> float:
    """The pre-clamp flow; used by the fitting objective's positivity penalty."""
    remaining = params.m - cumulative
    return (params.p * remaining
            + params.q * (cumulative / params.m) * remaining) * x


def simulate(params: BassParams,
             premium_by_year: "PremiumSeries | None",
             start_year: int,
             horizon: int,
             initial_cumulative: float = 0.0) -> tuple[AdoptionState, ...]:
    """Run the annual recursion for `horizon` years from `start_year`.

    With a premium series, each year's flow is scaled by
    decision_coefficient(lifecycle premium, beta); the series must cover
    every simulated year.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if premium_by_year is not None:
        missing = [y for y in range(start_year, start_year + horizon)
                   if y not in premium_by_year.years]
        if missing:
            raise ValueError(f"premium series missing years {missing}")
    states = []
    cumulative = min(initial_cumulative, params.m)
    for year in range(start_year, start_year + horizon):
        x = 1.0
        if premium_by_year is not None:
            x = decision_coefficient(premium_by_year.lifecycle(year), params.beta)
        flow = bass_step(params, cumulative, x)
        flow = min(flow, params.m - cumulative)
        states.append(AdoptionState(year=year, cumulative=cumulative, new_adopters=flow))
        cumulative += flow
    return tuple(states)


def closed_form_cumulative(params: BassParams, t: float) -> float:
    """Continuous-time cumulative adoption fraction F(t), starting from zero.

    F(t) = (1 - exp(-(p+q) t)) / (1 + (q/p) exp(-(p+q) t))
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    decay = math.exp(-(params.p + params.q) * t)
    return (1.0 - decay) / (1.0 + (params.q / params.p) * decay)
