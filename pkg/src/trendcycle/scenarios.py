"""Canned parameter sets for the reference experiments, plus closed-form oracles.

The registry covers three experiment families:

* ``sec41_p*``   -- one adoption/rejection configuration, four values of the
                    rejection exponent p, showing the four decay regimes;
* ``sec42_*``    -- four hand-picked configurations reproducing the textbook
                    Fad / Fast-fashion / Fashion / Classic cycle shapes;
* ``sec43_*``    -- recurring cycles driven by a constant or sinusoidal
                    recurrence rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analysis import classify
from .integrator import GridSpec
from .model import (
    ConstantRecurrence,
    ModelParams,
    SinusoidRecurrence,
    State,
    TrendClass,
)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    params: ModelParams
    init: State
    grid: GridSpec
    expected_class: TrendClass
    population_N: float = 1.0


def normalize(S: float, I: float, R: float, N: float) -> State:
    """Convert head-counts to population fractions."""
    if N <= 0:
        raise ValueError(f"population must be positive, got {N}")
    if min(S, I, R) < 0:
        raise ValueError("head-counts must be non-negative")
    total = S + I + R
    if abs(total - N) > 1e-9 * N:
        raise ValueError(f"head-counts sum to {total!r}, expected N = {N!r}")
    return State(S / N, I / N, R / N)


def toy_power_law(p: float, I0: float, t: float) -> tuple[float, float | None]:
    """Closed-form solution of ``I' = -I**(p+1)`` with I(0) = I0.

    Returns (I(t), extinction time).  The extinction time is None for p >= 0;
    for p < 0 it is ``I0**|p| / |p|`` and I(t) is 0 from there on.
    """
    if not 0.0 < I0 <= 1.0:
        raise ValueError(f"I0 must be in (0, 1], got {I0}")
    if p == 0:
        return I0 * math.exp(-t), None
    if p > 0:
        return (I0 ** (-p) + p * t) ** (-1.0 / p), None
    mp = -p
    t_ext = I0**mp / mp
    if t >= t_ext:
        return 0.0, t_ext
    return (I0**mp - mp * t) ** (1.0 / mp), t_ext


_INIT_41 = State(0.98, 0.02, 0.0)
_GRID_LONG = GridSpec(t_end=50.0, dt=1e-3)
_GRID_43 = GridSpec(t_end=30.0, dt=1e-3)

_SINUSOID_43 = SinusoidRecurrence(base=0.4, amplitude=0.5, angular_frequency=math.pi / 2.0, phase=-1.0)


def _sec41(p: float) -> ModelParams:
    return ModelParams(m1=20.0, m2=0.2, m3=0.5, m4=2.0, p=p)


def _sec43(recurrence) -> ModelParams:
    return ModelParams(m1=50.0, m2=8.0, m3=4.0, m4=0.5, l_alpha=0.3, l_beta=0.0, p=0.0, recurrence=recurrence)


def _spec(name, params, init, grid, N=1.0) -> ScenarioSpec:
    return ScenarioSpec(
        name=name,
        params=params,
        init=init,
        grid=grid,
        expected_class=classify(params.p, params.recurrence),
        population_N=N,
    )


_REGISTRY: dict[str, ScenarioSpec] = {
    s.name: s
    for s in [
        _spec("sec41_p+0.5", _sec41(0.5), _INIT_41, _GRID_LONG),
        _spec("sec41_p0", _sec41(0.0), _INIT_41, _GRID_LONG),
        _spec("sec41_p-0.5", _sec41(-0.5), _INIT_41, _GRID_LONG),
        _spec("sec41_p-1.5", _sec41(-1.5), _INIT_41, _GRID_LONG),
        _spec(
            "sec42_fad",
            ModelParams(m1=3.0, m2=0.2, m3=1.0, m4=4.0, p=-2.0),
            normalize(98.0, 2.0, 0.0, 100.0),
            _GRID_LONG,
            N=100.0,
        ),
        _spec(
            "sec42_fastfashion",
            ModelParams(m1=2.0, m2=0.03, m3=0.6, m4=1.5, p=-0.5),
            normalize(98.0, 2.0, 0.0, 100.0),
            _GRID_LONG,
            N=100.0,
        ),
        _spec(
            "sec42_fashion",
            ModelParams(m1=2.0, m2=0.05, m3=0.5, m4=2.0, p=0.0),
            normalize(98.0, 2.0, 0.0, 100.0),
            _GRID_LONG,
            N=100.0,
        ),
        _spec(
            "sec42_classic",
            ModelParams(m1=1.2, m2=0.03, m3=0.2, m4=0.5, p=6.0),
            normalize(98.0, 2.0, 0.0, 100.0),
            _GRID_LONG,
            N=100.0,
        ),
        _spec("sec43_const", _sec43(ConstantRecurrence(0.4)), _INIT_41, _GRID_43),
        _spec("sec43_sinusoid", _sec43(_SINUSOID_43), _INIT_41, _GRID_43),
    ]
}


def builtin(name: str) -> ScenarioSpec:
    """Look up a registered scenario by name."""
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise KeyError(f"unknown scenario {name!r}; registered: {known}") from None


def scenario_names() -> list[str]:
    return sorted(_REGISTRY)
