"""Core model: compartment state, rate functions, and the ODE right-hand side.

The population is split into three compartments (all rescaled to fractions
of the total population):

* ``S`` -- potential adopters,
* ``I`` -- current adopters,
* ``R`` -- rejecters.

Adoption happens at a sigmoid rate driven by the current adopter fraction;
rejection starts at a sigmoid rate and switches permanently to a power law
``c_star * I**p`` at the first peak of ``I``.  Rejecters may re-enter the
potential pool at a (possibly time-dependent) recurrence rate ``delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Union


class ConstantRecurrence(NamedTuple):
    """Time-independent recurrence rate ``delta``."""

    value: float

    def is_zero(self) -> bool:
        return self.value == 0.0


class SinusoidRecurrence(NamedTuple):
    """Sinusoidal recurrence ``base + amplitude*sin(angular_frequency*t + phase)``.

    May evaluate to negative values; this is recorded by the integrator as a
    flag, not rejected.
    """

    base: float
    amplitude: float
    angular_frequency: float
    phase: float

    def is_zero(self) -> bool:
        return self.base == 0.0 and self.amplitude == 0.0


RecurrenceSpec = Union[ConstantRecurrence, SinusoidRecurrence]

ZERO_RECURRENCE = ConstantRecurrence(0.0)


def recurrence_at(t: float, spec: RecurrenceSpec) -> float:
    """Evaluate the recurrence rate delta at time ``t``."""
    if isinstance(spec, ConstantRecurrence):
        return spec.value
    return spec.base + spec.amplitude * math.sin(spec.angular_frequency * t + spec.phase)


@dataclass(frozen=True)
class ModelParams:
    """All rate-function constants of the trend-cycle system.

    ``m1, m2`` are the intensity and sharpness of the adoption sigmoid,
    ``m3, m4`` the same for the rejection sigmoid, ``l_alpha`` / ``l_beta``
    the adoption / rejection delays, and ``p`` the post-peak rejection
    exponent (any sign).
    """

    m1: float
    m2: float
    m3: float
    m4: float
    l_alpha: float = 0.0
    l_beta: float = 0.0
    p: float = 0.0
    recurrence: RecurrenceSpec = ZERO_RECURRENCE

    def __post_init__(self) -> None:
        for name in ("m1", "m2", "m3", "m4"):
            v = getattr(self, name)
            if not v > 0.0:
                raise ValueError(f"{name} must be strictly positive, got {v}")
        if not math.isfinite(self.p):
            raise ValueError(f"p must be finite, got {self.p}")
        if isinstance(self.recurrence, ConstantRecurrence) and self.recurrence.value < 0:
            raise ValueError("constant recurrence rate must be >= 0")


class State(NamedTuple):
    """Compartment fractions (S, I, R); valid states sum to 1."""

    S: float
    I: float
    R: float

    def total(self) -> float:
        return self.S + self.I + self.R


class PreTransition(NamedTuple):
    """Before the first peak of I: rejection follows the sigmoid branch."""


class PostTransition(NamedTuple):
    """After the first peak: rejection is ``c_star * I**p``."""

    t_star: float
    c_star: float


class Extinct(NamedTuple):
    """I has reached zero (only for p < 0); rejection rate is 0, I stays 0."""

    t_extinct: float


Phase = Union[PreTransition, PostTransition, Extinct]

PRE_TRANSITION = PreTransition()


class TrendClass(Enum):
    FAD = "Fad"
    FAST_FASHION = "FastFashion"
    FASHION = "Fashion"
    CLASSIC = "Classic"
    PERIODIC = "Periodic"


def adoption_rate(I: float, params: ModelParams) -> float:
    """Sigmoid adoption rate alpha(I); strictly increasing, in (0, m1)."""
    return params.m1 / (1.0 + math.exp(-params.m2 * (I - params.l_alpha)))


def rejection_rate(I: float, phase: Phase, params: ModelParams) -> float:
    """Rejection rate beta(I) for the given lifecycle phase.

    Pre-transition: sigmoid in I.  Post-transition: ``c_star * I**p``.
    Extinct: 0.

    Raises:
        ValueError: post-transition with p < 0 and I = 0 (undefined power).
    """
    if isinstance(phase, PreTransition):
        return params.m3 / (1.0 + math.exp(-params.m4 * (I - params.l_beta)))
    if isinstance(phase, PostTransition):
        if I == 0.0:
            if params.p < 0:
                raise ValueError("rejection rate undefined at I=0 for p < 0")
            if params.p == 0:
                return phase.c_star
            return 0.0
        return phase.c_star * I**params.p
    return 0.0


def c_star(I_star: float, beta_star: float, p: float) -> float:
    """Continuity constant for the post-peak power law.

    Chosen so that ``c_star * I_star**p == beta_star``, i.e. beta is
    continuous across the phase switch.
    """
    if I_star <= 0.0:
        raise ValueError(f"I at the transition must be positive, got {I_star}")
    return beta_star * I_star ** (-p)


def rhs(t: float, state: State, phase: Phase, params: ModelParams) -> tuple[float, float, float]:
    """Right-hand side (S', I', R') of the rescaled system.

    The three flow terms (adoption, rejection, recurrence) each appear once
    with a plus and once with a minus sign, so the components sum to zero in
    exact arithmetic and the total population is conserved.
    """
    S, I, R = state
    delta = recurrence_at(t, params.recurrence)
    recur = delta * R
    if isinstance(phase, Extinct):
        # I is pinned at 0; only the S <-> R exchange remains.
        return (recur, 0.0, -recur)
    adopt = adoption_rate(I, params) * I * S
    reject = rejection_rate(I, phase, params) * I
    return (-adopt + recur, adopt - reject, reject - recur)
