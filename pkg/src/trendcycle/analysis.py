"""Trajectory analysis: classification, decay-bound envelopes, and summaries.

The envelope machinery turns the analytical post-peak decay estimates into
evaluable lower/upper bound curves with run-specific constants, so a numerical
trajectory can be certified against them pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.signal import find_peaks

from .model import ModelParams, RecurrenceSpec, TrendClass, adoption_rate
from .integrator import Trajectory

ENVELOPE_TOL = 1e-6


def classify(p: float, recurrence: RecurrenceSpec) -> TrendClass:
    """Map (rejection exponent, recurrence spec) to the five-way taxonomy.

    Raises:
        ValueError: p < 0 combined with nonzero recurrence, which would let
            the cycle go extinct before it recurs and is outside the taxonomy.
    """
    if not recurrence.is_zero():
        if p < 0:
            raise ValueError("p < 0 with nonzero recurrence is outside the taxonomy")
        return TrendClass.PERIODIC
    if p <= -1:
        return TrendClass.FAD
    if p < 0:
        return TrendClass.FAST_FASHION
    if p == 0:
        return TrendClass.FASHION
    return TrendClass.CLASSIC


@dataclass
class BoundEnvelope:
    """Regime-specific lower/upper bounds for I(t) after the peak.

    ``lower`` is valid on [lower_from, t_hi], ``upper`` on [upper_from, t_hi].
    When ``applicable`` is False the bound preconditions failed and ``reason``
    says which; all other fields are then unset or partial.
    """

    regime: TrendClass | None
    applicable: bool
    reason: str | None = None
    t_star: float | None = None
    c_star: float | None = None
    a_star: float | None = None
    t2: float | None = None
    lam: float | None = None
    tau: float | None = None
    a_tau: float | None = None
    lower: Callable[[float], float] | None = None
    upper: Callable[[float], float] | None = None
    lower_from: float | None = None
    upper_from: float | None = None
    t_hi: float | None = None
    extinction_bracket: tuple[float, float] | None = None


@dataclass
class EnvelopeReport:
    """Result of checking one trajectory against one envelope."""

    applicable: bool
    reason: str | None
    max_lower_violation: float = 0.0
    max_upper_violation: float = 0.0
    first_violation_time: float | None = None
    n_checked: int = 0

    @property
    def passed(self) -> bool:
        return self.applicable and self.max_lower_violation == 0.0 and self.max_upper_violation == 0.0


def _inapplicable(reason: str) -> BoundEnvelope:
    return BoundEnvelope(regime=None, applicable=False, reason=reason)


def find_tau(traj: Trajectory, params: ModelParams) -> float | None:
    """First recorded time at or after the peak where I drops below the
    threshold ``(c_star / (2 m1))**(-1/p)``.

    Past that point the linear adoption term is dominated by half the
    power-law rejection term, which is what brackets the extinction time.
    Returns None when the threshold is never crossed within the horizon.
    """
    if params.p >= 0:
        raise ValueError("tau is defined only for p < 0")
    if traj.events.t_star is None:
        raise ValueError("tau requires a detected transition time")
    threshold = (traj.events.c_star / (2.0 * params.m1)) ** (-1.0 / params.p)
    mask = (traj.times >= traj.events.t_star) & (traj.I <= threshold)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None
    return float(traj.times[idx[0]])


def compute_envelope(traj: Trajectory, params: ModelParams) -> BoundEnvelope:
    """Build the decay envelope for a finished run.

    Preconditions (reported, not raised): zero recurrence, zero adoption and
    rejection delays, ``m1 * S(0) > 2 * m3``, and a detected finite peak.
    """
    if not params.recurrence.is_zero():
        return _inapplicable("recurrence rate is not identically zero")
    if params.l_alpha != 0.0 or params.l_beta != 0.0:
        return _inapplicable("adoption/rejection delays must be zero")
    S0 = float(traj.S[0])
    if not params.m1 * S0 > 2.0 * params.m3:
        return _inapplicable(f"m1*S(0) = {params.m1 * S0:g} does not exceed 2*m3 = {2 * params.m3:g}")
    if traj.events.t_star is None:
        return _inapplicable("no finite transition time detected")

    t_star = traj.events.t_star
    cs = traj.events.c_star
    k_star = int(np.searchsorted(traj.times, t_star))
    a_star = float(traj.I[k_star])
    t_hi = float(traj.times[-1])
    p = params.p

    if p > 0:
        b = p * cs
        c = cs / params.m1
        a_pow = a_star ** (-p)
        pm1 = p * params.m1

        def lower(t: float) -> float:
            return (a_pow + b * (t - t_star)) ** (-1.0 / p)

        def upper(t: float) -> float:
            return (a_pow - (a_pow - c) * (1.0 - math.exp(-pm1 * (t - t_star)))) ** (-1.0 / p)

        return BoundEnvelope(
            regime=TrendClass.CLASSIC,
            applicable=True,
            t_star=t_star,
            c_star=cs,
            a_star=a_star,
            lower=lower,
            upper=upper,
            lower_from=t_star,
            upper_from=t_star,
            t_hi=t_hi,
        )

    if p == 0:
        # anchor the upper bound one time unit past the peak, or ten grid
        # steps for short horizons
        dt = float(np.median(np.diff(traj.times)))
        # half-step slack so roundoff in the grid times cannot shift the anchor
        k2 = int(np.searchsorted(traj.times, t_star + 1.0 - 0.5 * dt))
        if k2 >= len(traj.times):
            k2 = int(np.searchsorted(traj.times, t_star + 9.5 * dt))
        if k2 >= len(traj.times):
            return _inapplicable("horizon too short to place the upper-bound anchor t2")
        t2 = float(traj.times[k2])
        I2 = float(traj.I[k2])
        S2 = float(traj.S[k2])
        lam = cs - adoption_rate(I2, params) * S2
        if lam <= 0.0:
            return _inapplicable(f"nonpositive upper-bound decay rate lambda = {lam:g}")

        def lower(t: float) -> float:
            return a_star * math.exp(-cs * (t - t_star))

        def upper(t: float) -> float:
            return I2 * math.exp(-lam * (t - t2))

        return BoundEnvelope(
            regime=TrendClass.FASHION,
            applicable=True,
            t_star=t_star,
            c_star=cs,
            a_star=a_star,
            t2=t2,
            lam=lam,
            lower=lower,
            upper=upper,
            lower_from=t_star,
            upper_from=t2,
            t_hi=t_hi,
        )

    # p < 0: bounds on I**|p|, linear in time, give a finite extinction bracket
    tau = find_tau(traj, params)
    if tau is None:
        return _inapplicable("threshold time tau not reached within the horizon")
    k_tau = int(np.searchsorted(traj.times, tau))
    a_tau = float(traj.I[k_tau])
    mp = -p
    a_pow = a_tau**mp
    rate_lo = mp * cs
    rate_hi = 0.5 * mp * cs

    def lower(t: float) -> float:
        x = a_pow - rate_lo * (t - tau)
        return x ** (1.0 / mp) if x > 0.0 else 0.0

    def upper(t: float) -> float:
        x = a_pow - rate_hi * (t - tau)
        return x ** (1.0 / mp) if x > 0.0 else 0.0

    if traj.events.t_extinct is not None:
        t_hi = min(t_hi, traj.events.t_extinct)
    bracket = (tau + a_pow / (cs * mp), tau + 2.0 * a_pow / (cs * mp))
    return BoundEnvelope(
        regime=TrendClass.FAD,
        applicable=True,
        t_star=t_star,
        c_star=cs,
        a_star=a_star,
        tau=tau,
        a_tau=a_tau,
        lower=lower,
        upper=upper,
        lower_from=tau,
        upper_from=tau,
        t_hi=t_hi,
        extinction_bracket=bracket,
    )


def check_envelope(traj: Trajectory, env: BoundEnvelope, tol: float = ENVELOPE_TOL) -> EnvelopeReport:
    """Check every recorded point of the trajectory against the envelope.

    Violations are the amounts by which I falls below ``lower - tol`` or
    rises above ``upper + tol`` on the respective validity intervals.
    """
    if not env.applicable:
        return EnvelopeReport(applicable=False, reason=env.reason)
    max_lo = 0.0
    max_hi = 0.0
    first_t: float | None = None
    n = 0
    for t, I in zip(traj.times, traj.I):
        if t < env.lower_from or t > env.t_hi:
            continue
        n += 1
        lo_viol = (env.lower(t) - tol) - I
        hi_viol = I - (env.upper(t) + tol) if t >= env.upper_from else 0.0
        if lo_viol > max_lo:
            max_lo = lo_viol
        if hi_viol > max_hi:
            max_hi = hi_viol
        if (lo_viol > 0.0 or hi_viol > 0.0) and first_t is None:
            first_t = float(t)
    return EnvelopeReport(
        applicable=True,
        reason=None,
        max_lower_violation=max_lo,
        max_upper_violation=max_hi,
        first_violation_time=first_t,
        n_checked=n,
    )


class DecayFit(NamedTuple):
    slope: float
    intercept: float
    rms_residual: float
    n_samples: int


def fit_decay(traj: Trajectory, p: float, window: tuple[float, float]) -> DecayFit:
    """Least-squares decay fit on a post-peak window.

    For p = 0 fits ln I against t (exponential decay rate); for p > 0 fits
    ``I**(-p)`` against t (polynomial decay, linear in the transform).
    """
    if p < 0:
        raise ValueError("decay fitting is defined for p >= 0")
    t0, t1 = window
    mask = (traj.times >= t0) & (traj.times <= t1)
    t = traj.times[mask]
    I = traj.I[mask]
    if t.size < 8:
        raise ValueError(f"window holds only {t.size} samples, need at least 8")
    if np.any(I <= 0.0):
        raise ValueError("window contains nonpositive I values")
    y = np.log(I) if p == 0 else I ** (-p)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    return DecayFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))), int(t.size))


def count_peaks(traj: Trajectory, min_prominence: float = 0.01) -> tuple[int, np.ndarray]:
    """Strict local maxima of I with at least the given prominence."""
    idx, _ = find_peaks(traj.I, prominence=min_prominence)
    return int(idx.size), traj.times[idx]
