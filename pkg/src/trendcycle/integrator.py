"""Fixed-step RK4 time integration with peak detection and extinction landing.

The integrator advances the trend-cycle system on a uniform grid, watches the
analytically evaluated derivative of I for its first + to - sign change,
refines that transition time by bisection on a cubic Hermite interpolant,
switches the rejection rate to its power-law branch there, and (for p < 0)
lands the finite-time extinction with the closed form of the dominant-balance
equation ``I' = -c_star * I**(p+1)`` instead of stepping into the stiff tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    PRE_TRANSITION,
    Extinct,
    ModelParams,
    Phase,
    PostTransition,
    PreTransition,
    State,
    adoption_rate,
    c_star,
    recurrence_at,
    rejection_rate,
    rhs,
)

# Below this adopter fraction (with p < 0, post-transition) the power-law term
# dominates and explicit stepping turns unstable; switch to the closed form.
LANDING_I = 1e-6

FLAG_NO_PEAK = "NoPeakDetected"
FLAG_NEGATIVE_DELTA = "NegativeDeltaObserved"
FLAG_LEFT_UNIT_INTERVAL = "StateLeftUnitInterval"

_UNIT_SLACK = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Time grid and event tolerances for one integration run."""

    t_end: float
    dt: float = 1e-3
    extinction_threshold: float = 1e-9
    refinement_tol: float = 1e-10

    def __post_init__(self) -> None:
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.dt < self.t_end:
            raise ValueError("dt must satisfy 0 < dt < t_end")
        if not self.extinction_threshold > 0 or not self.refinement_tol > 0:
            raise ValueError("thresholds must be strictly positive")


@dataclass
class EventLog:
    """Detected lifecycle events and diagnostic flags for one run."""

    t_star: float | None = None
    c_star: float | None = None
    t_extinct: float | None = None
    flags: set[str] = field(default_factory=set)


@dataclass
class Trajectory:
    """Recorded solution: grid plus event points, states, and rate values."""

    times: np.ndarray
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    phases: list[str]
    events: EventLog

    def __len__(self) -> int:
        return len(self.times)

    def state_at(self, k: int) -> State:
        return State(float(self.S[k]), float(self.I[k]), float(self.R[k]))


def step_rk4(t: float, state: State, phase: Phase, params: ModelParams, h: float) -> State:
    """One classical fourth-order Runge-Kutta step of the system."""
    S, I, R = state
    k1 = rhs(t, state, phase, params)
    h2 = 0.5 * h
    k2 = rhs(t + h2, State(S + h2 * k1[0], I + h2 * k1[1], R + h2 * k1[2]), phase, params)
    k3 = rhs(t + h2, State(S + h2 * k2[0], I + h2 * k2[1], R + h2 * k2[2]), phase, params)
    k4 = rhs(t + h, State(S + h * k3[0], I + h * k3[1], R + h * k3[2]), phase, params)
    w = h / 6.0
    return State(
        S + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        I + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        R + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )


def _step_tail(
    t: float, S: float, J: float, params: ModelParams, cs: float, mp: float, h: float
) -> tuple[float, float]:
    """RK4 step of the post-peak p < 0 dynamics in (S, J) with J = I**|p|.

    The transform removes the singularity of the hard landing: J decays
    almost linearly (J' = |p| * (alpha*S*J - c_star)) and crosses zero
    transversally, so fixed-step RK4 stays accurate through the whole tail.
    R is recovered as 1 - S - I, which keeps conservation exact.
    """
    inv = 1.0 / mp

    def f(tt: float, S_: float, J_: float) -> tuple[float, float]:
        I_ = J_**inv if J_ > 0.0 else 0.0
        R_ = 1.0 - S_ - I_
        delta = recurrence_at(tt, params.recurrence)
        a = adoption_rate(I_, params)
        return (-a * I_ * S_ + delta * R_, mp * (a * S_ * J_ - cs))

    h2 = 0.5 * h
    k1 = f(t, S, J)
    k2 = f(t + h2, S + h2 * k1[0], J + h2 * k1[1])
    k3 = f(t + h2, S + h2 * k2[0], J + h2 * k2[1])
    k4 = f(t + h, S + h * k3[0], J + h * k3[1])
    w = h / 6.0
    return (
        S + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        J + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    )


def detect_transition(
    t0: float,
    t1: float,
    I0: float,
    dI0: float,
    I1: float,
    dI1: float,
    tol: float = 1e-10,
) -> tuple[float, float]:
    """Refine the peak time inside a bracketing step.

    Given I and its derivative at both ends of a step where the derivative
    changes sign from + to -, fit the cubic Hermite interpolant of I and
    bisect its derivative to within ``tol`` in time.  Returns the refined
    peak time and the interpolated I there.
    """
    if not (dI0 > 0.0 and dI1 <= 0.0):
        raise ValueError("bracket requires I' > 0 at start and I' <= 0 at end")
    h = t1 - t0

    def hermite(s: float) -> tuple[float, float]:
        # value and d/ds of the cubic Hermite on [0, 1]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        val = h00 * I0 + h10 * h * dI0 + h01 * I1 + h11 * h * dI1
        d00 = 6 * s**2 - 6 * s
        d10 = 3 * s**2 - 4 * s + 1
        d01 = -6 * s**2 + 6 * s
        d11 = 3 * s**2 - 2 * s
        dval = d00 * I0 + d10 * h * dI0 + d01 * I1 + d11 * h * dI1
        return val, dval

    lo, hi = 0.0, 1.0
    while (hi - lo) * h > tol:
        mid = 0.5 * (lo + hi)
        if hermite(mid)[1] > 0.0:
            lo = mid
        else:
            hi = mid
    s_star = 0.5 * (lo + hi)
    return t0 + s_star * h, hermite(s_star)[0]


def land_extinction(t0: float, I0: float, c_star_val: float, p: float) -> float:
    """Finite extinction time of ``I' = -c_star * I**(p+1)`` started at I0."""
    if p >= 0:
        raise ValueError("finite-time extinction requires p < 0")
    return t0 + I0 ** (-p) / (-p * c_star_val)


def integrate(
    params: ModelParams,
    init: State,
    grid: GridSpec,
    phase0: Phase = PRE_TRANSITION,
) -> Trajectory:
    """Integrate the system over [0, t_end] and record the full trajectory.

    States are recorded at every grid point plus the refined transition and
    extinction event points.  The phase switch at the first peak of I is
    permanent; for p < 0 the extinction is landed in closed form and I is
    pinned at 0 afterwards (S and R keep exchanging when delta > 0).

    ``phase0`` overrides the starting phase; passing a ``PostTransition``
    phase runs the power-law branch from t = 0, which (with S = 0) reduces
    the system to the decoupled toy problem ``I' = -c_star * I**(p+1)``.
    """
    if abs(init.total() - 1.0) > 1e-9:
        raise ValueError(f"initial state must sum to 1, got {init.total()!r}")
    if min(init) < 0.0:
        raise ValueError(f"initial components must be non-negative, got {init!r}")

    t_end, dt = grid.t_end, grid.dt
    times: list[float] = []
    Ss: list[float] = []
    Is: list[float] = []
    Rs: list[float] = []
    alphas: list[float] = []
    betas: list[float] = []
    phase_labels: list[str] = []
    events = EventLog()

    phase: Phase = phase0
    if isinstance(phase0, PostTransition):
        events.t_star = phase0.t_star
        events.c_star = phase0.c_star
    state = init
    t = 0.0
    deriv = rhs(t, state, phase, params)

    def record(t_rec: float, st: State, ph: Phase) -> None:
        if times and t_rec <= times[-1]:
            return
        delta = recurrence_at(t_rec, params.recurrence)
        if delta < 0.0:
            events.flags.add(FLAG_NEGATIVE_DELTA)
        if min(st) < -_UNIT_SLACK or max(st) > 1.0 + _UNIT_SLACK:
            events.flags.add(FLAG_LEFT_UNIT_INTERVAL)
        times.append(t_rec)
        Ss.append(st.S)
        Is.append(st.I)
        Rs.append(st.R)
        alphas.append(adoption_rate(st.I, params))
        betas.append(rejection_rate(st.I, ph, params))
        if isinstance(ph, PreTransition):
            phase_labels.append("pre")
        elif isinstance(ph, PostTransition):
            phase_labels.append("post")
        else:
            phase_labels.append("extinct")

    def land(t_from: float, st: State) -> tuple[float, State]:
        """Closed-form extinction from (t_from, st); records the segment."""
        assert isinstance(phase, PostTransition)
        cs = phase.c_star
        p = params.p
        t_ext = land_extinction(t_from, st.I, cs, p)
        mp = -p
        # fill grid points on the landing segment with the dominant-balance
        # closed form; the rejected adopters flow into R, S is frozen
        k = int(math.floor(t_from / dt)) + 1
        t_grid = k * dt
        while t_grid < min(t_ext, t_end):
            base = st.I**mp - mp * cs * (t_grid - t_from)
            I_t = base ** (1.0 / mp) if base > 0.0 else 0.0
            record(t_grid, State(st.S, I_t, st.R + (st.I - I_t)), phase)
            k += 1
            t_grid = k * dt
        end_state = State(st.S, 0.0, st.R + st.I)
        if t_ext <= t_end:
            events.t_extinct = t_ext
            record(t_ext, end_state, Extinct(t_ext))
            return t_ext, end_state
        # horizon ends before the landed extinction time; still report it
        events.t_extinct = t_ext
        base = st.I**mp - mp * cs * (t_end - t_from)
        I_t = base ** (1.0 / mp) if base > 0.0 else 0.0
        record(t_end, State(st.S, I_t, st.R + (st.I - I_t)), phase)
        return t_end, State(st.S, I_t, st.R + (st.I - I_t))

    record(t, state, phase)

    n_steps = int(math.ceil(t_end / dt - 1e-12))
    k = 0
    while k < n_steps:
        t_next = (k + 1) * dt
        if t_next > t_end:
            t_next = t_end
        h = t_next - t

        if isinstance(phase, PostTransition) and params.p < 0:
            mp = -params.p
            cs = phase.c_star
            J = state.I**mp
            if state.I < LANDING_I:
                t, state = land(t, state)
            else:
                S_new, J_new = _step_tail(t, state.S, J, params, cs, mp, h)
                if J_new > LANDING_I**mp:
                    I_new = J_new ** (1.0 / mp)
                    t = t_next
                    state = State(S_new, I_new, 1.0 - S_new - I_new)
                    record(t, state, phase)
                    k += 1
                    continue
                # the step reached (or crossed) the landing threshold; land
                # in closed form from the pre-step point, where I is already
                # small enough that the neglected adoption term is negligible
                t, state = land(t, state)
            if t >= t_end:
                break
            phase = Extinct(events.t_extinct)
            deriv = rhs(t, state, phase, params)
            # resume on the next grid point after the extinction event
            k = int(math.floor(t / dt + 1e-12))
            continue

        trial = step_rk4(t, state, phase, params, h)
        new_deriv = rhs(t_next, trial, phase, params)

        if isinstance(phase, PreTransition) and deriv[1] > 0.0 and new_deriv[1] <= 0.0:
            t_star, _ = detect_transition(
                t, t_next, state.I, deriv[1], trial.I, new_deriv[1], grid.refinement_tol
            )
            if t_star > t:
                state_star = step_rk4(t, state, phase, params, t_star - t)
            else:
                state_star = state
            beta_star = rejection_rate(state_star.I, phase, params)
            cs = c_star(state_star.I, beta_star, params.p)
            events.t_star = t_star
            events.c_star = cs
            phase = PostTransition(t_star, cs)
            record(t_star, state_star, phase)
            t = t_star
            deriv = rhs(t, state_star, phase, params)
            state = state_star
            # finish the partial step to the grid point in the new phase
            continue

        t = t_next
        state = trial
        deriv = new_deriv
        record(t, state, phase)
        k += 1

    if events.t_star is None:
        events.flags.add(FLAG_NO_PEAK)

    return Trajectory(
        times=np.asarray(times),
        S=np.asarray(Ss),
        I=np.asarray(Is),
        R=np.asarray(Rs),
        alphas=np.asarray(alphas),
        betas=np.asarray(betas),
        phases=phase_labels,
        events=events,
    )
