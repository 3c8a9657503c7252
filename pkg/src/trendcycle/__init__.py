"""Trend-cycle S/I/R dynamics: simulation, classification, and bound checking."""

from .model import (
    ConstantRecurrence,
    Extinct,
    ModelParams,
    Phase,
    PostTransition,
    PreTransition,
    RecurrenceSpec,
    SinusoidRecurrence,
    State,
    TrendClass,
    adoption_rate,
    c_star,
    recurrence_at,
    rejection_rate,
    rhs,
)
from .integrator import (
    EventLog,
    GridSpec,
    Trajectory,
    detect_transition,
    integrate,
    land_extinction,
    step_rk4,
)
from .analysis import (
    BoundEnvelope,
    DecayFit,
    EnvelopeReport,
    check_envelope,
    classify,
    compute_envelope,
    count_peaks,
    find_tau,
    fit_decay,
)
from .scenarios import ScenarioSpec, builtin, normalize, scenario_names, toy_power_law

__all__ = [
    "ConstantRecurrence", "Extinct", "ModelParams", "Phase", "PostTransition",
    "PreTransition", "RecurrenceSpec", "SinusoidRecurrence", "State", "TrendClass",
    "adoption_rate", "c_star", "recurrence_at", "rejection_rate", "rhs",
    "EventLog", "GridSpec", "Trajectory", "detect_transition", "integrate",
    "land_extinction", "step_rk4",
    "BoundEnvelope", "DecayFit", "EnvelopeReport", "check_envelope", "classify",
    "compute_envelope", "count_peaks", "find_tau", "fit_decay",
    "ScenarioSpec", "builtin", "normalize", "scenario_names", "toy_power_law",
]
