"""Command-line front end: simulate, classify, verify, sweep, plot.

Exit codes: 0 success, 1 runtime invariant violation, 2 bad input,
3 verification inapplicable (preconditions of the decay bounds not met).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, scenarios
from .integrator import (
    FLAG_NEGATIVE_DELTA,
    FLAG_LEFT_UNIT_INTERVAL,
    GridSpec,
    Trajectory,
    integrate,
)
from .model import (
    ConstantRecurrence,
    ModelParams,
    SinusoidRecurrence,
    State,
)

CSV_HEADER = ["t", "S", "I", "R", "alpha", "beta", "phase"]

_CONFIG_KEYS = {
    "m1", "m2", "m3", "m4", "l_alpha", "l_beta", "p", "delta",
    "S0", "I0", "R0", "N", "t_end", "dt",
    "extinction_threshold", "refinement_tol", "outputs", "output_dir",
}
_REQUIRED_KEYS = {"m1", "m2", "m3", "m4", "S0", "I0", "R0"}


class ConfigError(Exception):
    pass


def _parse_delta(value):
    if value is None:
        return ConstantRecurrence(0.0)
    if isinstance(value, (int, float)):
        return ConstantRecurrence(float(value))
    if isinstance(value, dict):
        extra = set(value) - {"base", "amplitude", "angular_frequency", "phase"}
        if extra:
            raise ConfigError(f"unknown keys in delta spec: {sorted(extra)}")
        return SinusoidRecurrence(
            base=float(value.get("base", 0.0)),
            amplitude=float(value.get("amplitude", 0.0)),
            angular_frequency=float(value.get("angular_frequency", 0.0)),
            phase=float(value.get("phase", 0.0)),
        )
    raise ConfigError(f"delta must be a number or an object, got {value!r}")


def load_config(path: Path) -> dict:
    """Parse and validate a flat JSON run configuration."""
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = _REQUIRED_KEYS - set(raw)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    return raw


def config_to_run(raw: dict) -> tuple[ModelParams, State, GridSpec]:
    try:
        params = ModelParams(
            m1=float(raw["m1"]),
            m2=float(raw["m2"]),
            m3=float(raw["m3"]),
            m4=float(raw["m4"]),
            l_alpha=float(raw.get("l_alpha", 0.0)),
            l_beta=float(raw.get("l_beta", 0.0)),
            p=float(raw.get("p", 0.0)),
            recurrence=_parse_delta(raw.get("delta")),
        )
        S0, I0, R0 = float(raw["S0"]), float(raw["I0"]), float(raw["R0"])
        N = float(raw.get("N", S0 + I0 + R0))
        init = scenarios.normalize(S0, I0, R0, N)
        grid = GridSpec(
            t_end=float(raw.get("t_end", 50.0)),
            dt=float(raw.get("dt", 1e-3)),
            extinction_threshold=float(raw.get("extinction_threshold", 1e-9)),
            refinement_tol=float(raw.get("refinement_tol", 1e-10)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return params, init, grid


def _resolve_run(args) -> tuple[str, ModelParams, State, GridSpec]:
    """Pick scenario or config, apply --dt / --t-end overrides."""
    if getattr(args, "scenario", None):
        spec = scenarios.builtin(args.scenario)
        name, params, init, grid = spec.name, spec.params, spec.init, spec.grid
    elif getattr(args, "config", None):
        raw = load_config(Path(args.config))
        params, init, grid = config_to_run(raw)
        name = Path(args.config).stem
    else:
        raise ConfigError("one of --scenario or --config is required")
    if getattr(args, "dt", None) or getattr(args, "t_end", None):
        grid = GridSpec(
            t_end=args.t_end if args.t_end else grid.t_end,
            dt=args.dt if args.dt else grid.dt,
            extinction_threshold=grid.extinction_threshold,
            refinement_tol=grid.refinement_tol,
        )
    return name, params, init, grid


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for k in range(len(traj)):
            writer.writerow(
                [
                    _fmt(traj.times[k]),
                    _fmt(traj.S[k]),
                    _fmt(traj.I[k]),
                    _fmt(traj.R[k]),
                    _fmt(traj.alphas[k]),
                    _fmt(traj.betas[k]),
                    traj.phases[k],
                ]
            )


def read_trajectory_csv(path: Path) -> Trajectory:
    from .integrator import EventLog

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ConfigError(f"unexpected CSV header in {path}: {header}")
        cols: list[list] = [[] for _ in CSV_HEADER]
        for row in reader:
            if len(row) != len(CSV_HEADER):
                raise ConfigError(f"malformed CSV row in {path}: {row}")
            try:
                for i in range(6):
                    cols[i].append(float(row[i]))
            except ValueError as exc:
                raise ConfigError(f"malformed CSV value in {path}: {exc}") from exc
            cols[6].append(row[6])
    return Trajectory(
        times=np.asarray(cols[0]),
        S=np.asarray(cols[1]),
        I=np.asarray(cols[2]),
        R=np.asarray(cols[3]),
        alphas=np.asarray(cols[4]),
        betas=np.asarray(cols[5]),
        phases=cols[6],
        events=EventLog(),
    )


def summarize(traj: Trajectory, params: ModelParams) -> dict:
    try:
        cls = analysis.classify(params.p, params.recurrence).value
    except ValueError:
        cls = None
    ev = traj.events
    I_star = None
    if ev.t_star is not None:
        k = int(np.searchsorted(traj.times, ev.t_star))
        I_star = float(traj.I[k])
    peak_count, _ = analysis.count_peaks(traj)
    decay_slope = None
    if ev.t_star is not None and params.p >= 0:
        hi = ev.t_extinct if ev.t_extinct is not None else float(traj.times[-1])
        try:
            decay_slope = analysis.fit_decay(traj, params.p, (ev.t_star + 1.0, hi)).slope
        except ValueError:
            pass
    return {
        "class": cls,
        "t_star": ev.t_star,
        "c_star": ev.c_star,
        "I_star": I_star,
        "t_extinct": ev.t_extinct,
        "peak_count": peak_count,
        "decay_slope": decay_slope,
        "flags": sorted(ev.flags),
    }


def _invariants_violated(traj: Trajectory) -> str | None:
    total_err = float(np.max(np.abs(traj.S + traj.I + traj.R - 1.0)))
    if total_err > 1e-10:
        return f"conservation violated: max |S+I+R-1| = {total_err:g}"
    if FLAG_LEFT_UNIT_INTERVAL in traj.events.flags and FLAG_NEGATIVE_DELTA not in traj.events.flags:
        return "a state component left [0, 1] with non-negative recurrence"
    return None


def _plot_curves(traj: Trajectory, out: Path, envelope_csv: Path | None = None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5))
    if len(traj):
        ax.plot(traj.times, traj.S, label="S (potential)")
        ax.plot(traj.times, traj.I, label="I (adopters)")
        ax.plot(traj.times, traj.R, label="R (rejecters)")
        ax.legend()
    if envelope_csv is not None:
        env = np.loadtxt(envelope_csv, delimiter=",", skiprows=1, ndmin=2)
        if env.size:
            ax.plot(env[:, 0], env[:, 1], "--", color="gray", label="lower bound")
            ax.plot(env[:, 0], env[:, 2], "--", color="black", label="upper bound")
            ax.legend()
    ax.set_xlabel("t")
    ax.set_ylabel("population fraction")
    fig.savefig(out, format="svg")
    plt.close(fig)


def cmd_simulate(args) -> int:
    try:
        name, params, init, grid = _resolve_run(args)
    except (ConfigError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    formats = set(args.format.split(","))
    bad = formats - {"csv", "json", "svg"}
    if bad or not formats:
        print(f"error: unknown output formats {sorted(bad)}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    traj = integrate(params, init, grid)
    if "csv" in formats:
        write_trajectory_csv(traj, out_dir / f"{name}.csv")
    if "json" in formats:
        (out_dir / f"{name}.json").write_text(json.dumps(summarize(traj, params), indent=2) + "\n")
    if "svg" in formats:
        _plot_curves(traj, out_dir / f"{name}.svg")
    problem = _invariants_violated(traj)
    if problem:
        print(f"invariant violation: {problem}", file=sys.stderr)
        return 1
    return 0


def cmd_classify(args) -> int:
    try:
        if args.scenario or args.config:
            _, params, _, _ = _resolve_run(args)
            p, rec = params.p, params.recurrence
        else:
            p = args.p
            rec = ConstantRecurrence(args.delta)
        cls = analysis.classify(p, rec)
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(cls.value)
    return 0


def cmd_verify(args) -> int:
    try:
        name, params, init, grid = _resolve_run(args)
    except (ConfigError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    traj = integrate(params, init, grid)
    env = analysis.compute_envelope(traj, params)
    if not env.applicable:
        print(f"{name}: decay bounds inapplicable: {env.reason}")
        return 3
    report = analysis.check_envelope(traj, env, tol=args.tol)
    print(f"{name}: regime {env.regime.value}")
    print(f"  t_star = {env.t_star:.9g}, c_star = {env.c_star:.9g}, I(t_star) = {env.a_star:.9g}")
    print(f"  checked {report.n_checked} points at tol {args.tol:g}")
    print(f"  max lower violation = {report.max_lower_violation:.3g}")
    print(f"  max upper violation = {report.max_upper_violation:.3g}")
    ok = report.passed
    if env.extinction_bracket is not None:
        lo, hi = env.extinction_bracket
        t_ext = traj.events.t_extinct
        inside = t_ext is not None and lo <= t_ext <= hi
        shown = f"{t_ext:.9g}" if t_ext is not None else "none"
        print(f"  extinction bracket [{lo:.9g}, {hi:.9g}], measured t_extinct = {shown}: "
              f"{'inside' if inside else 'OUTSIDE'}")
        ok = ok and inside
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_trajectory_csv(traj, out_dir / f"{name}.csv")
        with (out_dir / f"{name}_envelope.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "lower", "upper"])
            for t in traj.times:
                if env.upper_from <= t <= env.t_hi:
                    writer.writerow([_fmt(t), _fmt(env.lower(t)), _fmt(env.upper(t))])
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


_SWEEPABLE = {"m1", "m2", "m3", "m4", "l_alpha", "l_beta", "p", "delta"}


def cmd_sweep(args) -> int:
    if args.param not in _SWEEPABLE:
        print(f"error: unknown sweep parameter {args.param!r}; one of {sorted(_SWEEPABLE)}",
              file=sys.stderr)
        return 2
    try:
        name, params, init, grid = _resolve_run(args)
        values = [float(v) for v in args.values.split(",")] if args.values else []
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = {}
    for value in values:
        if args.param == "delta":
            swept = ModelParams(
                m1=params.m1, m2=params.m2, m3=params.m3, m4=params.m4,
                l_alpha=params.l_alpha, l_beta=params.l_beta, p=params.p,
                recurrence=ConstantRecurrence(value),
            )
        else:
            fields = dict(
                m1=params.m1, m2=params.m2, m3=params.m3, m4=params.m4,
                l_alpha=params.l_alpha, l_beta=params.l_beta, p=params.p,
                recurrence=params.recurrence,
            )
            fields[args.param] = value
            try:
                swept = ModelParams(**fields)
            except ValueError as exc:
                print(f"error: {args.param} = {value}: {exc}", file=sys.stderr)
                return 2
        tag = f"{args.param}={value:g}"
        traj = integrate(swept, init, grid)
        write_trajectory_csv(traj, out_dir / f"{name}_{tag}.csv")
        summary = summarize(traj, swept)
        (out_dir / f"{name}_{tag}.json").write_text(json.dumps(summary, indent=2) + "\n")
        index[f"{value:g}"] = summary
    (out_dir / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    return 0


def cmd_plot(args) -> int:
    try:
        traj = read_trajectory_csv(Path(args.trajectory))
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path(args.trajectory).with_suffix(".svg")
    envelope = Path(args.envelope) if args.envelope else None
    try:
        _plot_curves(traj, out, envelope)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def cmd_list_scenarios(_args) -> int:
    for name in scenarios.scenario_names():
        spec = scenarios.builtin(name)
        print(f"{name}: p = {spec.params.p:g}, expected class {spec.expected_class.value}")
    return 0


def _add_run_source(sub, require=True):
    group = sub.add_mutually_exclusive_group(required=require)
    group.add_argument("--scenario", help="registered scenario name")
    group.add_argument("--config", help="path to a JSON run config")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trendcycle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario or config and write outputs")
    _add_run_source(p_sim)
    p_sim.add_argument("--out", default=".", help="output directory")
    p_sim.add_argument("--dt", type=float, default=None)
    p_sim.add_argument("--t-end", dest="t_end", type=float, default=None)
    p_sim.add_argument("--format", default="csv,json", help="comma-set of csv,json,svg")
    p_sim.set_defaults(func=cmd_simulate)

    p_cls = sub.add_parser("classify", help="print the trend class for parameters")
    _add_run_source(p_cls, require=False)
    p_cls.add_argument("--p", type=float, default=None, help="rejection exponent")
    p_cls.add_argument("--delta", type=float, default=0.0, help="constant recurrence rate")
    p_cls.set_defaults(func=cmd_classify)

    p_ver = sub.add_parser("verify", help="check a run against its decay bounds")
    _add_run_source(p_ver)
    p_ver.add_argument("--tol", type=float, default=analysis.ENVELOPE_TOL)
    p_ver.add_argument("--out", default=None, help="directory for trajectory + envelope CSVs")
    p_ver.add_argument("--dt", type=float, default=None)
    p_ver.add_argument("--t-end", dest="t_end", type=float, default=None)
    p_ver.set_defaults(func=cmd_verify)

    p_swp = sub.add_parser("sweep", help="run one parameter over a list of values")
    _add_run_source(p_swp)
    p_swp.add_argument("--param", required=True)
    p_swp.add_argument("--values", default="", help="comma-separated values")
    p_swp.add_argument("--out", default="sweep")
    p_swp.add_argument("--dt", type=float, default=None)
    p_swp.add_argument("--t-end", dest="t_end", type=float, default=None)
    p_swp.set_defaults(func=cmd_sweep)

    p_plot = sub.add_parser("plot", help="render a trajectory CSV as an SVG chart")
    p_plot.add_argument("trajectory", help="trajectory CSV path")
    p_plot.add_argument("--envelope", default=None, help="envelope CSV (t,lower,upper)")
    p_plot.add_argument("--out", default=None, help="output SVG path")
    p_plot.set_defaults(func=cmd_plot)

    p_list = sub.add_parser("list-scenarios", help="list registered scenarios")
    p_list.set_defaults(func=cmd_list_scenarios)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "classify" and not (args.scenario or args.config) and args.p is None:
        print("error: classify needs --scenario, --config, or --p", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
