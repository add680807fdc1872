"""Scenario-driven command-line front end.

Subcommands
-----------
simulate  full run: protocol -> propagation -> analysis -> CSV artifacts
frame     analytic-only gtilde trajectory (no Fock numerics)
wigner    recompute a Wigner grid from a saved state file
sweep     parameter sweep emitting a long-format CSV
validate  parse and validate a scenario, run nothing

Scenario files are INI-style text with sections [system], [protocol],
[schedule], [initial_state], [numerics], [outputs].  All rates are expressed
in units of omega and all times in oscillator periods T = 2 pi / omega.

Exit codes: 0 success, 1 usage, 2 validation error, 3 numerical failure.
Outputs are deterministic: floats are printed with 10 significant digits and
row order never depends on timing.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import analysis, fock, frame, propagator, protocols
from .fock import SystemState, default_dim_osc
from .model import (Constant, Cosine, HamiltonianParams, Linear, Pulse,
                    Schedule, ScheduleError, Segment)
from .propagator import DegeneracyError, IntegrationFailureError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

PLUS_X_PROJECTOR = (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))


class ScenarioError(Exception):
    """Scenario file failed to parse or validate."""


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


# ---------------------------------------------------------------------------
# scenario parsing
# ---------------------------------------------------------------------------

_KNOWN_SECTIONS = {"system", "protocol", "schedule", "initial_state",
                   "numerics", "outputs"}


def load_scenario(path) -> dict:
    """Parse a scenario file into {section: {key: value}} of strings."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    text = Path(path).read_text()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    cfg = {s: dict(parser.items(s)) for s in parser.sections()}
    for section in cfg:
        if section not in _KNOWN_SECTIONS:
            raise ScenarioError(
                f"{path}: unknown section [{section}]; expected one of "
                f"{sorted(_KNOWN_SECTIONS)}"
            )
    return cfg


def bundled_scenario_path(name: str) -> Path:
    """Path of a bundled scenario (fig1, fig2, fig3, fig4)."""
    res = resources.files("catamp") / "scenarios" / f"{name}.ini"
    if not res.is_file():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return Path(str(res))


def resolve_scenario(arg: str) -> Path:
    p = Path(arg)
    if p.is_file():
        return p
    if arg.replace("_", "").isalnum():
        try:
            return bundled_scenario_path(arg)
        except ScenarioError:
            pass
    raise ScenarioError(f"scenario file not found: {arg}")


def apply_overrides(cfg: dict, overrides) -> dict:
    out = {s: dict(kv) for s, kv in cfg.items()}
    for item in overrides or ():
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ScenarioError(
                f"override {item!r} must look like section.key=value"
            )
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        if section not in _KNOWN_SECTIONS:
            raise ScenarioError(f"override names unknown section [{section}]")
        out.setdefault(section, {})[key.strip()] = value.strip()
    return out


def _get(cfg, section, key, default=None):
    return cfg.get(section, {}).get(key, default)


def _get_float(cfg, section, key, default=None):
    raw = _get(cfg, section, key)
    if raw is None:
        if default is None:
            raise ScenarioError(f"missing required key {section}.{key}")
        return float(default)
    try:
        return float(raw)
    except ValueError as exc:
        raise ScenarioError(f"{section}.{key}={raw!r} is not a number") from exc


def _get_int(cfg, section, key, default=None):
    val = _get_float(cfg, section, key, default)
    if val != int(val):
        raise ScenarioError(f"{section}.{key} must be an integer, got {val}")
    return int(val)


def _get_bool(cfg, section, key, default):
    raw = _get(cfg, section, key)
    if raw is None:
        return default
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ScenarioError(f"{section}.{key}={raw!r} is not a boolean")


def _get_list(cfg, section, key, default=()):
    raw = _get(cfg, section, key)
    if raw is None:
        return tuple(default)
    return tuple(s.strip() for s in raw.split(",") if s.strip())


# ---------------------------------------------------------------------------
# experiment plan
# ---------------------------------------------------------------------------

@dataclass
class OutputSpec:
    gtilde_csv: bool = True
    gtilde_samples_per_period: int = 64
    wigner: tuple = ()
    wigner_range: float | None = None
    wigner_points: int | None = None
    save_states: tuple = ()
    fit_amplitude: bool = False


@dataclass
class Experiment:
    kind: str
    omega: float                 # rad/s (the unit; scenario rates scale it)
    delta: float                 # rad/s
    g0: float                    # rad/s
    dim: int
    steps_per_period: int
    n_max: int
    initial: str = "ground"
    n_periods: float = 0.0
    free_periods: int = 0
    echo_pulses: int = 1
    hold: str = "g0"
    axes: tuple = ("y", "z")
    interval_periods: float = 0.5
    first_pulse_at_periods: float = 0.0
    direct_schedule: Schedule | None = None
    alpha_max: float = 1.0
    outputs: OutputSpec = field(default_factory=OutputSpec)


_FORM_PARSERS = {
    "constant": (1, lambda w, a: Constant(a[0] * w)),
    "cosine": (3, lambda w, a: Cosine(a[0] * w, a[1] * w, a[2])),
    "linear": (2, lambda w, a: Linear(a[0] * w, a[1] * w)),
}


def _parse_direct_schedule(cfg, omega, delta) -> Schedule:
    section = cfg.get("schedule")
    if not section:
        raise ScenarioError("protocol type 'direct' needs a [schedule] section")
    period = 2.0 * math.pi / omega
    segments, pulses = [], []
    for key in sorted(k for k in section if k.startswith("segment")):
        parts = section[key].split()
        if len(parts) < 3:
            raise ScenarioError(
                f"schedule.{key} must be 't0 t1 form args...', got {section[key]!r}"
            )
        try:
            t0, t1 = float(parts[0]) * period, float(parts[1]) * period
        except ValueError as exc:
            raise ScenarioError(f"schedule.{key}: bad times {parts[:2]}") from exc
        form_name = parts[2].lower()
        if form_name not in _FORM_PARSERS:
            raise ScenarioError(
                f"schedule.{key}: unknown form {form_name!r} "
                f"(constant|cosine|linear)"
            )
        n_args, build = _FORM_PARSERS[form_name]
        args = [float(v) for v in parts[3:]]
        if form_name == "cosine" and len(args) == 2:
            args.append(0.0)
        if len(args) != n_args:
            raise ScenarioError(
                f"schedule.{key}: form {form_name} takes {n_args} args"
            )
        if form_name == "cosine":
            g_form = Cosine(args[0] * omega, args[1] * omega, args[2])
        else:
            g_form = build(omega, args)
        segments.append(Segment(t0, t1, g_form, Constant(delta)))
    for key in sorted(k for k in section if k.startswith("pulse")):
        parts = section[key].split()
        if len(parts) != 2:
            raise ScenarioError(f"schedule.{key} must be 'time axis'")
        pulses.append(Pulse(float(parts[0]) * period, parts[1]))
    if not segments:
        raise ScenarioError("[schedule] defines no segments")
    try:
        return Schedule(omega, tuple(segments), tuple(pulses))
    except ScheduleError as exc:
        raise ScenarioError(f"invalid schedule: {exc}") from exc


def build_experiment(cfg: dict) -> Experiment:
    """Validate a parsed scenario and produce the executable plan."""
    omega = _get_float(cfg, "system", "omega", 1.0)
    if omega <= 0:
        raise ScenarioError(f"system.omega must be positive, got {omega}")
    delta = _get_float(cfg, "system", "delta", 0.0) * omega
    g0 = _get_float(cfg, "system", "g0", 0.0) * omega
    kind = (_get(cfg, "protocol", "type") or "").strip().lower()
    if kind not in ("sinusoidal", "pulse_train", "echo", "direct"):
        raise ScenarioError(
            f"protocol.type must be sinusoidal|pulse_train|echo|direct, "
            f"got {kind!r}"
        )

    exp = Experiment(kind=kind, omega=omega, delta=delta, g0=g0,
                     dim=0, steps_per_period=0, n_max=0)
    exp.initial = (_get(cfg, "initial_state", "type") or "ground").strip().lower()
    if exp.initial not in ("ground", "dynamical"):
        raise ScenarioError(
            f"initial_state.type must be ground|dynamical, got {exp.initial!r}"
        )
    if exp.initial == "ground" and delta <= 0:
        raise ScenarioError(
            "initial_state ground needs system.delta > 0 (the Delta=0 doublet "
            "is degenerate); use initial_state.type = dynamical"
        )

    alpha0 = abs(g0) / omega
    if kind == "sinusoidal":
        exp.n_periods = _get_float(cfg, "protocol", "n_periods")
        exp.free_periods = _get_int(cfg, "protocol", "free_periods", 0)
        exp.echo_pulses = _get_int(cfg, "protocol", "echo_pulses", 1)
        exp.hold = (_get(cfg, "protocol", "hold") or "g0").strip().lower()
        if exp.hold not in ("g0", "zero"):
            raise ScenarioError(f"protocol.hold must be g0|zero, got {exp.hold!r}")
        drive = protocols.build_sinusoidal_amplification(
            g0, exp.n_periods, delta=delta, omega=omega
        )
        exp.alpha_max = drive.metadata["predicted_gtilde_abs"] / omega
        if exp.free_periods > 0 and exp.echo_pulses > 0:
            protocols.build_echo(exp.free_periods, exp.echo_pulses,
                                 g0=g0, delta=delta, omega=omega)
    elif kind == "pulse_train":
        exp.n_periods = _get_float(cfg, "protocol", "n_periods")
        exp.axes = _get_list(cfg, "protocol", "axes", ("y", "z"))
        exp.interval_periods = _get_float(cfg, "protocol", "interval", 0.5)
        exp.first_pulse_at_periods = _get_float(cfg, "protocol",
                                                "first_pulse_at", 0.0)
        built = None
        for axis in exp.axes:
            built = protocols.build_pulse_train_amplification(
                g0, exp.n_periods, axis, delta=delta, omega=omega,
                interval_periods=exp.interval_periods,
                first_pulse_at_periods=exp.first_pulse_at_periods,
            )
        exp.alpha_max = built.metadata["predicted_gtilde_abs"] / omega
    elif kind == "echo":
        exp.free_periods = _get_int(cfg, "protocol", "free_periods")
        exp.echo_pulses = _get_int(cfg, "protocol", "n_pulses", 1)
        protocols.build_echo(exp.free_periods, exp.echo_pulses,
                             g0=g0, delta=delta, omega=omega)
        exp.alpha_max = alpha0
    else:
        exp.direct_schedule = _parse_direct_schedule(cfg, omega, delta)
        traj = frame.gtilde_trajectory(
            exp.direct_schedule,
            sample_times=np.linspace(0.0, exp.direct_schedule.t_final, 257),
        )
        exp.alpha_max = float(np.abs(traj.gtilde).max()) / omega
        exp.g0 = exp.direct_schedule.g_at(0.0)

    exp.dim = _get_int(cfg, "numerics", "dim",
                       default_dim_osc(max(exp.alpha_max, alpha0)))
    if exp.dim < 2:
        raise ScenarioError(f"numerics.dim must be >= 2, got {exp.dim}")
    exp.steps_per_period = _get_int(cfg, "numerics", "steps_per_period", 512)
    if exp.steps_per_period < 32:
        raise ScenarioError("numerics.steps_per_period must be >= 32")
    exp.n_max = _get_int(cfg, "numerics", "n_max", exp.dim // 2)

    out = OutputSpec()
    out.gtilde_csv = _get_bool(cfg, "outputs", "gtilde_csv", True)
    out.gtilde_samples_per_period = _get_int(
        cfg, "outputs", "gtilde_samples_per_period", 64)
    out.wigner = _get_list(cfg, "outputs", "wigner", ())
    if _get(cfg, "outputs", "wigner_range") is not None:
        out.wigner_range = _get_float(cfg, "outputs", "wigner_range")
    if _get(cfg, "outputs", "wigner_points") is not None:
        out.wigner_points = _get_int(cfg, "outputs", "wigner_points")
    out.save_states = _get_list(cfg, "outputs", "save_states", ())
    out.fit_amplitude = _get_bool(cfg, "outputs", "fit_amplitude", False)
    exp.outputs = out
    return exp


# ---------------------------------------------------------------------------
# state file I/O
# ---------------------------------------------------------------------------

def save_state(state: SystemState, path, time: float = 0.0) -> None:
    """Plain-text state format: header lines then re/im columns."""
    lines = [
        "# catamp state v1",
        f"dim_qubit {state.dim_qubit}",
        f"dim_osc {state.dim_osc}",
        f"time {time:.17g}",
        f"norm {state.norm():.17g}",
        "re im",
    ]
    for z in state.amplitudes:
        lines.append(f"{z.real:.17g} {z.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_state(path):
    """Inverse of save_state; returns (SystemState, time)."""
    lines = Path(path).read_text().splitlines()
    header = {}
    body_start = None
    for i, line in enumerate(lines):
        if line.startswith("#") or not line.strip():
            continue
        parts = line.split()
        if parts[0] == "re":
            body_start = i + 1
            break
        if len(parts) != 2:
            raise ScenarioError(f"{path}: malformed header line {i + 1}: {line!r}")
        header[parts[0]] = parts[1]
    if body_start is None or not {"dim_qubit", "dim_osc"} <= header.keys():
        raise ScenarioError(f"{path}: not a catamp state file")
    dim_qubit = int(header["dim_qubit"])
    dim_osc = int(header["dim_osc"])
    amps = []
    for i, line in enumerate(lines[body_start:], start=body_start):
        if not line.strip():
            continue
        re_s, im_s = line.split()
        amps.append(complex(float(re_s), float(im_s)))
    vec = np.array(amps, dtype=complex)
    if vec.size != dim_qubit * dim_osc:
        raise ScenarioError(
            f"{path}: {vec.size} amplitudes but header says "
            f"{dim_qubit}*{dim_osc}"
        )
    n = float(np.linalg.norm(vec))
    state = SystemState(vec, dim_osc, dim_qubit=dim_qubit,
                        normalized=abs(n - 1.0) <= 1e-6)
    return state, float(header.get("time", 0.0))


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _amplitude_fidelity(a: SystemState, b: SystemState) -> float:
    """|<a|b>| for pure states, the convention of the reference figures."""
    return math.sqrt(analysis.fidelity(a, b))


def _undo_pulses(state: SystemState, schedule: Schedule) -> SystemState:
    """Invert the accumulated pulse unitaries to expose the frame target."""
    prefix = frame.pulse_product(schedule)
    blocks = prefix.conj().T @ state.qubit_blocks()
    return SystemState(blocks.reshape(-1), state.dim_osc, dim_qubit=2,
                       leakage=state.leakage, normalized=state.normalized)


def _projected(state: SystemState) -> SystemState:
    vec, _ = analysis.project_qubit(state, PLUS_X_PROJECTOR)
    return vec.normalize()


def _initial_state(exp: Experiment) -> SystemState:
    if exp.initial == "ground":
        return propagator.ground_state(
            HamiltonianParams(exp.g0, exp.delta, exp.omega, exp.dim)
        )
    return frame.dynamical_eigenstate(exp.g0, 0, +1, exp.dim, exp.omega)


@dataclass
class ResultsBundle:
    summary: dict
    files: list


def run_experiment(exp: Experiment, out_dir: Path | None) -> ResultsBundle:
    summary: dict = {}
    files: list = []
    wigner_states: dict = {}
    period = 2.0 * math.pi / exp.omega

    def record_state(name: str, state: SystemState, at_time: float):
        if name in exp.outputs.wigner:
            wigner_states[name] = _projected(state)
        if name in exp.outputs.save_states and out_dir is not None:
            path = out_dir / f"state_{name}.txt"
            save_state(state, path, time=at_time)
            files.append(path)

    if exp.kind == "direct":
        schedule = exp.direct_schedule
        traj_schedule = schedule
        initial = _initial_state(exp)
        record_state("initial", initial, 0.0)
        final = propagator.evolve(initial, schedule,
                                  steps_per_period=exp.steps_per_period)
        record_state("final", final, schedule.t_final)
        summary["final_norm"] = final.norm()
        summary["leakage"] = final.leakage
        gt = frame.gtilde_at(schedule, schedule.t_final)
        summary["gtilde_abs"] = abs(gt) / exp.omega
        if exp.delta == 0.0:
            pred = frame.predict_state(schedule, schedule.t_final, exp.dim,
                                       n_max=exp.n_max, initial_state=initial)
            summary["fid_vs_frame"] = analysis.fidelity(final, pred)

    elif exp.kind == "sinusoidal":
        drive = protocols.build_sinusoidal_amplification(
            exp.g0, exp.n_periods, delta=exp.delta, omega=exp.omega)
        initial = _initial_state(exp)
        cat0 = fock.cat_state(exp.g0 / exp.omega, +1, exp.dim)
        summary["fid_ground_cat"] = _amplitude_fidelity(_projected(initial), cat0)
        record_state("initial", initial, 0.0)

        psi_b = propagator.evolve(initial, drive,
                                  steps_per_period=exp.steps_per_period)
        gt_b = frame.gtilde_at(drive, drive.t_final)
        alpha_b = gt_b / exp.omega
        cat_b = fock.cat_state(alpha_b, +1, exp.dim)
        proj_b = _projected(psi_b)
        summary["gtilde_abs"] = abs(alpha_b)
        summary["gtilde_arg"] = float(np.angle(alpha_b))
        summary["fid_amplified"] = _amplitude_fidelity(proj_b, cat_b)
        summary["cat_size"] = analysis.cat_size(alpha_b, -alpha_b)
        summary["leakage_amplified"] = psi_b.leakage
        record_state("amplified", psi_b, drive.t_final)
        if exp.outputs.fit_amplitude:
            fit = analysis.extract_amplitude(proj_b, alpha_b)
            summary["alpha_fit_abs"] = abs(fit.alpha)
            summary["fid_fit"] = math.sqrt(fit.fidelity)

        traj_schedule = drive
        if exp.free_periods > 0:
            hold_g = exp.g0 if exp.hold == "g0" else 0.0
            free = Schedule(exp.omega, (
                Segment(0.0, exp.free_periods * period,
                        Constant(hold_g), Constant(exp.delta)),))
            plain = protocols.chain(drive, free)
            traj_schedule = plain
            psi_c = propagator.evolve(psi_b, plain, t0=drive.t_final,
                                      steps_per_period=exp.steps_per_period)
            summary["fid_dephased"] = _amplitude_fidelity(_projected(psi_c), cat_b)
            record_state("dephased", psi_c, plain.t_final)
            if exp.echo_pulses > 0:
                echo = protocols.build_echo(exp.free_periods, exp.echo_pulses,
                                            g0=hold_g, delta=exp.delta,
                                            omega=exp.omega)
                full = protocols.chain(drive, echo)
                psi_d = propagator.evolve(psi_b, full, t0=drive.t_final,
                                          steps_per_period=exp.steps_per_period)
                undone = _undo_pulses(psi_d, full)
                proj_d = _projected(undone)
                summary["fid_echo"] = _amplitude_fidelity(proj_d, cat_b)
                summary["fid_echo_vs_amplified"] = _amplitude_fidelity(
                    proj_d, proj_b)
                record_state("echo", psi_d, full.t_final)

    elif exp.kind == "pulse_train":
        initial = _initial_state(exp)
        cat0 = fock.cat_state(exp.g0 / exp.omega, +1, exp.dim)
        summary["fid_ground_cat"] = _amplitude_fidelity(_projected(initial), cat0)
        record_state("initial", initial, 0.0)
        traj_schedule = None
        for axis in exp.axes:
            train = protocols.build_pulse_train_amplification(
                exp.g0, exp.n_periods, axis, delta=exp.delta, omega=exp.omega,
                interval_periods=exp.interval_periods,
                first_pulse_at_periods=exp.first_pulse_at_periods)
            if traj_schedule is None:
                traj_schedule = train
                gt = frame.gtilde_at(train, train.t_final)
                summary["gtilde_abs"] = abs(gt) / exp.omega
                summary["gtilde_predicted"] = (
                    train.metadata["predicted_gtilde_abs"] / exp.omega)
                cat_f = fock.cat_state(gt / exp.omega, +1, exp.dim)
            psi = propagator.evolve(initial, train,
                                    steps_per_period=exp.steps_per_period)
            undone = _undo_pulses(psi, train)
            summary[f"fid_sigma_{axis}"] = _amplitude_fidelity(
                _projected(undone), cat_f)
            record_state(f"final_{axis}", psi, train.t_final)

    else:  # echo
        echo = protocols.build_echo(exp.free_periods, exp.echo_pulses,
                                    g0=exp.g0, delta=exp.delta, omega=exp.omega)
        traj_schedule = echo
        initial = _initial_state(exp)
        cat0 = fock.cat_state(exp.g0 / exp.omega, +1, exp.dim)
        summary["fid_ground_cat"] = _amplitude_fidelity(_projected(initial), cat0)
        record_state("initial", initial, 0.0)
        psi = propagator.evolve(initial, echo,
                                steps_per_period=exp.steps_per_period)
        undone = _undo_pulses(psi, echo)
        summary["fid_final"] = _amplitude_fidelity(_projected(undone), cat0)
        summary["n_pulses"] = float(exp.echo_pulses)
        record_state("final", psi, echo.t_final)

    if out_dir is not None and exp.outputs.gtilde_csv:
        files.append(write_gtilde_csv(traj_schedule, out_dir / "gtilde.csv",
                                      exp.outputs.gtilde_samples_per_period))
    if wigner_states and out_dir is not None:
        span = exp.outputs.wigner_range
        if span is None:
            span = math.ceil(math.sqrt(2.0) * exp.alpha_max + 4.0)
        points = exp.outputs.wigner_points
        if points is None:
            points = 2 * int(span / 0.25) + 1
        axis = np.linspace(-span, span, points)
        for name in sorted(wigner_states):
            grid = analysis.wigner(wigner_states[name], axis, axis)
            path = out_dir / f"wigner_{name}.csv"
            path.write_text(grid.to_csv_text())
            files.append(path)
            summary[f"wigner_trace_{name}"] = grid.normalization
    return ResultsBundle(summary, files)


def write_gtilde_csv(schedule: Schedule, path: Path,
                     samples_per_period: int = 64) -> Path:
    """Frame trajectory CSV: (t/T, Re gt/w, Im gt/w, |gt|/w) plus the
    scheduled coupling g/w as a trailing column for the trajectory plots."""
    period = 2.0 * math.pi / schedule.omega
    n = max(2, int(round(schedule.t_final / period * samples_per_period)) + 1)
    samples = np.linspace(0.0, schedule.t_final, n)
    traj = frame.gtilde_trajectory(schedule, sample_times=samples)
    lines = ["t_over_T,re_gtilde,im_gtilde,abs_gtilde,g_over_omega"]
    for (t_over_t, re, im, mag), t in zip(traj.csv_rows(), traj.times):
        g = schedule.g_at(min(float(t), schedule.t_final)) / schedule.omega
        lines.append(",".join(_fmt(v) for v in (t_over_t, re, im, mag, g)))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_summary(summary: dict, path: Path | None):
    lines = [f"{key}={_fmt(val)}" for key, val in summary.items()]
    text = "\n".join(lines) + "\n"
    if path is not None:
        path.write_text(text)
    return text


def run_scenario(path, overrides=(), out_dir=None, jobs: int = 1) -> ResultsBundle:
    """Parse, validate and execute one scenario; returns the results bundle."""
    cfg = apply_overrides(load_scenario(resolve_scenario(str(path))), overrides)
    exp = build_experiment(cfg)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    bundle = run_experiment(exp, out)
    if out is not None:
        bundle.files.append(out / "summary.txt")
        write_summary(bundle.summary, out / "summary.txt")
    return bundle


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _sweep_worker(args):
    path, overrides, param, value = args
    bundle = run_scenario(path, list(overrides) + [f"{param}={value}"])
    return value, bundle.summary


def run_sweep(path, param: str, values, overrides=(), jobs: int = 1):
    """Run the scenario once per value; rows ordered by the input values."""
    if "." not in param:
        raise ScenarioError(f"sweep parameter {param!r} must be section.key")
    tasks = [(str(path), tuple(overrides), param, v) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_worker, tasks))
    else:
        results = [_sweep_worker(t) for t in tasks]
    rows = [("param", "value", "metric", "metric_value")]
    for value, summary in results:
        for key, val in summary.items():
            rows.append((param, value, key, _fmt(val)))
    return rows


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="catamp",
                     description="Qubit-oscillator cat amplification simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("scenario", help="scenario file or bundled name (fig1..fig4)")
        sp.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SEC.KEY=VAL", help="override a scenario value")

    sim = sub.add_parser("simulate", help="run a scenario end to end")
    add_common(sim)
    sim.add_argument("--out-dir", default="out", help="artifact directory")
    sim.add_argument("--dim", type=int, help="override numerics.dim")
    sim.add_argument("--steps-per-period", type=int,
                     help="override numerics.steps_per_period")
    sim.add_argument("--jobs", type=int, default=1)

    fr = sub.add_parser("frame", help="analytic gtilde trajectory only")
    add_common(fr)
    fr.add_argument("--out-dir", default="out")
    fr.add_argument("--samples-per-period", type=int, default=64)

    wg = sub.add_parser("wigner", help="Wigner grid from a saved state")
    wg.add_argument("statefile")
    wg.add_argument("--range", type=float, default=None, dest="span",
                    help="half-width of the symmetric (q, p) grid")
    wg.add_argument("--points", type=int, default=None)
    wg.add_argument("--out", default="wigner.csv")

    sw = sub.add_parser("sweep", help="run a scenario over parameter values")
    add_common(sw)
    sw.add_argument("--param", required=True, metavar="SEC.KEY")
    sw.add_argument("--values", required=True,
                    help="comma-separated values for the parameter")
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--out-dir", default="out")

    va = sub.add_parser("validate", help="validate a scenario, run nothing")
    add_common(va)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "simulate":
            overrides = list(args.overrides)
            if args.dim is not None:
                overrides.append(f"numerics.dim={args.dim}")
            if args.steps_per_period is not None:
                overrides.append(f"numerics.steps_per_period={args.steps_per_period}")
            bundle = run_scenario(args.scenario, overrides, args.out_dir,
                                  jobs=args.jobs)
            sys.stdout.write(write_summary(bundle.summary, None))
            return EXIT_OK

        if args.command == "frame":
            cfg = apply_overrides(load_scenario(resolve_scenario(args.scenario)),
                                  args.overrides)
            exp = build_experiment(cfg)
            schedule = _frame_schedule(exp)
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            path = write_gtilde_csv(schedule, out / "gtilde.csv",
                                    args.samples_per_period)
            traj = frame.gtilde_trajectory(schedule)
            final = traj.final
            print(f"t_final_over_T={_fmt(schedule.t_final / schedule.period)}")
            print(f"gtilde_abs={_fmt(abs(final.gtilde) / exp.omega)}")
            print(f"csv={path}")
            return EXIT_OK

        if args.command == "wigner":
            state, _ = load_state(args.statefile)
            if state.dim_qubit == 2:
                state = _projected(state)
            span = args.span
            if span is None:
                n_mean = float(np.sum(np.abs(state.amplitudes) ** 2
                                      * np.arange(state.dim_osc)))
                span = math.ceil(math.sqrt(2.0 * n_mean) + 4.0)
            points = args.points or (2 * int(span / 0.25) + 1)
            axis = np.linspace(-span, span, points)
            grid = analysis.wigner(state, axis, axis)
            Path(args.out).write_text(grid.to_csv_text())
            print(f"wigner_trace={_fmt(grid.normalization)}")
            print(f"csv={args.out}")
            return EXIT_OK

        if args.command == "sweep":
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            if not values:
                raise ScenarioError("sweep needs at least one value")
            rows = run_sweep(args.scenario, args.param, values,
                             overrides=args.overrides, jobs=args.jobs)
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            path = out / "sweep.csv"
            path.write_text("\n".join(",".join(map(str, r)) for r in rows) + "\n")
            print(f"csv={path}")
            return EXIT_OK

        if args.command == "validate":
            cfg = apply_overrides(load_scenario(resolve_scenario(args.scenario)),
                                  args.overrides)
            build_experiment(cfg)
            print("ok")
            return EXIT_OK

    except (ScenarioError, ScheduleError, DegeneracyError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegrationFailureError, frame.NonUnitaryError,
            analysis.OptimizerError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_USAGE


def _frame_schedule(exp: Experiment) -> Schedule:
    """Schedule whose trajectory the frame subcommand reports."""
    period = 2.0 * math.pi / exp.omega
    if exp.kind == "direct":
        return exp.direct_schedule
    if exp.kind == "sinusoidal":
        drive = protocols.build_sinusoidal_amplification(
            exp.g0, exp.n_periods, delta=exp.delta, omega=exp.omega)
        if exp.free_periods > 0:
            hold_g = exp.g0 if exp.hold == "g0" else 0.0
            free = Schedule(exp.omega, (
                Segment(0.0, exp.free_periods * period,
                        Constant(hold_g), Constant(exp.delta)),))
            return protocols.chain(drive, free)
        return drive
    if exp.kind == "pulse_train":
        return protocols.build_pulse_train_amplification(
            exp.g0, exp.n_periods, exp.axes[0], delta=exp.delta,
            omega=exp.omega, interval_periods=exp.interval_periods,
            first_pulse_at_periods=exp.first_pulse_at_periods)
    return protocols.build_echo(exp.free_periods, exp.echo_pulses,
                                g0=exp.g0, delta=exp.delta, omega=exp.omega)


if __name__ == "__main__":
    sys.exit(main())
