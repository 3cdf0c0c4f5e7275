"""Command-line runner: TOML experiment config in, CSV/JSON tables and a manifest out.

Usage::

    cablerod <command> <config.toml> [section.key=value ...] [--output-dir DIR]
             [--format csv|json] [--figure] [--quiet]

Exit status: 0 success, 2 configuration error, 3 solver failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .core import (
    ActuationState,
    BackboneShape,
    RigidityProfile,
    RobotParams,
    SpacingProfile,
    cubic_spacing_params,
    baseline_params,
    tapered_params,
)
from .discrete import SWEEP_COLUMNS, DiscreteOptConfig, DiscreteRobotSpec, convergence_sweep, solve_discrete
from .errors import CableRodError, ConfigurationError, SolverError
from .forward import Case, forward
from .inverse import InverseConfig, oscillating_trajectory, shrinking_circle_trajectory, track
from .loading import GalerkinConfig, LoadedBVP, solve_adomian, solve_galerkin, solve_shooting
from .oracle import oracle_minimize

COMMANDS = ("forward", "inverse", "loading", "discrete", "sweep", "oracle")
FORMATS = ("csv", "json")
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

NUM = (int, float)
SCHEMA: dict[str, dict[str, Any]] = {
    "": {"command": str, "case": str},
    "robot": {"preset": str, "L": NUM, "D": NUM, "E": NUM, "W": NUM, "spacing": list, "D_tip": NUM},
    "actuation": {"mode": str, "values": list},
    "trajectory": {
        "kind": str,
        "amplitude": NUM,
        "decay": NUM,
        "frequency": NUM,
        "T": NUM,
        "dt": NUM,
        "R0": NUM,
        "Re": NUM,
    },
    "solver": {
        "samples": int,
        "scheme": str,
        "damping": NUM,
        "eps": NUM,
        "method": str,
        "K": int,
        "M": int,
        "tol": NUM,
        "steps": int,
        "qx": NUM,
        "qy": NUM,
        "dF": NUM,
        "n": int,
        "degree": int,
        "F1": NUM,
        "F2": NUM,
        "n_values": list,
        "dF_values": list,
        "grid_size": int,
    },
    "output": {"dir": str, "format": str, "figure": bool},
}
PRESETS = {"baseline": baseline_params, "cubic_spacing": cubic_spacing_params, "tapered": tapered_params}
ACTUATION_MODES = ("force_difference", "displacement_difference", "force_pair", "displacement_pair")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = ...`` assignment, keyed by (section, key)."""
    lines = {}
    section = ""
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[\s*([A-Za-z0-9_.-]+)\s*\]$", line)
        if m:
            section = m.group(1)
            lines.setdefault((section, ""), no)
            continue
        m = re.match(r'^([A-Za-z0-9_-]+|"[^"]*")\s*=', line)
        if m:
            lines.setdefault((section, m.group(1).strip('"')), no)
    return lines


def _where(lines: dict, section: str, key: str) -> str:
    no = lines.get((section, key))
    return f" (line {no})" if no is not None else ""


def _check_type(value, expected) -> bool:
    if expected is bool:
        return isinstance(value, bool)
    if isinstance(value, bool):
        return False
    if expected is NUM:
        return isinstance(value, NUM) and math.isfinite(value)
    return isinstance(value, expected)


def validate_tree(tree: dict, lines: Optional[dict] = None) -> None:
    """Reject unknown sections and keys and mistyped values, naming the line when known."""
    lines = lines or {}
    for key, value in tree.items():
        if isinstance(value, dict):
            if key not in SCHEMA or key == "":
                raise ConfigurationError(f"unknown section [{key}]{_where(lines, key, '')}")
            allowed = SCHEMA[key]
            for sub, v in value.items():
                if isinstance(v, dict):
                    raise ConfigurationError(f"unexpected table {key}.{sub}{_where(lines, f'{key}.{sub}', '')}")
                if sub not in allowed:
                    raise ConfigurationError(f"unknown key {key}.{sub}{_where(lines, key, sub)}")
                if not _check_type(v, allowed[sub]):
                    raise ConfigurationError(f"bad value for {key}.{sub}: {v!r}{_where(lines, key, sub)}")
        else:
            if key not in SCHEMA[""]:
                raise ConfigurationError(f"unknown key {key}{_where(lines, '', key)}")
            if not _check_type(value, SCHEMA[""][key]):
                raise ConfigurationError(f"bad value for {key}: {value!r}{_where(lines, '', key)}")


def parse_override(item: str) -> tuple[list[str], Any]:
    """``section.key=value``; the value is read as a TOML literal, else kept as a string."""
    if "=" not in item:
        raise ConfigurationError(f"override {item!r} is not of the form key=value")
    path, raw = item.split("=", 1)
    parts = [p for p in path.strip().split(".") if p]
    if not parts or len(parts) > 2:
        raise ConfigurationError(f"override key {path!r} must be 'key' or 'section.key'")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return parts, value


@dataclass
class ExperimentConfig:
    command: str
    case: str = "constant"
    robot: dict = field(default_factory=dict)
    actuation: dict = field(default_factory=dict)
    trajectory: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, tree: dict, command: Optional[str] = None, lines: Optional[dict] = None) -> "ExperimentConfig":
        validate_tree(tree, lines)
        named = tree.get("command")
        if command is None:
            command = named
        elif named is not None and named != command:
            raise ConfigurationError(
                f"config declares command {named!r} but {command!r} was requested{_where(lines or {}, '', 'command')}"
            )
        if command not in COMMANDS:
            raise ConfigurationError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        case = tree.get("case", "constant")
        if case not in {c.value for c in Case}:
            raise ConfigurationError(f"unknown case {case!r}{_where(lines or {}, '', 'case')}")
        cfg = cls(
            command=command,
            case=case,
            **{k: copy.deepcopy(tree.get(k, {})) for k in ("robot", "actuation", "trajectory", "solver", "output")},
        )
        fmt = cfg.output.get("format", "csv")
        if fmt not in FORMATS:
            raise ConfigurationError(f"output format must be csv or json, got {fmt!r}{_where(lines or {}, 'output', 'format')}")
        return cfg

    @classmethod
    def load(cls, path, command: Optional[str] = None, overrides: Sequence[str] = ()) -> "ExperimentConfig":
        text = Path(path).read_text()
        try:
            tree = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"cannot parse {path}: {exc}") from None
        for item in overrides:
            parts, value = parse_override(item)
            node = tree
            for p in parts[:-1]:
                node = node.setdefault(p, {})
                if not isinstance(node, dict):
                    raise ConfigurationError(f"override {item!r} targets a non-table")
            node[parts[-1]] = value
        return cls.from_dict(tree, command, _key_lines(text))

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"command": self.command, "case": self.case}
        for k in ("robot", "actuation", "trajectory", "solver", "output"):
            if getattr(self, k):
                out[k] = copy.deepcopy(getattr(self, k))
        return out


def build_params(robot: dict) -> RobotParams:
    preset = robot.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown robot preset {preset!r}; expected one of {', '.join(PRESETS)}")
        base = PRESETS[preset]()
    else:
        base = baseline_params()
    explicit = {k: robot[k] for k in ("L", "D", "E", "W") if k in robot}
    if explicit:
        ref = baseline_params()
        base = RobotParams.circular(
            L=explicit.get("L", ref.L),
            D=explicit.get("D", ref.D),
            E=explicit.get("E", ref.E),
            W=explicit.get("W", ref.W0),
        )
    if "spacing" in robot:
        base = base.with_spacing(SpacingProfile.polynomial(tuple(float(v) for v in robot["spacing"])))
    if "D_tip" in robot:
        base = base.with_rigidity(RigidityProfile.tapered(base.D, float(robot["D_tip"])))
    return base


def build_actuation(act: dict, default_mode: str = "force_difference", default_values=(1.0,)) -> ActuationState:
    mode = act.get("mode", default_mode)
    if mode not in ACTUATION_MODES:
        raise ConfigurationError(f"unknown actuation mode {mode!r}; expected one of {', '.join(ACTUATION_MODES)}")
    values = [float(v) for v in act.get("values", default_values)]
    ctor = getattr(ActuationState, mode)
    try:
        return ctor(*values)
    except TypeError:
        raise ConfigurationError(f"actuation mode {mode!r} got {len(values)} value(s)") from None


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.ndarray):
        return [_json_value(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    return v


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple]

    @classmethod
    def from_array(cls, name: str, columns, arr) -> "Table":
        return cls(name, tuple(columns), [tuple(r) for r in np.asarray(arr).tolist()])


def write_table(table: Table, out_dir: Path, fmt: str) -> Path:
    path = out_dir / f"{table.name}.{fmt}"
    if fmt == "csv":
        lines = [",".join(table.columns)]
        lines += [",".join(_fmt(v) for v in row) for row in table.rows]
        path.write_text("\n".join(lines) + "\n")
    else:
        data = {c: [_json_value(row[i]) for row in table.rows] for i, c in enumerate(table.columns)}
        path.write_text(json.dumps(data, indent=1, sort_keys=False) + "\n")
    return path


def _shape_table(name: str, shape: BackboneShape) -> Table:
    return Table.from_array(name, shape.columns, shape.table())


@dataclass
class RunManifest:
    config: dict
    version: str
    timestamp: str
    summary: dict
    outputs: list[str]
    figure_kind: str
    tables: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "timestamp": self.timestamp,
            "summary": _json_value(self.summary),
            "outputs": list(self.outputs),
        }


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_forward(cfg: ExperimentConfig, params: RobotParams):
    act = build_actuation(cfg.actuation, "force_pair" if cfg.case == "extensible" else "force_difference",
                          (1.0, 0.0) if cfg.case == "extensible" else (1.0,))
    shape = forward(params, cfg.case, act, int(cfg.solver.get("samples", 201)))
    summary = {
        "tip_x": shape.tip[0],
        "tip_y": shape.tip[1],
        "tip_angle": shape.tip_angle,
        "kappa_tip": float(shape.kappa[-1]),
        "u": float(shape.u[0]),
    }
    return [_shape_table("shape", shape)], summary, "shape"


def _cmd_oracle(cfg: ExperimentConfig, params: RobotParams):
    act = build_actuation(cfg.actuation, "force_pair" if cfg.case == "extensible" else "force_difference",
                          (1.0, 0.0) if cfg.case == "extensible" else (1.0,))
    n = int(cfg.solver.get("grid_size", 201))
    shape = oracle_minimize(params, cfg.case, act, n)
    ref = forward(params, cfg.case, act, n)
    err = float(np.sqrt(trapezoid((shape.theta - ref.theta) ** 2, shape.s)))
    summary = {"tip_angle": shape.tip_angle, "u": float(shape.u[0]), "theta_l2_error": err, "u_error": float(abs(shape.u[0] - ref.u[0]))}
    return [_shape_table("oracle_shape", shape)], summary, "shape"


def _cmd_inverse(cfg: ExperimentConfig, params: RobotParams):
    case = Case(cfg.case)
    traj_cfg = cfg.trajectory
    T = float(traj_cfg.get("T", 10.0))
    dt = float(traj_cfg.get("dt", 1e-3))
    kind = traj_cfg.get("kind", "circle" if case is Case.EXTENSIBLE else "oscillating")
    if case is Case.EXTENSIBLE:
        act = build_actuation(cfg.actuation, "displacement_pair", (0.06, -0.02))
        if kind != "circle":
            raise ConfigurationError("the extensible case tracks a circle trajectory")
        traj = shrinking_circle_trajectory(
            params, act, float(traj_cfg.get("R0", 0.05)), float(traj_cfg.get("Re", 0.01)), T, dt
        )
    else:
        # the routed rod cannot reach the full oscillation from a 0.1 m start
        act = build_actuation(cfg.actuation, "displacement_difference", (0.035,) if case is Case.ROUTING else (0.1,))
        if kind != "oscillating":
            raise ConfigurationError("single-input cases track the oscillating trajectory")
        traj = oscillating_trajectory(
            params,
            case,
            act,
            float(traj_cfg.get("amplitude", 0.1)),
            float(traj_cfg.get("decay", 0.1)),
            float(traj_cfg.get("frequency", 1.0)),
            T,
            dt,
        )
    icfg = InverseConfig(
        scheme=cfg.solver.get("scheme", "euler"),
        damping=float(cfg.solver.get("damping", 1e-6)),
        eps=float(cfg.solver.get("eps", 1e-8)),
    )
    log = track(params, case, traj, icfg)
    summary = {
        "max_error": log.max_error,
        "rms_error": log.rms_error,
        "singular_steps": log.singular_steps,
        "records": int(log.t.size),
        "final_actuation": log.actuation[-1].tolist(),
    }
    return [Table.from_array("tracking", log.columns, log.table())], summary, "tracking"


def _cmd_loading(cfg: ExperimentConfig, params: RobotParams):
    s = cfg.solver
    bvp = LoadedBVP(params, float(s.get("qx", 0.0)), float(s.get("qy", 0.6164)), float(s.get("dF", 0.0)))
    n = int(s.get("samples", 201))
    method = s.get("method", "all")
    runners = {
        "shooting": lambda: solve_shooting(bvp, float(s.get("tol", 1e-12)), int(s.get("steps", 2000)), n),
        "galerkin": lambda: solve_galerkin(bvp, GalerkinConfig(K=int(s.get("K", 6))), n),
        "adomian": lambda: solve_adomian(bvp, int(s.get("M", 4)), n=n),
    }
    if method != "all" and method not in runners:
        raise ConfigurationError(f"unknown loading method {method!r}")
    chosen = list(runners) if method == "all" else [method]
    tables, summary = [], {}
    for name in chosen:
        sol = runners[name]()
        tables.append(_shape_table(f"loading_{name}", sol.shape))
        summary[f"{name}_tip_angle"] = sol.tip_angle
        summary[f"{name}_residual"] = sol.residual_norm
    return tables, summary, "shape"


def _discrete_cfg(s: dict) -> DiscreteOptConfig:
    return DiscreteOptConfig(gtol=float(s.get("tol", 1e-9)))


def _cmd_discrete(cfg: ExperimentConfig, params: RobotParams):
    s = cfg.solver
    spec = DiscreteRobotSpec(params, int(s.get("n", 1)))
    sol = solve_discrete(spec, float(s.get("F1", 1.0)), float(s.get("F2", 0.0)), int(s.get("degree", 3)), _discrete_cfg(s))
    chords = Table(
        "chords",
        ("span", "chord_plus", "chord_minus"),
        [(j + 1, float(a), float(b)) for j, (a, b) in enumerate(zip(sol.chords_plus, sol.chords_minus))],
    )
    summary = {
        "kappa_min": sol.kappa_min,
        "kappa_max": sol.kappa_max,
        "kappa_avg": sol.kappa_avg,
        "energy": sol.energy,
        "dl1": sol.dl1,
        "dl2": sol.dl2,
        "grad_norm": sol.grad_norm,
        "iterations": sol.iterations,
        "coefficients": sol.shape.coefficients.tolist(),
    }
    return [_shape_table("discrete_shape", sol.backbone(int(s.get("samples", 201)))), chords], summary, "shape"


def _cmd_sweep(cfg: ExperimentConfig, params: RobotParams):
    s = cfg.solver
    rows = convergence_sweep(
        params,
        [float(v) for v in s.get("dF_values", [1.0, 2.0, 3.0])],
        [int(v) for v in s.get("n_values", [1, 2, 4, 8, 16])],
        int(s.get("degree", 3)),
        _discrete_cfg(s),
    )
    table = Table("sweep", SWEEP_COLUMNS, [r.values() for r in rows])
    failures = [f"dF={r.dF:g}, n={r.n}: {r.error}" for r in rows if r.error]
    summary = {"rows": len(rows), "failed_rows": len(failures), "failures": failures}
    return [table], summary, "convergence"


HANDLERS = {
    "forward": _cmd_forward,
    "inverse": _cmd_inverse,
    "loading": _cmd_loading,
    "discrete": _cmd_discrete,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
}


def run(cfg: ExperimentConfig, output_dir=None, fmt: Optional[str] = None, figure: Optional[bool] = None) -> RunManifest:
    """Execute one experiment, write its tables and ``manifest.json``, and return the manifest."""
    fmt = fmt or cfg.output.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigurationError(f"output format must be csv or json, got {fmt!r}")
    out_dir = Path(output_dir or cfg.output.get("dir", "output"))
    figure = cfg.output.get("figure", False) if figure is None else figure
    try:
        params = build_params(cfg.robot)
    except ValueError as exc:
        raise ConfigurationError(f"invalid robot block: {exc}") from None
    tables, summary, kind = HANDLERS[cfg.command](cfg, params)

    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = [write_table(t, out_dir, fmt).name for t in tables]
    manifest = RunManifest(
        config=cfg.to_dict(),
        version=__version__,
        timestamp=_timestamp(),
        summary=summary,
        outputs=outputs,
        figure_kind=kind,
        tables={t.name: t for t in tables},
    )
    if figure:
        manifest.outputs.append(emit_figure_data(manifest, kind, out_dir).name)
    (out_dir / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=1) + "\n")
    return manifest


def emit_figure_data(manifest: RunManifest, kind: str, out_dir) -> Path:
    """Long-format ``series, abscissa, ordinate`` CSV for plotting tools."""
    if kind != manifest.figure_kind:
        raise ConfigurationError(f"figure kind {kind!r} does not match a {manifest.config['command']} run")
    rows: list[tuple] = []
    if kind == "shape":
        cols = ("series", "s", "x", "y")
        for name, t in manifest.tables.items():
            if "x" not in t.columns:
                continue
            i_s, i_x, i_y = (t.columns.index(c) for c in ("s", "x", "y"))
            series = "backbone" if len(manifest.tables) == 1 or name in ("shape", "discrete_shape", "oracle_shape") else name
            rows += [(series, r[i_s], r[i_x], r[i_y]) for r in t.rows]
    elif kind == "tracking":
        t = manifest.tables["tracking"]
        cols = ("series", "t", "value")
        it = t.columns.index("t")
        for series, xcol, ycol in (("target", "x_target", "y_target"), ("realized", "x_tip", "y_tip")):
            ix, iy = t.columns.index(xcol), t.columns.index(ycol)
            rows += [(f"{series}_x", r[it], r[ix]) for r in t.rows]
            if manifest.config.get("case") == "extensible":
                rows += [(f"{series}_y", r[it], r[iy]) for r in t.rows]
    elif kind == "convergence":
        t = manifest.tables["sweep"]
        cols = ("series", "n", "kappa_avg")
        i_f, i_n, i_k = (t.columns.index(c) for c in ("dF", "n", "kappa_avg"))
        rows = [(f"dF={_fmt(r[i_f])}", r[i_n], r[i_k]) for r in t.rows]
    else:
        raise ConfigurationError(f"unknown figure kind {kind!r}")
    path = Path(out_dir) / f"figure_{kind}.csv"
    lines = [",".join(cols)] + [",".join([r[0]] + [_fmt(v) for v in r[1:]]) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cablerod", description="Run a cable-driven rod experiment from a TOML config.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config", help="path to the TOML experiment file")
    p.add_argument("overrides", nargs="*", help="section.key=value overrides")
    p.add_argument("--output-dir", default=None)
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("--figure", action="store_true", default=None, help="also write long-format figure data")
    p.add_argument("--quiet", action="store_true")
    return p


def _fail(code: int, exc: BaseException) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    diagnostics = getattr(exc, "diagnostics", None)
    if diagnostics:
        record["diagnostics"] = _json_value({k: v if isinstance(v, (int, float, str, list, tuple)) else repr(v) for k, v in diagnostics.items()})
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config, args.command, args.overrides)
        manifest = run(cfg, args.output_dir, args.format, args.figure)
    except SolverError as exc:
        return _fail(EXIT_SOLVER, exc)
    except (ConfigurationError, CableRodError, ValueError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    if not args.quiet:
        for k, v in manifest.summary.items():
            if isinstance(v, float):
                print(f"{k}: {v:.10g}")
            else:
                print(f"{k}: {v}")
        for name in manifest.outputs:
            print(f"wrote {name}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
