"""Command line front end: ground | evolve | classify | pairs | sweep.

Configuration is an INI-style file of flat ``key = value`` sections:

    [model]         dim, a, b, alpha, lam
    [grid]          M, r_max                  (evolution grid)
    [solver]        any SolverOpts field      (ground-state solver)
    [evolution]     any EvolutionConfig field, plus weight = quadratic |
                    critical | intercritical, weight_R, weight_L
    [initial_data]  kind = gaussian | ground_state | file, amplitude, width,
                    adapted, c, path
    [classify]      evolve = true | false
    [sweep]         a, b, alpha, amplitude as comma separated lists; cap

Unknown sections or keys are rejected.  Exit codes: 0 success, 1 config or
hypothesis error, 2 no convergence (or failed verification for ``pairs``),
3 blow-up detected, 4 unresolved run.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import ModelParams, HardyViolation, HypothesisViolation, RegimeMismatch, derive_indices
from .radial import (RadialGrid, RadialField, Quadratic, TruncatedCritical,
                     TruncatedIntercritical, _rho)
from .groundstate import (SolverOpts, NoConvergence, Prediction, solve_ground_state,
                          thresholds, classify_initial_data, pohozaev_residuals)
from .dynamics import (EvolutionConfig, Status, COLUMNS, InsufficientSamples, evolve,
                       virial_audit, scattering_diagnostic)
from .exponents import verification_report

log = logging.getLogger("inls_lab")

EXIT_OK, EXIT_CONFIG, EXIT_NOCONV, EXIT_BLOWUP, EXIT_UNRESOLVED = 0, 1, 2, 3, 4
SWEEP_CAP = 10_000
SWEEP_AXES = ("a", "b", "alpha", "amplitude")


class ConfigError(ValueError):
    pass


class _FieldError(ValueError):
    def __init__(self, key, msg):
        super().__init__(msg)
        self.key = key


# ----------------------------------------------------------------- config

@dataclass
class InitialData:
    kind: str = "gaussian"       # gaussian | ground_state | file
    amplitude: float = 1.0
    width: float = 1.0
    adapted: bool = True         # multiply by r^{-rho}
    c: float = 1.0               # u0 = c Q
    path: str = ""


@dataclass
class RunConfig:
    model: ModelParams
    grid: tuple = (4096, 30.0)
    solver: SolverOpts = field(default_factory=SolverOpts)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    initial_data: InitialData = field(default_factory=InitialData)
    classify_evolve: bool = False
    sweep: dict = field(default_factory=dict)
    sweep_cap: int = SWEEP_CAP
    output_dir: Path = Path("out")


def _line_of(text: str, section: str, key: str | None) -> int:
    cur = None
    for i, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1].strip()
            if key is None and cur == section:
                return i
        elif cur == section and key is not None and s.split("=", 1)[0].strip() == key:
            return i
    return 0


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_number(s: str):
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        return float(s)


def _parse_like(default, s: str):
    """Convert s to the type of a dataclass default."""
    if isinstance(default, bool):
        return _parse_bool(s)
    if isinstance(default, int):
        v = float(s)
        if v != int(v):
            raise ValueError(f"expected an integer, got {s!r}")
        return int(v)
    if isinstance(default, float) or default is None:
        return None if s.strip().lower() == "none" else float(s)
    if isinstance(default, tuple):
        return tuple(float(x) for x in s.split(",") if x.strip())
    return s.strip()


def _fill(cls, items: dict, skip=()):
    defaults = {f.name: (f.default if f.default is not dataclasses.MISSING else
                         f.default_factory() if f.default_factory is not dataclasses.MISSING else None)
                for f in dataclasses.fields(cls)}
    kw = {}
    for k, v in items.items():
        if k in skip:
            continue
        if k not in defaults:
            raise _FieldError(k, "unknown key")
        try:
            kw[k] = _parse_like(defaults[k], v)
        except ValueError as exc:
            raise _FieldError(k, str(exc)) from None
    return kw


def _weight(ev: dict):
    kind = ev.pop("weight", "quadratic").strip().lower()
    R = float(ev.pop("weight_R", "2.0"))
    L = float(ev.pop("weight_L", "2.0"))
    if kind == "quadratic":
        return Quadratic()
    if kind == "critical":
        return TruncatedCritical(R)
    if kind == "intercritical":
        return TruncatedIntercritical(R, L)
    raise ValueError(f"unknown weight {kind!r}")


SECTIONS = ("model", "grid", "solver", "evolution", "initial_data", "classify", "sweep", "output")


def load_config(path) -> RunConfig:
    """Parse a config file; any problem raises ConfigError naming line and field."""
    text = Path(path).read_text()
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ConfigError(f"{path}:{_line_of(text, sec, None)}: unknown section [{sec}]")
    data = {sec: dict(cp[sec]) for sec in cp.sections()}

    def fail(sec, key, msg):
        raise ConfigError(f"{path}:{_line_of(text, sec, key)}: {sec}.{key}: {msg}")

    def section(name, cls, skip=()):
        try:
            return _fill(cls, data.get(name, {}), skip)
        except _FieldError as exc:
            fail(name, exc.key, str(exc))

    m = data.get("model", {})
    for k in m:
        if k not in ("dim", "a", "b", "alpha", "lam"):
            fail("model", k, "unknown key")
    for k in ("dim", "a", "b", "alpha"):
        if k not in m:
            raise ConfigError(f"{path}: model.{k}: missing")
    try:
        model = ModelParams(int(m["dim"]), _parse_number(m["a"]), _parse_number(m["b"]),
                            _parse_number(m["alpha"]), int(m.get("lam", "1")))
    except HardyViolation as exc:
        fail("model", "a", str(exc))
    except ValueError as exc:
        fail("model", "dim", str(exc))

    g = data.get("grid", {})
    for k in g:
        if k not in ("M", "r_max"):
            fail("grid", k, "unknown key")
    try:
        grid = (int(g.get("M", "4096")), float(g.get("r_max", "30")))
    except ValueError as exc:
        fail("grid", "M", str(exc))

    solver = SolverOpts(**section("solver", SolverOpts))

    ev = dict(data.get("evolution", {}))
    try:
        wt = _weight(ev)
    except ValueError as exc:
        fail("evolution", "weight", str(exc))
    data["evolution"] = ev
    ekw = section("evolution", EvolutionConfig, skip=("weight",))
    try:
        evolution = EvolutionConfig(weight=wt, **ekw)
    except ValueError as exc:
        fail("evolution", next(iter(ev), "dt"), str(exc))

    init = InitialData(**section("initial_data", InitialData))
    if init.kind not in ("gaussian", "ground_state", "file"):
        fail("initial_data", "kind", f"unknown kind {init.kind!r}")

    cl = data.get("classify", {})
    for k in cl:
        if k != "evolve":
            fail("classify", k, "unknown key")
    try:
        cl_ev = _parse_bool(cl.get("evolve", "false"))
    except ValueError as exc:
        fail("classify", "evolve", str(exc))

    sweep, cap = {}, SWEEP_CAP
    for k, v in data.get("sweep", {}).items():
        if k == "cap":
            cap = int(v)
        elif k in SWEEP_AXES:
            try:
                sweep[k] = [_parse_number(x) for x in v.split(",") if x.strip()]
            except ValueError as exc:
                fail("sweep", k, str(exc))
        else:
            fail("sweep", k, "unknown key")

    out = data.get("output", {})
    for k in out:
        if k != "dir":
            fail("output", k, "unknown key")
    return RunConfig(model, grid, solver, evolution, init, cl_ev, sweep, cap,
                     Path(out.get("dir", "out")))


# ----------------------------------------------------------------- output

def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if hasattr(x, "value") and hasattr(x, "name"):
        return x.name
    return x


def write_json(path: Path, obj) -> None:
    # json writes floats with repr, which round-trips exactly
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_trajectory(path: Path, trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for rec in trajectory:
            w.writerow([_fmt(x) for x in rec.as_row()])


# ------------------------------------------------------------------ runs

def initial_field(cfg: RunConfig, gs=None) -> RadialField:
    p = cfg.model
    init = cfg.initial_data
    if init.kind == "file":
        return RadialField.load(init.path)
    grid = RadialGrid(p.dim, *cfg.grid)
    if init.kind == "gaussian":
        rho = _rho((p.dim, float(p.a))) if init.adapted else 0.0
        return RadialField.gaussian(grid, init.amplitude, init.width, rho)
    gs = gs or solve_ground_state(p, cfg.solver)
    q = gs.field_on(grid)
    return RadialField(grid, init.c * q.values)


def _status_code(status: Status) -> int:
    return {Status.REACHED_T_END: EXIT_OK, Status.BLOWUP: EXIT_BLOWUP}.get(status, EXIT_UNRESOLVED)


def cmd_ground(cfg: RunConfig, out: Path) -> int:
    p = cfg.model
    try:
        gs = solve_ground_state(p, cfg.solver)
    except HypothesisViolation as exc:
        log.error("HypothesisViolation: %s", exc)
        return EXIT_CONFIG
    except NoConvergence as exc:
        log.error("NoConvergence: %s", exc)
        return EXIT_NOCONV
    out.mkdir(parents=True, exist_ok=True)
    gs.profile.save(out / "profile.txt", dim=p.dim, a=p.a, b=p.b, alpha=p.alpha)
    summary = gs.summary()
    try:
        th = thresholds(gs, p)
        summary["thresholds"] = {k: getattr(th, k) for k in
                                 ("mass_Q", "energy_Q", "kinetic_Q", "C_a", "mass_crit_threshold",
                                  "sigma", "me_product", "grad_product", "y_star")}
        summary["thresholds"]["regime"] = th.regime.value
    except RegimeMismatch as exc:
        summary["thresholds"] = {"regime": derive_indices(p).regime.value, "note": str(exc)}
    r1, r2 = pohozaev_residuals(gs, p)
    summary["residuals"] = {"elliptic": gs.solver_meta.get("residual"),
                            "pohozaev_kinetic": r1, "pohozaev_potential": r2}
    write_json(out / "summary.json", summary)
    log.info("ground state: mass %.12g, C_a %.12g", gs.mass, gs.sharp_constant)
    return EXIT_OK


def _run_evolution(cfg: RunConfig, u0: RadialField, out: Path) -> dict:
    p = cfg.model
    ev = evolve(u0, p, cfg.evolution)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory(out / "trajectory.csv", ev.trajectory)
    if cfg.evolution.store_snapshots:
        for k, (t, u) in enumerate(ev.snapshots):
            u.save(out / f"snapshot_{k:05d}.txt", t=float(t))
    summary = {"status": ev.status.value, "t_star": ev.t_star,
               "t_final": ev.trajectory[-1].t, "steps_recorded": len(ev.trajectory)}
    try:
        audit = virial_audit(ev.trajectory, p)
        summary["virial"] = {k: v for k, v in audit.items()
                             if k not in ("t", "fd_Vpp", "identity_Vpp")}
    except InsufficientSamples as exc:
        summary["virial"] = {"skipped": str(exc)}
    if ev.states and ev.status is Status.REACHED_T_END and len(ev.states) > 1:
        incr = scattering_diagnostic(ev, p, cfg.evolution.dt)
        summary["scattering_increments"] = [[t, d] for t, d in incr]
    write_json(out / "summary.json", summary)
    return {"status": ev.status, "t_star": ev.t_star}


def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    try:
        u0 = initial_field(cfg)
    except (HypothesisViolation, NoConvergence, OSError, ValueError) as exc:
        log.error("initial data: %s", exc)
        return EXIT_CONFIG
    res = _run_evolution(cfg, u0, out)
    log.info("evolution finished: %s", res["status"].value)
    return _status_code(res["status"])


def _agree(pred: Prediction, status: Status):
    if pred in (Prediction.GLOBAL_MASS_CRITICAL, Prediction.GLOBAL_INTERCRITICAL):
        return status is Status.REACHED_T_END
    if pred in (Prediction.BLOWUP_MASS_CRITICAL, Prediction.BLOWUP_INTERCRITICAL):
        return status is Status.BLOWUP
    return None


def predict(cfg: RunConfig, u0=None):
    """(prediction, u0); prediction is NO_PREDICTION outside the two regimes."""
    p = cfg.model
    try:
        gs = solve_ground_state(p, cfg.solver)
    except HypothesisViolation:
        return Prediction.NO_PREDICTION, u0 if u0 is not None else initial_field(cfg)
    if u0 is None:
        u0 = initial_field(cfg, gs)
    try:
        th = thresholds(gs, p)
    except RegimeMismatch:
        return Prediction.NO_PREDICTION, u0
    return classify_initial_data(u0, th, p), u0


def cmd_classify(cfg: RunConfig, out: Path) -> int:
    try:
        pred, u0 = predict(cfg)
    except NoConvergence as exc:
        log.error("NoConvergence: %s", exc)
        return EXIT_NOCONV
    except (OSError, ValueError) as exc:
        log.error("initial data: %s", exc)
        return EXIT_CONFIG
    result = {"prediction": pred.name, "description": pred.value}
    print(f"prediction: {pred.name}")
    if cfg.classify_evolve:
        res = _run_evolution(cfg, u0, out)
        agree = _agree(pred, res["status"])
        result.update(observed=res["status"].value, t_star=res["t_star"], agree=agree)
        print(f"observed: {res['status'].value}")
        print(f"agree: {'n/a' if agree is None else agree}")
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "classify.json", result)
    return EXIT_OK


def cmd_pairs(cfg: RunConfig, out: Path) -> int:
    rep = verification_report(cfg.model)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "pairs.json", rep)
    print(json.dumps(_jsonable(rep), indent=2, sort_keys=True))
    if not rep["all_pass"]:
        for fam in rep["families"]:
            for f in fam["failures"]:
                log.error("%s: %s fails", fam["family"], f)
        for fam, conds in rep["not_applicable"].items():
            log.info("%s not applicable: %s", fam, ", ".join(conds))
        return EXIT_NOCONV
    return EXIT_OK


# ----------------------------------------------------------------- sweep

def run_dir_name(point: dict) -> str:
    return "_".join(f"{k}={_fmt(float(point[k]))}" for k in SWEEP_AXES if k in point)


def sweep_points(cfg: RunConfig) -> list:
    axes = [k for k in SWEEP_AXES if k in cfg.sweep]
    n = math.prod(len(cfg.sweep[k]) for k in axes) if axes else 0
    if n > cfg.sweep_cap:
        raise ConfigError(f"sweep has {n} points, above the cap {cfg.sweep_cap}")
    return [dict(zip(axes, vals)) for vals in itertools.product(*(cfg.sweep[k] for k in axes))]


def _point_config(cfg: RunConfig, point: dict) -> RunConfig:
    mk = {k: point[k] for k in ("a", "b", "alpha") if k in point}
    model = cfg.model.replace(**mk)
    init = cfg.initial_data
    if "amplitude" in point:
        init = dataclasses.replace(init, **({"c": point["amplitude"]} if init.kind == "ground_state"
                                            else {"amplitude": point["amplitude"]}))
    return dataclasses.replace(cfg, model=model, initial_data=init)


def _sweep_one(cfg: RunConfig, point: dict, rd: Path) -> dict:
    row = {"a": cfg.model.a, "b": cfg.model.b, "alpha": cfg.model.alpha,
           "amplitude": cfg.initial_data.amplitude, **point}
    try:
        pc = _point_config(cfg, point)
        pred, u0 = predict(pc)
        res = _run_evolution(pc, u0, rd)
        row.update(prediction=pred.name, observed=res["status"].value,
                   t_star_or_blank="" if res["t_star"] is None else _fmt(res["t_star"]))
    except Exception as exc:   # recorded per run, the sweep continues
        rd.mkdir(parents=True, exist_ok=True)
        row.update(prediction="", observed=f"error: {type(exc).__name__}: {exc}", t_star_or_blank="")
    write_json(rd / "done.json", row)
    return row


PHASE_COLUMNS = ("a", "b", "alpha", "amplitude", "prediction", "observed", "t_star_or_blank")


def cmd_sweep(cfg: RunConfig, out: Path, workers: int = 1, resume: bool = False) -> int:
    try:
        points = sweep_points(cfg)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    out.mkdir(parents=True, exist_ok=True)
    todo = []
    for pt in points:
        rd = out / run_dir_name(pt)
        if resume and (rd / "done.json").exists():
            continue
        todo.append((pt, rd))
    log.info("sweep: %d points, %d to run", len(points), len(todo))
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_sweep_one, [cfg] * len(todo), *zip(*todo)))
    else:
        for pt, rd in todo:
            _sweep_one(cfg, pt, rd)
    # assembled after all workers have joined, in grid order
    with open(out / "phase.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PHASE_COLUMNS)
        for pt in points:
            row = json.loads((out / run_dir_name(pt) / "done.json").read_text())
            w.writerow([_fmt(row[c]) if isinstance(row[c], float) else row[c] for c in PHASE_COLUMNS])
    write_json(out / "sweep.json", {"points": len(points), "executed": len(todo),
                                    "skipped": len(points) - len(todo)})
    return EXIT_OK


# ------------------------------------------------------------------ main

COMMANDS = {"ground": cmd_ground, "evolve": cmd_evolve, "classify": cmd_classify,
            "pairs": cmd_pairs, "sweep": cmd_sweep}


def _setup_logging():
    level = os.environ.get("INLS_LAB_LOG", "info").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        level = "info"
    logging.basicConfig(level=levels[level], format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="inls-lab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="path to the key = value config file")
    ap.add_argument("--output", help="output directory (overrides [output] dir)")
    ap.add_argument("--workers", type=int, default=1, help="sweep worker processes")
    ap.add_argument("--resume", action="store_true", help="skip completed sweep runs")
    args = ap.parse_args(argv)
    _setup_logging()
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    out = Path(args.output) if args.output else cfg.output_dir
    if args.command == "sweep":
        return cmd_sweep(cfg, out, args.workers, args.resume)
    return COMMANDS[args.command](cfg, out)


if __name__ == "__main__":
    sys.exit(main())
