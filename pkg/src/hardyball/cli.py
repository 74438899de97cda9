"""
Command-line driver: single computations, sweeps and the acceptance report.

Every task writes ``<task>.csv`` (one row per point, fixed column order, 17
significant digits) and ``<task>.json`` (config echo plus rows, sorted keys)
into the output directory; sweeps also get ``<task>.png``.  The exit status is
0 exactly when every row that carries a pass flag passed.

Configuration files use INI sections::

    [task]
    name = mass
    [params]
    n = 3
    gamma = 0.0
    [sweep]
    name = lam
    start = 0.5
    stop = 9.0
    count = 12
    [numerics]
    grid_size = 2000
    workers = 2

Command-line flags override file values.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import enum
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import AdmissibilityError, HardyError
from .params import ProblemParams

OUT_ENV = "HARDYBALL_OUT"
DEFAULT_OUT = "hardyball_out"


class Task(enum.Enum):
    EXPONENTS = "exponents"
    MU_RN = "mu-rn"
    LAMBDA1 = "eigen"
    MASS = "mass"
    THRESHOLD = "threshold"
    GROUND_STATE = "ground-state"
    ROBIN = "robin"
    POHOZAEV = "pohozaev"
    EXPANSION = "expansion"
    REPORT = "report"


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


SWEEPABLE = ("n", "gamma", "s", "lam", "radius", "pole")


@dataclass
class Sweep:
    name: str
    start: float
    stop: float
    count: int

    def values(self) -> list:
        vals = np.linspace(self.start, self.stop, self.count)
        return [int(round(v)) for v in vals] if self.name == "n" else [float(v) for v in vals]


@dataclass
class Numerics:
    grid_size: int = 2000
    axi_cells: int = 256
    tol: Optional[float] = None  # None: the task's own default
    seed: int = 0
    workers: int = 1


@dataclass
class RunConfig:
    task: Task
    params: ProblemParams
    sweep: Optional[Sweep] = None
    numerics: Numerics = field(default_factory=Numerics)
    pole: float = 0.5
    merely: bool = False  # threshold through the Robin mass (n = 3, s = 0, gamma <= 0)
    only: tuple = ()  # subset of checks for the report

    def validate(self) -> "RunConfig":
        if self.sweep is not None:
            sw = self.sweep
            if sw.name not in SWEEPABLE:
                raise ConfigError("sweep.name", f"unknown parameter {sw.name!r}; choose from {', '.join(SWEEPABLE)}")
            if sw.count < 1:
                raise ConfigError("sweep.count", "must be positive")
            for v in sw.values():
                try:
                    p, pole = point_params(self, v)
                except ValueError as err:
                    raise ConfigError("sweep", f"point {sw.name}={v} is inadmissible: {err}") from None
                _check_pole(pole, p)
        elif self.task is Task.ROBIN:
            _check_pole(self.pole, self.params)
        n = self.numerics
        if n.grid_size < 16:
            raise ConfigError("numerics.grid_size", "needs at least 16 nodes")
        if n.axi_cells < 8:
            raise ConfigError("numerics.axi_cells", "needs at least 8 cells")
        if n.workers < 1:
            raise ConfigError("numerics.workers", "must be at least 1")
        if n.tol is not None and not n.tol > 0:
            raise ConfigError("numerics.tol", "must be positive")
        from .checks import ALL_CHECKS

        for name in self.only:
            if name not in ALL_CHECKS:
                raise ConfigError("report.only", f"unknown check {name!r}")
        return self


def _check_pole(pole: float, p: ProblemParams):
    if not 0.0 <= pole < p.ball_radius:
        raise ConfigError("params.pole", f"pole radius must lie in [0, {p.ball_radius}), got {pole}")


def point_params(cfg: RunConfig, value) -> tuple[ProblemParams, float]:
    """Parameters and pole radius at one sweep value."""
    name = cfg.sweep.name
    if name == "pole":
        return cfg.params, value
    return replace(cfg.params, **{("ball_radius" if name == "radius" else name): value}), cfg.pole


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------


def load_config(path: Path) -> dict:
    """Flat ``section.key -> string`` mapping from an INI file."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    return {f"{sec}.{k}": v for sec in parser.sections() for k, v in parser.items(sec)}


def _typed(raw: dict, key: str, kind, default):
    if key not in raw:
        return default
    try:
        return kind(raw[key])
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw[key]!r} as {kind.__name__}") from None


def build_config(task: Task, args: argparse.Namespace) -> RunConfig:
    raw = load_config(Path(args.config)) if args.config else {}
    if "task.name" in raw and raw["task.name"] != task.value:
        raise ConfigError("task.name", f"config is for {raw['task.name']!r} but {task.value!r} was run")

    def pick(flag, key, kind, default):
        v = getattr(args, flag, None)
        return v if v is not None else _typed(raw, key, kind, default)

    try:
        params = ProblemParams(
            n=pick("n", "params.n", int, 3),
            gamma=pick("gamma", "params.gamma", float, 0.0),
            s=pick("s", "params.s", float, 0.0),
            lam=pick("lam", "params.lam", float, 0.0),
            ball_radius=pick("radius", "params.radius", float, 1.0),
        )
    except AdmissibilityError as err:
        raise ConfigError("params", str(err)) from None
    sweep = None
    if getattr(args, "sweep", None):
        try:
            name, start, stop, count = args.sweep.split(":")
            sweep = Sweep(name, float(start), float(stop), int(count))
        except ValueError:
            raise ConfigError("sweep", "expected NAME:START:STOP:COUNT") from None
    elif "sweep.name" in raw:
        sweep = Sweep(raw["sweep.name"], _typed(raw, "sweep.start", float, 0.0),
                      _typed(raw, "sweep.stop", float, 1.0), _typed(raw, "sweep.count", int, 10))
    numerics = Numerics(
        grid_size=pick("grid_size", "numerics.grid_size", int, 2000),
        axi_cells=pick("axi_cells", "numerics.axi_cells", int, 256),
        tol=pick("tol", "numerics.tol", float, None),
        seed=_typed(raw, "numerics.seed", int, 0),
        workers=pick("workers", "numerics.workers", int, 1),
    )
    only = tuple(getattr(args, "only", None) or
                 [x.strip() for x in raw.get("report.only", "").split(",") if x.strip()])
    cfg = RunConfig(task, params, sweep, numerics,
                    pole=pick("pole", "params.pole", float, 0.5),
                    merely=bool(getattr(args, "merely", False) or raw.get("task.merely", "").lower() == "true"),
                    only=only)
    return cfg.validate()


# ---------------------------------------------------------------------------
# one row per point
# ---------------------------------------------------------------------------


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


def _row_exponents(p, cfg):
    from .params import compute_exponents, critical_dimension, is_low_dimensional

    e = compute_exponents(p)
    resid = max(abs(e.beta_plus * (p.n - 2 - e.beta_plus) - p.gamma),
                abs(e.beta_minus * (p.n - 2 - e.beta_minus) - p.gamma),
                abs(e.beta_plus + e.beta_minus - (p.n - 2)))
    tol = cfg.numerics.tol or 1e-12
    return {"beta_minus": e.beta_minus, "beta_plus": e.beta_plus, "gap": e.gap,
            "critical_exponent": e.two_star_s, "critical_dimension": critical_dimension(p.gamma),
            "low_dimensional": is_low_dimensional(p.n, p.gamma), "identity_residual": resid,
            "pass": resid < tol}


def _row_mu_rn(p, cfg):
    from .extremals import compute_mu_rn, mu_rn_source
    from .oracles import sobolev_constant

    mu = compute_mu_rn(p)
    row = {"mu_rn": mu, "source": mu_rn_source(p), "oracle": math.nan, "rel_dev": math.nan}
    if p.gamma == 0 and p.s == 0:
        row["oracle"] = sobolev_constant(p.n)
        row["rel_dev"] = _rel(mu, row["oracle"])
        row["pass"] = row["rel_dev"] < (cfg.numerics.tol or 1e-10)
    return row


def _row_lambda1(p, cfg):
    from .oracles import lambda1_ball_oracle
    from .params import compute_exponents
    from .spectral import default_eigen_grid, lambda1

    res = lambda1(p, default_eigen_grid(p, cfg.numerics.grid_size))
    exact = lambda1_ball_oracle(compute_exponents(p).gap / 2, p.ball_radius)
    dev = _rel(res.value, exact)
    return {"lambda1": res.value, "oracle": exact, "rel_dev": dev, "pass": dev < (cfg.numerics.tol or 1e-6)}


def _row_mass(p, cfg):
    from .mass import interior_mass, mass_oracle_bessel

    m = interior_mass(p).mass
    ref = mass_oracle_bessel(p, p.lam)
    dev = _rel(m, ref)
    return {"mass": m, "oracle": ref, "rel_dev": dev, "pass": dev < (cfg.numerics.tol or 1e-6)}


def _row_threshold(p, cfg):
    from .oracles import lambda_star_ball_oracle
    from .params import compute_exponents

    tol = cfg.numerics.tol
    if cfg.merely:
        from .robin3d import AxiGrid, lambda_star_merely_singular_3d

        rep = lambda_star_merely_singular_3d(p.gamma, AxiGrid(cfg.numerics.axi_cells, cfg.numerics.axi_cells,
                                                              p.ball_radius))
        row = {"lambda_star": rep.lambda_star, "method": rep.method.value, "note": rep.note}
        if p.gamma == 0:
            row["oracle"] = (math.pi / 2 / p.ball_radius) ** 2
            row["rel_dev"] = _rel(rep.lambda_star, row["oracle"])
            row["pass"] = row["rel_dev"] < (tol or 0.02)
        return row
    from .mass import lambda_star_by_mass

    rep = lambda_star_by_mass(p)
    exact = lambda_star_ball_oracle(compute_exponents(p).gap / 2, p.ball_radius)
    worst = max(rep.cross_residuals.values()) if rep.cross_residuals else math.nan
    row = {"lambda_star": rep.lambda_star, "method": rep.method.value, "oracle": exact,
           "rel_dev": _rel(rep.lambda_star, exact), "cross_residual_max": worst, "note": rep.note}
    row["pass"] = max(row["rel_dev"], worst) < (tol or 1e-3)
    return row


def _ground(p, cfg):
    from .spectral import default_eigen_grid, ground_state

    return ground_state(p, default_eigen_grid(p, cfg.numerics.grid_size))


def _row_ground_state(p, cfg):
    from .extremals import compute_mu_rn
    from .mass import pohozaev_residual

    gs = _ground(p, cfg)
    mu_rn = compute_mu_rn(p)
    return {"mu": gs.mu, "mu_rn": mu_rn, "mu_over_mu_rn": gs.mu / mu_rn,
            "concentration_score": gs.concentration_score, "half_mass_radius": gs.half_mass_radius,
            "pohozaev_residual": pohozaev_residual(p, gs.profile), "el_residual": gs.residual,
            "sanity_passed": gs.sanity_passed}


def _row_pohozaev(p, cfg):
    from .mass import pohozaev_residual
    from .radial import RadialFunction

    gs = _ground(p, cfg)
    u = gs.profile
    x = np.log(u.grid.nodes / u.grid.nodes[0])
    x /= x[-1]
    bad = RadialFunction(u.grid, u.values * (1 + 0.01 * np.sin(math.pi * x)), u.leading_power)
    tol = cfg.numerics.tol or 1e-3
    res, corrupted = pohozaev_residual(p, u), pohozaev_residual(p, bad)
    return {"mu": gs.mu, "residual": res, "corrupted_residual": corrupted,
            "pass": bool(res < tol and corrupted > tol)}


def _row_robin(p, cfg):
    from .oracles import images_robin_mass, radial_mass_3d
    from .robin3d import AxiGrid, robin_mass_at

    grid = AxiGrid(cfg.numerics.axi_cells, cfg.numerics.axi_cells, p.ball_radius)
    res = robin_mass_at(p.gamma, p.lam, cfg.pole, grid)
    row = {"pole_radius": cfg.pole, "robin_mass": res.robin_mass, "error_bar": res.error_bar,
           "coarse": res.raw[0], "fine": res.raw[1], "oracle": math.nan, "rel_dev": math.nan}
    oracle = None
    if p.gamma == 0 and p.lam == 0 and p.ball_radius == 1.0:
        oracle = images_robin_mass(cfg.pole)
    elif p.gamma == 0 and cfg.pole == 0:
        oracle = radial_mass_3d(p.lam, p.ball_radius)
    if oracle is not None:
        row["oracle"] = oracle
        row["rel_dev"] = _rel(res.robin_mass, oracle)
        row["pass"] = row["rel_dev"] < (cfg.numerics.tol or 0.005) or abs(res.robin_mass - oracle) < 1e-8
    return row


def _row_expansion(p, cfg):
    from .extremals import expansion_slope
    from .mass import interior_mass
    from .params import compute_exponents

    fit = expansion_slope(p)
    row = {"slope": fit.slope, "stderr": fit.stderr, "leading_power": fit.leading_power}
    if compute_exponents(p).gap < 2 and (p.s > 0 or p.gamma > 0):
        m = interior_mass(p).mass
        row["mass"] = m
        row["pass"] = bool(np.sign(fit.slope) == -np.sign(m) or abs(fit.slope) < 3 * fit.stderr)
    return row


ROWS = {
    Task.EXPONENTS: _row_exponents,
    Task.MU_RN: _row_mu_rn,
    Task.LAMBDA1: _row_lambda1,
    Task.MASS: _row_mass,
    Task.THRESHOLD: _row_threshold,
    Task.GROUND_STATE: _row_ground_state,
    Task.ROBIN: _row_robin,
    Task.POHOZAEV: _row_pohozaev,
    Task.EXPANSION: _row_expansion,
}

CSV_COLUMNS = {
    Task.EXPONENTS: "beta_minus, beta_plus, gap, critical_exponent, critical_dimension, low_dimensional, "
                    "identity_residual",
    Task.MU_RN: "mu_rn, source, oracle (Sobolev constant when gamma = s = 0), rel_dev",
    Task.LAMBDA1: "lambda1, oracle (Bessel zero squared), rel_dev",
    Task.MASS: "mass, oracle (Bessel closed form), rel_dev; sweeps over lam add mass_increasing",
    Task.THRESHOLD: "lambda_star, method, oracle, rel_dev, cross_residual_max, note",
    Task.GROUND_STATE: "mu, mu_rn, mu_over_mu_rn, concentration_score, half_mass_radius, pohozaev_residual, "
                       "el_residual, sanity_passed; sweeps over lam add mu_nonincreasing",
    Task.ROBIN: "pole_radius, robin_mass, error_bar, coarse, fine, oracle, rel_dev",
    Task.POHOZAEV: "mu, residual, corrupted_residual",
    Task.EXPANSION: "slope, stderr, leading_power, mass",
}


def compute_point(cfg: RunConfig, index: int, value) -> dict:
    """Row for one sweep point (or the single point); errors become failed rows."""
    p, pole = cfg.params, cfg.pole
    if cfg.sweep is not None:
        p, pole = point_params(cfg, value)
    inputs = {"n": p.n, "gamma": p.gamma, "s": p.s, "lam": p.lam, "radius": p.ball_radius}
    row = {"index": index, **inputs}
    local = replace(cfg, params=p, pole=pole)
    try:
        out = ROWS[cfg.task](p, local)
        row.update(out)
        row["error"] = ""
    except HardyError as err:
        row["error"] = f"{type(err).__name__}: {err}"
        row["pass"] = False
    return row


def _run_points(cfg: RunConfig) -> list:
    values = cfg.sweep.values() if cfg.sweep else [None]
    if cfg.numerics.workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=cfg.numerics.workers) as pool:
            # map returns in submission order, so the rows stay in sweep order
            rows = list(pool.map(compute_point, [cfg] * len(values), range(len(values)), values))
    else:
        rows = [compute_point(cfg, i, v) for i, v in enumerate(values)]
    _monotonicity_flags(cfg, rows)
    return rows


def _monotonicity_flags(cfg: RunConfig, rows: list):
    if cfg.sweep is None or cfg.sweep.name != "lam" or len(rows) < 2:
        return
    key, flag, increasing = {Task.MASS: ("mass", "mass_increasing", True),
                             Task.GROUND_STATE: ("mu", "mu_nonincreasing", False)}.get(cfg.task, (None,) * 3)
    if key is None:
        return
    vals = [r.get(key, math.nan) for r in rows]
    d = np.diff(vals)
    ok = bool(np.all(d > 0)) if increasing else bool(np.all(d <= 1e-12 * np.nanmax(np.abs(vals))))
    for r in rows:
        r[flag] = ok


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def write_csv(path: Path, rows: list):
    columns = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])


def write_json(path: Path, payload: dict):
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_echo(cfg: RunConfig) -> dict:
    d = {"task": cfg.task.value, "params": asdict(cfg.params), "numerics": asdict(cfg.numerics)}
    d["numerics"].pop("workers")  # does not affect results
    if cfg.sweep:
        d["sweep"] = asdict(cfg.sweep)
    if cfg.task is Task.ROBIN:
        d["pole"] = cfg.pole
    if cfg.task is Task.THRESHOLD:
        d["merely"] = cfg.merely
    return d


_PLOT_KEY = {Task.EXPONENTS: "gap", Task.MU_RN: "mu_rn", Task.LAMBDA1: "lambda1", Task.MASS: "mass",
             Task.THRESHOLD: "lambda_star", Task.GROUND_STATE: "mu_over_mu_rn", Task.ROBIN: "robin_mass",
             Task.POHOZAEV: "residual", Task.EXPANSION: "slope"}


def run_config(cfg: RunConfig, out: Path) -> int:
    """Run a task, write its files and return the exit status."""
    out.mkdir(parents=True, exist_ok=True)
    if cfg.task is Task.REPORT:
        return full_report(cfg, out)
    rows = _run_points(cfg)
    stem = out / cfg.task.value.replace("-", "_")
    write_csv(stem.with_suffix(".csv"), rows)
    flags = [r["pass"] for r in rows if "pass" in r]
    for key in ("mass_increasing", "mu_nonincreasing"):
        if rows and key in rows[0]:
            flags.append(rows[0][key])
    ok = all(flags)
    write_json(stem.with_suffix(".json"), {"config": _config_echo(cfg), "rows": rows, "passed": ok})
    if cfg.sweep is not None and len(rows) > 1:
        from .plotting import sweep_curve

        key = _PLOT_KEY[cfg.task]
        xs = [r[cfg.sweep.name] if cfg.sweep.name in r else r.get("pole_radius") for r in rows]
        ys = [r.get(key) if isinstance(r.get(key), (int, float)) else math.nan for r in rows]
        sweep_curve(stem.with_suffix(".png"), xs, {key: ys}, cfg.sweep.name, cfg.task.value,
                    zero_line=cfg.task in (Task.MASS, Task.EXPANSION, Task.ROBIN))
    for r in rows:
        print(", ".join(f"{k}={_fmt(v)}" for k, v in r.items()))
    return 0 if ok else 1


def full_report(cfg: RunConfig, out: Path) -> int:
    """Run the acceptance checks (all, or ``cfg.only``) and write ``report.json``/``report.png``."""
    from .checks import ALL_CHECKS, CheckConfig
    from .plotting import check_summary

    check_cfg = CheckConfig(eigen_nodes=cfg.numerics.grid_size, axi_cells=cfg.numerics.axi_cells,
                            seed=cfg.numerics.seed)
    names = list(cfg.only) or list(ALL_CHECKS)
    results = []
    for name in names:
        try:
            res = ALL_CHECKS[name](check_cfg)
        except HardyError as err:
            from .checks import CheckResult

            res = CheckResult(name, False, math.nan, math.nan, 0.0, 0.0, {"error": False},
                              {"error": f"{type(err).__name__}: {err}"})
        results.append(res)
        print(res.line(), flush=True)
    payload = {
        "config": _config_echo(cfg),
        "checks": {name: {"passed": r.passed, "deviation": r.deviation, "tolerance": r.tolerance,
                          "parts": r.parts, "budget_seconds": r.budget}
                   for name, r in zip(names, results)},
        "passed": all(r.passed for r in results),
    }
    write_json(out / "report.json", payload)
    rows = [{"check": n, "passed": r.passed, "deviation": r.deviation, "tolerance": r.tolerance}
            for n, r in zip(names, results)]
    write_csv(out / "report.csv", rows)
    ratios = [r.deviation / r.tolerance if r.tolerance and math.isfinite(r.tolerance) and r.tolerance > 0
              else (1e-3 if r.passed else 10.0) for r in results]
    check_summary(out / "report.png", names, ratios, [r.passed for r in results])
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} checks passed")
    return 0 if payload["passed"] else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _common(sp: argparse.ArgumentParser, task: Task):
    sp.add_argument("--config", help="INI file with [task], [params], [sweep], [numerics] sections")
    sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    sp.add_argument("--workers", type=int, help="worker processes for sweeps (results do not depend on it)")
    sp.add_argument("--grid-size", dest="grid_size", type=int, help="radial grid nodes (default 2000)")
    sp.add_argument("--axi-cells", dest="axi_cells", type=int, help="cells per direction of the axisymmetric grid")
    sp.add_argument("--tol", type=float, help="pass/fail tolerance (default: the task's own)")
    if task is Task.REPORT:
        sp.add_argument("--only", nargs="+", help="run only these checks")
        return
    sp.add_argument("--n", type=int, help="dimension")
    sp.add_argument("--gamma", type=float, help="Hardy coefficient")
    sp.add_argument("--s", type=float, help="Hardy-Sobolev weight exponent")
    sp.add_argument("--lam", type=float, help="constant linear potential")
    sp.add_argument("--radius", type=float, help="ball radius")
    sp.add_argument("--sweep", help="NAME:START:STOP:COUNT with NAME in " + ", ".join(SWEEPABLE))
    if task is Task.ROBIN:
        sp.add_argument("--pole", type=float, help="distance of the pole from the centre (default 0.5)")
    if task is Task.THRESHOLD:
        sp.add_argument("--merely", action="store_true",
                        help="use the Robin mass (n = 3, s = 0, gamma <= 0) instead of the interior mass")


_HELP = {
    Task.EXPONENTS: "indicial exponents and identities",
    Task.MU_RN: "best constant on the whole space",
    Task.LAMBDA1: "first Dirichlet eigenvalue against the Bessel oracle",
    Task.MASS: "Hardy-singular interior mass against the Bessel closed form",
    Task.THRESHOLD: "existence threshold lambda*",
    Task.GROUND_STATE: "radial minimiser of the critical quotient",
    Task.ROBIN: "Robin mass of the 3-d ball at a pole on the axis",
    Task.POHOZAEV: "dilation identity on a ground state, with a corruption detector",
    Task.EXPANSION: "fitted slope of the test-function energy",
    Task.REPORT: "run the acceptance checks and write a pass/fail summary",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardyball", description=__doc__.split("\n\n")[1].strip(),
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for task in Task:
        epilog = None
        if task in CSV_COLUMNS:
            epilog = ("CSV columns: index, n, gamma, s, lam, radius, " + CSV_COLUMNS[task] +
                      ", pass (when an oracle or criterion applies), error")
        elif task is Task.REPORT:
            epilog = "Writes report.json, report.csv (check, passed, deviation, tolerance) and report.png."
        sp = sub.add_parser(task.value, help=_HELP[task], description=_HELP[task], epilog=epilog)
        _common(sp, task)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    task = Task(args.command)
    try:
        cfg = build_config(task, args)
    except (ConfigError, FileNotFoundError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    return run_config(cfg, out)


if __name__ == "__main__":
    sys.exit(main())
