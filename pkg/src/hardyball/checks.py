"""
Acceptance checks shared by the test-suite and the ``report`` command.

Every check returns a :class:`CheckResult` carrying the worst deviation it saw,
the tolerance it was held to, its runtime against a budget and a dictionary of
named sub-results.  A check passes when every part passes and the runtime is
within budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonConvergence
from .extremals import compute_mu_rn, energy_of_test_function, expansion_slope, make_test_function
from .mass import (
    SolutionSign,
    entire_solution_fit,
    interior_mass,
    lambda_star_by_mass,
    mass_oracle_bessel,
    pohozaev_residual,
    subsupersolution_check,
)
from .oracles import images_robin_mass, lambda1_ball_oracle, lambda_star_ball_oracle
from .params import ProblemParams, compute_exponents, indicial_roots
from .radial import Branch, Grading, RadialFunction, make_grid
from .robin3d import AxiGrid, green_bound_check, lambda_star_merely_singular_3d, robin_mass_at, robin_sup
from .spectral import default_eigen_grid, ground_state, janelli_lambda_star, lambda1


@dataclass
class CheckConfig:
    """Numerical knobs for the checks; coarse values make tolerance failures visible."""

    eigen_nodes: int = 2000
    axi_cells: int = 256
    seed: int = 0


@dataclass
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    runtime: float
    budget: float
    parts: dict = field(default_factory=dict)  # sub-criterion -> bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [k for k, ok in self.parts.items() if not ok]
        extra = f"  failed parts: {', '.join(failed)}" if failed else ""
        return (f"{status}  {self.name}: deviation {self.deviation:.3e} (tol {self.tolerance:.1e}), "
                f"{self.runtime:.1f}s of {self.budget:.0f}s{extra}")


def _finish(name, parts, deviation, tol, t0, budget, detail):
    runtime = time.perf_counter() - t0
    parts = {k: bool(v) for k, v in parts.items()}
    parts["runtime"] = runtime < budget
    return CheckResult(name, all(parts.values()), float(deviation), tol, runtime, budget, parts, detail)


def _rel(a, b):
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------------------


def check_exponent_identities(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(3, 13))
        gamma = float(rng.uniform(-5.0, (n - 2) ** 2 / 4.0))
        bp, bm = indicial_roots(n, gamma)
        worst = max(worst, abs(bp * (n - 2 - bp) - gamma), abs(bm * (n - 2 - bm) - gamma),
                    abs(bp + bm - (n - 2)))
    return _finish("exponent identities", {"identities": worst < 1e-12}, worst, 1e-12, t0, 1.0, {})


def _low_dim_cases(rng, count):
    out = []
    while len(out) < count:
        n = int(rng.integers(3, 9))
        top = (n - 2) ** 2 / 4.0
        gamma = float(rng.uniform(top - 1.0 + 0.01, top - 1e-3))
        rho = float(rng.uniform(0.5, 3.0))
        out.append(ProblemParams(n, gamma, ball_radius=rho))
    return out


def check_euler_mass(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    worst = 0.0
    for p in _low_dim_cases(np.random.default_rng(cfg.seed + 1), 50):
        gap = compute_exponents(p).gap
        worst = max(worst, _rel(interior_mass(p).mass, -p.ball_radius ** (-gap)))
    return _finish("Euler mass", {"exact": worst < 1e-8}, worst, 1e-8, t0, 10.0, {})


MASS_CASES = [(3, 0.0), (3, 0.2), (4, 0.75), (5, 2.0), (3, -0.5)]


def check_bessel_mass(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    """Relative deviation is taken against ``max(|m|, 1e-3 |m(0)|)`` so the zero at the threshold stays finite."""
    t0 = time.perf_counter()
    worst = 0.0
    for n, gamma in MASS_CASES:
        p = ProblemParams(n, gamma)
        nu = compute_exponents(p).gap / 2
        lam1 = lambda1_ball_oracle(nu)
        floor = 1e-3 * abs(mass_oracle_bessel(p, 0.0))
        for lam in lam1 * np.linspace(0.02, 0.95, 20):
            ref = mass_oracle_bessel(p, lam)
            got = interior_mass(p.with_(lam=lam), check_coercive=False).mass
            worst = max(worst, abs(got - ref) / max(abs(ref), floor))
    return _finish("Bessel oracle agreement", {"mass": worst < 1e-6}, worst, 1e-6, t0, 30.0, {})


THRESHOLD_CASES = [(3, 0.0), (4, 0.75), (3, 0.1), (3, 0.2), (3, -0.5),
                   (4, 0.5), (5, 2.0), (6, 3.5), (4, 0.9), (3, -0.2)]


def check_threshold_triple(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    worst, rows = 0.0, []
    for n, gamma in THRESHOLD_CASES:
        p = ProblemParams(n, gamma)
        nu = compute_exponents(p).gap / 2
        exact = lambda_star_ball_oracle(nu)
        by_mass = lambda_star_by_mass(p, cross_check=False).lambda_star
        grid = None if cfg.eigen_nodes == 2000 else default_eigen_grid(p, cfg.eigen_nodes)
        janelli = janelli_lambda_star(p, grid).value
        dev = max(_rel(by_mass, exact), _rel(janelli, exact), _rel(by_mass, janelli))
        worst = max(worst, dev)
        rows.append((n, gamma, exact, by_mass, janelli))
    quarter_pi2 = math.pi**2 / 4
    named = max(_rel(rows[0][3], quarter_pi2), _rel(rows[1][3], quarter_pi2))
    parts = {"triple": worst < 1e-3, "pi^2/4 cases": named < 1e-3}
    return _finish("threshold triple agreement", parts, max(worst, named), 1e-3, t0, 120.0, {"rows": rows})


LAMBDA1_CASES = [(3, 0.0), (4, 0.75), (3, -1.0), (5, 2.2), (7, 5.0),
                 (10, -3.0), (3, 0.2), (4, 0.0), (6, 1.0), (8, -2.0)]


def check_lambda1(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    worst, rows = 0.0, []
    for n, gamma in LAMBDA1_CASES:
        p = ProblemParams(n, gamma)
        exact = lambda1_ball_oracle(compute_exponents(p).gap / 2)
        got = lambda1(p, default_eigen_grid(p, cfg.eigen_nodes)).value
        worst = max(worst, _rel(got, exact))
        rows.append((n, gamma, exact, got))
    pi2 = _rel(rows[0][3], math.pi**2)
    return _finish("lambda_1 oracle", {"oracle": worst < 1e-6, "pi^2": pi2 < 1e-6}, worst, 1e-6, t0, 60.0,
                   {"rows": rows})


def check_mass_properties(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    mono_lam = mono_rho = negative = True
    moduli = []
    for n, gamma in MASS_CASES:
        p = ProblemParams(n, gamma)
        lam1 = lambda1_ball_oracle(compute_exponents(p).gap / 2)
        ladder = lam1 * np.linspace(0.05, 0.9, 10)
        m = [interior_mass(p.with_(lam=l), check_coercive=False).mass for l in ladder]
        mono_lam &= bool(np.all(np.diff(m) > 0))
        # a larger ball has a larger mass; lam stays below lambda_1 of every ball on the ladder
        lam = 0.5 * lam1
        rhos = np.linspace(0.6, 1.0, 6)
        mr = [interior_mass(p.with_(lam=lam, ball_radius=r), check_coercive=False).mass for r in rhos]
        mono_rho &= bool(np.all(np.diff(mr) > 0))
        negative &= interior_mass(p).mass < 0
        base = 0.4 * lam1
        m0 = interior_mass(p.with_(lam=base)).mass
        ratios = [abs(interior_mass(p.with_(lam=base + d)).mass - m0) / d for d in (1e-2, 1e-3, 1e-4)]
        moduli.append(max(ratios) / min(ratios) - 1.0)
    lin = max(moduli)
    parts = {"monotone in lam": mono_lam, "monotone in rho": mono_rho,
             "linear modulus": lin < 0.05, "m(lam=0) < 0": bool(negative)}
    return _finish("mass properties", parts, lin, 0.05, t0, 60.0, {})


def check_high_dim_energy(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    p0 = ProblemParams(5, 0.5, 0.5)
    mu_rn = compute_mu_rn(p0)
    lam1 = lambda1(p0, default_eigen_grid(p0, cfg.eigen_nodes)).value
    best = {}
    for f in (0.1, 0.5, 1.0):
        p = p0.with_(lam=f * lam1)
        js = [energy_of_test_function(p, make_test_function(p, 2.0**-k)).energy for k in range(4, 15)]
        best[f] = min(js) / mu_rn - 1.0
    parts = {f"lam={f} lambda_1": v < 0 for f, v in best.items()}
    return _finish("test-function energy below mu_RN (gap >= 2)", parts, max(best.values()), 0.0, t0, 120.0,
                   {"relative excess": best})


SIGN_LAW_CASES = [(3, 0.1, 0.0), (3, 0.0, 1.0), (4, 0.5, 0.5)]


def check_sign_law(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    parts, ratios, rows = {}, [], []
    for n, gamma, s in SIGN_LAW_CASES:
        p = ProblemParams(n, gamma, s)
        ls = lambda_star_by_mass(p, cross_check=False).lambda_star
        mu = compute_mu_rn(p)
        slopes = {f: expansion_slope(p.with_(lam=f * ls), mu_rn=mu).slope for f in (0.5, 1.0, 1.2, 1.5)}
        m_lo = interior_mass(p.with_(lam=0.5 * ls)).mass
        m_hi = interior_mass(p.with_(lam=1.5 * ls)).mass
        ratio = abs(slopes[1.0]) / abs(slopes[1.2])
        tag = f"({n},{gamma},{s})"
        parts[f"{tag} sign at 0.5"] = np.sign(slopes[0.5]) == -np.sign(m_lo)
        parts[f"{tag} sign at 1.5"] = np.sign(slopes[1.5]) == -np.sign(m_hi)
        parts[f"{tag} ratio"] = ratio < 0.1
        ratios.append(ratio)
        rows.append((n, gamma, s, slopes))
    return _finish("sign law of the expansion", parts, max(ratios), 0.1, t0, 300.0, {"rows": rows})


GROUND_CASE = (3, 0.1, 0.0)
GROUND_LADDER = (0.5, 0.8, 1.0, 1.2, 1.5, 2.0)


def _ground_states(cfg: CheckConfig):
    p0 = ProblemParams(*GROUND_CASE)
    ls = lambda_star_by_mass(p0, cross_check=False).lambda_star
    states = {}
    for nodes in (cfg.eigen_nodes // 2, cfg.eigen_nodes):
        for f in GROUND_LADDER:
            p = p0.with_(lam=f * ls)
            states[(nodes, f)] = (p, ground_state(p, default_eigen_grid(p, nodes)))
    return p0, ls, states


def check_ground_state(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    """The concentration part refines the inner cut as well as the mesh."""
    t0 = time.perf_counter()
    p0, ls, states = _ground_states(cfg)
    mu_rn = compute_mu_rn(p0)
    fine = cfg.eigen_nodes
    mus = [states[(fine, f)][1].mu for f in GROUND_LADDER]
    nonincreasing = bool(np.all(np.diff(mus) <= 1e-9 * mu_rn))
    gaps = [(mu_rn - states[(nodes, 1.2)][1].mu) / mu_rn for nodes in (fine // 2, fine)]
    below = min(gaps) >= 1e-3
    stable = abs(gaps[0] - gaps[1]) < 0.1 * abs(gaps[1])
    # non-attainment at 0.8 lam*: the share of the constraint near the inner cut should tend to 1
    p = p0.with_(lam=0.8 * ls)
    scores = []
    for r0_frac, nodes in ((1e-6, fine), (1e-8, 2 * fine)):
        grid = make_grid(p.ball_radius, nodes, Grading.GEOMETRIC, r0=r0_frac * p.ball_radius)
        try:
            scores.append(ground_state(p, grid).concentration_score)
        except NonConvergence:
            scores.append(math.nan)
    concentrating = bool(scores[-1] > 0.9 and scores[-1] > scores[0])
    parts = {"mu nonincreasing": nonincreasing, "mu(1.2 lam*) below mu_RN": below,
             "stable under refinement": stable, "concentration at 0.8 lam*": concentrating}
    detail = {"mu": dict(zip(GROUND_LADDER, mus)), "relative gap at 1.2": gaps, "concentration": scores}
    return _finish("ground-state threshold behaviour", parts, min(gaps), 1e-3, t0, 600.0, detail)


def check_pohozaev(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    """Identity on the attained states (``lam >= lam*``) and a corruption detector."""
    t0 = time.perf_counter()
    p0, ls, states = _ground_states(cfg)
    worst, fired = 0.0, True
    for (nodes, f), (p, gs) in states.items():
        if f < 1.0:
            continue
        u = gs.profile
        worst = max(worst, pohozaev_residual(p, u))
        x = np.log(u.grid.nodes / u.grid.nodes[0])
        x /= x[-1]
        bad = RadialFunction(u.grid, u.values * (1 + 0.01 * np.sin(math.pi * x)), u.leading_power)
        fired &= pohozaev_residual(p, bad) > 1e-3
    return _finish("Pohozaev identity", {"residual": worst < 1e-3, "detector": fired}, worst, 1e-3, t0, 60.0, {})


ROBIN_POLES = (0.1, 0.3, 0.5, 0.7, 0.9)


def check_robin(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    grid = AxiGrid(cfg.axi_cells, cfg.axi_cells)
    raw = ext = 0.0
    for a in ROBIN_POLES:
        res = robin_mass_at(0.0, 0.0, a, grid)
        exact = images_robin_mass(a)
        raw = max(raw, _rel(res.raw[0], exact))
        ext = max(ext, _rel(res.robin_mass, exact))
    ls = lambda_star_merely_singular_3d(0.0, grid).lambda_star
    dev_ls = _rel(ls, math.pi**2 / 4)
    ladder_ok = True
    for gamma in (0.0, -0.5):
        lam1 = lambda1_ball_oracle(math.sqrt(0.25 - gamma))
        sups = [robin_sup(gamma, lam1 * k / 11, grid)[0] for k in range(1, 11)]
        ladder_ok &= bool(np.all(np.diff(sups) > 0))
    parts = {"images 2%": raw < 0.02, "images extrapolated 0.5%": ext < 0.005,
             "lambda* = pi^2/4": dev_ls < 0.02, "monotone ladder": ladder_ok}
    return _finish("Robin mass and merely singular threshold", parts, max(raw, dev_ls), 0.02, t0, 600.0,
                   {"images raw": raw, "images extrapolated": ext, "lambda*": ls})


GREEN_CASES = [(0.0, 0.0, 0.5), (-1.0, 0.0, 0.5), (-0.5, 2.0, 0.3), (0.0, 3.0, 0.8), (-1.0, 5.0, 0.6),
               (-0.25, 1.0, 0.2)]


def check_green_bounds(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    grid = AxiGrid(cfg.axi_cells, cfg.axi_cells)
    parts, worst = {}, 0.0
    for gamma, lam, a in GREEN_CASES:
        rep = green_bound_check(gamma, lam, a, grid, seed=cfg.seed)
        parts[f"({gamma},{lam},{a})"] = rep.passed
        worst = max(worst, rep.max_ratio)
    return _finish("Green function bounds", parts, worst, math.inf, t0, 300.0, {})


SUBSUPER_CASES = [(0.0, 0.5, Branch.PLUS, SolutionSign.SUPER), (0.0, 0.5, Branch.PLUS, SolutionSign.SUB),
                  (0.2, 1.0, Branch.MINUS, SolutionSign.SUPER), (0.2, 1.0, Branch.MINUS, SolutionSign.SUB),
                  (-1.0, 0.5, Branch.PLUS, SolutionSign.SUPER), (-1.0, 2.0, Branch.MINUS, SolutionSign.SUB),
                  (0.24, 0.3, Branch.PLUS, SolutionSign.SUB), (-0.5, 1.5, Branch.MINUS, SolutionSign.SUPER)]
ENTIRE_CASES = [(3, 0.0, 1.0, -0.3), (3, 0.2, 2.0, 0.5), (4, 0.75, 1.0, -1.0), (5, -1.0, 0.5, 0.1)]


def check_subsuper(cfg: CheckConfig = CheckConfig()) -> CheckResult:
    t0 = time.perf_counter()
    parts = {}
    for gamma, theta, branch, sign in SUBSUPER_CASES:
        rep = subsupersolution_check(ProblemParams(3, gamma), theta, branch, sign)
        parts[f"{sign.value} ({gamma},{theta},{branch.value})"] = rep.verified
    worst = max(entire_solution_fit(ProblemParams(n, g), u1, du1).residual for n, g, u1, du1 in ENTIRE_CASES)
    parts["two-coefficient fit"] = worst < 1e-10
    return _finish("sub/supersolutions and entire solutions", parts, worst, 1e-10, t0, 30.0, {})


ALL_CHECKS: dict[str, Callable[[CheckConfig], CheckResult]] = {
    "exponents": check_exponent_identities,
    "euler_mass": check_euler_mass,
    "bessel_mass": check_bessel_mass,
    "threshold": check_threshold_triple,
    "lambda1": check_lambda1,
    "mass_properties": check_mass_properties,
    "high_dim_energy": check_high_dim_energy,
    "sign_law": check_sign_law,
    "ground_state": check_ground_state,
    "pohozaev": check_pohozaev,
    "robin": check_robin,
    "green_bounds": check_green_bounds,
    "subsuper": check_subsuper,
}
