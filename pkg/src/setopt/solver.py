"""Outer iteration: quasi-Newton and steepest-descent solves with cone Armijo
line search, stopping tests, and per-iteration tracing.

Both methods share one loop; steepest descent fixes every subproblem matrix
at the identity and performs no curvature updates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import cone as cone_mod
from . import direction as direction_mod
from . import problem as problem_mod
from . import setorder as setorder_mod
from .cone import ConeSpec
from .direction import HessianStore
from .errors import LineSearchFailure, SetoptError
from .problem import ProblemSpec
from .setorder import PartitionElement

METHODS = ("quasi_newton", "steepest_descent")

CONVERGED = "Converged"
MAX_ITERATIONS = "MaxIterations"
LINE_SEARCH_FAILURE = "LineSearchFailure"
NUMERICAL_ERROR = "NumericalError"

# F(x) snapshots are recorded only when the image is at most this many floats
IMAGE_SNAPSHOT_LIMIT = 512


@dataclass
class SolverConfig:
    beta: float = 0.5
    nu: float = 0.6
    eps_stop: float = 1e-3
    max_iter: int = 100
    max_backtracks: int = 60
    tol_sub: float = 1e-10
    tol_stat: float = 1e-8
    tol_group: float = 1e-8
    tol_order: float = 0.0
    tol_armijo: float = 1e-12
    c_curv: float = 1e-8
    max_inner: int = 500
    method: str = "quasi_newton"
    seed: int = 0
    trace_images: bool = False

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if self.eps_stop <= 0.0:
            raise ValueError(f"eps_stop must be positive, got {self.eps_stop}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")


@dataclass
class IterateRecord:
    k: int
    x: np.ndarray
    images: Optional[np.ndarray]      # F(x) snapshot, size-gated
    min_indices: tuple
    w: int
    partition_count: int
    a: tuple
    u: np.ndarray
    u_norm: float
    phi: float
    t: float                          # accepted step (0 on the terminal record)
    backtracks: int
    varsigma: float
    gap: float
    bfgs_skips: int
    max_jac_norm: float
    millis: float


@dataclass
class IterateTrace:
    problem: str
    method: str
    records: list = field(default_factory=list)
    status: str = ""
    message: str = ""
    x_final: Optional[np.ndarray] = None
    store: Optional[HessianStore] = None

    @property
    def iterations(self) -> int:
        return len(self.records)


def armijo_backtrack(ps: ProblemSpec, c: ConeSpec, x, a: PartitionElement, u,
                     jacobians, cfg: SolverConfig):
    """Smallest backtrack count q such that t = nu^q satisfies the cone
    Armijo inequality for every selected component."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    sel = np.asarray(a.a, dtype=int) - 1
    f_sel = problem_mod.eval_F(ps, x)[sel]             # (w, m)
    slopes = jacobians @ u                             # (w, m)
    for q in range(cfg.max_backtracks + 1):
        t = cfg.nu ** q
        trial = problem_mod.eval_F(ps, x + t * u)[sel]
        rhs = f_sel + cfg.beta * t * slopes
        diff = (rhs - trial) @ c.A.T                   # (w, Q)
        ok = np.all(diff >= -cfg.tol_armijo, axis=1)
        if np.all(ok):
            return t, q
    bad = int(np.flatnonzero(~ok)[0]) + 1
    raise LineSearchFailure(
        f"no Armijo step within {cfg.max_backtracks} backtracks "
        f"(component j={bad} of the selector)", violating_component=bad)


def run(ps: ProblemSpec, x0, cfg: SolverConfig) -> IterateTrace:
    """Execute the main loop from x0 and record a full iterate trace."""
    x = np.asarray(x0, dtype=float).ravel().copy()
    if x.shape[0] != ps.n:
        raise ValueError(f"x0 has length {x.shape[0]}, expected {ps.n}")
    sc = problem_mod.scalarize(ps)
    c = ps.cone
    qn = cfg.method == "quasi_newton"
    store = direction_mod.init_store(ps.n, ps.p, c.Q) if qn else None
    trace = IterateTrace(problem=ps.name, method=cfg.method, store=store)
    warm: dict = {}
    snapshot = cfg.trace_images or ps.p * ps.m <= IMAGE_SNAPSHOT_LIMIT

    try:
        for k in range(cfg.max_iter):
            tick = time.perf_counter()
            F = problem_mod.eval_F(ps, x)
            ms = setorder_mod.analyze(c, F, cfg.tol_order, cfg.tol_group)
            sol = direction_mod.solve_subproblem(
                sc, store, x, ms, tol_sub=cfg.tol_sub, max_inner=cfg.max_inner, warm=warm)
            u_norm = float(np.linalg.norm(sol.u))
            varsig = cone_mod.varsigma(c, F)
            jac_all = problem_mod.eval_jacobians(ps, x)
            max_jac = float(max(np.linalg.norm(J, 2) for J in jac_all))
            rec = IterateRecord(
                k=k, x=x.copy(), images=F.copy() if snapshot else None,
                min_indices=ms.minimal_indices, w=ms.w,
                partition_count=ms.partition_count(), a=sol.a.a,
                u=sol.u.copy(), u_norm=u_norm, phi=sol.phi, t=0.0,
                backtracks=0, varsigma=varsig, gap=sol.gap, bfgs_skips=0,
                max_jac_norm=max_jac, millis=0.0)

            if u_norm < cfg.eps_stop:
                rec.millis = (time.perf_counter() - tick) * 1e3
                trace.records.append(rec)
                trace.status = CONVERGED
                break

            jac_sel = jac_all[np.asarray(sol.a.a, dtype=int) - 1]
            t, q = armijo_backtrack(ps, c, x, sol.a, sol.u, jac_sel, cfg)
            x_new = x + t * sol.u
            skips = 0
            if qn:
                grads_old = sc.gradients(x)
                grads_new = sc.gradients(x_new)
                report = direction_mod.bfgs_update(
                    store, x_new - x, grads_new - grads_old, cfg.c_curv)
                skips = len(report.skipped)
            rec.t = t
            rec.backtracks = q
            rec.bfgs_skips = skips
            rec.millis = (time.perf_counter() - tick) * 1e3
            trace.records.append(rec)
            x = x_new
        else:
            trace.status = MAX_ITERATIONS
    except LineSearchFailure as exc:
        trace.status = LINE_SEARCH_FAILURE
        trace.message = str(exc)
    except SetoptError as exc:
        trace.status = NUMERICAL_ERROR
        trace.message = str(exc)

    trace.x_final = x.copy()
    return trace


@dataclass
class StationarityReport:
    phi: float
    u_norm: float
    min_equals_wmin: bool
    w_locally_constant: Optional[bool]   # heuristic 8-point probe; None if n unsupported
    w: int


def stationarity_report(ps: ProblemSpec, x, store: Optional[HessianStore],
                        cfg: SolverConfig, probe_radius: float = 1e-4) -> StationarityReport:
    """Terminal diagnostics: descent certificate and a regularity probe."""
    x = np.asarray(x, dtype=float).ravel()
    sc = problem_mod.scalarize(ps)
    c = ps.cone
    F = problem_mod.eval_F(ps, x)
    ms = setorder_mod.analyze(c, F, cfg.tol_order, cfg.tol_group)
    sol = direction_mod.solve_subproblem(sc, store, x, ms,
                                         tol_sub=cfg.tol_sub, max_inner=cfg.max_inner)
    min_eq_wmin = set(ms.minimal_indices) == set(ms.weakly_minimal_indices)

    # Heuristic: compare w at 8 deterministic points on a small sphere.
    rng = np.random.default_rng(cfg.seed)
    same = True
    for _ in range(8):
        d = rng.standard_normal(ps.n)
        d = d / np.linalg.norm(d)
        try:
            probe = setorder_mod.analyze(c, problem_mod.eval_F(ps, x + probe_radius * d),
                                         cfg.tol_order, cfg.tol_group)
        except SetoptError:
            same = None
            break
        if probe.w != ms.w:
            same = False
            break
    return StationarityReport(phi=sol.phi, u_norm=float(np.linalg.norm(sol.u)),
                              min_equals_wmin=min_eq_wmin, w_locally_constant=same, w=ms.w)


def direction_bound(trace: IterateTrace, c: ConeSpec) -> Optional[float]:
    """Post-hoc bound (2*C*L)/rho on ||u_k|| from the run's own constants."""
    if trace.store is None or not trace.records:
        return None
    C = max(r.max_jac_norm for r in trace.records)
    L = c.lipschitz
    rho = trace.store.min_eigenvalue()
    if rho <= 0.0:
        return None
    return 2.0 * C * L / rho
