"""Derivative-free search for lattices whose Voronoi cell minimizes the
perimeter-per-inradius ratio.

The search space is the Gram matrix, parametrized by the N(N+1)/2
entries of its lower-triangular Cholesky factor; rotations drop out and
the overall scale is gauge-fixed by renormalizing the inradius to 1 at
every evaluation. Nelder-Mead per restart, since the cell combinatorics
(and hence the objective's derivative) jumps at Gram-matrix walls where
the relevant-vector set changes.

This explores an upper bound only: cells are restricted to Voronoi
cells, while the true minimizers of the underlying problem can have
curved, non-convex boundaries.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import AllRestartsFailed, DegenerateLattice, FoamLabError
from .functionals import classical_perimeter
from .lattice import Lattice, catalog, inradius, lattice_equivalent, make_lattice, scale_lattice
from .tiling import voronoi_cell

PENALTY = 1e9

FCC_RATIO = 16.970562748477143  # 12 sqrt 2
HEX_RATIO = 6.928203230275509  # 4 sqrt 3


def normalize_to_inradius(L: Lattice, rho0: float = 1.0) -> Lattice:
    """Pure rescaling so that the packing inradius equals rho0."""
    if rho0 <= 0:
        raise ValueError("target inradius must be positive")
    return scale_lattice(L, rho0 / inradius(L))


def objective(L: Lattice, condition_cap: float = 1e6) -> float:
    """Perimeter of the Voronoi cell at inradius 1; scale and rotation free."""
    if np.linalg.cond(L.gram) > condition_cap:
        raise DegenerateLattice("Gram condition number exceeds the cap")
    return classical_perimeter(voronoi_cell(normalize_to_inradius(L, 1.0)))


def _theta_to_lattice(theta: np.ndarray, dim: int) -> Lattice:
    low = np.zeros((dim, dim))
    low[np.tril_indices(dim)] = theta
    return make_lattice(low.T)


def _lattice_to_theta(L: Lattice) -> np.ndarray:
    low = np.linalg.cholesky(L.gram)
    return low[np.tril_indices(L.dim)]


def _random_start(dim: int, rng) -> Lattice:
    while True:
        A = rng.normal(size=(dim, dim))
        det = abs(np.linalg.det(A))
        if det > 1e-3:
            return make_lattice(A / det ** (1.0 / dim))


@dataclass(frozen=True)
class OptimizerConfig:
    dim: int
    restarts: int = 10
    seed: int = 0
    max_iters: int = 600
    simplex_tol: float = 1e-10
    initial: tuple = ()
    condition_cap: float = 1e6

    def __post_init__(self):
        if self.dim not in (2, 3, 4):
            raise ValueError("optimizer supports dim 2, 3, 4")
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if self.condition_cap <= 1:
            raise ValueError("condition cap must exceed 1")


@dataclass(frozen=True)
class RestartResult:
    index: int
    start: str
    best_ratio: float
    best_theta: np.ndarray
    evaluations: int
    trace: np.ndarray  # (k, 2) rows of (evaluation index, best-so-far ratio)


@dataclass(frozen=True)
class OptimizationReport:
    config: OptimizerConfig
    best_basis: np.ndarray
    best_gram: np.ndarray
    best_ratio: float
    restarts: tuple
    equivalence: dict
    flags: tuple
    wall_time_s: float

    @property
    def best_lattice(self) -> Lattice:
        return make_lattice(self.best_basis)

    def to_json_dict(self) -> dict:
        return {
            "dim": self.config.dim,
            "seed": self.config.seed,
            "restarts": self.config.restarts,
            "best_ratio": self.best_ratio,
            "best_basis": self.best_basis.tolist(),
            "best_gram": self.best_gram.tolist(),
            "per_restart": [
                {
                    "index": r.index,
                    "start": r.start,
                    "best_ratio": r.best_ratio,
                    "evaluations": r.evaluations,
                }
                for r in self.restarts
            ],
            "equivalence": self.equivalence,
            "flags": list(self.flags),
            "wall_time_s": self.wall_time_s,
            "note": "Voronoi-restricted upper-bound search; non-Voronoi fundamental domains are outside this parametrization",
        }


def _resolve_start(spec, dim: int, rng) -> tuple[str, Lattice]:
    if spec is None:
        return "random", _random_start(dim, rng)
    if isinstance(spec, Lattice):
        return "given", spec
    name = str(spec)
    return name, catalog(name, dim)


def _run_restart(idx: int, cfg: OptimizerConfig, start_spec) -> RestartResult:
    rng = np.random.default_rng([cfg.seed, idx])
    label, L0 = _resolve_start(start_spec, cfg.dim, rng)
    theta0 = _lattice_to_theta(L0)

    evals = [0]
    best = [np.inf]
    best_theta = [theta0]
    trace = []

    def f(theta):
        evals[0] += 1
        try:
            val = objective(_theta_to_lattice(theta, cfg.dim), cfg.condition_cap)
        except FoamLabError:
            val = PENALTY
        if val < best[0]:
            best[0] = val
            best_theta[0] = np.array(theta)
            trace.append((evals[0], val))
        return val

    opts = {
        "maxiter": cfg.max_iters,
        "xatol": cfg.simplex_tol,
        "fatol": cfg.simplex_tol,
        "adaptive": True,
    }
    res = minimize(f, theta0, method="Nelder-Mead", options=opts)
    # polish from the incumbent with a fresh simplex
    minimize(f, res.x, method="Nelder-Mead", options=opts)
    return RestartResult(
        index=idx,
        start=label,
        best_ratio=best[0],
        best_theta=best_theta[0],
        evaluations=evals[0],
        trace=np.array(trace) if trace else np.zeros((0, 2)),
    )


def optimize(cfg: OptimizerConfig) -> OptimizationReport:
    """Multi-restart Nelder-Mead over Cholesky factors; deterministic per seed."""
    t_start = time.time()
    starts = list(cfg.initial) + [None] * max(0, cfg.restarts - len(cfg.initial))
    starts = starts[: cfg.restarts]

    workers = int(os.environ.get("FOAMLAB_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: _run_restart(i, cfg, starts[i]), range(cfg.restarts)))
    else:
        results = [_run_restart(i, cfg, starts[i]) for i in range(cfg.restarts)]

    finite = [r for r in results if r.best_ratio < PENALTY]
    if not finite:
        raise AllRestartsFailed("no restart produced a finite ratio")
    winner = min(finite, key=lambda r: r.best_ratio)
    best_val = winner.best_ratio
    best_lattice = normalize_to_inradius(
        _theta_to_lattice(winner.best_theta, cfg.dim), 1.0
    )

    names = {2: ("hex", "z", "astar"), 3: ("fcc", "bcc", "z", "astar"), 4: ("d", "z", "astar")}
    equivalence = {}
    for name in names[cfg.dim]:
        try:
            equivalence[name] = bool(
                lattice_equivalent(best_lattice, catalog(name, cfg.dim), tol=1e-2)
            )
        except FoamLabError:
            equivalence[name] = False

    flags = []
    if cfg.dim == 3 and best_val < FCC_RATIO - 1e-3:
        flags.append("FCC_CONJECTURE_COUNTEREXAMPLE")
    if cfg.dim == 2 and best_val < HEX_RATIO - 1e-3:
        flags.append("HEX_OPTIMUM_UNDERCUT")

    return OptimizationReport(
        config=cfg,
        best_basis=best_lattice.basis.copy(),
        best_gram=best_lattice.gram.copy(),
        best_ratio=float(best_val),
        restarts=tuple(results),
        equivalence=equivalence,
        flags=tuple(flags),
        wall_time_s=time.time() - t_start,
    )


@dataclass(frozen=True)
class PerturbationReport:
    base_ratio: float
    min_ratio: float
    mean_ratio: float
    trials: int
    improved: bool
    n_improved: int

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def perturb_test(L: Lattice, eps: float, trials: int, seed: int = 0) -> PerturbationReport:
    """Evaluate the objective on random Cholesky perturbations of size eps.

    Improvement means beating the base ratio by more than 1e-9; with
    eps = 0 every trial reproduces the base lattice exactly.
    """
    low = np.linalg.cholesky(L.gram)
    base = objective(make_lattice(low.T))
    rng = np.random.default_rng([seed])
    scale = np.linalg.norm(low)
    values = []
    for _ in range(trials):
        H = np.tril(rng.normal(size=low.shape))
        hn = np.linalg.norm(H)
        step = (eps * scale / hn) * H if hn > 0 else 0.0 * H
        try:
            values.append(objective(make_lattice((low + step).T)))
        except FoamLabError:
            values.append(PENALTY)
    values = np.array(values)
    finite = values[values < PENALTY]
    improved = bool(finite.min() < base - 1e-9) if len(finite) else False
    return PerturbationReport(
        base_ratio=float(base),
        min_ratio=float(finite.min()) if len(finite) else float("inf"),
        mean_ratio=float(finite.mean()) if len(finite) else float("inf"),
        trials=trials,
        improved=improved,
        n_improved=int((finite < base - 1e-9).sum()),
    )
