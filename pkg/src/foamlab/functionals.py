"""Perimeter-type energies and the isoperimetric ratio.

Classical perimeter is the facet-area sum. The nonlocal energies are
Monte Carlo estimates with exact radial integration:

- fractional s-perimeter: for x in the body, the kernel integral over
  the complement beyond the circumradius R(x) is analytic
  (|S^(N-1)| R^-s / s), and so is the part of the shell beyond the
  nearest facet's plane (an incomplete-Beta half-space term). Only the
  difference between the true complement and that half-space is
  importance-sampled with radial density ~ r^(-1-s); subtracting the
  half-space indicator as a control variate keeps the estimator's
  variance finite for every s in (0, 1), including s > 1/2 where the
  naive shell weight d(x)^-s has a divergent second moment.
- Riesz energy: pair kernel |x-y|^(alpha-N) sampled with radial density
  ~ r^(alpha-1) inside the circumscribed ball, again with constant
  per-sample weight.

Estimates are reproducible: batch b draws from the stream (seed, b), so
results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphaNotInRange, SNotInRange, ZeroInradius
from .polytope import Polytope, chebyshev_inradius, surface_area, volume

#: surface area of the relaxed Kelvin cell relative to the flat truncated
#: octahedron (Princen & Levinson, J. Colloid Interface Sci. 120, 1987)
KELVIN_PERIMETER_FACTOR = 0.998


@dataclass(frozen=True)
class MonteCarloConfig:
    """Sampling plan: total samples, RNG seed, and batch size for stderr."""

    samples: int
    seed: int
    batch: int = 0

    def __post_init__(self):
        if self.samples < 10_000:
            raise ValueError("MonteCarloConfig needs samples >= 10000")
        batch = self.batch if self.batch else self.samples // 20
        if self.samples % batch != 0 or self.samples // batch < 2:
            raise ValueError("batch must divide samples into >= 2 batches")
        object.__setattr__(self, "batch", batch)

    @property
    def n_batches(self) -> int:
        return self.samples // self.batch


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    samples_used: int

    def to_json_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "samples_used": self.samples_used}


@dataclass(frozen=True)
class RatioSpec:
    """Perimeter / inradius^exponent; exponent defaults to N - 1 (scale free)."""

    exponent: float | None = None
    normalization: str = "BY_INRADIUS"

    def __post_init__(self):
        if self.exponent is not None and self.exponent <= 0:
            raise ValueError("ratio exponent must be positive")
        if self.normalization != "BY_INRADIUS":
            raise ValueError("only BY_INRADIUS normalization is defined")


def classical_perimeter(P: Polytope) -> float:
    """Classical perimeter of a polytope: total facet (N-1)-measure."""
    return surface_area(P)


def _sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _sample_inside(P, count, rng):
    lo = P.vertices.min(axis=0)
    hi = P.vertices.max(axis=0)
    A = P.normals
    b = P.offsets
    out = []
    got = 0
    while got < count:
        draw = rng.random((max(4096, count), P.dim)) * (hi - lo) + lo
        keep = draw[np.all(draw @ A.T < b[None, :], axis=1)]
        out.append(keep)
        got += len(keep)
    return np.concatenate(out)[:count]


def _halfspace_shell_integral(d, R, s, n):
    """Exact integral of |y-x|^(-(n+s)) over {(y-x).nhat >= d, d <= |y-x| <= R}.

    Polar form: directions with cosine mu >= d/R contribute
    ((d/mu)^-s - R^-s)/s, integrated with the sphere's cosine density
    |S^(n-2)| (1-mu^2)^((n-3)/2) dmu, which is an incomplete Beta.
    """
    from scipy.special import betainc, beta as beta_fn

    ring = 2.0 * math.pi ** ((n - 1) / 2.0) / math.gamma((n - 1) / 2.0)
    mu0sq = np.clip((d / R) ** 2, 0.0, 1.0)
    a1, b1 = (s + 1.0) / 2.0, (n - 1.0) / 2.0
    t1 = 0.5 * beta_fn(a1, b1) * (1.0 - betainc(a1, b1, mu0sq))
    t0 = 0.5 * beta_fn(0.5, b1) * (1.0 - betainc(0.5, b1, mu0sq))
    return ring * (d**-s * t1 - R**-s * t0) / s


_BOUNDARY_MIX = 0.5  # fraction of samples proposed in the boundary layer
_RESIDUAL_DRAWS = 4  # shell indicator draws averaged per sample point


def _facet_sampler_data(P: Polytope):
    """Per-facet centroid, orthonormal frame, local bbox and measure."""
    from .polytope import _affine_frame, _face_measure

    data = []
    for f in P.facets:
        pts = P.vertices[list(f.vertex_ids)]
        c, frame = _affine_frame(pts)
        local = (pts - c) @ frame.T
        area = _face_measure(P, frozenset(f.vertex_ids))
        data.append((c, frame, local.min(axis=0), local.max(axis=0), area))
    return data


def _sample_on_facet(P, fd, count, rng):
    c, frame, lo, hi, _ = fd
    A = P.normals
    b = P.offsets
    out = []
    got = 0
    while got < count:
        u = rng.random((max(256, 2 * count), len(lo))) * (hi - lo) + lo
        q = c + u @ frame
        keep = q[np.all(q @ A.T <= b[None, :] + 1e-9, axis=1)]
        out.append(keep)
        got += len(keep)
    return np.concatenate(out)[:count]


def fractional_perimeter(P: Polytope, s: float, cfg: MonteCarloConfig) -> Estimate:
    """Unbiased MC estimate of the fractional s-perimeter of P, s in (0,1).

    Sample points are drawn from a mixture of the uniform density on P
    and a boundary-layer density ~ d^(-s) built by offsetting facet
    points inward; importance weights then stay bounded even though the
    integrand diverges like d(x)^(-s) at the boundary.
    """
    if not 0.0 < s < 1.0:
        raise SNotInRange(f"s = {s} outside (0, 1)")
    from scipy.special import beta as beta_fn

    n = P.dim
    A = P.normals
    b = P.offsets
    V = P.vertices
    vol = volume(P)
    omega = _sphere_area(n)
    fdata = _facet_sampler_data(P)
    areas = np.array([fd[4] for fd in fdata])
    per = float(areas.sum())
    t_cap = chebyshev_inradius(P)[0]
    beta = _BOUNDARY_MIX

    # the layer 0 <= d(x) < t_floor is below fp resolution for sampling; its
    # contribution is the flat half-space integral, exact up to O(t_floor)
    t_floor = 1e-12 * t_cap
    ring = 2.0 * math.pi ** ((n - 1) / 2.0) / math.gamma((n - 1) / 2.0)
    k_halfspace = ring * 0.5 * beta_fn((s + 1.0) / 2.0, (n - 1.0) / 2.0) / s
    layer_term = per * k_halfspace * t_floor ** (1.0 - s) / (1.0 - s)

    means = []
    for bi in range(cfg.n_batches):
        rng = np.random.default_rng([cfg.seed, bi])
        m_bdry = int(round(beta * cfg.batch))
        m_unif = cfg.batch - m_bdry
        X_u = _sample_inside(P, m_unif, rng)
        pick = rng.choice(len(fdata), size=m_bdry, p=areas / per)
        Q = np.empty((m_bdry, n))
        for i in range(len(fdata)):
            rows = np.nonzero(pick == i)[0]
            if len(rows):
                Q[rows] = _sample_on_facet(P, fdata[i], len(rows), rng)
        # layer depth density ~ t^-s truncated to [t_floor, t_cap]; the floor
        # keeps x distinguishable from its facet in floating point
        z_norm = t_cap ** (1.0 - s) - t_floor ** (1.0 - s)
        t = (t_floor ** (1.0 - s) + rng.random(m_bdry) * z_norm) ** (1.0 / (1.0 - s))
        X_b = Q - t[:, None] * A[pick]
        X = np.concatenate([X_u, X_b])

        slack = b[None, :] - X @ A.T
        in_p = np.all(slack >= 0.0, axis=1) & (slack.min(axis=1) >= t_floor)
        # mixture density: uniform part + sum of per-facet layer densities,
        # a route counting only where the plane projection hits its facet
        proj = X[:, None, :] + slack[:, :, None] * A[None, :, :]
        on_facet = np.all(
            np.einsum("xfn,gn->xfg", proj, A) <= b[None, None, :] + 1e-9, axis=2
        )
        route = (slack >= 0.5 * t_floor) & (slack <= t_cap * (1 + 1e-12)) & on_facet
        tt = np.where(route, slack, 1.0)
        layers = np.where(route, (1.0 - s) * tt ** (-s) / z_norm, 0.0)
        g = (1.0 - beta) / vol * in_p + beta * layers.sum(axis=1) / per
        g = np.maximum(g, 1e-300)

        near = slack.argmin(axis=1)
        d = np.maximum(slack.min(axis=1), 1e-15)
        diff = X[:, None, :] - V[None, :, :]
        R = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).max(axis=1)
        far = omega * R**-s / s
        half = _halfspace_shell_integral(d, R, s, n)
        C = (d**-s - R**-s) / s
        resid = np.zeros(len(X))
        for _ in range(_RESIDUAL_DRAWS):
            u = rng.random(len(X))
            r = (d**-s - u * (d**-s - R**-s)) ** (-1.0 / s)
            theta = rng.normal(size=(len(X), n))
            theta /= np.linalg.norm(theta, axis=1, keepdims=True)
            Y = X + r[:, None] * theta
            outside = np.any(Y @ A.T > b[None, :], axis=1)
            beyond_near = np.einsum("ij,ij->i", Y - X, A[near]) > d
            resid += np.maximum(outside.astype(float) - beyond_near.astype(float), 0.0)
        resid /= _RESIDUAL_DRAWS
        inner = far + half + omega * C * resid
        means.append(layer_term + float(np.mean(np.where(in_p, inner / g, 0.0))))
    means = np.array(means)
    return Estimate(
        value=float(means.mean()),
        stderr=float(means.std(ddof=1) / math.sqrt(len(means))),
        samples_used=cfg.samples,
    )


def riesz_energy(P: Polytope, alpha: float, cfg: MonteCarloConfig) -> Estimate:
    """Unbiased MC estimate of int_P int_P |x-y|^(alpha-N), 0 < alpha < N."""
    n = P.dim
    if not 0.0 < alpha < n:
        raise AlphaNotInRange(f"alpha = {alpha} outside (0, {n})")
    A = P.normals
    b = P.offsets
    V = P.vertices
    vol = volume(P)
    omega = _sphere_area(n)

    means = []
    for bi in range(cfg.n_batches):
        rng = np.random.default_rng([cfg.seed, bi])
        X = _sample_inside(P, cfg.batch, rng)
        diff = X[:, None, :] - V[None, :, :]
        R = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).max(axis=1)
        u = rng.random(cfg.batch)
        r = R * u ** (1.0 / alpha)
        theta = rng.normal(size=(cfg.batch, n))
        theta /= np.linalg.norm(theta, axis=1, keepdims=True)
        Y = X + r[:, None] * theta
        inside = np.all(Y @ A.T <= b[None, :], axis=1)
        means.append(float(np.mean(vol * omega * (R**alpha / alpha) * inside)))
    means = np.array(means)
    return Estimate(
        value=float(means.mean()),
        stderr=float(means.std(ddof=1) / math.sqrt(len(means))),
        samples_used=cfg.samples,
    )


def iso_ratio(P: Polytope, spec: RatioSpec | None = None) -> float:
    """Perimeter over the largest-inscribed-ball radius to the given power.

    With the default exponent N - 1 the ratio is scale invariant in every
    dimension; pass exponent=2 explicitly for the three-dimensional form
    Per / rho^2 regardless of N.
    """
    spec = spec or RatioSpec()
    rho, _ = chebyshev_inradius(P)
    if rho <= 1e-12:
        raise ZeroInradius("polytope has no inscribed ball")
    expo = spec.exponent if spec.exponent is not None else P.dim - 1
    return classical_perimeter(P) / rho**expo


@dataclass(frozen=True)
class KelvinBoundReport:
    """Ratio comparison ruling out the relaxed Kelvin cell.

    The Kelvin cell has the published perimeter factor of the truncated
    octahedron and at most its inradius, so factor * I(trunc oct) lower
    bounds its ratio; the bound staying above I(rhombic dodecahedron)
    is the verdict.
    """

    trunc_oct_ratio: float
    rhombic_dodec_ratio: float
    kelvin_factor: float
    kelvin_lower_bound: float
    bound_exceeds_rd: bool
    trunc_oct_exceeds_rd: bool

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def kelvin_bound_check() -> KelvinBoundReport:
    """Evaluate I(truncated octahedron), I(rhombic dodecahedron) and the
    Kelvin-cell lower bound 0.998 * I(T)."""
    from .lattice import catalog
    from .tiling import voronoi_cell

    i_t = iso_ratio(voronoi_cell(catalog("bcc")))
    i_rd = iso_ratio(voronoi_cell(catalog("fcc")))
    bound = KELVIN_PERIMETER_FACTOR * i_t
    return KelvinBoundReport(
        trunc_oct_ratio=i_t,
        rhombic_dodec_ratio=i_rd,
        kelvin_factor=KELVIN_PERIMETER_FACTOR,
        kelvin_lower_bound=bound,
        bound_exceeds_rd=bool(bound > i_rd),
        trunc_oct_exceeds_rd=bool(i_t > i_rd),
    )
