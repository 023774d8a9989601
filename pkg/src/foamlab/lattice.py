"""Lattice construction, invariants, enumeration and basis reduction in R^N.

Conventions:
- A lattice is the integer span of the columns of ``basis`` (full rank).
- "Coordinates" of a lattice vector are its integer coefficients in that
  column basis; "cartesian" means the vector itself.
- Everything is float64 with explicit tolerances; no exact arithmetic.

The catalog follows the standard constructions (Conway & Sloane, "Sphere
Packings, Lattices and Groups"): root lattices A_N and duals A_N*, the
checkerboard family D_N and its even extension D_N^+ (E8 at N = 8), the
planar hexagonal lattice, and the cubic family Z^N / FCC / BCC.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    EnumerationBudgetExceeded,
    SingularBasis,
    UnknownCatalogEntry,
)

# Hard cap on integer candidate vectors visited by one enumeration call.
ENUMERATION_BUDGET = 10_000_000

_MAX_ENUM_DIM = 8


@dataclass(frozen=True, eq=False)
class Lattice:
    """Full-rank lattice: columns of ``basis`` generate the group.

    ``gram`` is cached as basis^T basis and kept symmetric.
    Instances are immutable; all operations on them are pure functions.
    """

    dim: int
    basis: np.ndarray
    gram: np.ndarray


@dataclass(frozen=True, eq=False)
class ShortVectorSet:
    """Nonzero lattice vectors with norm <= radius.

    ``coeffs[i]`` are the integer coordinates of ``vectors[i]`` in the
    basis of the lattice the set was computed from. Closed under negation.
    """

    radius: float
    coeffs: np.ndarray
    vectors: np.ndarray
    norms: np.ndarray

    def __len__(self):
        return self.vectors.shape[0]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def make_lattice(basis) -> Lattice:
    """Build a Lattice from an N x N generator matrix (columns generate).

    Raises SingularBasis when |det| < 1e-10 * (max column norm)^N.
    """
    B = np.asarray(basis, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise SingularBasis("basis must be a square matrix")
    if not np.all(np.isfinite(B)):
        raise SingularBasis("basis entries must be finite")
    n = B.shape[0]
    if n < 2:
        raise DimensionMismatch("lattice dimension must be >= 2")
    colmax = float(np.linalg.norm(B, axis=0).max())
    det = float(np.linalg.det(B))
    if colmax == 0.0 or abs(det) < 1e-10 * colmax**n:
        raise SingularBasis(f"basis is singular (|det| = {abs(det):.3e})")
    B = _freeze(B.copy())
    G = B.T @ B
    G = _freeze((G + G.T) / 2.0)
    return Lattice(dim=n, basis=B, gram=G)


def determinant(L: Lattice) -> float:
    """|det(basis)|, the covolume d(G); invariant under basis change."""
    return abs(float(np.linalg.det(L.basis)))


def scale_lattice(L: Lattice, factor: float) -> Lattice:
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return make_lattice(L.basis * factor)


# ---------------------------------------------------------------------------
# basis reduction
# ---------------------------------------------------------------------------

def _reduce_with_transform(L: Lattice, max_sweeps: int = 200):
    """Greedy pairwise (Lagrange-style) reduction.

    Returns (B_reduced, T) with B_reduced = basis @ T, T integer unimodular.
    Each accepted step strictly shortens one generator, so the product of
    the norms never increases and the sweep terminates.
    """
    B = L.basis.copy()
    n = L.dim
    T = np.eye(n, dtype=np.int64)
    for _ in range(max_sweeps):
        order = np.argsort(np.linalg.norm(B, axis=0), kind="stable")
        B = B[:, order]
        T = T[:, order]
        changed = False
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                bj2 = float(B[:, j] @ B[:, j])
                mu = round(float(B[:, i] @ B[:, j]) / bj2)
                if mu == 0:
                    continue
                cand = B[:, i] - mu * B[:, j]
                if cand @ cand < (B[:, i] @ B[:, i]) * (1.0 - 1e-14):
                    B[:, i] = cand
                    T[:, i] = T[:, i] - mu * T[:, j]
                    changed = True
        if not changed:
            break
    order = np.argsort(np.linalg.norm(B, axis=0), kind="stable")
    return B[:, order], T[:, order]


def reduce_basis(L: Lattice):
    """Reduced basis of the same lattice plus the ratio prod|v_i| / d(G).

    The transform is unimodular, so the determinant is preserved; the
    reported ratio never exceeds the one of the input basis.
    """
    B, _ = _reduce_with_transform(L)
    ratio = float(np.prod(np.linalg.norm(B, axis=0))) / determinant(L)
    return make_lattice(B), ratio


# ---------------------------------------------------------------------------
# integer box enumeration
# ---------------------------------------------------------------------------

def _enumerate_ball(B, center, radius):
    """Integer rows k with |B @ k - center| <= radius.

    Sphere enumeration on the QR factorization of the (pre-reduced) basis:
    coefficients are fixed from the last coordinate down, pruning partial
    sums against the remaining squared radius. The number of candidates
    visited is charged against ENUMERATION_BUDGET.
    """
    n = B.shape[0]
    Q, R = np.linalg.qr(B)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    R = R * signs[:, None]
    Q = Q * signs[None, :]
    t = Q.T @ np.asarray(center, dtype=float)
    r2 = radius * radius

    K = np.zeros((1, 0), dtype=np.int64)
    acc2 = np.zeros(1)
    visited = 0
    for i in range(n - 1, -1, -1):
        s = K @ R[i, i + 1:] if K.shape[1] else np.zeros(len(K))
        rem = np.sqrt(np.maximum(r2 - acc2, 0.0))
        mid = (t[i] - s) / R[i, i]
        half = rem / R[i, i]
        lo = np.ceil(mid - half - 1e-12).astype(np.int64)
        hi = np.floor(mid + half + 1e-12).astype(np.int64)
        counts = np.maximum(hi - lo + 1, 0)
        total = int(counts.sum())
        visited += total
        if visited > ENUMERATION_BUDGET:
            raise EnumerationBudgetExceeded(
                f"sphere enumeration exceeded the {ENUMERATION_BUDGET:.0e} candidate budget"
            )
        if total == 0:
            return np.zeros((0, n), dtype=np.int64)
        idx = np.repeat(np.arange(len(counts)), counts)
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        ki = lo[idx] + (np.arange(total) - np.repeat(starts, counts))
        resid = R[i, i] * ki + s[idx] - t[i]
        acc2 = acc2[idx] + resid * resid
        K = np.column_stack([ki, K[idx]]) if K.shape[1] else ki[:, None]
        keep = acc2 <= r2 * (1.0 + 1e-12) + 1e-12
        K, acc2 = K[keep], acc2[keep]
    return K


def short_vectors(L: Lattice, radius: float) -> ShortVectorSet:
    """All nonzero lattice vectors with norm <= radius (+1e-9 slack).

    Exact enumeration: the basis is pre-reduced, then every integer
    coefficient vector inside the ball is visited, so nothing is missed.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if L.dim > _MAX_ENUM_DIM:
        raise DimensionTooLarge(f"short_vectors supports dim <= {_MAX_ENUM_DIM}")
    Br, T = _reduce_with_transform(L)
    cutoff = radius + 1e-9
    K = _enumerate_ball(Br, np.zeros(L.dim), cutoff)
    V = K @ Br.T
    norms = np.sqrt(np.einsum("ij,ij->i", V, V))
    mask = (norms <= cutoff) & (norms > 1e-12)
    coeffs, vectors, norms = K[mask], V[mask], norms[mask]
    coeffs = coeffs @ T.T  # back to coordinates in the original basis
    if len(norms):
        order = np.lexsort(tuple(coeffs[:, i] for i in range(L.dim - 1, -1, -1)) + (norms,))
        coeffs, vectors, norms = coeffs[order], vectors[order], norms[order]
    return ShortVectorSet(
        radius=float(radius),
        coeffs=_freeze(coeffs),
        vectors=_freeze(vectors),
        norms=_freeze(norms),
    )


def minimal_norm(L: Lattice) -> float:
    """lambda(G): norm of the shortest nonzero lattice vector."""
    Br, _ = _reduce_with_transform(L)
    r0 = float(np.linalg.norm(Br, axis=0).min())
    sv = short_vectors(L, r0)
    return float(sv.norms.min())


def inradius(L: Lattice) -> float:
    """rho(G) = lambda(G) / 2, the lattice packing radius."""
    return minimal_norm(L) / 2.0


def covering_radius(L: Lattice) -> float:
    """r(G): exact mode via the farthest Voronoi-cell vertex, dim <= 4."""
    if L.dim > 4:
        raise DimensionTooLarge("exact covering radius supports dim <= 4")
    from .tiling import voronoi_cell  # deferred: tiling depends on this module

    cell = voronoi_cell(L)
    return float(np.linalg.norm(cell.vertices, axis=1).max())


# ---------------------------------------------------------------------------
# closest points and relevant vectors
# ---------------------------------------------------------------------------

def closest_lattice_points(L: Lattice, point, tie_tol: float | None = None):
    """All lattice points at minimal distance from ``point``.

    Ties are kept within ``tie_tol`` (default 1e-9 scaled by lambda(G)).
    Near-misses just beyond the tolerance are not resolved silently; they
    simply stay excluded. Returns (points, coeffs) with coeffs in the
    original basis.
    """
    if L.dim > _MAX_ENUM_DIM:
        raise DimensionTooLarge(f"closest_lattice_points supports dim <= {_MAX_ENUM_DIM}")
    p = np.asarray(point, dtype=float)
    if p.shape != (L.dim,) or not np.all(np.isfinite(p)):
        raise ValueError("point must be a finite vector of matching dimension")
    if tie_tol is None:
        tie_tol = 1e-9 * max(1.0, minimal_norm(L))
    Br, T = _reduce_with_transform(L)
    Binv = np.linalg.inv(Br)
    coeffs, dists = _closest_coeffs(Br, Binv, p, tie_tol)
    points = coeffs @ Br.T
    coeffs = coeffs @ T.T
    return points, coeffs


def _closest_coeffs(B, Binv, target, tie_tol):
    """Coefficient rows of all lattice points nearest to target (w.r.t. B)."""
    w = Binv @ target
    k0 = np.rint(w)
    d0 = float(np.linalg.norm(B @ k0 - target))
    radius = d0 * (1.0 + 1e-12) + tie_tol + 1e-15
    coeffs = _enumerate_ball(B, target, radius)
    diffs = coeffs @ B.T - target
    dists = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    dmin = dists.min()
    sel = dists <= dmin + tie_tol
    coeffs, dists = coeffs[sel], dists[sel]
    order = np.lexsort(tuple(coeffs[:, i] for i in range(coeffs.shape[1] - 1, -1, -1)) + (dists,))
    return coeffs[order], dists[order]


def relevant_vectors(L: Lattice) -> ShortVectorSet:
    """Facet-defining (Voronoi-relevant) vectors of the lattice.

    Classical criterion: v is relevant iff +-v are the unique minima of
    the coset v + 2G. Each of the 2^N - 1 nonzero cosets of G/2G is
    tested with a closest-point search around -v/2, which keeps the
    enumeration tight even at dim 8.
    """
    if L.dim > _MAX_ENUM_DIM:
        raise DimensionTooLarge(f"relevant_vectors supports dim <= {_MAX_ENUM_DIM}")
    n = L.dim
    Br, T = _reduce_with_transform(L)
    Binv = np.linalg.inv(Br)
    tie_tol = 1e-9 * max(1.0, float(np.linalg.norm(Br, axis=0).min()))

    coeffs_out = []
    for c in product((0, 1), repeat=n):
        if not any(c):
            continue
        c = np.array(c, dtype=np.int64)
        target = -(Br @ c) / 2.0
        kset, _ = _closest_coeffs(Br, Binv, target, tie_tol)
        if kset.shape[0] != 2:
            continue
        u1 = c + 2 * kset[0]
        u2 = c + 2 * kset[1]
        if np.any(u1 + u2 != 0):  # minima of a coset come in +- pairs
            continue
        coeffs_out.append(u1)
        coeffs_out.append(u2)
    coeffs = np.asarray(coeffs_out, dtype=np.int64)
    vectors = coeffs @ Br.T
    coeffs = coeffs @ T.T
    norms = np.linalg.norm(vectors, axis=1)
    order = np.lexsort(tuple(coeffs[:, i] for i in range(n - 1, -1, -1)) + (norms,))
    coeffs, vectors, norms = coeffs[order], vectors[order], norms[order]
    return ShortVectorSet(
        radius=float(norms.max()) if len(norms) else 0.0,
        coeffs=_freeze(coeffs),
        vectors=_freeze(vectors),
        norms=_freeze(norms),
    )


# ---------------------------------------------------------------------------
# equivalence certificate
# ---------------------------------------------------------------------------

def lattice_equivalent(L1: Lattice, L2: Lattice, tol: float = 1e-6) -> bool:
    """One-sided similarity certificate (rotation + scale).

    Compares scale-normalized norm spectra up to radius 2*lambda and the
    normalized covolume. True means strong evidence of equivalence; False
    only means the spectra differ beyond tol.
    """
    if L1.dim != L2.dim:
        raise DimensionMismatch("lattices must share a dimension")
    lam1, lam2 = minimal_norm(L1), minimal_norm(L2)
    # compare both spectra below the same normalized cut; 1.95 sits in a
    # gap of every catalog spectrum (closest shells 1.915 and 2.0), so a
    # near-catalog lattice cannot have a shell split by the cut
    s1 = np.sort(short_vectors(L1, 2.0 * lam1).norms) / lam1
    s2 = np.sort(short_vectors(L2, 2.0 * lam2).norms) / lam2
    s1 = s1[s1 <= 1.95]
    s2 = s2[s2 <= 1.95]
    if len(s1) != len(s2):
        return False
    if np.max(np.abs(s1 - s2)) > tol:
        return False
    d1 = determinant(L1) / lam1**L1.dim
    d2 = determinant(L2) / lam2**L2.dim
    return abs(d1 - d2) <= tol * max(d1, d2)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

CATALOG_NAMES = ("z", "a", "astar", "d", "dplus", "e8", "hex", "fcc", "bcc")


def _simplex_frame(n: int):
    """Orthonormal frame of the hyperplane sum(x)=0 in R^(n+1).

    Fixed once and for all by Gram-Schmidt (QR) on the difference vectors
    e_i - e_{i+1}, with positive-diagonal sign convention, so catalog
    bases are reproducible across runs.
    """
    M = np.zeros((n + 1, n))
    for i in range(n):
        M[i, i] = 1.0
        M[i + 1, i] = -1.0
    Q, R = np.linalg.qr(M)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs, M


def _a_basis(n: int) -> np.ndarray:
    Q, M = _simplex_frame(n)
    return Q.T @ M


def _astar_basis(n: int) -> np.ndarray:
    # the dual lattice of A_N inside the hyperplane, in the same frame
    return np.linalg.inv(_a_basis(n)).T


def _d_basis(n: int) -> np.ndarray:
    B = np.zeros((n, n))
    B[0, 0] = -1.0
    B[1, 0] = -1.0
    B[0, 1] = 1.0
    B[1, 1] = -1.0
    for j in range(2, n):
        B[j - 1, j] = 1.0
        B[j, j] = -1.0
    return B


def _dplus_basis(n: int) -> np.ndarray:
    B = np.zeros((n, n))
    B[0, 0] = 2.0
    for j in range(1, n - 1):
        B[j - 1, j] = -1.0
        B[j, j] = 1.0
    B[:, n - 1] = 0.5
    return B


def catalog(name: str, dim: int | None = None) -> Lattice:
    """Named lattice constructor.

    Names (lowercase): z, a, astar, d, dplus, e8, hex, fcc, bcc.
    A_N and A_N* are returned full rank in dimension N through the fixed
    hyperplane frame. Published invariants (covolume, minimal norm,
    inradius, covering radius) are exercised by the test suite.
    """
    key = str(name).lower()
    if key not in CATALOG_NAMES:
        raise UnknownCatalogEntry(f"unknown catalog lattice {name!r}")
    fixed = {"hex": 2, "fcc": 3, "bcc": 3, "e8": 8}
    if key in fixed:
        if dim is not None and dim != fixed[key]:
            raise DimensionMismatch(f"{key} is only defined in dimension {fixed[key]}")
        dim = fixed[key]
    if dim is None:
        raise DimensionMismatch(f"catalog({key!r}) needs an explicit dimension")
    if dim < 2:
        raise DimensionMismatch("catalog lattices need dim >= 2")

    if key == "z":
        return make_lattice(np.eye(dim))
    if key == "hex":
        return make_lattice(np.array([[1.0, -0.5], [0.0, math.sqrt(3) / 2]]))
    if key == "fcc":
        return make_lattice(np.array([[-1.0, 1.0, 0.0], [-1.0, -1.0, 1.0], [0.0, 0.0, -1.0]]))
    if key == "bcc":
        return make_lattice(np.array([[2.0, 0.0, 1.0], [0.0, 2.0, 1.0], [0.0, 0.0, 1.0]]))
    if key == "a":
        return make_lattice(_a_basis(dim))
    if key == "astar":
        return make_lattice(_astar_basis(dim))
    if key == "d":
        return make_lattice(_d_basis(dim))
    if key in ("dplus", "e8"):
        if dim < 8 or dim % 2 != 0:
            raise DimensionMismatch("dplus needs an even dimension >= 8")
        return make_lattice(_dplus_basis(dim))
    raise UnknownCatalogEntry(name)


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------

def lattice_to_json_dict(L: Lattice) -> dict:
    return {"dim": L.dim, "basis": [list(row) for row in L.basis]}


def lattice_from_json_dict(data: dict) -> Lattice:
    basis = np.asarray(data["basis"], dtype=float)
    if "dim" in data and int(data["dim"]) != basis.shape[0]:
        raise DimensionMismatch("declared dim does not match basis shape")
    return make_lattice(basis)


def save_lattice(L: Lattice, path) -> None:
    with open(path, "w") as fh:
        json.dump(lattice_to_json_dict(L), fh, indent=2)


def load_lattice(path) -> Lattice:
    with open(path) as fh:
        return lattice_from_json_dict(json.load(fh))
