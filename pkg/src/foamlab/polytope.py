"""Convex polytopes from half-space data: vertices, facets, measures.

Vertex enumeration is combinatorial: every N-subset of half-space
boundaries is intersected, feasible solutions are deduplicated at an
absolute tolerance, and facet incidence is assembled from tight
constraints. This is deliberately simple; it is exact and fast enough
for cells with <= 30 facets in dimension <= 4.

Facet measures use recursive pyramid decomposition with a fan from the
face centroid, so volume and surface area need no external hull code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from .errors import (
    DegenerateFacet,
    EmptyIntersection,
    LPFailure,
    TooManyHalfSpaces,
    Unbounded,
    UnsupportedFormatForDim,
)

_RANK_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """Points x with x . normal <= offset; normal stored as a unit vector."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        nv = float(np.linalg.norm(n))
        if not np.isfinite(nv) or nv < 1e-14 or not np.isfinite(self.offset):
            raise DegenerateFacet("half-space needs a nonzero normal and finite offset")
        n = n / nv
        n.flags.writeable = False
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset) / nv)


@dataclass(frozen=True, eq=False)
class Facet:
    halfspace: HalfSpace
    vertex_ids: tuple


@dataclass(frozen=True, eq=False)
class Polytope:
    dim: int
    vertices: np.ndarray
    facets: tuple
    bounded: bool = True

    @property
    def normals(self) -> np.ndarray:
        return np.array([f.halfspace.normal for f in self.facets])

    @property
    def offsets(self) -> np.ndarray:
        return np.array([f.halfspace.offset for f in self.facets])


def contains(P: Polytope, points, tol: float = 1e-9):
    """Boolean mask: which points satisfy every facet inequality (<= tol slack)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    mask = np.ones(len(pts), dtype=bool)
    for f in P.facets:
        mask &= pts @ f.halfspace.normal <= f.halfspace.offset + tol
    return mask if np.asarray(points).ndim > 1 else bool(mask[0])


def _assert_bounded(A, b):
    for j in range(A.shape[1]):
        for sign in (1.0, -1.0):
            c = np.zeros(A.shape[1])
            c[j] = -sign
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * A.shape[1], method="highs")
            if res.status == 3:
                raise Unbounded("half-space intersection has a recession direction")
            if res.status == 2:
                raise EmptyIntersection("half-space intersection is empty")
            if res.status != 0:
                raise LPFailure(f"boundedness LP failed with status {res.status}")


def halfspace_intersection(halfspaces, tol: float = 1e-9, check_bounded: bool = True) -> Polytope:
    """Bounded intersection of half-spaces as a vertex/facet Polytope.

    Combinatorial N-subset enumeration with dedup at ``tol`` (absolute,
    intended for bodies of unit scale). Redundant half-spaces, those
    whose tight vertex set is not (N-1)-dimensional, are dropped.
    """
    hs = list(halfspaces)
    if not hs:
        raise EmptyIntersection("no half-spaces given")
    n = len(hs[0].normal)
    m = len(hs)
    if n > 4 and m > 30:
        raise TooManyHalfSpaces("enumeration supports dim <= 4 or at most 30 half-spaces")
    if math.comb(m, n) > 2_000_000:
        raise TooManyHalfSpaces(f"C({m},{n}) intersection subsets is beyond budget")

    A = np.array([h.normal for h in hs])
    b = np.array([h.offset for h in hs])
    if check_bounded:
        _assert_bounded(A, b)

    combos = np.array(list(combinations(range(m), n)), dtype=np.intp)
    mats = A[combos]
    dets = np.linalg.det(mats)
    good = np.abs(dets) > 1e-9
    xs = np.linalg.solve(mats[good], b[combos[good]][:, :, None])[:, :, 0]
    feasible = np.all(xs @ A.T <= b[None, :] + tol, axis=1)
    cands = xs[feasible]
    if len(cands) == 0:
        raise EmptyIntersection("no vertex satisfies all half-spaces")

    verts: list[np.ndarray] = []
    for x in cands:
        if not verts:
            verts.append(x)
            continue
        d2 = np.einsum("ij,ij->i", np.array(verts) - x, np.array(verts) - x)
        if d2.min() > tol * tol:
            verts.append(x)
    V = np.array(verts)
    order = np.lexsort(tuple(np.round(V[:, i] / tol) for i in range(n - 1, -1, -1)))
    V = V[order]

    facets = []
    for h in hs:
        tight = np.nonzero(np.abs(V @ h.normal - h.offset) <= tol)[0]
        if len(tight) < n:
            continue
        if _affine_rank(V[tight]) == n - 1:
            facets.append(Facet(halfspace=h, vertex_ids=tuple(int(i) for i in tight)))
    if len(facets) < n + 1:
        raise DegenerateFacet("fewer than dim+1 proper facets; input is degenerate")
    V = np.ascontiguousarray(V)
    V.flags.writeable = False
    return Polytope(dim=n, vertices=V, facets=tuple(facets), bounded=True)


# ---------------------------------------------------------------------------
# affine frames and face measures
# ---------------------------------------------------------------------------

def _affine_frame(pts):
    """(centroid, orthonormal rows spanning the affine hull)."""
    pts = np.asarray(pts, dtype=float)
    c = pts.mean(axis=0)
    X = pts - c
    if len(pts) == 1:
        return c, np.zeros((0, pts.shape[1]))
    _, S, Vt = np.linalg.svd(X, full_matrices=False)
    cut = max(_RANK_TOL * (S[0] if len(S) else 0.0), 1e-12)
    rank = int((S > cut).sum())
    return c, Vt[:rank]


def _affine_rank(pts) -> int:
    return _affine_frame(pts)[1].shape[0]


def _polygon_area(local) -> float:
    """Area of a convex polygon given 2D coordinates of its vertices."""
    c = local.mean(axis=0)
    rel = local - c
    order = np.argsort(np.arctan2(rel[:, 1], rel[:, 0]))
    rel = rel[order]
    nxt = np.roll(rel, -1, axis=0)
    return 0.5 * float(np.abs(rel[:, 0] * nxt[:, 1] - rel[:, 1] * nxt[:, 0]).sum())


def _face_measure(P: Polytope, vset: frozenset) -> float:
    """k-dimensional measure of the face spanned by the given vertex ids."""
    ids = sorted(vset)
    pts = P.vertices[ids]
    c, frame = _affine_frame(pts)
    d = frame.shape[0]
    if d == 0:
        return 0.0
    local = (pts - c) @ frame.T
    if d == 1:
        return float(local[:, 0].max() - local[:, 0].min())
    if d == 2:
        return _polygon_area(local)
    if d != 3:
        raise DegenerateFacet(f"no measure recursion for {d}-dimensional faces")

    # pyramid fan from the face centroid over its 2-dimensional sub-faces,
    # which are intersections with the other facets of the parent polytope
    index = {v: i for i, v in enumerate(ids)}
    children = set()
    for f in P.facets:
        T = vset & frozenset(f.vertex_ids)
        if T == vset or len(T) < 3:
            continue
        children.add(T)
    total = 0.0
    for T in children:
        sub = local[[index[v] for v in sorted(T)]]
        cs, fr = _affine_frame(sub)
        if fr.shape[0] != 2:
            continue
        area = _polygon_area((sub - cs) @ fr.T)
        normal = _null_direction(fr)
        height = abs(float(normal @ cs))  # face centroid sits at local origin
        total += area * height / 3.0
    if total <= 0.0:
        raise DegenerateFacet("3-face decomposition produced no volume")
    return total


def _null_direction(frame_rows):
    """Unit vector orthogonal to the given orthonormal rows (in R^(rows+1))."""
    d = frame_rows.shape[1]
    _, _, Vt = np.linalg.svd(frame_rows, full_matrices=True)
    return Vt[d - 1]


def volume(P: Polytope) -> float:
    """N-volume by the pyramid formula from an interior point."""
    if not P.bounded:
        raise Unbounded("volume needs a bounded polytope")
    apex = P.vertices.mean(axis=0)
    total = 0.0
    for f in P.facets:
        h = f.halfspace.offset - float(f.halfspace.normal @ apex)
        if h <= 0:
            raise DegenerateFacet("vertex centroid is not interior; degenerate polytope")
        total += h * _face_measure(P, frozenset(f.vertex_ids))
    return total / P.dim


def surface_area(P: Polytope) -> float:
    """Sum of facet (N-1)-measures: the classical perimeter of the body."""
    if not P.bounded:
        raise Unbounded("surface area needs a bounded polytope")
    return float(sum(_face_measure(P, frozenset(f.vertex_ids)) for f in P.facets))


def chebyshev_inradius(P: Polytope):
    """Largest inscribed ball: (radius, center), by linear programming."""
    A = P.normals
    b = P.offsets
    n = P.dim
    c = np.zeros(n + 1)
    c[n] = -1.0
    A_ub = np.hstack([A, np.ones((len(b), 1))])
    bounds = [(None, None)] * n + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0:
        raise LPFailure(f"Chebyshev LP failed with status {res.status}")
    return float(res.x[n]), res.x[:n]


def contains_ball(P: Polytope, radius: float, tol: float = 1e-9) -> bool:
    return chebyshev_inradius(P)[0] >= radius - tol


def transform(P: Polytope, scale: float = 1.0, translation=None) -> Polytope:
    """Scaled and translated copy; volume scales by scale^N, area by scale^(N-1)."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    t = np.zeros(P.dim) if translation is None else np.asarray(translation, dtype=float)
    V = P.vertices * scale + t
    V = np.ascontiguousarray(V)
    V.flags.writeable = False
    facets = tuple(
        Facet(
            halfspace=HalfSpace(
                normal=f.halfspace.normal.copy(),
                offset=f.halfspace.offset * scale + float(f.halfspace.normal @ t),
            ),
            vertex_ids=f.vertex_ids,
        )
        for f in P.facets
    )
    return Polytope(dim=P.dim, vertices=V, facets=facets, bounded=P.bounded)


# ---------------------------------------------------------------------------
# face lattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Face:
    vertex_ids: frozenset
    dim: int
    facet_ids: tuple


def enumerate_faces(P: Polytope):
    """All proper faces (dims 0..N-1) from facet/vertex incidence.

    Faces are exactly the intersections of facet vertex sets, so the
    closure of the facet sets under pairwise intersection enumerates
    them all. Returned sorted by (dim, vertex ids).
    """
    facet_vsets = [frozenset(f.vertex_ids) for f in P.facets]
    seen = set(facet_vsets)
    frontier = set(facet_vsets)
    while frontier:
        new = set()
        for S in frontier:
            for F in facet_vsets:
                T = S & F
                if T and T not in seen and T not in new:
                    new.add(T)
        seen |= new
        frontier = new
    faces = []
    for S in seen:
        d = _affine_rank(P.vertices[sorted(S)])
        tight = tuple(i for i, F in enumerate(facet_vsets) if S <= F)
        faces.append(Face(vertex_ids=S, dim=d, facet_ids=tight))
    faces.sort(key=lambda f: (f.dim, tuple(sorted(f.vertex_ids))))
    return faces


# ---------------------------------------------------------------------------
# export / import
# ---------------------------------------------------------------------------

def polytope_to_json_dict(P: Polytope) -> dict:
    return {
        "dim": P.dim,
        "vertices": [list(v) for v in P.vertices],
        "facets": [
            {
                "normal": list(f.halfspace.normal),
                "offset": f.halfspace.offset,
                "vertices": list(f.vertex_ids),
            }
            for f in P.facets
        ],
    }


def polytope_from_json_dict(data: dict) -> Polytope:
    V = np.asarray(data["vertices"], dtype=float)
    V.flags.writeable = False
    facets = tuple(
        Facet(
            halfspace=HalfSpace(np.asarray(f["normal"], dtype=float), float(f["offset"])),
            vertex_ids=tuple(int(i) for i in f["vertices"]),
        )
        for f in data["facets"]
    )
    return Polytope(dim=V.shape[1], vertices=V, facets=facets, bounded=True)


def polytope_to_json(P: Polytope) -> str:
    return json.dumps(polytope_to_json_dict(P), indent=2)


def polytope_to_off(P: Polytope) -> str:
    """OFF mesh text for a 3-dimensional polytope (facets ordered ccw)."""
    if P.dim != 3:
        raise UnsupportedFormatForDim("OFF export is only defined for dim 3")
    lines = ["OFF"]
    n_edges = sum(len(f.vertex_ids) for f in P.facets) // 2
    lines.append(f"{len(P.vertices)} {len(P.facets)} {n_edges}")
    for v in P.vertices:
        lines.append(" ".join(f"{x:.12g}" for x in v))
    for f in P.facets:
        ids = list(f.vertex_ids)
        pts = P.vertices[ids]
        c = pts.mean(axis=0)
        nrm = f.halfspace.normal
        u = pts[0] - c
        u = u / np.linalg.norm(u)
        w = np.cross(nrm, u)
        ang = np.arctan2((pts - c) @ w, (pts - c) @ u)
        ordered = [ids[i] for i in np.argsort(ang)]
        lines.append(str(len(ordered)) + " " + " ".join(map(str, ordered)))
    return "\n".join(lines) + "\n"
