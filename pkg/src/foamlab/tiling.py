"""Voronoi cells, fundamental-domain certification, and tiling skeletons.

The cell of a lattice G is cut out by the bisector half-spaces
x . v <= |v|^2 / 2 of its relevant vectors. A face of the induced
periodic tiling is recorded through one representative point on the
central cell together with the set of lattice points equidistant from
it, i.e. the cells meeting at that face.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFace, DimensionTooLarge
from .lattice import (
    Lattice,
    closest_lattice_points,
    determinant,
    minimal_norm,
    relevant_vectors,
)
from .polytope import (
    HalfSpace,
    Polytope,
    _affine_frame,
    contains,
    enumerate_faces,
    halfspace_intersection,
    transform,
    volume,
)


def voronoi_cell(L: Lattice) -> Polytope:
    """The Voronoi cell of the lattice as a bounded, centrally symmetric Polytope.

    Built at unit minimal norm (so the vertex dedup tolerance is meaningful)
    and rescaled back afterwards.
    """
    if L.dim > 4:
        raise DimensionTooLarge("voronoi_cell supports dim <= 4")
    lam = minimal_norm(L)
    rel = relevant_vectors(L)
    halfspaces = [
        HalfSpace(v / lam, float(v @ v) / (2.0 * lam * lam)) for v in rel.vectors
    ]
    cell = halfspace_intersection(halfspaces, check_bounded=False)
    if len(cell.facets) != len(rel):
        raise DegenerateFace(
            f"{len(rel)} relevant vectors produced {len(cell.facets)} facets"
        )
    return transform(cell, scale=lam)


# ---------------------------------------------------------------------------
# fundamental domain certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainCheckReport:
    """Monte Carlo + volume certificate that a body tiles under the lattice."""

    lattice_volume: float
    cell_volume: float
    volume_rel_error: float
    volume_pass: bool
    max_overlap_fraction: float
    overlap_threshold: float
    overlap_pass: bool
    covering_fail_fraction: float
    covering_pass: bool
    samples: int
    seed: int

    @property
    def passed(self) -> bool:
        return self.volume_pass and self.overlap_pass and self.covering_pass

    def to_json_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def _sample_in_polytope(P: Polytope, count: int, rng) -> np.ndarray:
    lo = P.vertices.min(axis=0)
    hi = P.vertices.max(axis=0)
    out = []
    got = 0
    while got < count:
        draw = rng.random((max(4096, count), P.dim)) * (hi - lo) + lo
        keep = draw[contains(P, draw, tol=0.0)]
        out.append(keep)
        got += len(keep)
    return np.concatenate(out)[:count]


def fundamental_domain_check(
    P: Polytope, L: Lattice, samples: int = 100_000, seed: int = 0
) -> DomainCheckReport:
    """Check |P| = d(G), translate overlaps, and covering, by sampling.

    Overlap: fraction of points of P landing inside P + g for relevant g
    (boundary contact only, so the estimate should stay below 2/sqrt(n)).
    Covering: fraction of points of a fundamental box that no lattice
    translate maps into P (0 for a true fundamental domain).
    """
    rng = np.random.default_rng([seed, 0])
    dG = determinant(L)
    vol = volume(P)
    rel_err = abs(vol - dG) / dG

    rel = relevant_vectors(L)
    X = _sample_in_polytope(P, samples, rng)
    max_overlap = 0.0
    for g in rel.vectors:
        inside = contains(P, X - g, tol=-1e-9)
        max_overlap = max(max_overlap, float(inside.mean()))
    overlap_threshold = 2.0 / np.sqrt(samples)

    # covering: any point of the fundamental box must fall in some P + g;
    # only translates within reach of the box can matter, so gather them once
    reach = float(np.linalg.norm(P.vertices, axis=1).max()) + 1e-9
    corners = np.array(
        [[(i >> j) & 1 for j in range(L.dim)] for i in range(1 << L.dim)], dtype=float
    )
    center = L.basis @ np.full(L.dim, 0.5)
    circum = float(np.linalg.norm(corners @ L.basis.T - center, axis=1).max())
    translates, _ = _lattice_points_within(L, center, reach + circum + 1e-9)
    box_pts = rng.random((samples, L.dim)) @ L.basis.T
    covered = np.zeros(samples, dtype=bool)
    for g in translates:
        covered |= contains(P, box_pts - g, tol=1e-9)
    covering_fail = float(1.0 - covered.mean())

    return DomainCheckReport(
        lattice_volume=dG,
        cell_volume=vol,
        volume_rel_error=rel_err,
        volume_pass=bool(rel_err <= 1e-6),
        max_overlap_fraction=max_overlap,
        overlap_threshold=overlap_threshold,
        overlap_pass=bool(max_overlap <= overlap_threshold),
        covering_fail_fraction=covering_fail,
        covering_pass=bool(covering_fail == 0.0),
        samples=samples,
        seed=seed,
    )


def _lattice_points_within(L: Lattice, p, radius):
    from .lattice import _enumerate_ball, _reduce_with_transform

    Br, T = _reduce_with_transform(L)
    K = _enumerate_ball(Br, np.asarray(p, dtype=float), radius)
    return K @ Br.T, K @ T.T


def cells_at_point(L: Lattice, p, tol: float | None = None) -> np.ndarray:
    """All lattice points at minimal distance from p (tie tolerance 1e-9
    in lambda-normalized units)."""
    pts, _ = closest_lattice_points(L, p, tie_tol=tol)
    return pts


# ---------------------------------------------------------------------------
# tiling skeleton
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TilingFace:
    """One orbit representative of a k-face of the periodic tiling."""

    face_dim: int
    vertex_ids: tuple
    representative_point: np.ndarray
    equidistant_points: np.ndarray
    incident_facet_normals: np.ndarray

    @property
    def chamber_count(self) -> int:
        return self.equidistant_points.shape[0]


@dataclass(frozen=True, eq=False)
class TilingComplex:
    lattice: Lattice
    cell: Polytope
    faces: tuple

    def faces_of_dim(self, k: int):
        return [f for f in self.faces if f.face_dim == k]

    def to_json_dict(self) -> dict:
        return {
            "dim": self.lattice.dim,
            "faces": [
                {
                    "face_dim": f.face_dim,
                    "representative": list(f.representative_point),
                    "equidistant_points": [list(g) for g in f.equidistant_points],
                    "chambers": f.chamber_count,
                }
                for f in self.faces
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


_PROBE_COUNT = 5
_PROBE_EPS = 1e-5


def tiling_skeleton(L: Lattice) -> TilingComplex:
    """Faces of the tiling generated by the Voronoi cell, with incidences.

    Representatives: face centroid (the vertex itself for 0-faces). The
    interior-of-face property is verified by re-resolving the equidistant
    set under small perturbations inside the face's affine hull.
    """
    if L.dim > 4:
        raise DimensionTooLarge("tiling_skeleton supports dim <= 4")
    cell = voronoi_cell(L)
    lam = minimal_norm(L)
    tie_tol = 1e-9 * max(1.0, lam)
    rng = np.random.default_rng(8675309)  # fixed: probes must be reproducible
    faces_out = []
    for face in enumerate_faces(cell):
        ids = sorted(face.vertex_ids)
        pts = cell.vertices[ids]
        rep = pts.mean(axis=0)
        eq = cells_at_point(L, rep, tol=tie_tol)
        dists = np.linalg.norm(eq - rep, axis=1)
        if np.ptp(dists) > 1e-9 * max(1.0, lam):
            raise DegenerateFace("equidistant set distances disagree at a face")
        if face.dim > 0:
            _, frame = _affine_frame(pts)
            for _ in range(_PROBE_COUNT):
                u = rng.normal(size=frame.shape[0])
                u /= np.linalg.norm(u)
                probe = rep + _PROBE_EPS * (u @ frame)
                eq2 = cells_at_point(L, probe, tol=tie_tol)
                if eq2.shape != eq.shape or not np.allclose(
                    np.sort(eq2, axis=0), np.sort(eq, axis=0), atol=1e-7
                ):
                    raise DegenerateFace(
                        f"representative of a {face.dim}-face is not interior"
                    )
        normals = np.array([cell.facets[i].halfspace.normal for i in face.facet_ids])
        faces_out.append(
            TilingFace(
                face_dim=face.dim,
                vertex_ids=tuple(ids),
                representative_point=rep,
                equidistant_points=eq,
                incident_facet_normals=normals,
            )
        )
    faces_out.sort(key=lambda f: (f.face_dim, f.vertex_ids))
    return TilingComplex(lattice=L, cell=cell, faces=tuple(faces_out))
