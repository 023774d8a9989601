"""Classify tiling singularities against the admissible minimal cones.

A face of the periodic Voronoi tiling is locally the cone over the
nearest-point partition of its equidistant lattice points. Admissible
local structures for a perimeter-minimizing partition:

- dim 2: interfaces meeting in threes at 120 degrees;
- dim 3: additionally the tetrahedral point cone, six interfaces at
  arccos(-1/3) between edge directions (Taylor's classification);
- dim 4: the dim-3 cones times a line, plus the cone over the
  2-skeleton of the hypercube, eight cells around a point with the
  chamber directions forming four orthogonal antipodal pairs (Brakke).

The checker measures chamber counts and angles and compares against
these lists; it never attempts to prove cone minimality itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFace, UnsupportedDimension
from .lattice import Lattice, catalog
from .tiling import TilingFace, tiling_skeleton

TRIPLE_DEG = 120.0
TETRA_DEG = math.degrees(math.acos(-1.0 / 3.0))  # 109.4712206...

VERDICT_PLANAR = "PASS_PLANAR"
VERDICT_TRIPLE = "PASS_TRIPLE_120"
VERDICT_TETRA = "PASS_TETRAHEDRAL"
VERDICT_HYPERCUBE = "PASS_HYPERCUBE_CONE"
VERDICT_VIOLATION = "VIOLATION"


@dataclass(frozen=True, eq=False)
class ConeSignature:
    """Measured local data at a tiling face.

    For codimension-2 faces ``angle_data`` is the 1-d array of chamber
    (dihedral) angles in degrees, summing to 360. For higher codimension
    it is the matrix of pairwise angles between the directions from the
    face to its equidistant points, projected orthogonally to the face.
    """

    chamber_count: int
    face_dim: int
    angle_data: np.ndarray

    def __post_init__(self):
        if self.chamber_count < 2:
            raise DegenerateFace("a tiling face needs at least two chambers")
        a = self.angle_data
        if a.ndim == 1 and len(a):
            if np.any(a <= 0.0) or np.any(a >= 360.0):
                raise DegenerateFace("chamber angles outside (0, 360)")
            if abs(a.sum() - 360.0) > 1e-6:
                raise DegenerateFace("codim-2 chamber angles must sum to 360")


def _face_normal_space(face: TilingFace, dim: int) -> np.ndarray:
    """Orthonormal rows spanning the directions transverse to the face."""
    g = face.equidistant_points
    span = g[1:] - g[0]
    _, S, Vt = np.linalg.svd(span, full_matrices=False)
    rank = int((S > 1e-9 * max(1.0, S[0])).sum())
    codim = dim - face.face_dim
    if rank != codim:
        raise DegenerateFace(
            f"equidistant points span rank {rank}, expected codim {codim}"
        )
    return Vt[:rank]


def classify_face(L: Lattice, face: TilingFace) -> ConeSignature:
    """Measure the chamber geometry at one tiling face."""
    m = face.chamber_count
    codim = L.dim - face.face_dim
    W = _face_normal_space(face, L.dim)
    q = (face.equidistant_points - face.representative_point) @ W.T
    norms = np.linalg.norm(q, axis=1)
    if np.ptp(norms) > 1e-6 * norms.mean():
        raise DegenerateFace("projected equidistant points are not concircular")

    if codim == 1:
        angles = np.zeros(0)
    elif codim == 2:
        phi = np.sort(np.arctan2(q[:, 1], q[:, 0]))
        nxt = np.roll(phi, -1)
        gaps = (nxt - phi) % (2.0 * math.pi)
        # chamber of cell i spans half of each adjacent gap
        widths = (gaps + np.roll(gaps, 1)) / 2.0
        angles = np.sort(np.degrees(widths))
    else:
        u = q / norms[:, None]
        dots = np.clip(u @ u.T, -1.0, 1.0)
        angles = np.degrees(np.arccos(dots))
    return ConeSignature(chamber_count=m, face_dim=face.face_dim, angle_data=angles)


def _offdiag(mat: np.ndarray) -> np.ndarray:
    m = mat.shape[0]
    return mat[~np.eye(m, dtype=bool)]


def _verdict(sig: ConeSignature, codim: int, dim: int, tol_deg: float):
    """(verdict, deviation_deg) for one signature against the allowed cones."""
    m = sig.chamber_count
    if codim == 1:
        return (VERDICT_PLANAR, 0.0) if m == 2 else (VERDICT_VIOLATION, float("nan"))
    if codim == 2:
        if m == 3:
            dev = float(np.abs(sig.angle_data - TRIPLE_DEG).max())
            return (VERDICT_TRIPLE, dev) if dev <= tol_deg else (VERDICT_VIOLATION, dev)
        dev = float(np.abs(sig.angle_data - TRIPLE_DEG).max()) if len(sig.angle_data) else float("nan")
        return VERDICT_VIOLATION, dev
    if codim == 3 or (codim == 4 and m == 4):
        if m == 4:
            dev = float(np.abs(_offdiag(sig.angle_data) - TETRA_DEG).max())
            return (VERDICT_TETRA, dev) if dev <= tol_deg else (VERDICT_VIOLATION, dev)
        return VERDICT_VIOLATION, float("nan")
    if codim == 4:
        if m == 8:
            # four antipodal pairs, pairwise orthogonal: every off-diagonal
            # angle is 90 or 180 degrees
            off = _offdiag(sig.angle_data)
            dev = float(np.minimum(np.abs(off - 90.0), np.abs(off - 180.0)).max())
            return (VERDICT_HYPERCUBE, dev) if dev <= tol_deg else (VERDICT_VIOLATION, dev)
        return VERDICT_VIOLATION, float("nan")
    return VERDICT_VIOLATION, float("nan")


@dataclass(frozen=True, eq=False)
class FaceVerdict:
    face_dim: int
    chambers: int
    verdict: str
    deviation_deg: float
    angles_deg: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "face_dim": self.face_dim,
            "chambers": self.chambers,
            "verdict": self.verdict,
            "deviation_deg": None if math.isnan(self.deviation_deg) else self.deviation_deg,
            "angles_deg": np.asarray(self.angles_deg).round(9).tolist(),
        }


@dataclass(frozen=True, eq=False)
class PlateauReport:
    dim: int
    tol_deg: float
    entries: tuple
    overall_pass: bool

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "tol_deg": self.tol_deg,
            "overall": "PASS" if self.overall_pass else "FAIL",
            "faces": [e.to_json_dict() for e in self.entries],
        }

    def worst_violation(self):
        bad = [e for e in self.entries if e.verdict == VERDICT_VIOLATION]
        return max(bad, key=lambda e: e.chambers) if bad else None


def plateau_check(L: Lattice, tol_deg: float = 0.1) -> PlateauReport:
    """Check every face orbit of the Voronoi tiling against the cone lists.

    Angles are measured, never assumed: a face with a matching chamber
    count but off angles is a VIOLATION with its deviation reported.
    """
    if L.dim not in (2, 3, 4):
        raise UnsupportedDimension("Plateau checking is defined for dim 2, 3, 4")
    skel = tiling_skeleton(L)
    entries = []
    for face in skel.faces:
        if face.face_dim == L.dim - 1:
            sig = classify_face(L, face)
            verdict, dev = _verdict(sig, 1, L.dim, tol_deg)
        else:
            sig = classify_face(L, face)
            verdict, dev = _verdict(sig, L.dim - face.face_dim, L.dim, tol_deg)
        entries.append(
            FaceVerdict(
                face_dim=face.face_dim,
                chambers=sig.chamber_count,
                verdict=verdict,
                deviation_deg=dev,
                angles_deg=sig.angle_data,
            )
        )
    overall = all(e.verdict != VERDICT_VIOLATION for e in entries)
    return PlateauReport(dim=L.dim, tol_deg=tol_deg, entries=tuple(entries), overall_pass=overall)


@dataclass(frozen=True, eq=False)
class EdgeAngleReport:
    signature: ConeSignature
    max_deviation_deg: float
    verdict: str

    def to_json_dict(self) -> dict:
        return {
            "angles_deg": np.asarray(self.signature.angle_data).round(9).tolist(),
            "max_deviation_deg": self.max_deviation_deg,
            "verdict": self.verdict,
        }


def bcc_edge_angles() -> EdgeAngleReport:
    """Chamber angles at a truncated-octahedron tiling edge.

    All edge orbits of the BCC tiling carry the same signature
    {arccos(-1/3), 125.264, 125.264} degrees; the 10.5-degree deviation
    from 120 is why the flat cell needs curved faces to be minimal.
    """
    L = catalog("bcc")
    skel = tiling_skeleton(L)
    sigs = [classify_face(L, f) for f in skel.faces_of_dim(1)]
    ref = np.round(sigs[0].angle_data, 6)
    for sig in sigs[1:]:
        if not np.array_equal(np.round(sig.angle_data, 6), ref):
            raise DegenerateFace("BCC edge orbits disagree; tiling is inconsistent")
    sig = sigs[0]
    dev = float(np.abs(sig.angle_data - TRIPLE_DEG).max())
    return EdgeAngleReport(signature=sig, max_deviation_deg=dev, verdict=VERDICT_VIOLATION)
