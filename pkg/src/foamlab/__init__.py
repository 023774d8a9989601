"""foamlab: lattice Voronoi cells, perimeter functionals, and search for
minimal periodic foams with a fixed inscribed ball."""

from .errors import FoamLabError
from .functionals import (
    Estimate,
    MonteCarloConfig,
    RatioSpec,
    classical_perimeter,
    fractional_perimeter,
    iso_ratio,
    kelvin_bound_check,
    riesz_energy,
)
from .lattice import (
    Lattice,
    ShortVectorSet,
    catalog,
    covering_radius,
    determinant,
    inradius,
    lattice_equivalent,
    load_lattice,
    make_lattice,
    minimal_norm,
    reduce_basis,
    relevant_vectors,
    save_lattice,
    scale_lattice,
    short_vectors,
)
from .optimizer import (
    OptimizationReport,
    OptimizerConfig,
    normalize_to_inradius,
    objective,
    optimize,
    perturb_test,
)
from .plateau import (
    ConeSignature,
    PlateauReport,
    bcc_edge_angles,
    classify_face,
    plateau_check,
)
from .polytope import (
    HalfSpace,
    Polytope,
    chebyshev_inradius,
    halfspace_intersection,
    polytope_from_json_dict,
    polytope_to_json,
    polytope_to_off,
    surface_area,
    transform,
    volume,
)
from .tiling import (
    TilingComplex,
    TilingFace,
    cells_at_point,
    fundamental_domain_check,
    tiling_skeleton,
    voronoi_cell,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
