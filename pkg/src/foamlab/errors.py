"""Exception types shared across foamlab modules."""


class FoamLabError(Exception):
    """Base class for all foamlab errors."""


# lattice construction and enumeration

class SingularBasis(FoamLabError):
    """Basis matrix is singular (or numerically indistinguishable from it)."""


class UnknownCatalogEntry(FoamLabError):
    """Requested catalog lattice name does not exist."""


class DimensionMismatch(FoamLabError):
    """Catalog name and dimension are incompatible, or dims disagree."""


class DimensionTooLarge(FoamLabError):
    """Operation is only supported up to a fixed dimension."""


class EnumerationBudgetExceeded(FoamLabError):
    """Integer coefficient search would exceed the candidate budget."""


# polytope geometry

class Unbounded(FoamLabError):
    """Half-space intersection has a recession direction."""


class EmptyIntersection(FoamLabError):
    """Half-space intersection is empty."""


class TooManyHalfSpaces(FoamLabError):
    """Vertex enumeration refused: too many half-spaces for this dimension."""


class DegenerateFacet(FoamLabError):
    """A facet is not affinely (N-1)-dimensional."""


class LPFailure(FoamLabError):
    """Linear program failed to solve."""


# tiling and Plateau checking

class DegenerateFace(FoamLabError):
    """Tiling face has an inconsistent equidistant-point configuration."""


class UnsupportedDimension(FoamLabError):
    """Plateau checking is only defined in dimensions 2, 3, 4."""


# functionals

class SNotInRange(FoamLabError):
    """Fractional perimeter order s must lie in (0, 1)."""


class AlphaNotInRange(FoamLabError):
    """Riesz exponent alpha must lie in (0, N)."""


class ZeroInradius(FoamLabError):
    """Isoperimetric ratio undefined for bodies with no inscribed ball."""


# optimization

class DegenerateLattice(FoamLabError):
    """Gram matrix condition number exceeds the configured cap."""


class AllRestartsFailed(FoamLabError):
    """Every optimizer restart failed to produce a finite objective."""


# I/O

class UnsupportedFormatForDim(FoamLabError):
    """Requested export format does not support this dimension."""
