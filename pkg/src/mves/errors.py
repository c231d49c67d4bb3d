"""Exception hierarchy shared by all mves modules."""


class MvesError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(MvesError):
    """Inputs have inconsistent or unsupported shapes."""


class ValidationError(MvesError):
    """An input violates a documented invariant (non-finite entries,
    off-simplex abundances, non-orthogonal rotation, ...)."""


class DomainError(MvesError):
    """A scalar parameter lies outside the mathematical domain of a formula."""


class SingularMatrixError(MvesError):
    """A pivot fell below the singularity threshold during elimination.

    ``pivot_index`` is the (0-based) elimination step at which the factorization
    failed.
    """

    def __init__(self, message: str, pivot_index: int):
        super().__init__(message)
        self.pivot_index = pivot_index


class DegenerateSimplexError(MvesError):
    """Vertex set is affinely dependent (or the half-space matrix is singular)."""


class AffineDimensionError(MvesError):
    """Data do not span the required affine dimension.

    ``observed_rank`` reports the affine rank actually measured.
    """

    def __init__(self, message: str, observed_rank: int | None = None):
        super().__init__(message)
        self.observed_rank = observed_rank


class PurityCapError(MvesError):
    """Rejection sampling under a purity cap exceeded its draw budget."""


class InternalConsistencyError(MvesError):
    """An internal invariant failed (e.g. an alternation subproblem reported
    infeasible although the incumbent was feasible).  Indicates a bug."""
