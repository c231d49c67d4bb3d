"""Pixel-purity measures and the purity region of the unit simplex.

Abundance vectors live on the unit simplex ``T = conv{e_1..e_n}``.  The
*purity region* at level ``r`` is ``T`` intersected with the norm-``r``
ball; it is nonempty for ``r >= 1/sqrt(n)`` (the centroid's norm) and, for
``r <= 1/sqrt(n-1)``, coincides with the full norm ball on the affine hull
of the unit vectors.  ``1/sqrt(n-1)`` is the identifiability threshold for
minimum-volume unmixing: enclosing-simplex recovery of the unit simplex is
guaranteed once the *uniform* purity level exceeds it, and impossible once
even the *best* purity level falls to it.

Two measures are computed here:

* ``best_purity`` -- the largest abundance norm (cheap, exact).
* ``gamma_lower_bound`` -- a sampled lower bound on the uniform purity
  level, the largest ``r`` whose purity region fits inside the abundance
  convex hull.  Exact evaluation amounts to verifying that a convex body is
  inside a V-polytope, which is NP-hard, so the bound is probabilistic:
  boundary points of the candidate region are sampled and tested with an
  exact LP membership oracle.  The result can only exceed the true value
  through unsampled boundary gaps; it never undershoots by more than the
  search grid tolerance.

Abundance sets are passed as arrays with one vector per row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg, lp
from .errors import (
    AffineDimensionError,
    DimensionError,
    DomainError,
    ValidationError,
)
from .geometry import canonical_abundance_chart

# Absolute tolerance for "lies on the unit simplex" validation.
SIMPLEX_TOL = 1e-9
# Slack used by the exact LP membership oracle.
HULL_TOL = 1e-9


@dataclass(frozen=True)
class PurityReport:
    """Purity verdicts against the identifiability threshold 1/sqrt(n-1)."""

    rho: float
    gamma_lower: float
    threshold: float
    necessary_ok: bool
    sufficient_ok: bool
    samples_used: int

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "gamma_lower": self.gamma_lower,
            "threshold": self.threshold,
            "necessary_ok": self.necessary_ok,
            "sufficient_ok": self.sufficient_ok,
            "samples_used": self.samples_used,
        }


@dataclass(frozen=True, eq=False)
class EdgePixelSpec:
    """Coefficients alpha[i, j] in (0.5, 1] for edge pixels
    ``alpha[i,j] * e_i + (1 - alpha[i,j]) * e_j``; the diagonal is unused."""

    alpha: np.ndarray

    def __post_init__(self):
        a = linalg.as_matrix(self.alpha, "edge coefficients")
        if a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise DimensionError(f"edge coefficients must be square (n>=2), got {a.shape}")
        off = a[~np.eye(a.shape[0], dtype=bool)]
        if np.any(off <= 0.5) or np.any(off > 1.0):
            raise ValidationError("edge coefficients must lie in (0.5, 1]")
        frozen = a.copy()
        frozen.flags.writeable = False
        object.__setattr__(self, "alpha", frozen)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @classmethod
    def uniform(cls, n: int, alpha: float) -> "EdgePixelSpec":
        return cls(alpha=np.full((n, n), float(alpha)))


def min_purity(n: int) -> float:
    """Smallest possible abundance norm, attained only at the centroid."""
    return 1.0 / math.sqrt(n)


def identifiability_threshold(n: int) -> float:
    """The purity level 1/sqrt(n-1) separating the recovery regimes."""
    if n < 2:
        raise DimensionError("threshold needs n >= 2")
    return 1.0 / math.sqrt(n - 1)


def _as_abundances(abundances, neg_tol: float, sum_tol: float) -> np.ndarray:
    s = np.asarray(abundances, dtype=float)
    if s.ndim != 2:
        raise DimensionError("abundances must be a 2-d array (one vector per row)")
    if s.shape[0] == 0:
        raise ValueError("abundance list is empty")
    if not np.all(np.isfinite(s)):
        raise ValidationError("abundances contain non-finite entries")
    if s.shape[1] < 2:
        raise DimensionError("abundance vectors need at least 2 components")
    if float(s.min()) < -neg_tol:
        raise ValidationError(
            f"abundances have a negative component ({float(s.min()):.3e})"
        )
    gap = float(np.max(np.abs(s.sum(axis=1) - 1.0)))
    if gap > sum_tol:
        raise ValidationError(f"abundance components sum to 1 +/- {gap:.3e}")
    return s


def best_purity(abundances) -> float:
    """Largest Euclidean norm among the abundance vectors."""
    s = _as_abundances(abundances, neg_tol=1e-12, sum_tol=1e-9)
    return float(np.linalg.norm(s, axis=1).max())


def in_region_r(s, r: float) -> bool:
    """Is ``s`` on the unit simplex with norm at most ``r``?"""
    x = linalg.as_vector(s, "abundance vector")
    on_simplex = (
        float(x.min()) >= -SIMPLEX_TOL
        and abs(float(x.sum()) - 1.0) <= SIMPLEX_TOL
    )
    return on_simplex and float(np.linalg.norm(x)) <= r + 1e-12


@lru_cache(maxsize=32)
def _chart(n: int):
    return canonical_abundance_chart(n)


def chart_sphere_radius(n: int, r: float) -> float:
    """Chart-space radius of the norm-``r`` slice of the abundance hull."""
    return math.sqrt(max(r * r - 1.0 / n, 0.0))


def _unit_directions(k: int, count: int, rng: np.random.Generator) -> np.ndarray:
    if k == 0:
        return np.zeros((count, 0))
    z = rng.standard_normal((count, k))
    norms = np.linalg.norm(z, axis=1)
    bad = norms < 1e-12
    while np.any(bad):
        z[bad] = rng.standard_normal((int(bad.sum()), k))
        norms = np.linalg.norm(z, axis=1)
        bad = norms < 1e-12
    return z / norms[:, None]


def sample_region_boundary(n: int, r: float, n_samples: int,
                           rng: np.random.Generator):
    """Boundary points of the purity region at level ``r``.

    Draws uniform directions on the chart sphere of radius
    ``sqrt(r^2 - 1/n)``; directions whose sphere point leaves the simplex
    are rescaled onto the nearest simplex facet instead (only relevant for
    ``r`` above the identifiability threshold, where the region is a
    vertex-cropped simplex).  Returns ``(sphere_points, facet_points)``,
    ``n_samples`` rows in total.
    """
    if n < 2:
        raise DimensionError("region sampling needs n >= 2")
    if r < min_purity(n) - 1e-12 or r > 1.0 + 1e-12:
        raise DomainError(f"purity level r={r} outside [1/sqrt({n}), 1]")
    chart = _chart(n)
    mu = chart_sphere_radius(n, r)
    dirs = _unit_directions(n - 1, n_samples, rng)
    moves = mu * dirs @ chart.basis.T          # (k, n), displacement from centroid
    pts = moves + 1.0 / n
    keep = pts.min(axis=1) >= -1e-12
    sphere = pts[keep]
    rejected = moves[~keep]
    if rejected.size:
        # per row, largest c in (0,1) keeping all coords nonnegative
        with np.errstate(divide="ignore"):
            cand = np.where(rejected < 0.0, (-1.0 / n) / rejected, np.inf)
        c = cand.min(axis=1)
        facet = c[:, None] * rejected + 1.0 / n
        facet = np.maximum(facet, 0.0)
    else:
        facet = np.zeros((0, n))
    return sphere, facet


def sample_region(n: int, r: float, n_samples: int, seed: int = 0) -> np.ndarray:
    """Points dense in the purity region: interior, sphere slice and facets.

    Roughly half the points are uniform in the region's interior; a quarter
    sit on the bounding sphere slice and a quarter on simplex facets (the
    facet quota falls back to sphere points below the identifiability
    threshold, where the region has no facet contact).
    """
    if n_samples < 1:
        raise DimensionError("need at least one sample")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    chart = _chart(n)
    mu = chart_sphere_radius(n, r)
    n_sphere = n_samples // 4
    n_facet = n_samples // 4
    n_interior = n_samples - n_sphere - n_facet

    interior = np.zeros((0, n))
    rounds = 0
    while interior.shape[0] < n_interior and rounds < 200:
        need = n_interior - interior.shape[0]
        dirs = _unit_directions(n - 1, max(4 * need, 64), rng)
        radii = mu * rng.random(dirs.shape[0]) ** (1.0 / max(n - 1, 1))
        pts = (radii[:, None] * dirs) @ chart.basis.T + 1.0 / n
        good = pts[pts.min(axis=1) >= 0.0]
        interior = np.vstack([interior, good[:need]])
        rounds += 1

    # boundary buckets; either can starve (no facet contact below the
    # identifiability threshold, bare sphere slice near r = 1), so quotas
    # spill into whichever bucket produces points
    n_boundary = n_samples - n_interior
    sphere = np.zeros((0, n))
    facet = np.zeros((0, n))
    rounds = 0
    while (min(sphere.shape[0], n_sphere) + min(facet.shape[0], n_facet)
           + max(sphere.shape[0] - n_sphere, 0) + max(facet.shape[0] - n_facet, 0)
           < n_boundary) and rounds < 200:
        s_new, f_new = sample_region_boundary(n, r, max(4 * n_boundary, 64), rng)
        sphere = np.vstack([sphere, s_new])
        facet = np.vstack([facet, f_new])
        rounds += 1
    boundary = np.vstack([sphere[:n_sphere], facet[:n_facet],
                          sphere[n_sphere:], facet[n_facet:]])
    cloud = np.vstack([interior, boundary[:n_boundary]])
    if cloud.shape[0] < n_samples:
        raise AffineDimensionError(
            f"could not draw {n_samples} points in the purity region at r={r}"
        )
    return cloud[:n_samples]


def _check_affine_span(s: np.ndarray) -> None:
    n = s.shape[1]
    centered = s - s.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    top = float(svals[0]) if svals.size else 0.0
    rank = int(np.sum(svals > 1e-9 * max(top, 1e-300)))
    if s.shape[0] < n or rank < n - 1:
        raise AffineDimensionError(
            f"abundances span affine dimension {rank}, need {n - 1}",
            observed_rank=rank,
        )


def _gamma_lower(abundances, n_samples: int, tol: float, seed: int):
    s = _as_abundances(abundances, neg_tol=SIMPLEX_TOL, sum_tol=SIMPLEX_TOL)
    _check_affine_span(s)
    n = s.shape[1]
    if tol <= 0:
        raise DomainError("grid tolerance must be positive")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    tested = 0

    def accept(r: float) -> bool:
        nonlocal tested
        sphere, facet = sample_region_boundary(n, r, n_samples, rng)
        for batch in (sphere, facet):
            for point in batch:
                tested += 1
                if not lp.in_convex_hull(point, s, tol=HULL_TOL):
                    return False
        return True

    lo = min_purity(n)
    hi = best_purity(s)
    if accept(hi):
        return hi, tested
    if not accept(lo + 1e-12):
        return lo, tested
    lo_r, hi_r = lo, hi
    while hi_r - lo_r > tol:
        mid = 0.5 * (lo_r + hi_r)
        if accept(mid):
            lo_r = mid
        else:
            hi_r = mid
    return lo_r, tested


def gamma_lower_bound(abundances, n_samples: int = 20000, tol: float = 1e-3,
                      seed: int = 0) -> float:
    """Sampled lower bound for the uniform pixel purity level.

    Binary search over ``r`` between the centroid norm and the best purity:
    a level is accepted when every sampled boundary point of its purity
    region is a convex combination of the abundances (exact LP test).  The
    returned value is the largest accepted level on a ``tol`` grid.
    """
    value, _ = _gamma_lower(abundances, n_samples, tol, seed)
    return value


def purity_report(abundances, n_samples: int = 20000, tol: float = 1e-3,
                  seed: int = 0) -> PurityReport:
    """Best purity, sampled uniform-purity lower bound and threshold verdicts."""
    s = _as_abundances(abundances, neg_tol=SIMPLEX_TOL, sum_tol=SIMPLEX_TOL)
    rho = best_purity(s)
    gamma, tested = _gamma_lower(s, n_samples, tol, seed)
    thr = identifiability_threshold(s.shape[1])
    return PurityReport(
        rho=rho,
        gamma_lower=gamma,
        threshold=thr,
        necessary_ok=rho > thr,
        sufficient_ok=gamma > thr,
        samples_used=tested,
    )


def alpha_star(n: int, r: float) -> float:
    """Largest single coordinate attainable inside the purity region:

    ``alpha*(r) = (1 + sqrt((n-1)(n r^2 - 1))) / n`` for
    ``1/sqrt(n) <= r <= 1``; strictly increasing in ``r``.
    """
    if n < 2:
        raise DimensionError("alpha_star needs n >= 2")
    if r < min_purity(n) - 1e-12 or r > 1.0 + 1e-12:
        raise DomainError(f"r={r} outside [1/sqrt({n}), 1]")
    # equivalent to (1 + sqrt((n-1)(n r^2 - 1))) / n, written through the
    # chart radius so it shares rounding with the region samplers (the
    # radicand's square root is infinitely sensitive at r = 1/sqrt(n))
    return (1.0 + math.sqrt(n * (n - 1.0)) * chart_sphere_radius(n, r)) / n


def edge_pixels(spec: EdgePixelSpec) -> np.ndarray:
    """All n(n-1) two-endmember abundance vectors
    ``alpha[i,j] e_i + (1-alpha[i,j]) e_j``, ordered lexicographically in
    (i, j).  Each lies on an edge of the unit simplex."""
    n = spec.n
    out = np.zeros((n * (n - 1), n))
    row = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a = spec.alpha[i, j]
            out[row, i] = a
            out[row, j] = 1.0 - a
            row += 1
    return out


def theorem5_bound(n: int, alpha: float) -> float:
    """Uniform-purity guarantee for edge-pixel data with smallest
    coefficient ``alpha``: ``sqrt(((n*alpha - 1)^2 / (n-1) + 1) / n)``."""
    if n < 2:
        raise DimensionError("bound needs n >= 2")
    if not (0.5 < alpha <= 1.0 + 1e-12):
        raise DomainError(f"alpha={alpha} outside (0.5, 1]")
    return math.sqrt(((n * alpha - 1.0) ** 2 / (n - 1.0) + 1.0) / n)


def conv_p_membership(s, alpha: float) -> bool:
    """Membership in the edge-pixel hull via its coordinate description:
    a simplex point belongs iff its largest coordinate is at most ``alpha``."""
    x = linalg.as_vector(s, "abundance vector")
    if float(x.min()) < -SIMPLEX_TOL or abs(float(x.sum()) - 1.0) > SIMPLEX_TOL:
        raise ValidationError("point is not on the unit simplex")
    return float(x.max()) <= alpha + 1e-12
