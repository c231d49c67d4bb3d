"""Simplex representations, volumes, affine charts and half-space forms.

Conventions
-----------
* A :class:`Simplex` stores its ``n`` vertices as rows of an ``(n, m)``
  array, ``m >= n - 1``.  Its volume is
  ``vol = sqrt(det(E.T @ E)) / (n-1)!`` where ``E`` is the ``(m, n-1)``
  matrix of edge vectors ``v_i - v_n``.
* An :class:`AffineChart` ``(C, d)`` parametrizes an affine subspace as
  ``s = C @ theta + d`` with semi-unitary ``C`` (``C.T @ C = I``), so chart
  coordinates are isometric and simplex volumes agree between chart space
  and the ambient space.
* A :class:`PolyhedralSimplex` ``(H, g)`` describes a full-dimensional
  simplex in chart space ``R^k``::

      { theta | H.T @ theta + g >= 0  and  1 - g.sum() - (H @ 1) @ theta >= 0 }

  The first ``k`` constraints are exactly the leading barycentric
  coordinates of the point, the last one is the remaining coordinate, so
  half-space membership and barycentric membership are the same numbers.
  Vertices map via ``W = H^{-T}`` (columns are ``w_i - w_n``) and
  ``w_n = -H^{-T} @ g``; the volume is ``1 / ((k)! * |det H|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DegenerateSimplexError,
    DimensionError,
    ValidationError,
)

# Ratio of smallest to largest singular value below which a vertex set is
# treated as affinely dependent; consistent with the LU pivot threshold.
DEGENERACY_RTOL = 1e-10

# Default absolute tolerance on barycentric coordinates for membership.
MEMBERSHIP_TOL = 1e-9

_ORTHOGONALITY_TOL = 1e-10


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Simplex:
    """An (n-1)-dimensional simplex given by its n vertices (rows)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = linalg.as_matrix(self.vertices, "simplex vertices")
        n, m = v.shape
        if n < 2:
            raise DimensionError("a simplex needs at least 2 vertices")
        if m < n - 1:
            raise DimensionError(
                f"{n} vertices need ambient dimension >= {n - 1}, got {m}"
            )
        edges = (v[:-1] - v[-1]).T
        svals = np.linalg.svd(edges, compute_uv=False)
        if svals[0] <= 0.0 or svals[-1] <= DEGENERACY_RTOL * svals[0]:
            raise DegenerateSimplexError(
                "vertices are affinely dependent "
                f"(singular value ratio {svals[-1] / max(svals[0], 1e-300):.3e})"
            )
        object.__setattr__(self, "vertices", _freeze(v))

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    def edge_matrix(self) -> np.ndarray:
        """(m, n-1) matrix with columns ``v_i - v_n``."""
        v = self.vertices
        return (v[:-1] - v[-1]).T

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


@dataclass(frozen=True, eq=False)
class AffineChart:
    """Semi-unitary parametrization ``s = basis @ theta + offset``."""

    basis: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        c = linalg.as_matrix(self.basis, "chart basis")
        d = linalg.as_vector(self.offset, "chart offset")
        if c.shape[0] != d.shape[0]:
            raise DimensionError(
                f"basis has {c.shape[0]} rows but offset has length {d.shape[0]}"
            )
        if c.shape[1] > c.shape[0]:
            raise DimensionError("chart basis cannot have more columns than rows")
        gram = c.T @ c
        if np.max(np.abs(gram - np.eye(c.shape[1]))) > _ORTHOGONALITY_TOL:
            raise ValidationError("chart basis is not semi-unitary")
        object.__setattr__(self, "basis", _freeze(c))
        object.__setattr__(self, "offset", _freeze(d))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def chart_dim(self) -> int:
        return self.basis.shape[1]

    def to_ambient(self, thetas) -> np.ndarray:
        """Map chart coordinates (last axis) to ambient points."""
        t = np.asarray(thetas, dtype=float)
        return t @ self.basis.T + self.offset

    def to_chart(self, points) -> np.ndarray:
        """Orthogonal chart coordinates of ambient points (last axis)."""
        p = np.asarray(points, dtype=float)
        return (p - self.offset) @ self.basis


@dataclass(frozen=True, eq=False)
class PolyhedralSimplex:
    """Half-space form ``(H, g)`` of a chart-space simplex (see module doc)."""

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        h = linalg.as_matrix(self.h, "half-space matrix")
        g = linalg.as_vector(self.g, "half-space offset")
        if h.shape[0] != h.shape[1]:
            raise DimensionError(f"half-space matrix must be square, got {h.shape}")
        if g.shape[0] != h.shape[0]:
            raise DimensionError(
                f"offset length {g.shape[0]} does not match matrix size {h.shape[0]}"
            )
        svals = np.linalg.svd(h, compute_uv=False)
        if svals[0] <= 0.0 or svals[-1] <= DEGENERACY_RTOL * svals[0]:
            raise DegenerateSimplexError("half-space matrix is singular")
        object.__setattr__(self, "h", _freeze(h))
        object.__setattr__(self, "g", _freeze(g))

    @property
    def n_vertices(self) -> int:
        return self.h.shape[0] + 1

    @property
    def chart_dim(self) -> int:
        return self.h.shape[0]


def simplex_volume(s: Simplex) -> float:
    """Volume ``sqrt(det(E.T @ E)) / (n-1)!``; strictly positive."""
    edges = s.edge_matrix()
    gram = edges.T @ edges
    det = max(linalg.determinant(gram), 0.0)
    vol = math.sqrt(det) / math.factorial(s.n_vertices - 1)
    if vol <= 0.0:
        raise DegenerateSimplexError("simplex has zero volume")
    return vol


def canonical_abundance_chart(n: int) -> AffineChart:
    """Chart of the affine hull of the unit vectors e_1..e_n in R^n.

    ``offset`` is the centroid ``1/n`` and ``basis`` is an ``(n, n-1)``
    semi-unitary matrix orthogonal to the all-ones vector, taken from the
    thin SVD of the centering matrix ``I - (1/n) 11^T`` with a fixed sign
    convention (first entry of magnitude > 1e-9 in each column positive) so
    the chart is deterministic for a given ``n``.
    """
    if n < 2:
        raise DimensionError("chart needs n >= 2")
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    u, _, _ = linalg.thin_svd(centering)
    c = u[:, : n - 1].copy()
    c = _fix_column_signs(c)
    d = np.full(n, 1.0 / n)
    chart = AffineChart(basis=c, offset=d)
    if np.max(np.abs(chart.basis.T @ d)) > _ORTHOGONALITY_TOL:
        raise ValidationError("canonical chart basis is not orthogonal to the centroid")
    return chart


def _fix_column_signs(c: np.ndarray) -> np.ndarray:
    for j in range(c.shape[1]):
        col = c[:, j]
        nz = np.nonzero(np.abs(col) > 1e-9)[0]
        if nz.size and col[nz[0]] < 0:
            c[:, j] = -col
    return c


def fit_data_chart(points, n: int) -> AffineChart:
    """Least-squares affine chart of data spanning an (n-1)-dimensional set.

    ``offset`` is the data mean; ``basis`` holds the first n-1 principal
    directions of the centered data (signs fixed as in the canonical chart).
    Raises AffineDimensionError when the data's affine rank is not exactly
    n-1: rank is measured against singular-value ratios 1e-9 (required
    directions) and 1e-8 (excess directions, which would ruin the noiseless
    reconstruction guarantee).
    """
    from .errors import AffineDimensionError

    p = linalg.as_matrix(points, "data points")
    if n < 2:
        raise DimensionError("chart needs n >= 2")
    centered = p - p.mean(axis=0)
    svals0 = np.linalg.svd(centered, compute_uv=False)
    top = float(svals0[0]) if svals0.size else 0.0
    if top <= 0.0:
        raise AffineDimensionError(
            "data points are all identical (affine dimension 0)", observed_rank=0
        )
    observed = int(np.sum(svals0 > 1e-9 * top))
    if p.shape[0] < n or observed < n - 1:
        raise AffineDimensionError(
            f"data spans affine dimension {observed}, need {n - 1}",
            observed_rank=observed,
        )
    excess = int(np.sum(svals0 > 1e-8 * top))
    if excess > n - 1:
        raise AffineDimensionError(
            f"data spans affine dimension {excess} > {n - 1}; "
            "reduce n or clean the data",
            observed_rank=excess,
        )
    _, _, v = linalg.thin_svd(centered)
    c = _fix_column_signs(v[:, : n - 1].copy())
    chart = AffineChart(basis=c, offset=p.mean(axis=0))
    recon = chart.to_ambient(chart.to_chart(p))
    err = float(np.max(np.abs(recon - p)))
    if err > 1e-8 * top:
        raise AffineDimensionError(
            f"chart reconstruction error {err:.3e} exceeds 1e-8 of data scale",
            observed_rank=excess,
        )
    return chart


def to_polyhedral(s: Simplex) -> PolyhedralSimplex:
    """Half-space form of a full-dimensional chart-space simplex.

    Requires ambient dimension == n_vertices - 1.  ``H = W^{-T}`` where the
    columns of ``W`` are ``w_i - w_n``, and ``g = -W^{-1} @ w_n`` so that
    ``H.T @ theta + g`` are the leading barycentric coordinates.
    """
    k = s.n_vertices - 1
    if s.ambient_dim != k:
        raise DimensionError(
            "half-space form needs a full-dimensional simplex "
            f"(ambient {s.ambient_dim}, expected {k})"
        )
    w = s.edge_matrix()
    try:
        w_inv = linalg.inverse(w)
    except Exception as exc:
        raise DegenerateSimplexError(f"edge matrix is singular: {exc}") from exc
    h = w_inv.T
    g = -w_inv @ s.vertices[-1]
    return PolyhedralSimplex(h=h, g=g)


def to_vertices(p: PolyhedralSimplex) -> Simplex:
    """Vertex form of a half-space simplex: inverts :func:`to_polyhedral`."""
    try:
        w = linalg.inverse(p.h).T
    except Exception as exc:
        raise DegenerateSimplexError(f"half-space matrix is singular: {exc}") from exc
    w_last = -w @ p.g
    verts = np.vstack([w.T + w_last, w_last])
    return Simplex(vertices=verts)


def polyhedral_volume(p: PolyhedralSimplex) -> float:
    """Volume of the half-space simplex, ``1 / (k! * |det H|)``."""
    det = abs(linalg.determinant(p.h))
    if det <= 0.0:
        raise DegenerateSimplexError("half-space matrix has zero determinant")
    return 1.0 / (math.factorial(p.chart_dim) * det)


def membership_margins(p: PolyhedralSimplex, thetas) -> np.ndarray:
    """Constraint margins of chart points: shape (..., n_vertices).

    Point is inside iff all margins are >= 0 (up to tolerance); the margins
    are exactly the barycentric coordinates of the point.
    """
    t = np.asarray(thetas, dtype=float)
    lead = t @ p.h + p.g
    last = 1.0 - p.g.sum() - t @ (p.h.sum(axis=1))
    return np.concatenate([lead, last[..., None]], axis=-1)


def polyhedral_contains(p: PolyhedralSimplex, thetas, tol: float = MEMBERSHIP_TOL):
    """Vectorized half-space membership test at absolute tolerance ``tol``."""
    return membership_margins(p, np.atleast_2d(np.asarray(thetas, float))).min(axis=-1) >= -tol


def contains(s: Simplex, point, tol: float = MEMBERSHIP_TOL) -> bool:
    """Barycentric membership test.

    The barycentric coordinates are solved from the affine system; the point
    must also lie on the simplex's affine span (checked through the
    least-squares residual when the ambient dimension exceeds n-1).
    """
    x = linalg.as_vector(point, "query point")
    if x.shape[0] != s.ambient_dim:
        raise DimensionError(
            f"point has dimension {x.shape[0]}, simplex lives in {s.ambient_dim}"
        )
    edges = s.edge_matrix()
    rhs = x - s.vertices[-1]
    k = s.n_vertices - 1
    if s.ambient_dim == k:
        lam = linalg.solve_linear(edges, rhs)
    else:
        lam = linalg.solve_linear(edges.T @ edges, edges.T @ rhs)
        residual = edges @ lam - rhs
        scale = max(1.0, float(np.max(np.abs(s.vertices))))
        if float(np.max(np.abs(residual))) > max(tol, 1e-9) * scale:
            return False
    lam_full = np.append(lam, 1.0 - lam.sum())
    return bool(lam_full.min() >= -tol)


def rotate_in_chart(s: Simplex, q) -> Simplex:
    """Apply an orthogonal map ``theta -> q @ theta`` to a chart-space simplex."""
    qm = linalg.as_matrix(q, "rotation")
    if qm.shape[0] != qm.shape[1] or qm.shape[0] != s.ambient_dim:
        raise DimensionError(
            f"rotation must be {s.ambient_dim}x{s.ambient_dim}, got {qm.shape}"
        )
    if np.max(np.abs(qm.T @ qm - np.eye(qm.shape[0]))) > _ORTHOGONALITY_TOL:
        raise ValidationError("rotation matrix is not orthogonal")
    return Simplex(vertices=s.vertices @ qm.T)


def unit_simplex_vertices(n: int) -> np.ndarray:
    """Vertices e_1..e_n of the unit simplex in R^n (rows)."""
    if n < 2:
        raise DimensionError("unit simplex needs n >= 2")
    return np.eye(n)


def equiangular_directions(n: int) -> np.ndarray:
    """n unit vectors in R^(n-1) with pairwise dot products -1/(n-1).

    These are the normalized rows of the canonical abundance chart basis and
    give a deterministic orientation for regular simplices.
    """
    chart = canonical_abundance_chart(n)
    rows = chart.basis  # (n, n-1); row norms are sqrt((n-1)/n)
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def regular_simplex(n: int, inradius: float, center=None,
                    directions: np.ndarray | None = None) -> Simplex:
    """Regular (n-1)-simplex in R^(n-1) whose inscribed ball has ``inradius``.

    Vertices sit at distance ``(n-1) * inradius`` from the center along n
    equiangular directions; each facet is tangent to the centered ball of
    radius ``inradius``.
    """
    if inradius <= 0.0:
        raise ValidationError("inradius must be positive")
    u = equiangular_directions(n) if directions is None else np.asarray(directions, float)
    if u.shape != (n, n - 1):
        raise DimensionError(f"directions must have shape {(n, n - 1)}, got {u.shape}")
    c = np.zeros(n - 1) if center is None else linalg.as_vector(center, "center")
    return Simplex(vertices=c + (n - 1) * inradius * u)
