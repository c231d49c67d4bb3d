"""Dense real linear algebra substrate.

Everything downstream works on plain ``float64`` numpy arrays; matrix
products are written with ``@`` directly.  This module adds the pieces that
need explicit control:

* LU with partial pivoting (determinant, linear solve, inverse) with a
  scale-aware singularity threshold that reports the failing pivot,
* a thin SVD with a fixed return convention (``m = u @ diag(s) @ v.T``),
* a QR helper used to draw Haar-distributed rotations.

Problem sizes are desk scale (matrices up to a few hundred rows), so the
factorizations favour clarity and exact error contracts over speed.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, SingularMatrixError, ValidationError

# A pivot counts as zero when it is below this factor times the largest
# absolute entry seen in the row-reduced matrix.
SINGULARITY_RTOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a 2-d float64 array with finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must have at least one row and column, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Validate and return ``v`` as a 1-d float64 array with finite entries."""
    x = np.asarray(v, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got ndim={x.ndim}")
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{name} contains non-finite entries")
    return x


def _require_square(m: np.ndarray, name: str) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got {m.shape}")


def _lu(a: np.ndarray, raise_on_singular: bool):
    """LU factorization with partial pivoting, in place on a copy.

    Returns ``(lu, perm, sign, singular_at)`` where ``lu`` packs L (unit
    diagonal, below) and U (on and above), ``perm`` is the row permutation,
    ``sign`` the permutation sign, and ``singular_at`` the first elimination
    step with a vanishing pivot (None if the matrix is nonsingular).
    """
    lu = a.copy()
    n = lu.shape[0]
    perm = np.arange(n)
    sign = 1.0
    scale = max(1e-300, float(np.max(np.abs(lu))))
    singular_at = None
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= SINGULARITY_RTOL * scale:
            if raise_on_singular:
                raise SingularMatrixError(
                    f"matrix is singular to working precision at pivot {k} "
                    f"(|pivot|={abs(lu[p, k]):.3e}, scale={scale:.3e})",
                    pivot_index=k,
                )
            singular_at = k
            break
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
        if k + 1 < n:
            scale = max(scale, float(np.max(np.abs(lu[k + 1:, k + 1:]))))
    return lu, perm, sign, singular_at


def determinant(m) -> float:
    """Determinant via LU with partial pivoting; sign is exact.

    A matrix that is singular to working precision gets determinant 0.0.
    """
    a = as_matrix(m, "determinant input")
    _require_square(a, "determinant input")
    lu, _, sign, singular_at = _lu(a, raise_on_singular=False)
    if singular_at is not None:
        return 0.0
    return float(sign * np.prod(np.diag(lu)))


def solve_linear(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` for square nonsingular ``a``.

    Raises SingularMatrixError (carrying the failing pivot index) when a
    pivot falls below ``SINGULARITY_RTOL`` times the matrix scale.  ``b`` may
    be a vector or a matrix of right-hand sides.
    """
    a = as_matrix(a, "coefficient matrix")
    _require_square(a, "coefficient matrix")
    rhs = np.asarray(b, dtype=float)
    vector_rhs = rhs.ndim == 1
    if vector_rhs:
        rhs = rhs[:, None]
    if rhs.shape[0] != a.shape[0]:
        raise DimensionError(
            f"right-hand side has {rhs.shape[0]} rows, expected {a.shape[0]}"
        )
    if not np.all(np.isfinite(rhs)):
        raise ValidationError("right-hand side contains non-finite entries")
    lu, perm, _, _ = _lu(a, raise_on_singular=True)
    n = a.shape[0]
    x = rhs[perm].copy()
    for k in range(1, n):  # forward substitution, unit lower triangle
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):  # back substitution
        x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
    return x[:, 0] if vector_rhs else x


def inverse(a) -> np.ndarray:
    """Matrix inverse via :func:`solve_linear` against the identity."""
    a = as_matrix(a, "inverse input")
    _require_square(a, "inverse input")
    return solve_linear(a, np.eye(a.shape[0]))


def thin_svd(m):
    """Thin SVD: returns ``(u, s, v)`` with ``m = u @ diag(s) @ v.T``.

    ``s`` is non-increasing; ``u`` and ``v`` have orthonormal columns.
    Backed by LAPACK through numpy; only the contract here is fixed.
    """
    a = as_matrix(m, "svd input")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return u, s, vh.T


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR of a Gaussian sample.

    The R-diagonal sign fix makes the distribution exactly Haar and the
    output deterministic for a given generator state.
    """
    if n < 1:
        raise DimensionError("orthogonal dimension must be >= 1")
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r).copy()
    d[d == 0.0] = 1.0
    return q * np.sign(d)
