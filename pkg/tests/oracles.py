"""Independent oracles used by the tests.

These deliberately avoid the library's own computation paths: determinants
by recursive cofactor expansion, simplex volumes through the Cayley-Menger
determinant, and LP optima by exhaustive vertex enumeration.
"""

import itertools
import math

import numpy as np


def cofactor_determinant(m) -> float:
    """Recursive cofactor expansion along the first row."""
    a = np.asarray(m, dtype=float)
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * a[0, j] * cofactor_determinant(minor)
    return total


def cayley_menger_volume(points) -> float:
    """Simplex volume from squared pairwise distances only."""
    p = np.asarray(points, dtype=float)
    m = p.shape[0]  # number of vertices, simplex dimension m-1
    d2 = ((p[:, None, :] - p[None, :, :]) ** 2).sum(axis=2)
    cm = np.ones((m + 1, m + 1))
    cm[0, 0] = 0.0
    cm[1:, 1:] = d2
    det = np.linalg.det(cm)
    k = m - 1
    vol2 = (-1.0) ** m * det / (2.0 ** k * math.factorial(k) ** 2)
    return math.sqrt(max(vol2, 0.0))


def enumerate_lp_maximum(c, a, b, lower=None, upper=None):
    """Exhaustive vertex enumeration for ``max c.x  s.t.  a x <= b`` with
    optional bounds.  Returns (status, best_value); status is "optimal",
    "infeasible" (no feasible vertex; only valid when the feasible set is
    known to be bounded) -- callers must keep the system small.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = c.shape[0]
    rows = [a]
    rhs = [b]
    if lower is not None:
        lo = np.asarray(lower, dtype=float)
        for i in range(n):
            if np.isfinite(lo[i]):
                r = np.zeros(n)
                r[i] = -1.0
                rows.append(r[None, :])
                rhs.append(np.array([-lo[i]]))
    if upper is not None:
        hi = np.asarray(upper, dtype=float)
        for i in range(n):
            if np.isfinite(hi[i]):
                r = np.zeros(n)
                r[i] = 1.0
                rows.append(r[None, :])
                rhs.append(np.array([hi[i]]))
    full_a = np.vstack(rows)
    full_b = np.concatenate(rhs)
    m = full_a.shape[0]

    combos = list(itertools.combinations(range(m), n))
    mats = np.stack([full_a[list(idx)] for idx in combos])
    rhss = np.stack([full_b[list(idx)] for idx in combos])
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-10
    best = -np.inf
    found = False
    if ok.any():
        sols = np.linalg.solve(mats[ok], rhss[ok][..., None])[..., 0]
        feas = (sols @ full_a.T - full_b <= 1e-8).all(axis=1)
        if feas.any():
            found = True
            best = float((sols[feas] @ c).max())
    return ("optimal" if found else "infeasible"), best
