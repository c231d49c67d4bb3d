"""Dense linear programming subsolver.

Problems are desk scale (a handful of structural variables, up to a few
thousand inequality rows), so the implementation favours exactness,
determinism and auditability:

* two-phase revised simplex over the computational standard form
  ``min c.z  s.t.  A z = b, z >= 0`` with an explicit basis inverse,
* entering variable by most-negative reduced cost with lowest-index
  tie-breaking, switching to Bland's rule after a degenerate stall so the
  method cannot cycle; artificials are pivoted out after phase 1,
* problems with many rows and few free variables are solved through their
  standard-form dual (whose row count equals the variable count); the primal
  solution is read off the optimal simplex multipliers.

Identical inputs take identical pivot paths, so solutions are bitwise
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionError, InternalConsistencyError

_FEAS_RTOL = 1e-9
_RC_RTOL = 1e-10
_PIVOT_TOL = 1e-11
_TIE_TOL = 1e-12
_STALL_LIMIT = 50
_REFACTOR_EVERY = 128


@dataclass(frozen=True)
class LinearProgram:
    """Maximize ``objective @ x`` subject to ``a @ x <= b`` and optional
    per-variable bounds (entries may be ``-inf``/``+inf``)."""

    objective: np.ndarray
    a: np.ndarray
    b: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = linalg.as_vector(self.objective, "objective")
        a = linalg.as_matrix(self.a, "constraint matrix")
        b = linalg.as_vector(self.b, "constraint rhs")
        if a.shape[0] != b.shape[0]:
            raise DimensionError(
                f"constraint matrix has {a.shape[0]} rows, rhs has {b.shape[0]}"
            )
        if a.shape[1] != c.shape[0]:
            raise DimensionError(
                f"constraint matrix has {a.shape[1]} columns, objective has {c.shape[0]}"
            )
        lo = self._bound(self.lower, c.shape[0], -np.inf, "lower bounds")
        hi = self._bound(self.upper, c.shape[0], np.inf, "upper bounds")
        if np.any(lo > hi):
            raise DimensionError("a lower bound exceeds its upper bound")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @staticmethod
    def _bound(raw, n, default, name):
        if raw is None:
            return np.full(n, default)
        arr = np.asarray(raw, dtype=float)
        if arr.shape != (n,):
            raise DimensionError(f"{name} must have length {n}")
        if np.any(np.isnan(arr)):
            raise DimensionError(f"{name} contain NaN")
        return arr


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective_value: float
    ray: np.ndarray | None = None


class _Tableau:
    """Revised simplex state for ``min cost . z, a_ext z = b, z >= 0``."""

    def __init__(self, a_ext: np.ndarray, b: np.ndarray, basis: np.ndarray):
        self.a = a_ext
        self.b = b
        self.basis = basis.copy()
        self.b_inv = np.linalg.inv(a_ext[:, basis])
        self.xb = self.b_inv @ b
        self.pivots = 0

    def refactor(self):
        self.b_inv = np.linalg.inv(self.a[:, self.basis])
        self.xb = self.b_inv @ self.b

    def pivot(self, row: int, col: int):
        d = self.b_inv @ self.a[:, col]
        piv = d[row]
        self.b_inv[row] /= piv
        others = np.arange(self.b_inv.shape[0]) != row
        self.b_inv[others] -= np.outer(d[others], self.b_inv[row])
        self.basis[row] = col
        self.xb = self.b_inv @ self.b
        self.pivots += 1
        if self.pivots % _REFACTOR_EVERY == 0:
            self.refactor()


def _pivot_loop(tab: _Tableau, cost: np.ndarray, allowed: np.ndarray):
    """Run simplex pivots to optimality or unboundedness.

    Returns ("optimal", None) or ("unbounded", (entering_col, direction)).
    """
    m, n_total = tab.a.shape
    tol_rc = _RC_RTOL * max(1.0, float(np.max(np.abs(cost))))
    bland = False
    stall = 0
    max_iter = 400 * (m + n_total) + 2000
    for _ in range(max_iter):
        y = cost[tab.basis] @ tab.b_inv
        rc = cost - y @ tab.a
        candidates = np.nonzero(allowed & (rc < -tol_rc))[0]
        if candidates.size == 0:
            return "optimal", None
        if bland:
            j = int(candidates[0])
        else:
            vals = rc[candidates]
            j = int(candidates[np.nonzero(vals <= vals.min() + _TIE_TOL)[0][0]])
        d = tab.b_inv @ tab.a[:, j]
        pos = np.nonzero(d > _PIVOT_TOL)[0]
        if pos.size == 0:
            return "unbounded", (j, d)
        ratios = np.maximum(tab.xb[pos] / d[pos], 0.0)
        theta = ratios.min()
        ties = pos[np.nonzero(ratios <= theta + _TIE_TOL * max(1.0, theta))[0]]
        # leaving row: smallest basis-variable index among ties (Bland)
        row = int(ties[np.argmin(tab.basis[ties])])
        if theta <= _TIE_TOL:
            stall += 1
            if stall > _STALL_LIMIT:
                bland = True
        else:
            stall = 0
        tab.pivot(row, j)
    raise InternalConsistencyError("simplex failed to terminate within iteration cap")


def _purge_artificials(tab: _Tableau, n_real: int) -> bool:
    """Pivot basic artificials out of the basis after a feasible phase 1.

    Returns False when some artificial sits on a redundant row (no real
    column can replace it); callers either know that cannot happen or fall
    back to another formulation.
    """
    for row in range(tab.basis.shape[0]):
        if tab.basis[row] < n_real:
            continue
        coeffs = tab.b_inv[row] @ tab.a[:, :n_real]
        pivots = np.nonzero(np.abs(coeffs) > 1e-9)[0]
        chosen = -1
        for j in pivots:
            if j not in tab.basis[: tab.basis.shape[0]]:
                chosen = int(j)
                break
        if chosen < 0:
            return False
        tab.pivot(row, chosen)
    return True


def _solve_standard(cost, a, b, strict_rows: bool):
    """Two-phase simplex for ``min cost . z  s.t.  a z = b, z >= 0``.

    Returns ``(status, z, multipliers, value, ray)``.  ``multipliers`` are
    the simplex multipliers of the final basis expressed against the *input*
    row orientation; ``ray`` is a z-space unbounded direction.  ``status``
    may additionally be "redundant" when ``strict_rows`` is False and the
    row system is rank deficient.
    """
    cost = np.asarray(cost, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape

    flip = np.where(b < 0.0, -1.0, 1.0)
    a_f = a * flip[:, None]
    b_f = b * flip

    a_ext = np.hstack([a_f, np.eye(m)])
    tab = _Tableau(a_ext, b_f, np.arange(n, n + m))

    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    status, _ = _pivot_loop(tab, cost1, np.ones(n + m, dtype=bool))
    if status != "optimal":
        raise InternalConsistencyError("phase-1 objective cannot be unbounded")
    feas_gap = float(cost1[tab.basis] @ np.maximum(tab.xb, 0.0))
    if feas_gap > _FEAS_RTOL * max(1.0, float(np.max(np.abs(b)))):
        return "infeasible", None, None, np.nan, None

    if not _purge_artificials(tab, n):
        if strict_rows:
            raise InternalConsistencyError(
                "slack-equipped system unexpectedly rank deficient"
            )
        return "redundant", None, None, np.nan, None

    cost2 = np.concatenate([cost, np.zeros(m)])
    allowed = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    status, extra = _pivot_loop(tab, cost2, allowed)
    if status == "unbounded":
        j, d = extra
        ray = np.zeros(n + m)
        ray[j] = 1.0
        ray[tab.basis] -= d
        return "unbounded", None, None, np.nan, ray[:n]

    z = np.zeros(n)
    real = tab.basis < n
    z[tab.basis[real]] = np.maximum(tab.xb[real], 0.0)
    y = (cost2[tab.basis] @ tab.b_inv) * flip
    return "optimal", z, y, float(cost @ z), None


def _solve_direct(p: LinearProgram) -> LpSolution:
    """Standard-form conversion with variable shifting/splitting."""
    c, a, b = p.objective, p.a, p.b
    lo, hi = p.lower, p.upper
    n = c.shape[0]

    cols = []          # (var_index, sign) per standard-form structural column
    offsets = np.zeros(n)
    extra_rows = []    # (structural col, bound) for finite two-sided ranges
    for i in range(n):
        if np.isfinite(lo[i]):
            offsets[i] = lo[i]
            cols.append((i, 1.0))
            if np.isfinite(hi[i]):
                extra_rows.append((len(cols) - 1, hi[i] - lo[i]))
        elif np.isfinite(hi[i]):
            offsets[i] = hi[i]
            cols.append((i, -1.0))
        else:
            cols.append((i, 1.0))
            cols.append((i, -1.0))

    n_struct = len(cols)
    a_struct = np.zeros((a.shape[0], n_struct))
    c_struct = np.zeros(n_struct)
    for jj, (i, sign) in enumerate(cols):
        a_struct[:, jj] = sign * a[:, i]
        c_struct[jj] = sign * c[i]
    b_shift = b - a @ offsets

    rows = [a_struct]
    rhs = [b_shift]
    for jj, bound in extra_rows:
        row = np.zeros(n_struct)
        row[jj] = 1.0
        rows.append(row[None, :])
        rhs.append(np.array([bound]))
    a_all = np.vstack(rows)
    b_all = np.concatenate(rhs)
    m_all = a_all.shape[0]

    # slacks turn every row into an equality; the identity block keeps the
    # row system full rank, so strict_rows holds
    a_eq = np.hstack([a_all, np.eye(m_all)])
    c_eq = np.concatenate([-c_struct, np.zeros(m_all)])  # maximize -> minimize

    status, z, _, _, ray = _solve_standard(c_eq, a_eq, b_all, strict_rows=True)
    if status == "infeasible":
        return LpSolution(status="infeasible", x=None, objective_value=np.nan)
    if status == "unbounded":
        x_ray = np.zeros(n)
        for jj, (i, sign) in enumerate(cols):
            x_ray[i] += sign * ray[jj]
        return LpSolution(status="unbounded", x=None, objective_value=np.nan, ray=x_ray)

    x = offsets.copy()
    for jj, (i, sign) in enumerate(cols):
        x[i] += sign * z[jj]
    return _finish(p, x)


def _solve_via_dual(p: LinearProgram) -> LpSolution | None:
    """All-free-variable problems with many rows: solve the standard-form dual
    ``min b.lam  s.t.  a.T lam = c, lam >= 0`` and read the primal point off
    the optimal multipliers.  Returns None when the direct path must decide
    (dual infeasible / rank-deficient, or an unusable multiplier vector).
    """
    status, _, y, _, _ = _solve_standard(p.b, p.a.T, p.objective, strict_rows=False)
    if status in ("infeasible", "redundant"):
        return None  # primal unbounded or infeasible; let the direct path tell
    if status == "unbounded":
        return LpSolution(status="infeasible", x=None, objective_value=np.nan)
    slack = p.b - p.a @ y
    if float(slack.min()) < -1e-8 * (1.0 + float(np.max(np.abs(p.b)))):
        return None
    return _finish(p, y)


def _finish(p: LinearProgram, x: np.ndarray) -> LpSolution:
    violation = float(np.max(p.a @ x - p.b))
    if violation > 1e-8 * (1.0 + float(np.max(np.abs(p.b)))):
        raise InternalConsistencyError(
            f"optimal point violates a constraint by {violation:.3e}"
        )
    return LpSolution(status="optimal", x=x, objective_value=float(p.objective @ x))


def solve_lp(p: LinearProgram) -> LpSolution:
    """Solve ``max c.x  s.t.  a x <= b`` plus optional variable bounds.

    Statuses ``infeasible`` and ``unbounded`` are ordinary returns; an
    unbounded solution carries a certifying ray.  The pivot rule is fixed,
    so identical inputs produce bitwise-identical solutions.
    """
    all_free = bool(np.all(np.isneginf(p.lower)) and np.all(np.isposinf(p.upper)))
    m, n = p.a.shape
    if all_free and m >= max(3 * n, n + 1):
        sol = _solve_via_dual(p)
        if sol is not None:
            return sol
    return _solve_direct(p)


def in_convex_hull(point, generators, tol: float = 1e-9) -> bool:
    """Feasibility test: is ``point`` a convex combination of ``generators``?

    Solves the feasibility program ``G lam = p, sum(lam) = 1, lam >= 0`` with
    the equalities split into paired inequalities at slack ``tol``.
    ``generators`` holds one point per row.
    """
    g = linalg.as_matrix(generators, "generators")
    x = linalg.as_vector(point, "point")
    if g.shape[1] != x.shape[0]:
        raise DimensionError(
            f"point has dimension {x.shape[0]}, generators have {g.shape[1]}"
        )
    k = g.shape[0]
    gt = g.T  # (dim, k)
    ones = np.ones((1, k))
    a = np.vstack([gt, -gt, ones, -ones])
    b = np.concatenate([x + tol, -x + tol, [1.0 + tol], [-1.0 + tol]])
    prog = LinearProgram(
        objective=np.zeros(k),
        a=a,
        b=b,
        lower=np.zeros(k),
        upper=None,
    )
    return solve_lp(prog).status == "optimal"
