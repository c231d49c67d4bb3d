"""Minimum-volume enclosing simplex solver.

The data are reduced to chart coordinates with an isometric affine chart
(so chart volumes equal ambient volumes), the enclosing simplex is held in
half-space form ``(H, g)``, and volume minimization becomes maximization of
``|det H|`` subject to the linear enclosure constraints

    H.T @ theta_k + g >= 0          (k = 1..L)
    1 - g.sum() - (H @ 1) @ theta_k >= 0.

``det H`` is linear in any one column of ``H`` (cofactor expansion), and
column ``i`` of ``H`` appears in the constraints only through the pairs
``(h_i . theta_k + g_i)``, so fixing everything else turns the update of
``(h_i, g_i)`` into two linear programs (maximize and minimize the
determinant); keeping whichever solution has the larger magnitude can never
shrink ``|det H|`` because the incumbent is feasible for both.  Updates
cycle over the columns; each cycle ends with a volume-neutral translation
that pulls every facet onto the data.  The problem is NP-hard in general
and this is a deterministic local scheme; restarts (best of k by final
volume) trade time for robustness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, lp
from .errors import (
    AffineDimensionError,
    DegenerateSimplexError,
    DimensionError,
    DomainError,
    InternalConsistencyError,
    ValidationError,
)
from .geometry import (
    AffineChart,
    PolyhedralSimplex,
    Simplex,
    equiangular_directions,
    fit_data_chart,
    membership_margins,
    polyhedral_volume,
    to_polyhedral,
    to_vertices,
)

INIT_STRATEGIES = ("greedy_volume_max", "regular_inflated")

_DILATION = 1.05


@dataclass(frozen=True)
class MvesConfig:
    """Solver knobs.  ``max_cycles`` defaults to ``50 * n`` at solve time;
    convergence is declared when ``|det H|`` changes by less than
    ``rel_tol`` (relatively) over a full cycle."""

    max_cycles: int | None = None
    rel_tol: float = 1e-8
    containment_tol: float = 1e-7
    init_strategy: str = "greedy_volume_max"
    restarts: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.max_cycles is not None and self.max_cycles < 1:
            raise ValidationError("max_cycles must be >= 1")
        if self.rel_tol <= 0:
            raise ValidationError("rel_tol must be positive")
        if self.containment_tol <= 0:
            raise ValidationError("containment_tol must be positive")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValidationError(
                f"init_strategy must be one of {INIT_STRATEGIES}"
            )
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")


@dataclass(frozen=True, eq=False)
class MvesResult:
    """Solve outcome.  ``volume`` is the simplex volume (chart and ambient
    agree through the isometric chart); ``det_history`` records ``|det H|``
    after each alternation cycle."""

    estimated_endmembers: Simplex
    chart_simplex: PolyhedralSimplex
    chart: AffineChart
    volume: float
    cycles_used: int
    converged: bool
    all_points_enclosed: bool
    det_history: tuple[float, ...]


def _affine_distances(pts: np.ndarray, anchor: np.ndarray,
                      basis: list[np.ndarray]) -> np.ndarray:
    """Distance of each point to the affine set anchor + span(basis)."""
    rel = pts - anchor
    if basis:
        q, _ = np.linalg.qr(np.stack(basis, axis=1))
        rel = rel - (rel @ q) @ q.T
    return np.linalg.norm(rel, axis=1)


def _greedy_vertices(thetas: np.ndarray, n: int,
                     rng: np.random.Generator | None) -> np.ndarray:
    """n data points chosen by successive farthest-point from the current
    affine span; a perturbed restart starts from a random data point."""
    if rng is None:
        first = int(np.argmax(np.linalg.norm(thetas - thetas.mean(axis=0), axis=1)))
    else:
        first = int(rng.integers(thetas.shape[0]))
    chosen = [first]
    basis: list[np.ndarray] = []
    for _ in range(n - 1):
        dist = _affine_distances(thetas, thetas[chosen[0]], basis)
        dist[chosen] = -1.0
        nxt = int(np.argmax(dist))
        if dist[nxt] <= 1e-12:
            raise AffineDimensionError(
                f"data spans fewer than {n - 1} dimensions", observed_rank=len(basis)
            )
        chosen.append(nxt)
        basis.append(thetas[nxt] - thetas[chosen[0]])
    return thetas[chosen]


def _dilate_until_enclosing(vertices: np.ndarray, thetas: np.ndarray) -> PolyhedralSimplex:
    verts = vertices.copy()
    for _ in range(1000):
        poly = to_polyhedral(Simplex(vertices=verts))
        if float(membership_margins(poly, thetas).min()) >= 0.0:
            return poly
        center = verts.mean(axis=0)
        verts = center + _DILATION * (verts - center)
    raise InternalConsistencyError("initial simplex dilation failed to enclose the data")


def _initial_simplex(thetas: np.ndarray, n: int, strategy: str,
                     rng: np.random.Generator | None) -> PolyhedralSimplex:
    if strategy == "greedy_volume_max":
        return _dilate_until_enclosing(_greedy_vertices(thetas, n, rng), thetas)
    center = thetas.mean(axis=0)
    radius = float(np.linalg.norm(thetas - center, axis=1).max())
    if radius <= 0.0:
        raise AffineDimensionError("data are a single point", observed_rank=0)
    dirs = equiangular_directions(n)
    if rng is not None:
        dirs = dirs @ linalg.random_orthogonal(n - 1, rng).T
    verts = center + (n - 1) * _DILATION * radius * dirs
    return _dilate_until_enclosing(verts, thetas)


def initialize_simplex(thetas, n: int, strategy: str = "greedy_volume_max",
                       seed: int = 0) -> PolyhedralSimplex:
    """Data-enclosing starting simplex in chart coordinates.

    ``greedy_volume_max`` picks n data points by farthest-point selection
    and dilates about their centroid (factor 1.05 per step) until the data
    are enclosed; ``regular_inflated`` centers a regular simplex on the data
    centroid, circumscribing the data ball with a 5% margin.  ``seed`` only
    matters for perturbed restarts inside :func:`solve_mves`; the direct
    call is deterministic in the data.
    """
    t = linalg.as_matrix(thetas, "chart points")
    if strategy not in INIT_STRATEGIES:
        raise ValidationError(f"init strategy must be one of {INIT_STRATEGIES}")
    if n < 2 or t.shape[1] != n - 1:
        raise DimensionError(
            f"chart points must have dimension n-1={n - 1}, got {t.shape[1]}"
        )
    del seed  # the unperturbed strategies are deterministic in the data
    return _initial_simplex(t, n, strategy, rng=None)


def _column_cofactors(h: np.ndarray, col: int) -> np.ndarray:
    """Cofactor vector of column ``col``: det(H) = cof . H[:, col]."""
    k = h.shape[0]
    if k == 1:
        return np.ones(1)
    cof = np.empty(k)
    rows = np.arange(k)
    cols = np.delete(np.arange(k), col)
    for r in range(k):
        minor = h[np.ix_(np.delete(rows, r), cols)]
        cof[r] = (-1.0) ** (r + col) * linalg.determinant(minor)
    return cof


def _check_enclosure(h, g, thetas, tol):
    lead = thetas @ h + g
    last = 1.0 - lead.sum(axis=1)  # = 1 - g.sum() - (H @ 1) @ theta
    worst = min(float(lead.min()), float(last.min()))
    if worst < -tol:
        raise InternalConsistencyError(
            f"enclosure violated by {-worst:.3e} during alternation"
        )


def _facet_cycle(thetas, h, g, a_mat, zeros):
    """One pass of the two-LP facet-row updates, columns 1..n-1.

    After each update the offset is pulled onto the data: the update LP's
    objective has no offset term, so its optimal face contains a segment of
    offsets and the data-touching end is the deterministic representative
    that leaves the other facets maximal room.
    """
    k = h.shape[0]
    for i in range(k):
        cof = _column_cofactors(h, i)
        lead = thetas @ h + g
        # clamping keeps the system feasible under rounding-level enclosure
        # debt (the incumbent pair value is then 0 at the binding points)
        upper = np.maximum(1.0 - lead.sum(axis=1) + lead[:, i], 0.0)
        b_vec = np.concatenate([zeros, upper])
        obj = np.append(cof, 0.0)
        best_v, best_det = None, abs(linalg.determinant(h))
        for sign in (1.0, -1.0):
            sol = lp.solve_lp(lp.LinearProgram(objective=sign * obj, a=a_mat, b=b_vec))
            if sol.status != "optimal":
                raise InternalConsistencyError(
                    f"facet update LP returned {sol.status} from a feasible incumbent"
                )
            cand_det = sign * sol.objective_value
            if best_v is None or abs(cand_det) > best_det:
                best_v, best_det = sol.x, abs(cand_det)
        h[:, i] = best_v[:k]
        g[i] = -(thetas @ h[:, i]).min()
    return h, g


class _JointPolisher:
    """Trust-region sequential-LP polish over all of (H, g) at once.

    The enclosure constraints are jointly linear in (H, g); only the
    determinant objective is nonlinear.  Each step maximizes the cofactor
    linearization of |det H| inside an inf-norm trust box, accepts on true
    improvement, and shrinks the box otherwise.  Facet-at-a-time updates
    cannot rotate the simplex (a rotation changes every facet at once and
    single-facet moves through it always pass a larger volume), so they
    stall a fraction short of optima on ball-like data; this joint step
    supplies exactly those directions.
    """

    def __init__(self, thetas: np.ndarray, k: int):
        self.k = k
        self.nv = k * k + k
        n_pts = thetas.shape[0]
        blocks = []
        rhs = []
        for i in range(k):  # -(h_i . theta + g_i) <= 0
            a = np.zeros((n_pts, self.nv))
            a[:, i * k:(i + 1) * k] = -thetas
            a[:, k * k + i] = -1.0
            blocks.append(a)
            rhs.append(np.zeros(n_pts))
        a = np.zeros((n_pts, self.nv))  # sum of facet pairs <= 1
        for i in range(k):
            a[:, i * k:(i + 1) * k] = thetas
            a[:, k * k + i] = 1.0
        blocks.append(a)
        rhs.append(np.ones(n_pts))
        self.a_data = np.vstack(blocks)
        self.b_data = np.concatenate(rhs)
        self.eye = np.eye(self.nv)

    def _pack(self, h, g):
        return np.concatenate([h.T.ravel(), g])

    def _unpack(self, x):
        k = self.k
        return x[:k * k].reshape(k, k).T.copy(), x[k * k:].copy()

    def _repair(self, thetas, h, g):
        """Exact enclosure restoration for an LP-tolerance-level violation:
        pull the offsets onto the data, then rescale uniformly until the sum
        facet clears every point (a rounding-scale volume concession)."""
        g = -(thetas @ h).min(axis=0)
        debt = float((thetas @ h + g).sum(axis=1).max()) - 1.0
        if debt > 0.0:
            h = h * ((1.0 - 1e-15) / (1.0 + debt))
            g = -(thetas @ h).min(axis=0)
        return h, g

    def polish(self, thetas, h, g):
        k = self.k
        det = linalg.determinant(h)
        tau = 0.5
        a_full = np.vstack([self.a_data, self.eye, -self.eye])
        for _ in range(200):
            if tau < 1e-13:
                break
            cof = det * np.linalg.inv(h).T
            sign = 1.0 if det >= 0 else -1.0
            obj = np.concatenate([(sign * cof).T.ravel(), np.zeros(k)])
            cur = self._pack(h, g)
            b_full = np.concatenate([self.b_data, cur + tau, -(cur - tau)])
            sol = lp.solve_lp(lp.LinearProgram(objective=obj, a=a_full, b=b_full))
            if sol.status != "optimal":
                tau *= 0.25
                continue
            h_new, g_new = self._repair(thetas, *self._unpack(sol.x))
            det_new = linalg.determinant(h_new)
            if abs(det_new) > abs(det) * (1.0 + 1e-15):
                h, g, det = h_new, g_new, det_new
                tau = min(tau * 1.5, 2.0)
            else:
                tau *= 0.25
        return h, g


def _alternate(thetas: np.ndarray, poly: PolyhedralSimplex, n: int,
               cfg: MvesConfig):
    h = poly.h.copy()
    g = poly.g.copy()
    k = n - 1
    max_cycles = cfg.max_cycles if cfg.max_cycles is not None else 50 * n
    theta_aug = np.hstack([thetas, np.ones((thetas.shape[0], 1))])
    a_mat = np.vstack([-theta_aug, theta_aug])
    zeros = np.zeros(thetas.shape[0])
    polisher = _JointPolisher(thetas, k)

    history = []
    converged = False
    cycles = 0
    stalled = False
    while cycles < max_cycles:
        cycles += 1
        det_start = abs(linalg.determinant(h))
        h, g = _facet_cycle(thetas, h, g, a_mat, zeros)
        det_end = abs(linalg.determinant(h))
        if abs(det_end - det_start) < cfg.rel_tol * max(det_start, 1e-300):
            if stalled:
                converged = True
                history.append(det_end)
                break
            # facet moves are exhausted; liberate the joint directions once
            h, g = polisher.polish(thetas, h, g)
            stalled = True
        else:
            stalled = False
        _check_enclosure(h, g, thetas, cfg.containment_tol)
        history.append(abs(linalg.determinant(h)))
    _check_enclosure(h, g, thetas, cfg.containment_tol)
    return h, g, cycles, converged, tuple(history)


def solve_mves(pixels, n_endmembers: int, config: MvesConfig | None = None) -> MvesResult:
    """Best-of-restarts minimum-volume enclosing simplex of the pixels.

    Pixels are rows in ambient space and must affinely span exactly
    ``n_endmembers - 1`` dimensions (noiseless model).  See
    :func:`solve_mves_runs` for the individual restart results.
    """
    runs = solve_mves_runs(pixels, n_endmembers, config)
    best = runs[0]
    for r in runs[1:]:
        if r.volume < best.volume:
            best = r
    return best


def solve_mves_runs(pixels, n_endmembers: int,
                    config: MvesConfig | None = None) -> list[MvesResult]:
    """All restart results, in restart order.

    Restart 0 runs the configured initialization as-is; later restarts
    perturb it (random greedy start point / randomly rotated regular
    simplex) with generators spawned from the seed, so the whole family is
    deterministic in ``(pixels, n_endmembers, config)``.
    """
    cfg = config or MvesConfig()
    pts = linalg.as_matrix(pixels, "pixels")
    n = int(n_endmembers)
    if n < 2:
        raise DimensionError("need at least 2 endmembers")
    chart = fit_data_chart(pts, n)
    thetas = chart.to_chart(pts)

    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    results = []
    for j in range(cfg.restarts):
        rng = np.random.Generator(np.random.PCG64(children[j])) if j > 0 else None
        poly0 = _initial_simplex(thetas, n, cfg.init_strategy, rng)
        h, g, cycles, converged, history = _alternate(thetas, poly0, n, cfg)
        chart_simplex = PolyhedralSimplex(h=h, g=g)
        chart_vertices = to_vertices(chart_simplex)
        ambient = Simplex(vertices=chart.to_ambient(chart_vertices.vertices))
        margins = membership_margins(chart_simplex, thetas)
        results.append(MvesResult(
            estimated_endmembers=ambient,
            chart_simplex=chart_simplex,
            chart=chart,
            volume=polyhedral_volume(chart_simplex),
            cycles_used=cycles,
            converged=converged,
            all_points_enclosed=bool(margins.min() >= -cfg.containment_tol),
            det_history=history,
        ))
    return results


def tangency_points(p: PolyhedralSimplex, r: float) -> np.ndarray:
    """The n candidate contact points between the centered radius-``r``
    sphere and the simplex boundary, one per facet:
    ``-r h_i / |h_i|`` for the leading facets and ``r H1 / |H1|`` for the
    last.  Each returned point has norm exactly ``r``."""
    if r <= 0.0:
        raise DomainError("sphere radius must be positive")
    h = p.h
    cols = np.linalg.norm(h, axis=0)
    hsum = h.sum(axis=1)
    hsum_norm = float(np.linalg.norm(hsum))
    if float(cols.min()) <= 1e-300 or hsum_norm <= 1e-300:
        raise DegenerateSimplexError("half-space matrix has a vanishing facet normal")
    pts = np.vstack([(-r * h / cols).T, r * hsum / hsum_norm])
    return pts
