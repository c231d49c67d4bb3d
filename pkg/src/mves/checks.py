"""Executable checks of the identifiability theory behind minimum-volume
enclosing-simplex unmixing.

Each check runs a finite, seeded experiment against a mathematical
statement (ball-circumscribing regular simplices, purity-region geometry,
recovery and non-recovery regimes of the volume-minimization criterion) and
returns a machine-readable :class:`CheckOutcome`.  Checks never raise on a
mathematical failure; solver non-convergence and violated assertions are
reported as failed outcomes.  Statements that only forbid uniqueness (the
sub-threshold regime) are reported with statistics rather than asserted,
because a local solver is free to land anywhere among equally small
simplices.

A failed solver-backed uniqueness check first escalates to four times the
requested restarts, separating local non-convergence from genuine
non-identifiability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import linalg
from .errors import MvesError
from .geometry import (
    Simplex,
    membership_margins,
    polyhedral_contains,
    regular_simplex,
    rotate_in_chart,
    simplex_volume,
    to_polyhedral,
    unit_simplex_vertices,
)
from .purity import (
    EdgePixelSpec,
    _chart,
    _unit_directions,
    alpha_star,
    chart_sphere_radius,
    edge_pixels,
    identifiability_threshold,
    min_purity,
    sample_region,
)
from .solver import MvesConfig, solve_mves_runs


@dataclass(frozen=True)
class CheckOutcome:
    """One executed check: ``passed`` holds iff the stated predicate held
    within ``tolerance``; ``observed``/``expected`` carry the key numbers."""

    name: str
    passed: bool
    observed: tuple[float, ...]
    expected: tuple[float, ...]
    tolerance: float
    details: str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "observed": list(self.observed),
            "expected": list(self.expected),
            "tolerance": self.tolerance,
            "details": self.details,
        }


def ball_mves_volume(n: int, radius: float) -> float:
    """Minimal volume of a simplex enclosing the radius-``radius`` ball in
    R^(n-1): ``n^(n/2) (n-1)^((n-1)/2) radius^(n-1) / (n-1)!``, attained
    exactly by the regular circumscribing simplex."""
    return (n ** (n / 2.0) * (n - 1) ** ((n - 1) / 2.0)
            * radius ** (n - 1) / math.factorial(n - 1))


def vertex_rms(estimate: np.ndarray, truth: np.ndarray) -> float:
    """RMS vertex distance under the best row pairing."""
    est = np.asarray(estimate, dtype=float)
    tru = np.asarray(truth, dtype=float)
    cost = ((est[:, None, :] - tru[None, :, :]) ** 2).sum(axis=2)
    rows, cols = linear_sum_assignment(cost)
    return math.sqrt(float(cost[rows, cols].sum()) / est.shape[0])


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def check_fact2_regular_simplex(n: int, radius: float) -> CheckOutcome:
    """The regular simplex circumscribing a ball attains the minimal
    enclosing volume, with every facet tangent to the ball."""
    s = regular_simplex(n, radius)
    vol = simplex_volume(s)
    expected = ball_mves_volume(n, radius)
    rel_err = abs(vol - expected) / expected
    poly = to_polyhedral(s)
    cols = np.linalg.norm(poly.h, axis=0)
    slacks = np.append(
        -radius * cols + poly.g,
        -radius * np.linalg.norm(poly.h.sum(axis=1)) + (1.0 - poly.g.sum()),
    )
    tangency = float(np.max(np.abs(slacks)))
    passed = rel_err <= 1e-9 and tangency < 1e-10
    return CheckOutcome(
        name=f"fact2_regular_simplex_n{n}",
        passed=passed,
        observed=(vol, tangency),
        expected=(expected, 0.0),
        tolerance=1e-9,
        details=(f"volume rel err {rel_err:.3e}, "
                 f"max facet tangency residual {tangency:.3e} at radius {radius:.6g}"),
    )


def check_lemma2_equivalence(n: int, r: float, samples: int, seed: int = 0) -> CheckOutcome:
    """At purity levels up to 1/sqrt(n-1) the purity region is the full
    chart ball (every sphere point stays on the simplex); above it, the
    sphere pokes out of the simplex and sampling finds a violation."""
    rng = _rng(seed)
    chart = _chart(n)
    mu = chart_sphere_radius(n, r)
    dirs = _unit_directions(n - 1, samples, rng)
    pts = (mu * dirs) @ chart.basis.T + 1.0 / n
    min_coord = float(pts.min())
    threshold = identifiability_threshold(n)
    if r <= threshold + 1e-12:
        passed = min_coord >= -1e-10
        expectation = "all sphere points on the simplex (coords >= -1e-10)"
    else:
        passed = min_coord < -1e-6
        expectation = "some sphere point leaves the simplex (coord < -1e-6)"
    return CheckOutcome(
        name=f"lemma2_chart_ball_n{n}_r{r:.4g}",
        passed=passed,
        observed=(min_coord,),
        expected=(0.0,),
        tolerance=1e-10 if r <= threshold + 1e-12 else 1e-6,
        details=f"min sampled coordinate {min_coord:.3e}; {expectation}",
    )


def _solve_all_match(cloud: np.ndarray, n: int, restarts: int, seed: int,
                     rms_tol: float):
    """Run restarts and report the worst vertex RMS against the unit simplex."""
    truth = unit_simplex_vertices(n)
    cfg = MvesConfig(restarts=restarts, seed=seed)
    runs = solve_mves_runs(cloud, n, cfg)
    worst_rms = max(vertex_rms(r.estimated_endmembers.vertices, truth) for r in runs)
    vols = [r.volume for r in runs]
    all_converged = all(r.converged for r in runs)
    return worst_rms, vols, all_converged


def check_theorem3_uniqueness(n: int, r: float, cloud_size: int,
                              restarts: int, seed: int = 0) -> CheckOutcome:
    """Above the threshold the purity region has a unique minimal enclosing
    simplex: the unit simplex.  Every restart on a dense region cloud must
    recover it (vertex RMS < 1e-3, volume sqrt(n)/(n-1)! to 1e-6)."""
    threshold = identifiability_threshold(n)
    name = f"theorem3_uniqueness_n{n}_r{r:.4g}"
    if not (threshold < r <= 1.0):
        raise MvesError(f"r={r} must lie in (1/sqrt({n - 1}), 1]")
    cloud = sample_region(n, r, cloud_size, seed=seed)
    expected_vol = math.sqrt(n) / math.factorial(n - 1)
    try:
        worst_rms, vols, converged = _solve_all_match(cloud, n, restarts, seed, 1e-3)
        if worst_rms >= 1e-3:  # escalate before reporting failure
            worst_rms, vols, converged = _solve_all_match(
                cloud, n, 4 * restarts, seed, 1e-3)
    except MvesError as exc:
        return CheckOutcome(name, False, (), (expected_vol,), 1e-3,
                            f"solver error: {exc}")
    vol_err = max(abs(v - expected_vol) / expected_vol for v in vols)
    passed = worst_rms < 1e-3 and vol_err <= 1e-6 and converged
    return CheckOutcome(
        name=name,
        passed=passed,
        observed=(worst_rms, max(vols)),
        expected=(0.0, expected_vol),
        tolerance=1e-3,
        details=(f"worst vertex RMS {worst_rms:.3e}, volume rel err {vol_err:.3e}, "
                 f"converged={converged}, cloud={cloud_size}, restarts={restarts}"),
    )


def check_theorem1_nonuniqueness(n: int, r: float, rotations: int,
                                 seed: int = 0) -> CheckOutcome:
    """At or below the threshold the purity region equals the chart ball,
    and every rotation of the regular circumscribing simplex encloses it
    with identical volume: a continuum of equally small solutions."""
    name = f"theorem1_nonuniqueness_n{n}_r{r:.4g}"
    if not (min_purity(n) < r <= identifiability_threshold(n) + 1e-12) or n < 3:
        raise MvesError(f"requires n >= 3 and r in (1/sqrt({n}), 1/sqrt({n - 1})]")
    rng = _rng(seed)
    mu = chart_sphere_radius(n, r)
    base = regular_simplex(n, mu)
    base_vol = simplex_volume(base)
    boundary = mu * _unit_directions(n - 1, 4000, rng)
    worst_vol_err = 0.0
    worst_margin = np.inf
    qs = [np.eye(n - 1)] + [linalg.random_orthogonal(n - 1, rng)
                            for _ in range(rotations)]
    for q in qs:
        rotated = rotate_in_chart(base, q)
        worst_vol_err = max(
            worst_vol_err, abs(simplex_volume(rotated) - base_vol) / base_vol)
        margins = membership_margins(to_polyhedral(rotated), boundary)
        worst_margin = min(worst_margin, float(margins.min()))
    passed = worst_vol_err <= 1e-9 and worst_margin >= -1e-9
    return CheckOutcome(
        name=name,
        passed=passed,
        observed=(worst_vol_err, worst_margin),
        expected=(0.0, 0.0),
        tolerance=1e-9,
        details=(f"{rotations} random rotations: volume rel spread "
                 f"{worst_vol_err:.3e}, worst enclosure margin {worst_margin:.3e}"),
    )


def check_prop2_n2(abundance_count: int, seed: int = 0) -> CheckOutcome:
    """For two endmembers the solver recovers exactly the extreme mixing
    coefficients, and the unit simplex is recovered iff both pure pixels
    are present."""
    name = "prop2_two_endmembers"
    rng = _rng(seed)
    alphas = rng.uniform(0.05, 0.95, abundance_count)
    data = np.column_stack([alphas, 1.0 - alphas])

    def endpoints(points):
        runs = solve_mves_runs(points, 2, MvesConfig(seed=seed))
        verts = runs[0].estimated_endmembers.vertices
        return verts[np.argsort(verts[:, 0])]

    try:
        verts = endpoints(data)
        lo, hi = alphas.min(), alphas.max()
        expected = np.array([[lo, 1.0 - lo], [hi, 1.0 - hi]])
        interval_err = float(np.max(np.abs(verts - expected)))
        unit_before = vertex_rms(verts, unit_simplex_vertices(2)) < 1e-9

        pure = np.vstack([data, [[0.0, 1.0], [1.0, 0.0]]])
        verts_pure = endpoints(pure)
        pure_err = float(np.max(np.abs(verts_pure - np.array([[0.0, 1.0], [1.0, 0.0]]))))
    except MvesError as exc:
        return CheckOutcome(name, False, (), (0.0,), 1e-12, f"solver error: {exc}")
    passed = interval_err <= 1e-12 and not unit_before and pure_err <= 1e-12
    return CheckOutcome(
        name=name,
        passed=passed,
        observed=(interval_err, pure_err),
        expected=(0.0, 0.0),
        tolerance=1e-12,
        details=(f"extreme-coefficient recovery err {interval_err:.3e}; "
                 f"unit simplex wrongly recovered without pure pixels: {unit_before}; "
                 f"pure-pixel recovery err {pure_err:.3e}"),
    )


def _conv_p_filler(n: int, alpha: float, count: int,
                   rng: np.random.Generator) -> np.ndarray:
    out = np.zeros((0, n))
    while out.shape[0] < count:
        g = rng.gamma(shape=np.ones(n), scale=1.0, size=(4 * count, n))
        s = g / g.sum(axis=1, keepdims=True)
        keep = s.max(axis=1) <= alpha
        out = np.vstack([out, s[keep]])
    return out[:count]


def check_corollary1(n: int, alpha: float, filler_points: int,
                     seed: int = 0) -> CheckOutcome:
    """Edge-pixel data: recovery of the unit simplex is guaranteed for
    n >= 4 at any valid coefficient, and for n = 3 above 2/3.  Below 2/3
    (n = 3) the outcome is only reported: the theory does not predict where
    a local solver lands."""
    name = f"corollary1_edge_pixels_n{n}_a{alpha:.4g}"
    rng = _rng(seed)
    data = np.vstack([
        edge_pixels(EdgePixelSpec.uniform(n, alpha)),
        _conv_p_filler(n, alpha, filler_points, rng),
    ])
    truth = unit_simplex_vertices(n)

    def attempt(restarts):
        runs = solve_mves_runs(data, n, MvesConfig(restarts=restarts, seed=seed))
        return min(vertex_rms(r.estimated_endmembers.vertices, truth) for r in runs)

    try:
        rms = attempt(1)
        asserted = n >= 4 or alpha > 2.0 / 3.0 + 0.02
        if asserted and rms >= 1e-3:
            rms = attempt(4)
    except MvesError as exc:
        return CheckOutcome(name, False, (), (0.0,), 1e-3, f"solver error: {exc}")
    recovered = rms < 1e-3
    if asserted:
        passed = recovered
        verdict = f"recovery asserted: rms {rms:.3e}"
    elif n == 3 and alpha < 2.0 / 3.0 - 0.02:
        passed = True
        verdict = (f"below-threshold run reported only: recovered={recovered}, "
                   f"rms {rms:.3e}")
    else:
        passed = True
        verdict = f"near-threshold run reported only: recovered={recovered}, rms {rms:.3e}"
    return CheckOutcome(
        name=name,
        passed=passed,
        observed=(rms,),
        expected=(0.0,),
        tolerance=1e-3,
        details=verdict,
    )


def check_lemma6_alpha_star(n: int, r_grid, samples: int, seed: int = 0) -> CheckOutcome:
    """The largest coordinate over the purity region has the closed form
    alpha*(r); the sampled supremum (with the known maximizer included)
    must match it from below within 1e-3 and never exceed it beyond 1e-9."""
    name = f"lemma6_alpha_star_n{n}"
    r_list = [float(r) for r in r_grid]
    worst_over = -np.inf
    worst_under = np.inf
    seq = np.random.SeedSequence(seed).spawn(len(r_list))
    observed = []
    expected = []
    for idx, r in enumerate(r_list):
        target = alpha_star(n, r)
        cloud = sample_region(n, r, samples, seed=int(seq[idx].generate_state(1)[0]))
        s1 = target
        maximizer = np.full(n, (1.0 - s1) / (n - 1))
        maximizer[0] = s1
        cloud = np.vstack([cloud, maximizer])
        sampled = float(cloud.max(axis=1).max())
        observed.append(sampled)
        expected.append(target)
        worst_over = max(worst_over, sampled - target)
        worst_under = min(worst_under, sampled - target)
    passed = worst_over <= 1e-9 and worst_under >= -1e-3
    return CheckOutcome(
        name=name,
        passed=passed,
        observed=tuple(observed),
        expected=tuple(expected),
        tolerance=1e-3,
        details=(f"sampled supremum minus closed form in "
                 f"[{worst_under:.3e}, {worst_over:.3e}] over {len(observed)} levels"),
    )


def default_suite(seed: int = 0) -> list[CheckOutcome]:
    """Run the default check suite (all statements, stock parameters)."""
    sqrt = math.sqrt
    outcomes = [
        check_fact2_regular_simplex(2, 0.5),
        check_fact2_regular_simplex(3, 1.0 / sqrt(6.0)),
        check_fact2_regular_simplex(4, 0.3),
        check_fact2_regular_simplex(5, 0.25),
        check_fact2_regular_simplex(6, 0.2),
        check_lemma2_equivalence(3, 1.0 / sqrt(2.0), 100_000, seed),
        check_lemma2_equivalence(3, 0.76, 100_000, seed),
        check_lemma2_equivalence(4, 1.0 / sqrt(3.0), 100_000, seed),
        check_theorem1_nonuniqueness(3, 1.0 / sqrt(2.0), 20, seed),
        check_theorem1_nonuniqueness(4, 1.0 / sqrt(3.0), 20, seed),
        check_theorem3_uniqueness(3, 0.8, 3000, 2, seed),
        check_prop2_n2(40, seed),
        check_corollary1(3, 0.75, 200, seed),
        check_corollary1(3, 1.0, 200, seed),
        check_corollary1(4, 0.55, 400, seed),
        check_lemma6_alpha_star(3, np.linspace(1.0 / sqrt(3.0), 1.0, 10), 4000, seed),
        check_lemma6_alpha_star(5, np.linspace(1.0 / sqrt(5.0), 1.0, 10), 4000, seed),
    ]
    return outcomes
