import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mves import geometry as geo
from mves.errors import (
    AffineDimensionError,
    DegenerateSimplexError,
    DimensionError,
    ValidationError,
)

from oracles import cayley_menger_volume


def random_simplex(n, ambient, rng, spread=1.0):
    while True:
        v = spread * rng.standard_normal((n, ambient))
        try:
            return geo.Simplex(vertices=v)
        except DegenerateSimplexError:  # vanishing probability
            continue


# ---------------------------------------------------------------- volume

def test_volume_unit_simplex_3():
    s = geo.Simplex(np.eye(3))
    assert geo.simplex_volume(s) == pytest.approx(math.sqrt(3) / 2, abs=1e-15)


def test_volume_unit_segment():
    s = geo.Simplex(np.array([[0.0], [1.0]]))
    assert geo.simplex_volume(s) == pytest.approx(1.0, abs=1e-15)


def test_volume_matches_cayley_menger():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(3, 8))       # simplex dimension 2..6
        ambient = n - 1 + int(rng.integers(0, 3))
        s = random_simplex(n, ambient, rng)
        want = cayley_menger_volume(s.vertices)
        assert geo.simplex_volume(s) == pytest.approx(want, rel=1e-8)


def test_degenerate_vertices_rejected():
    with pytest.raises(DegenerateSimplexError):
        geo.Simplex(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))


def test_volume_scaling_under_linear_map():
    # mapping a chart-space simplex on the abundance hull through a
    # full-column-rank matrix scales its volume by sqrt(det(Ab.T Ab)/n)
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        m = n + int(rng.integers(0, 4))
        a = rng.standard_normal((m, n))
        chart = geo.canonical_abundance_chart(n)
        thetas = rng.standard_normal((n, n - 1))
        simplex_on_hull = geo.Simplex(chart.to_ambient(thetas))
        mapped = geo.Simplex(simplex_on_hull.vertices @ a.T)
        abar = (a[:, :-1] - a[:, -1:]).copy()
        import mves.linalg as la

        alpha = math.sqrt(la.determinant(abar.T @ abar) / n)
        want = alpha * geo.simplex_volume(simplex_on_hull)
        assert geo.simplex_volume(mapped) == pytest.approx(want, rel=1e-8)


# ---------------------------------------------------------------- charts

def test_canonical_chart_n2_forced():
    chart = geo.canonical_abundance_chart(2)
    assert np.allclose(chart.offset, [0.5, 0.5])
    assert np.allclose(chart.basis.ravel(), [1 / math.sqrt(2), -1 / math.sqrt(2)])


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_canonical_chart_defining_properties(n):
    chart = geo.canonical_abundance_chart(n)
    assert np.max(np.abs(chart.basis.T @ chart.basis - np.eye(n - 1))) < 1e-10
    assert np.max(np.abs(chart.basis.T @ chart.offset)) < 1e-10


def test_canonical_chart_origin_maps_to_centroid():
    chart = geo.canonical_abundance_chart(3)
    assert np.allclose(chart.to_ambient(np.zeros(2)), np.full(3, 1 / 3))


def test_canonical_chart_deterministic():
    a = geo.canonical_abundance_chart(5)
    b = geo.canonical_abundance_chart(5)
    assert np.array_equal(a.basis, b.basis)


def test_chart_isometry():
    rng = np.random.default_rng(2)
    chart = geo.canonical_abundance_chart(5)
    p = rng.standard_normal((40, 4))
    q = rng.standard_normal((40, 4))
    amb = np.linalg.norm(chart.to_ambient(p) - chart.to_ambient(q), axis=1)
    assert np.max(np.abs(amb - np.linalg.norm(p - q, axis=1))) < 1e-10


def test_fit_chart_rejects_constant_data():
    with pytest.raises(AffineDimensionError) as err:
        geo.fit_data_chart(np.ones((10, 4)), 3)
    assert err.value.observed_rank == 0


def test_fit_chart_exact_on_unit_simplex_vertices():
    chart = geo.fit_data_chart(np.eye(3), 3)
    assert np.allclose(chart.offset, np.full(3, 1 / 3))
    recon = chart.to_ambient(chart.to_chart(np.eye(3)))
    assert np.max(np.abs(recon - np.eye(3))) < 1e-12


def test_fit_chart_reconstructs_mixture_model():
    rng = np.random.default_rng(3)
    n, m, l = 4, 50, 300
    a = rng.uniform(0.0, 1.0, (m, n))
    g = rng.gamma(1.0, size=(l, n))
    s = g / g.sum(axis=1, keepdims=True)
    x = s @ a.T
    chart = geo.fit_data_chart(x, n)
    recon = chart.to_ambient(chart.to_chart(x))
    assert np.max(np.abs(recon - x)) <= 1e-8 * np.abs(x).max()


def test_fit_chart_rejects_rank_deficient():
    rng = np.random.default_rng(4)
    pts = np.outer(rng.standard_normal(50), [1.0, 2.0, 0.5]) + 1.0
    with pytest.raises(AffineDimensionError):
        geo.fit_data_chart(pts, 3)  # data affinely 1-d, need 2-d


def test_fit_chart_rejects_excess_rank():
    rng = np.random.default_rng(5)
    pts = rng.standard_normal((100, 4))
    with pytest.raises(AffineDimensionError):
        geo.fit_data_chart(pts, 3)


# ------------------------------------------------- half-space conversions

def test_to_polyhedral_identity_case():
    s = geo.Simplex(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    p = geo.to_polyhedral(s)
    assert np.allclose(p.h, np.eye(2))
    assert np.allclose(p.g, np.zeros(2))


def test_to_vertices_identity_case():
    p = geo.PolyhedralSimplex(h=np.eye(2), g=np.zeros(2))
    s = geo.to_vertices(p)
    want = {(1.0, 0.0), (0.0, 1.0), (0.0, 0.0)}
    got = {tuple(np.round(v, 12)) for v in s.vertices}
    assert got == want


def test_roundtrip_both_ways():
    rng = np.random.default_rng(6)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        s = random_simplex(n, n - 1, rng, spread=2.0)
        p = geo.to_polyhedral(s)
        back = geo.to_vertices(p)
        assert np.max(np.abs(back.vertices - s.vertices)) < 1e-9
        p2 = geo.to_polyhedral(back)
        assert np.max(np.abs(p2.h - p.h)) < 1e-8
        assert np.max(np.abs(p2.g - p.g)) < 1e-8


def test_polyhedral_volume_formula():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        s = random_simplex(n, n - 1, rng)
        p = geo.to_polyhedral(s)
        assert geo.polyhedral_volume(p) == pytest.approx(
            geo.simplex_volume(s), rel=1e-10)


def test_membership_equivalence_ten_thousand_points():
    rng = np.random.default_rng(8)
    s = random_simplex(4, 3, rng, spread=1.5)
    p = geo.to_polyhedral(s)
    lo = s.vertices.min(axis=0) - 0.5
    hi = s.vertices.max(axis=0) + 0.5
    pts = rng.uniform(lo, hi, size=(10_000, 3))
    half = geo.polyhedral_contains(p, pts, tol=1e-9)
    bary = np.array([geo.contains(s, q, tol=1e-9) for q in pts])
    assert np.array_equal(half, bary)
    assert 0 < half.sum() < len(pts)  # both classes exercised


def test_contains_centroid_and_perturbed_vertex():
    rng = np.random.default_rng(9)
    s = random_simplex(4, 3, rng)
    assert geo.contains(s, s.centroid())
    # unit-scale simplex: a 2*tol push past a vertex exceeds the
    # barycentric tolerance
    u = geo.Simplex(np.eye(3))
    tol = 1e-9
    edge_dir = (u.vertices[0] - u.vertices[1]) / math.sqrt(2)
    outside = u.vertices[0] + 2 * tol * edge_dir
    assert not geo.contains(u, outside, tol=tol)


def test_contains_checks_affine_span():
    s = geo.Simplex(np.eye(3))  # lives on the sum-1 plane in R^3
    assert geo.contains(s, np.full(3, 1 / 3))
    assert not geo.contains(s, np.full(3, 1 / 3) + np.array([0.1, 0.1, 0.1]))


def test_contains_dimension_mismatch():
    s = geo.Simplex(np.eye(3))
    with pytest.raises(DimensionError):
        geo.contains(s, np.zeros(2))


# ----------------------------------------------------------- rotations

def test_rotate_identity_is_noop():
    rng = np.random.default_rng(10)
    s = random_simplex(4, 3, rng)
    r = geo.rotate_in_chart(s, np.eye(3))
    assert np.array_equal(r.vertices, s.vertices)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_rotation_preserves_volume(seed):
    rng = np.random.default_rng(seed)
    import mves.linalg as la

    n = int(rng.integers(2, 6))
    s = random_simplex(n, n - 1, rng)
    q = la.random_orthogonal(n - 1, rng)
    rotated = geo.rotate_in_chart(s, q)
    assert geo.simplex_volume(rotated) == pytest.approx(
        geo.simplex_volume(s), rel=1e-10)


def test_rotate_rejects_non_orthogonal():
    s = geo.Simplex(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError):
        geo.rotate_in_chart(s, np.array([[1.0, 0.2], [0.0, 1.0]]))


def test_rotated_regular_simplex_still_encloses_its_ball():
    # ball-enclosure conditions: -r|h_i| + g_i >= 0 and the sum-facet twin
    rng = np.random.default_rng(11)
    import mves.linalg as la

    for n in (3, 4, 5):
        r = 0.3
        s = geo.regular_simplex(n, r)
        for _ in range(5):
            q = la.random_orthogonal(n - 1, rng)
            p = geo.to_polyhedral(geo.rotate_in_chart(s, q))
            cols = np.linalg.norm(p.h, axis=0)
            slacks = np.append(
                -r * cols + p.g,
                -r * np.linalg.norm(p.h.sum(axis=1)) + 1.0 - p.g.sum())
            assert slacks.min() > -1e-10


def test_regular_simplex_tangency():
    s = geo.regular_simplex(4, 0.25)
    assert geo.simplex_volume(s) > 0
    # all vertices equidistant, centered at origin
    norms = np.linalg.norm(s.vertices, axis=1)
    assert np.allclose(norms, norms[0])
    assert np.allclose(s.vertices.sum(axis=0), 0.0, atol=1e-12)
