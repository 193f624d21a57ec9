import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tanlip import expr as E
from tanlip import geometry as G
from tanlip.registry import get_domain


def _herbort_boundary_point(a, b, y):
    # solve Re z3 = −h(z') for a boundary point with prescribed z1, z2, Im z3
    h = abs(a) ** 6 + abs(a * b) ** 2 + abs(b) ** 6
    return np.array([a, b, -h + 1j * y])


def test_normals_examples():
    ball = get_domain("ball").expr
    assert np.allclose(G.outward_normal(ball, [0, 1]), [0, 1], atol=0)
    assert np.allclose(G.outward_normal(get_domain("herbort").expr, [0, 0, 0]), [0, 0, 1], atol=0)
    assert np.allclose(G.outward_normal(get_domain("halfspace").expr, [0, 0]), [0, 1], atol=0)


def test_normal_rejects_interior_point():
    with pytest.raises(G.NotOnBoundary):
        G.outward_normal(get_domain("ball").expr, [0, 0.5])


def test_degenerate_gradient():
    e = E.parse("abs2(z1) + abs2(z2)", 2)
    with pytest.raises(G.DegenerateGradient):
        G.outward_normal(e, [0, 0])


def test_frames_examples():
    f = G.tangent_frame(get_domain("herbort").expr, [0, 0, 0])
    assert np.allclose(f.tangent_basis, [[1, 0, 0], [0, 1, 0]], atol=0)
    f = G.tangent_frame(get_domain("ball").expr, [0, 1])
    assert np.allclose(f.tangent_basis, [[1, 0]], atol=0)


def _check_frame(r, P):
    f = G.tangent_frame(r, P)
    assert abs(np.linalg.norm(f.normal) - 1) <= 1e-12
    vecs = [f.normal, *f.tangent_basis]
    for i, u in enumerate(vecs):
        assert abs(np.linalg.norm(u) - 1) <= 1e-12
        for w in vecs[i + 1:]:
            assert abs(G.hermitian(u, w)) <= 1e-10
    for v in f.tangent_basis:
        assert G.tangency_residual(r, P, v) <= 1e-10


@given(st.complex_numbers(max_magnitude=0.6), st.complex_numbers(max_magnitude=0.6), st.floats(-0.5, 0.5))
def test_frame_invariants_at_random_herbort_points(a, b, y):
    P = _herbort_boundary_point(a, b, y)
    _check_frame(get_domain("herbort").expr, P)


def test_frame_invariants_ball_generic_point():
    _check_frame(get_domain("ball").expr, [0.6, 0.8])


def test_charts_examples():
    for name in ("herbort", "dangelo"):
        d = get_domain(name)
        assert G.normalize_chart(d.expr, d.base_points[0]).is_identity()
    ch = G.normalize_chart(get_domain("ball").expr, [0, 1])
    assert np.allclose(ch.unitary, np.eye(2), atol=0)
    assert np.allclose(ch.translation, [0, -1], atol=0)


def test_chart_pullback_agrees(rng):
    for name, P in (("ball", [0.6, 0.8]), ("herbort", _herbort_boundary_point(0.3 + 0.1j, -0.2j, 0.1))):
        d = get_domain(name)
        ch = G.normalize_chart(d.expr, P)
        pts = d.sample_box(rng, 1000) * 0.5
        w = ch.to_chart(pts)
        assert np.allclose(ch.from_chart(w), pts, atol=1e-12)
        orig = E.evaluate(d.expr, [pts[:, j] for j in range(d.dimension)])
        pulled = E.evaluate(ch.pullback, [w[:, j] for j in range(d.dimension)])
        assert np.max(np.abs(orig - pulled) / (1 + np.abs(orig))) <= 1e-10


def test_distance_examples():
    hs = get_domain("halfspace").expr
    for delta in (1e-1, 1e-4):
        assert G.dist_to_boundary_est(hs, [0.3j, -delta]) == pytest.approx(delta, rel=1e-15)
    ball = get_domain("ball").expr
    for delta in (1e-2, 1e-3, 1e-5):
        assert abs(G.dist_to_boundary_est(ball, [0, 1 - delta]) - delta) <= 2 * delta**2
    he = get_domain("herbort").expr
    for delta in (1e-3, 1e-5):
        z = [0, 0, -delta]
        ref = G.line_search_distance(he, z)
        assert G.dist_to_boundary_est(he, z) == pytest.approx(ref, rel=0.1)
        assert ref == pytest.approx(delta, rel=1e-9)


def test_distance_rejects_exterior():
    with pytest.raises(G.OutsideDomain):
        G.dist_to_boundary_est(get_domain("ball").expr, [0, 1.1])


def test_distance_first_order_exact_near_boundary(domains, rng):
    from tanlip.lipschitz import sample_near_boundary

    for d in domains.values():
        pts = sample_near_boundary(d, rng, 20, log_depth=(-6, -3))
        for z in pts:
            if E.evaluate(d.expr, list(z)).real < -1e-3:
                continue
            ratio = G.dist_to_boundary_est(d.expr, z) / G.line_search_distance(d.expr, z)
            assert 0.9 <= ratio <= 1.1


def test_defining_function_independence(rng):
    from tanlip.lipschitz import sample_near_boundary

    d = get_domain("herbort")
    scaled = E.parse(f"3*({d.defining_source})", 3)
    weighted = E.parse(f"(1 + abs2(z1) + abs2(z2) + abs2(z3))*({d.defining_source})", 3)
    P = d.base_points[0]
    nu = G.outward_normal(d.expr, P)
    for alt in (scaled, weighted):
        assert np.max(np.abs(G.outward_normal(alt, P) - nu)) <= 1e-8
        for z in sample_near_boundary(d, rng, 10, log_depth=(-6, -3)):
            a, b = G.dist_to_boundary_est(d.expr, z), G.dist_to_boundary_est(alt, z)
            assert abs(b / a - 1) <= 0.1


def test_unitary_invariance_of_normal():
    theta = 0.7
    c, s = math.cos(theta), math.sin(theta)
    U = np.array([[c, -s], [s, c]], dtype=complex) @ np.diag([1, np.exp(0.3j)])
    # ball is U-invariant; a point P maps to U·P and its normal to U·ν
    ball = get_domain("ball").expr
    P = np.array([0.6, 0.8])
    assert np.max(np.abs(G.outward_normal(ball, U @ P) - U @ G.outward_normal(ball, P))) <= 1e-8


def test_transversal_halfspace_exact():
    hs = get_domain("halfspace")
    rep = G.transversal_dist_check(hs.expr, [0, 0], [0, 1], [1e-1, 1e-2, 1e-3], hs.box)
    assert rep.passed
    assert np.allclose(rep.ratios, 1.0, rtol=1e-15)


def test_transversal_ball():
    ball = get_domain("ball")
    s_grid = [1e-2, 1e-3, 1e-4, 1e-5]
    rep = G.transversal_dist_check(ball.expr, [0, 1], [0, 1], s_grid, ball.box)
    assert rep.passed
    for s, ratio in zip(s_grid, rep.ratios):
        # the estimator |r|/|∇r| = (2s − s²)/(2(1 − s)) overshoots the true distance s
        assert abs(ratio - 1) <= s
        assert ratio == pytest.approx((2 * s - s * s) / (2 * (1 - s)) / s, rel=1e-9)


def test_transversal_herbort_sixty_degrees():
    he = get_domain("herbort")
    n_vec = np.array([math.sin(math.pi / 3), 0, math.cos(math.pi / 3)])
    rep = G.transversal_dist_check(he.expr, [0, 0, 0], n_vec, [10.0**-k for k in range(1, 6)], he.box)
    assert rep.passed
    assert rep.cos_angle == pytest.approx(0.5)
    assert rep.min_ratio == pytest.approx(0.5, rel=1e-2)


def test_transversal_rejects_tangent_direction():
    he = get_domain("herbort")
    with pytest.raises(G.GeometryError):
        G.transversal_dist_check(he.expr, [0, 0, 0], [1, 0, 0], [1e-2])


def test_box_helpers():
    box = [[-1, 1]] * 4
    assert G.point_in_box([0.5 + 0.5j, -1], box)
    assert not G.point_in_box([1.5, 0], box)
    assert G.box_radius([0, 0], [1, 0], box) == 1.0
    assert G.box_radius([0, -0.5], [0, 1], box) == 0.5
    pts = np.array([[0.5, 0], [2, 0]], dtype=complex)
    assert list(G.points_in_box(pts, box)) == [True, False]
