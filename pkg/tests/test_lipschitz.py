import math

import numpy as np
import pytest

from tanlip import expr as E
from tanlip import lipschitz as L
from tanlip.disc import DiscContext, disc_samples, r_of_t, s_of_t
from tanlip.registry import get_domain

import oracles as O


@pytest.fixture(scope="module")
def herbort_f():
    return L.make_conjugate_completion(get_domain("herbort"), None, 0.1)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_power_hoelder_constant_dominates_sampled_ratio(alpha):
    rng = np.random.default_rng(1)
    a = np.abs(rng.normal(size=20000)) * 10.0 ** rng.uniform(-4, 1, 20000) + 1j * rng.normal(size=20000)
    b = np.abs(rng.normal(size=20000)) * 10.0 ** rng.uniform(-4, 1, 20000) + 1j * rng.normal(size=20000)
    ratio = np.abs(a**alpha - b**alpha) / np.abs(a - b) ** alpha
    assert ratio.max() <= L.hoelder_constant_power(alpha)


def test_halfspace_completion_is_minus_zn_power():
    hs = get_domain("halfspace")
    f = L.make_conjugate_completion(hs, None, 0.3)
    assert f.source == "-z2"
    for delta in (1e-6, 1e-2):
        assert complex(f([0.1j, -delta])) == pytest.approx(delta**0.3, rel=1e-14)


def test_conjugate_completion_sources_and_positivity(herbort_f):
    assert herbort_f.source == "-z3 - (z1*z1*z1)^2 - (z1*z2)^2 - (z2*z2*z2)^2"
    assert L.positivity_audit(herbort_f, get_domain("herbort"), 10_000) > 0
    d = get_domain("dangelo")
    f = L.make_conjugate_completion(d, None, 0.1)
    assert f.source == "-z3 - (z1*z1 - z2*z2*z2)^2"
    assert L.positivity_audit(f, d, 10_000) > 0


def test_positivity_from_pointwise_inequality(herbort_f, rng):
    # Re g = −Re z3 − Re Σp² ≥ −Re z3 − Σ|p|² = −r
    d = get_domain("herbort")
    pts = L.sample_interior(d, rng, 2000)
    r_vals = E.evaluate(d.expr, [pts[:, j] for j in range(3)]).real
    assert np.all(herbort_f.g_value(pts).real >= -r_vals - 1e-15)


def test_completion_rejections():
    with pytest.raises(L.LipschitzError):
        L.make_conjugate_completion(get_domain("ball"), None, 0.3)
    with pytest.raises(L.LipschitzError):
        L.make_conjugate_completion(get_domain("herbort"), None, 1.5)
    with pytest.raises(L.LipschitzError):
        L.make_completion(get_domain("ball"), 0.3, source="z2 - 1")  # Re g < 0 inside


def test_ball_completion_positive():
    ball = get_domain("ball")
    f = L.make_completion(ball, 0.3)
    assert L.positivity_audit(f, ball, 10_000) > 0


def test_cauchy_riemann_residual(domains, rng):
    for d in domains.values():
        f = L.make_completion(d, 0.3)
        for z in L.sample_interior(d, rng, 5):
            assert f.cr_residual(z) <= 1e-8


def test_derivatives_against_differences(herbort_f, rng):
    d = get_domain("herbort")
    for z in L.sample_interior(d, rng, 5):
        u = rng.normal(size=3) + 1j * rng.normal(size=3)
        h = 1e-6
        fd = (herbort_f(z + h * u) - herbort_f(z - h * u)) / (2 * h)
        assert complex(herbort_f.derivative(z, u)) == pytest.approx(complex(fd), rel=1e-6)


def test_holder_estimates():
    hs = get_domain("halfspace")
    const = L.make_holomorphic("1", 2)
    assert L.holder_seminorm_est(const, hs, 1000, 0, alpha=0.3) == 0
    f = L.make_holomorphic("-z2", 2, power=0.3, alpha=0.3, box=hs.box)
    assert L.holder_seminorm_est(f, hs, 1000, 0) <= 1 + 1e-2
    he = get_domain("herbort")
    fh = L.make_conjugate_completion(he, None, 0.1)
    assert L.holder_seminorm_est(fh, he, 1000, 0) <= fh.lip_bound
    with pytest.raises(L.LipschitzError):
        L.holder_seminorm_est(f, hs, 100, 0)


def test_holder_estimate_within_bound_on_registry(domains):
    for d in domains.values():
        f = L.make_completion(d, 0.2)
        assert L.holder_seminorm_est(f, d, 1000, 3) <= f.lip_bound * (1 + 1e-2)


def test_cauchy_derivative_examples():
    hs = get_domain("halfspace")
    lin = L.make_holomorphic("z2", 2)
    direction = np.array([0.6, 0.8j])
    val = L.cauchy_derivative(lin, [0.1, -0.5], direction, 0.2, 64, hs)
    assert val == pytest.approx(0.8j, abs=1e-14)
    alpha, delta = 0.4, 1e-3
    f = L.make_holomorphic("-z2", 2, power=alpha, alpha=alpha, box=hs.box)
    z = np.array([0, -delta])
    val = L.cauchy_derivative(f, z, [0, 1], delta / 2, 64, hs)
    exact = complex(f.derivative(z, [0, 1]))
    assert abs(val - exact) <= 1e-10 * abs(exact)
    assert abs(val) == pytest.approx(alpha * delta ** (alpha - 1), rel=1e-10)


def test_cauchy_derivative_checks_disc():
    hs = get_domain("halfspace")
    f = L.make_holomorphic("z2", 2)
    with pytest.raises(L.NotInterior):
        L.cauchy_derivative(f, [0, -1e-3], [0, 1], 1e-2, 64, hs)
    with pytest.raises(L.LipschitzError):
        L.cauchy_derivative(f, [0, -1e-3], [0, 1], 1e-4, 8)


def test_quadrature_converges_geometrically(domains, rng):
    for d in domains.values():
        f = L.make_completion(d, 0.3)
        z = L.sample_near_boundary(d, rng, 1, log_depth=(-3, -2))[0]
        u = np.eye(d.dimension)[-1].astype(complex)
        rho = 0.5 * L.max_disc_radius(d, z, u)
        exact = complex(f.derivative(z, u))
        errs = [abs(L.cauchy_derivative(f, z, u, rho, M, d) - exact) for M in (16, 32, 64)]
        assert errs[1] <= errs[0] * 0.5 + 1e-14 * abs(exact)
        assert errs[2] <= errs[1] * 0.5 + 1e-14 * abs(exact)


def test_bidisc_examples():
    hs = get_domain("halfspace")
    z = np.array([0.1, -0.5])
    lin = L.make_holomorphic("z2", 2)
    assert abs(L.bidisc_second_derivative(lin, z, [0, 1], [1, 0], 0.1, 0.1, 64, hs)) <= 1e-13
    prod = L.make_holomorphic("z2*z1", 2)
    val = L.bidisc_second_derivative(prod, z, [0, 1], [1, 0], 0.1, 0.1, 64, hs)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_lemma_bounds_at_proof_points(herbort_f):
    # bidisc at P_δ: normal radius δ/2, tangential radius half the disc radius
    d = get_domain("herbort")
    ctx = DiscContext(d, v=(1, 0, 0))
    for delta in (1e-4, 1e-6):
        z = ctx.P_at(delta)
        rho = 0.5 * r_of_t(ctx, delta / 2).value
        val = L.bidisc_second_derivative(herbort_f, z, ctx.nu, ctx.v, delta / 2, rho, 64, d)
        exact = complex(herbort_f.second_derivative(z, ctx.nu, ctx.v))
        bound = herbort_f.lip_bound / rho * (delta / 2) ** (0.1 - 1)
        # the exact mixed derivative vanishes here, so compare on the bound's scale
        assert abs(val - exact) <= 1e-8 * bound
        assert abs(val) <= bound * 1.01


def test_lemma_audit_small(herbort_f):
    audit = L.lemma_audit(herbort_f, get_domain("herbort"), 20, seed=5)
    assert audit.passed()
    assert len(audit.rows) == 20


def test_hl_examples():
    hs = get_domain("halfspace")
    alpha = 0.3
    f = L.make_holomorphic("-z2", 2, power=alpha, alpha=alpha, box=hs.box)
    rep = L.hl_growth_check(f, hs, alpha, 500, 0)
    assert np.allclose(rep.values, alpha, rtol=1e-6)
    const = L.make_holomorphic("1", 2)
    rep = L.hl_growth_check(const, hs, alpha, 200, 0)
    assert rep.constant == 0 and rep.passed


def test_hl_herbort(herbort_f):
    rep = L.hl_growth_check(herbort_f, get_domain("herbort"), 0.1, 1000, 0)
    assert rep.passed and math.isfinite(rep.constant)
    assert all(c > 0 for c in rep.counts)


def test_gain_ratio_conventions(herbort_f):
    hs = get_domain("halfspace")
    ctx = DiscContext(hs)
    f = L.make_holomorphic("-z2", 2, power=0.3, alpha=0.3, box=hs.box)
    for w in disc_samples(ctx, 1e-3, 0.95, 16):
        assert L.gain_ratio(f, ctx, 1e-3, w, 0.3) == 0
    hctx = DiscContext(get_domain("herbort"), v=(1, 0, 0))
    assert L.gain_ratio(herbort_f, hctx, 1e-6, hctx.P_at(1e-6), 0.1) == 0
    with pytest.raises(L.LipschitzError):
        L.gain_ratio(herbort_f, hctx, 1e-6, hctx.P_at(1e-6) + np.array([0, 1e-3, 0]), 0.1)
    with pytest.raises(L.LipschitzError):
        L.gain_ratio(herbort_f, hctx, 1e-6, hctx.P_at(1e-6) + np.array([0.5, 0, 0]), 0.1, R=0.1)


def test_gain_ratio_herbort_closed_form(herbort_f):
    ctx = DiscContext(get_domain("herbort"), v=(1, 0, 0))
    delta, alpha = 1e-6, 0.1
    R = r_of_t(ctx, delta).value
    assert R == pytest.approx(delta ** (1 / 6), rel=1e-9)
    ratios = []
    for w in disc_samples(ctx, delta, 0.95, 256, radius=R):
        zeta = complex(w[0])
        if zeta == 0:
            continue
        got = L.gain_ratio(herbort_f, ctx, delta, w, alpha, R=R)
        assert got == pytest.approx(O.herbort_gain_ratio(zeta, delta, alpha), rel=1e-6)
        ratios.append(got)
    # hand estimate on the real axis at fill 0.95: ((ρ⁶+δ)^α − δ^α)/ρ^{6α}, ρ⁶ ≈ 0.74δ
    rho6 = 0.95**6 * delta
    hand = ((rho6 + delta) ** alpha - delta**alpha) / rho6**alpha
    assert hand >= 0.05 and max(ratios) >= hand * (1 - 1e-9)


def test_ratio_identity_in_alpha(herbort_f):
    ctx = DiscContext(get_domain("herbort"), v=(1, 1, 0))
    delta = 1e-4
    for w in disc_samples(ctx, delta, 0.9, 9)[1:]:
        s = s_of_t(ctx, float(abs((w - ctx.P_at(delta)) @ ctx.v.conj())))
        a1 = L.gain_ratio(herbort_f, ctx, delta, w, 0.1) * s**0.1
        a2 = L.gain_ratio(herbort_f, ctx, delta, w, 0.05) * s**0.05
        assert a1 == pytest.approx(a2, rel=1e-12)


def test_verify_main_theorem_constant_and_precondition():
    ctx = DiscContext(get_domain("herbort"))
    rep = L.verify_main_theorem(L.make_holomorphic("1", 3), ctx, 0.1, levels=3, N=16)
    assert rep.verdict == "PASS" and rep.constant == 0
    with pytest.raises(L.PreconditionError):
        L.verify_main_theorem(L.make_holomorphic("1", 3), ctx, 0.2, levels=3, N=16)
    flat = DiscContext(get_domain("halfspace"))
    with pytest.raises(L.PreconditionError):
        L.verify_main_theorem(L.make_holomorphic("1", 2), flat, 0.1, levels=3, N=16)


def test_verify_main_theorem_ball():
    ball = get_domain("ball")
    f = L.make_completion(ball, 0.3)
    rep = L.verify_main_theorem(f, DiscContext(ball, v=(1, 0)), 0.3, levels=6, N=64, delta0=1e-4)
    assert rep.verdict == "PASS" and rep.k0 == 2
    assert rep.band <= 10 and math.isfinite(rep.constant)
    csv = rep.to_csv()
    assert csv.startswith("delta,R,sup,") and csv.count("\n") == 7


def test_box_examples(herbort_f):
    hs = get_domain("halfspace")
    f = L.make_holomorphic("-z2", 2, power=0.3, alpha=0.3, box=hs.box)
    ctx = DiscContext(hs)
    assert L.box_decomposition(f, ctx, 1e-3, ctx.P_at(1e-3), 0.3).to_dict()["total"] == 0
    w = disc_samples(ctx, 1e-3, 0.5, 4)[-1]
    # halfspace: S = 0 so h = 0 and every term vanishes
    b = L.box_decomposition(f, ctx, 1e-3, w, 0.3)
    assert b.II == 0 and b.total == 0
    # ball, f through z2 only: II compares points sharing z2 after the push
    ball = get_domain("ball")
    bctx = DiscContext(ball)
    g = L.make_holomorphic("1 - z2", 2, power=0.3, alpha=0.3, box=ball.box)
    w = disc_samples(bctx, 1e-3, 0.9, 4)[-1]
    b = L.box_decomposition(g, bctx, 1e-3, w, 0.3)
    assert b.II == 0 and b.triangle_ok
    hctx = DiscContext(get_domain("herbort"), v=(1, 0, 0))
    w = disc_samples(hctx, 1e-5, 0.95, 16)[-1]
    b = L.box_decomposition(herbort_f, hctx, 1e-5, w, 0.1)
    assert b.I > 0 and b.II > 0 and b.III > 0 and b.triangle_ok
    assert b.h == pytest.approx(abs(w[0]) ** 6, rel=1e-10)
