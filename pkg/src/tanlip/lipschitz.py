"""Holomorphic Lipschitz test functions and the tangential-gain experiments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from . import expr as E
from . import geometry as G
from .disc import DiscConfig, DiscContext, disc_max, disc_samples, estimate_k0, r_of_t, s_of_t
from .poly import AffineSlice, GaussQ, Poly, to_poly


RADIUS_CONFIG = DiscConfig(n_theta=32, n_rho=32)


class LipschitzError(ValueError):
    pass


class NotInterior(LipschitzError):
    pass


class PreconditionError(LipschitzError):
    pass


def hoelder_constant_power(alpha: float) -> float:
    """Upper bound for the α-Hölder constant of ``w ↦ w^α`` on ``Re w > 0``.

    With ``d = |a − b|`` and ``|b| ≤ |a|``: if ``d ≤ |b|/2`` the segment stays
    at modulus ≥ d and the mean value bound gives ``α·d^α``; otherwise
    ``|a| < 3d``, ``|b| < 2d`` and ``|a^α| + |b^α| ≤ (3^α + 2^α) d^α``.
    """
    return 3.0**alpha + 2.0**alpha


def poly_gradient_bound(g: Poly, box) -> float:
    """Bound on ``sup_box |∇g|`` for holomorphic ``g`` from coefficient moduli."""
    box = np.asarray(box, dtype=float)
    n = g.n
    mods = [math.hypot(max(abs(box[2 * j, 0]), abs(box[2 * j, 1])), max(abs(box[2 * j + 1, 0]), abs(box[2 * j + 1, 1])))
            for j in range(n)]
    total = 0.0
    for j in range(1, n + 1):
        b = 0.0
        for k, c in g.derive(j).terms.items():
            b += abs(complex(c)) * math.prod(m**e for m, e in zip(mods, k[:n]))
        total += b * b
    return math.sqrt(total)


@dataclass
class TestFunction:
    """``f = g^power`` for a holomorphic polynomial ``g`` (principal branch)."""

    name: str
    g: Poly
    power: float
    alpha: float
    lip_bound: float
    provenance: str
    lip_g: float = math.nan
    source: str = ""

    __test__ = False  # not a pytest class

    @property
    def n(self) -> int:
        return self.g.n

    @cached_property
    def _grad(self):
        return [self.g.derive(j) for j in range(1, self.n + 1)]

    @cached_property
    def _hess(self):
        return [[d.derive(k) for k in range(1, self.n + 1)] for d in self._grad]

    @staticmethod
    def _cols(z):
        z = np.asarray(z, dtype=complex)
        return z, [z[..., j] for j in range(z.shape[-1])]

    def g_value(self, z):
        z, cols = self._cols(z)
        return np.broadcast_to(np.asarray(self.g.evaluate(cols), dtype=complex), z.shape[:-1]).copy()

    def __call__(self, z):
        gv = self.g_value(z)
        if self.power == 1.0:
            return gv
        return np.power(gv, self.power)

    def gradient(self, z):
        """``(∂f/∂z_j)`` along the last axis."""
        z, cols = self._cols(z)
        gv = self.g_value(z)
        dg = np.stack([np.broadcast_to(np.asarray(d.evaluate(cols), dtype=complex), gv.shape) for d in self._grad], -1)
        if self.power == 1.0:
            return dg
        return (self.power * np.power(gv, self.power - 1.0))[..., None] * dg

    def derivative(self, z, direction):
        """Complex directional derivative ``Σ_j ∂f/∂z_j · dir_j``."""
        return np.sum(self.gradient(z) * np.asarray(direction, dtype=complex), axis=-1)

    def second_derivative(self, z, n_dir, v_dir):
        """``∂²f / ∂n ∂v`` from the closed form."""
        _, cols = self._cols(z)
        n_dir = np.asarray(n_dir, dtype=complex)
        v_dir = np.asarray(v_dir, dtype=complex)
        gv = np.asarray(self.g.evaluate(cols), dtype=complex)
        dgn = sum(complex(n_dir[j]) * np.asarray(self._grad[j].evaluate(cols)) for j in range(self.n))
        dgv = sum(complex(v_dir[j]) * np.asarray(self._grad[j].evaluate(cols)) for j in range(self.n))
        hnv = sum(complex(n_dir[j] * v_dir[k]) * np.asarray(self._hess[j][k].evaluate(cols))
                  for j in range(self.n) for k in range(self.n) if self._hess[j][k].terms)
        p = self.power
        if p == 1.0:
            return hnv + 0 * gv
        return p * (p - 1.0) * np.power(gv, p - 2.0) * dgn * dgv + p * np.power(gv, p - 1.0) * hnv

    def cr_residual(self, z, h: float = 1e-6) -> float:
        """Largest ``|∂f/∂z̄_j|`` by central differences in ``x_j`` and ``y_j``."""
        z = np.asarray(z, dtype=complex)
        worst = 0.0
        for j in range(self.n):
            e = np.zeros(self.n, dtype=complex)
            e[j] = 1.0
            fx = (self(z + h * e) - self(z - h * e)) / (2 * h)
            fy = (self(z + 1j * h * e) - self(z - 1j * h * e)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(0.5 * (fx + 1j * fy)))))
        return worst

    def to_dict(self) -> dict:
        return {"name": self.name, "g": self.source, "power": self.power, "alpha": self.alpha,
                "lip_bound": self.lip_bound, "lip_g": self.lip_g, "provenance": self.provenance}


def _holomorphic_poly(source: str, n: int) -> Poly:
    g = to_poly(E.parse(source, n), n, exact=False)
    if not g.is_holomorphic():
        raise LipschitzError(f"{source!r} is not holomorphic")
    return g


def make_holomorphic(source: str, n: int, power: float = 1.0, alpha: float = 1.0, box=None,
                     name: str = "custom") -> TestFunction:
    """``f = g^power`` for the holomorphic polynomial ``g`` given in the DSL."""
    g = _holomorphic_poly(source, n)
    lip_g = poly_gradient_bound(g, box) if box is not None else math.nan
    if power == 1.0:
        lip = lip_g
    else:
        lip = hoelder_constant_power(power) * lip_g**power
    return TestFunction(name, g, float(power), float(alpha), lip, "holomorphic polynomial", lip_g, source)


def _is_origin(P) -> bool:
    return not np.any(np.asarray(P, dtype=complex))


def make_conjugate_completion(domain, P=None, alpha: float = 0.1) -> TestFunction:
    """``f = (−z_n − Σ p_j²)^α`` on ``Re z_n + Σ |p_j|² < 0``.

    ``Re g ≥ −Re z_n − Σ|p_j|² = −r > 0`` on the domain, so the principal
    power is holomorphic there.
    """
    if not domain.hermitian_sos:
        raise LipschitzError(f"domain {domain.name!r} lacks the hermitian sum-of-squares structure")
    if not 0 < alpha < 1:
        raise LipschitzError("alpha must lie in (0, 1)")
    P = domain.base_points[0] if P is None else P
    if not _is_origin(P):
        raise LipschitzError("conjugate completion is built at the graph-form base point (origin)")
    n = domain.dimension
    sos = E.parse(f"Re(z{n})" + "".join(f" + abs2({p})" for p in domain.p_list), n)
    if to_poly(sos, n, exact=False) != domain.poly:
        raise LipschitzError("defining function is not Re z_n + sum |p_j|^2 for the declared p_list")
    source = f"-z{n}" + "".join(f" - ({p})^2" for p in domain.p_list)
    g = _holomorphic_poly(source, n)
    lip_g = poly_gradient_bound(g, domain.box)
    lip = hoelder_constant_power(alpha) * lip_g**alpha
    return TestFunction(f"{domain.name}-cc", g, alpha, alpha, lip, "conjugate-completion", lip_g, source)


def make_completion(domain, alpha: float, source: str | None = None, audit_samples: int = 10_000,
                    seed: int = 0) -> TestFunction:
    """``f = g^α`` for a declared completion ``g`` with ``Re g > 0`` on the domain.

    Positivity is audited on interior samples rather than trusted.
    """
    if source is None:
        if domain.hermitian_sos:
            return make_conjugate_completion(domain, None, alpha)
        if domain.completion is None:
            raise LipschitzError(f"domain {domain.name!r} declares no completion")
        source = domain.completion
    g = _holomorphic_poly(source, domain.dimension)
    lip_g = poly_gradient_bound(g, domain.box)
    f = TestFunction(f"{domain.name}-completion", g, alpha, alpha,
                     hoelder_constant_power(alpha) * lip_g**alpha, "declared completion", lip_g, source)
    if positivity_audit(f, domain, audit_samples, seed) <= 0:
        raise LipschitzError("Re g is not positive on the domain samples")
    return f


def sample_interior(domain, rng: np.random.Generator, N: int) -> np.ndarray:
    out = []
    got = 0
    while got < N:
        pts = domain.sample_box(rng, max(2 * (N - got), 64))
        vals = E.evaluate(domain.expr, [pts[:, j] for j in range(domain.dimension)]).real
        keep = pts[vals < 0]
        out.append(keep)
        got += len(keep)
    return np.concatenate(out)[:N]


def positivity_audit(f: TestFunction, domain, N: int = 10_000, seed: int = 0) -> float:
    """Minimum of ``Re g`` over interior samples."""
    pts = sample_interior(domain, np.random.default_rng(seed), N)
    return float(np.min(f.g_value(pts).real))


def holder_seminorm_est(f: TestFunction, domain, N: int = 1000, seed: int = 0, alpha: float | None = None) -> float:
    """Largest ``|f(x) − f(y)| / |x − y|^α`` over random interior pairs.

    Half the pairs are independent points; the other half are local pairs
    ``y = x + εu`` with ε log-uniform in ``[1e-4, 1]``.
    """
    if N < 1000:
        raise LipschitzError("N must be at least 1000")
    a = f.alpha if alpha is None else alpha
    rng = np.random.default_rng(seed)
    half = N // 2
    x1 = sample_interior(domain, rng, half)
    y1 = sample_interior(domain, rng, half)
    x2 = sample_interior(domain, rng, N - half)
    u = rng.normal(size=x2.shape) + 1j * rng.normal(size=x2.shape)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    eps = 10.0 ** rng.uniform(-4, 0, size=(len(x2), 1))
    y2 = x2 + eps * u
    inside = E.evaluate(domain.expr, [y2[:, j] for j in range(domain.dimension)]).real < 0
    inside &= G.points_in_box(y2, domain.box)
    xs = np.concatenate([x1, x2[inside]])
    ys = np.concatenate([y1, y2[inside]])
    d = np.linalg.norm(xs - ys, axis=1)
    ok = d > 0
    ratio = np.abs(f(xs[ok]) - f(ys[ok])) / d[ok] ** a
    return float(np.max(ratio)) if ratio.size else 0.0


# ------------------------------------------------------ Cauchy estimators

def _check_interior(domain, pts: np.ndarray, what: str):
    vals = E.evaluate(domain.expr, [pts[:, j] for j in range(domain.dimension)]).real
    if np.any(vals >= 0) or not np.all(G.points_in_box(pts, domain.box)):
        raise NotInterior(f"{what} is not contained in the domain")


def cauchy_derivative(f: TestFunction, z, direction, radius: float, M: int = 64, domain=None) -> complex:
    """Trapezoidal Cauchy integral ``(1/2πi)∮_{|ζ|=ρ} (f(z+ζ·dir) − f(z))/ζ² dζ``."""
    if M < 16:
        raise LipschitzError("M must be at least 16")
    z = G.as_point(z)
    direction = G.as_point(direction)
    w = np.exp(2j * np.pi * np.arange(M) / M)
    if domain is not None:
        rings = np.concatenate([frac * radius * w for frac in (0.25, 0.5, 0.75, 1.0)])
        _check_interior(domain, z[None, :] + rings[:, None] * direction[None, :], "derivative disc")
    pts = z[None, :] + (radius * w)[:, None] * direction[None, :]
    vals = f(pts) - f(z)
    return complex(np.mean(vals / w) / radius)


def bidisc_second_derivative(f: TestFunction, z, dir_n, dir_v, delta: float, rho: float, M: int = 64,
                             domain=None) -> complex:
    """Iterated Cauchy quadrature for ``∂²f/∂n∂v``: inner circle radius δ along ``n``,
    outer circle radius ρ along ``v``."""
    if M < 16:
        raise LipschitzError("M must be at least 16")
    z = G.as_point(z)
    n_ = G.as_point(dir_n)
    v_ = G.as_point(dir_v)
    w = np.exp(2j * np.pi * np.arange(M) / M)
    if domain is not None:
        ws = np.exp(2j * np.pi * np.arange(16) / 16)
        zr = np.concatenate([[0], 0.5 * delta * ws, delta * ws])
        tr = np.concatenate([[0], 0.5 * rho * ws, rho * ws])
        skel = z[None, None, :] + zr[:, None, None] * n_ + tr[None, :, None] * v_
        _check_interior(domain, skel.reshape(-1, z.size), "bidisc")
    centers = z[None, :] + (rho * w)[:, None] * v_[None, :]
    grid = centers[:, None, :] + (delta * w)[None, :, None] * n_[None, None, :]
    fv = f(grid.reshape(-1, z.size)).reshape(M, M) - f(centers)[:, None]
    inner = np.mean(fv / w[None, :], axis=1) / delta
    inner = inner - inner.mean()
    return complex(np.mean(inner / w) / rho)


def max_disc_radius(domain, z, direction, cap: float | None = None) -> float:
    """Largest ρ with ``{z + ζ·dir : |ζ| ≤ ρ}`` inside the domain and the box."""
    z = G.as_point(z)
    direction = G.as_point(direction)
    rmax = G.box_radius(z, direction, domain.box)
    if cap is not None:
        rmax = min(rmax, cap)
    sl = AffineSlice(domain.poly, z, direction, np.zeros_like(z))
    fun = lambda rho: disc_max(lambda q: sl.real(q), rho, RADIUS_CONFIG)[0]  # noqa: E731
    if fun(0.0) >= 0:
        return 0.0
    if fun(rmax) < 0:
        return rmax
    # callers shrink the radius by a safety factor, so a loose root suffices
    return float(brentq(fun, 0.0, rmax, xtol=1e-14, rtol=1e-6))


@dataclass
class LemmaAudit:
    rows: list = field(default_factory=list)

    @property
    def worst_first(self) -> float:
        return max((r["first_ratio"] for r in self.rows), default=0.0)

    @property
    def worst_second(self) -> float:
        return max((r["second_ratio"] for r in self.rows), default=0.0)

    @property
    def worst_quadrature(self) -> float:
        return max((r["quad_rel_err"] for r in self.rows), default=0.0)

    def passed(self, slack: float = 1.01, quad_tol: float = 1e-8) -> bool:
        return self.worst_first <= slack and self.worst_second <= slack and self.worst_quadrature <= quad_tol


def _unit(rng, n):
    u = rng.normal(size=n) + 1j * rng.normal(size=n)
    return u / np.linalg.norm(u)


def sample_near_boundary(domain, rng, N: int, P=None, tangential_radius: float = 0.3,
                         log_depth=(-6.0, -1.0)) -> np.ndarray:
    """Interior points ``q_b − d·ν_P`` below boundary points ``q_b`` near ``P``.

    ``q_b`` is found on the real normal line through a point of the tangent
    plane at ``P``; the depth ``d`` is log-uniform in ``10^log_depth``.
    """
    P = domain.base_points[0] if P is None else G.as_point(P)
    frame = G.tangent_frame(domain.expr, P)
    nu = frame.normal
    m = len(frame.tangent_basis)
    out = []
    tries = 0
    while len(out) < N:
        tries += 1
        if tries > 50 * N:
            raise LipschitzError("could not sample near-boundary points")
        c = rng.normal(size=m) + 1j * rng.normal(size=m)
        c *= tangential_radius * rng.uniform() ** (1 / (2 * m)) / np.linalg.norm(c)
        q = P + c @ frame.tangent_basis
        f = lambda s: E.evaluate(domain.expr, list(q - s * nu)).real  # noqa: E731
        lo, hi = -0.5, 0.5
        if f(lo) * f(hi) > 0:
            continue
        sb = brentq(f, lo, hi, xtol=1e-16, rtol=1e-15)
        d = 10.0 ** rng.uniform(*log_depth)
        x = q - (sb + d) * nu
        if G.point_in_box(x, domain.box) and E.evaluate(domain.expr, list(x)).real < 0:
            out.append(x)
    return np.array(out)


def lemma_audit(f: TestFunction, domain, n_configs: int = 200, seed: int = 0, M: int = 64,
                shrink: float = 0.5) -> LemmaAudit:
    """Cauchy-estimate audit on random (point, direction, radius) configurations.

    For each configuration the first derivative along a random unit ``n`` is
    compared with ``lip_bound·δ^{α−1}`` (δ the quadrature radius, a fraction
    ``shrink`` of the largest admissible disc) and the mixed derivative along
    ``(n, v)`` with ``lip_bound·ρ^{-1}·δ^{α−1}`` on a verified bidisc.
    """
    rng = np.random.default_rng(seed)
    pts = sample_near_boundary(domain, rng, n_configs, log_depth=(-4.0, -1.0))
    audit = LemmaAudit()
    a = f.alpha
    for z in pts:
        n_dir = _unit(rng, domain.dimension)
        v_dir = _unit(rng, domain.dimension)
        Rn = max_disc_radius(domain, z, n_dir)
        delta = shrink * Rn
        d_quad = cauchy_derivative(f, z, n_dir, delta, M, domain)
        d_exact = complex(f.derivative(z, n_dir))
        bound1 = f.lip_bound * delta ** (a - 1)
        # bidisc: shrink both radii until the skeleton is interior
        Rv = max_disc_radius(domain, z, v_dir)
        dd, rr = 0.5 * delta, shrink * Rv
        for _ in range(30):
            try:
                d2 = bidisc_second_derivative(f, z, n_dir, v_dir, dd, rr, M, domain)
                break
            except NotInterior:
                dd *= 0.5
                rr *= 0.5
        else:
            raise NotInterior("no interior bidisc found")
        bound2 = f.lip_bound * dd ** (a - 1) / rr
        audit.rows.append({
            "point": z.tolist(),
            "delta": delta,
            "first": abs(d_quad),
            "first_bound": bound1,
            "first_ratio": abs(d_quad) / bound1,
            "quad_rel_err": abs(d_quad - d_exact) / max(abs(d_exact), 1e-300),
            "second": abs(d2),
            "second_bound": bound2,
            "second_ratio": abs(d2) / bound2,
            "second_rel_err": abs(d2 - complex(f.second_derivative(z, n_dir, v_dir)))
            / max(abs(complex(f.second_derivative(z, n_dir, v_dir))), 1e-300),
        })
    return audit


# ------------------------------------------------------- Hardy–Littlewood

@dataclass
class HLReport:
    decades: list
    sups: list
    counts: list
    constant: float
    ratio: float
    passed: bool
    values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"decades": self.decades, "sups": self.sups, "counts": self.counts,
                "constant": self.constant, "ratio": self.ratio, "passed": self.passed}


def hl_growth_check(f: TestFunction, domain, alpha: float | None = None, N: int = 2000, seed: int = 0,
                    P=None) -> HLReport:
    """Profile of ``|∇f(x)|·dist(x)^{1−α}`` over depth decades 1e-6..1e-1.

    Passes when the sup over the closest decade is at most 4 times the sup
    over the farthest one.
    """
    a = f.alpha if alpha is None else alpha
    rng = np.random.default_rng(seed)
    pts = sample_near_boundary(domain, rng, N, P=P)
    dist = np.array([G.dist_to_boundary_est(domain.expr, x) for x in pts])
    grad = np.linalg.norm(f.gradient(pts), axis=-1)
    vals = grad * dist ** (1 - a)
    edges = 10.0 ** np.arange(-6, 0)
    decades, sups, counts = [], [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (dist >= lo) & (dist < hi)
        decades.append([float(lo), float(hi)])
        counts.append(int(sel.sum()))
        sups.append(float(vals[sel].max()) if sel.any() else 0.0)
    far, near = sups[-1], sups[0]
    if far == 0 and near == 0:
        ratio = 0.0
    else:
        ratio = near / far if far > 0 else math.inf
    return HLReport(decades, sups, counts, float(vals.max()), ratio, ratio <= 4.0, vals.tolist())


# ------------------------------------------------------------ main theorem

def _zeta_of(ctx: DiscContext, delta: float, w) -> complex:
    d = G.as_point(w) - ctx.P_at(delta)
    zeta = G.hermitian(d, ctx.v)
    if np.linalg.norm(d - zeta * ctx.v) > 1e-9 * max(1.0, np.linalg.norm(d)):
        raise LipschitzError("w is not on the tangent disc through P_delta")
    return zeta


def gain_ratio(f: TestFunction, ctx: DiscContext, delta: float, w, alpha: float, R: float | None = None) -> float:
    """``|f(P_δ) − f(w)| / S(|P_δ − w|)^α`` (0 when ``w = P_δ``)."""
    zeta = _zeta_of(ctx, delta, w)
    rad = abs(zeta)
    if rad == 0:
        return 0.0
    if R is not None and rad >= R:
        raise LipschitzError("w lies outside the disc D(delta)")
    diff = abs(complex(f(ctx.P_at(delta))) - complex(f(G.as_point(w))))
    s = s_of_t(ctx, rad)
    if s == 0:
        return 0.0 if diff == 0 else math.inf
    return diff / s**alpha


@dataclass
class BoxTerms:
    I: float
    II: float
    III: float
    h: float
    total: float
    S_alpha: float

    @property
    def triangle_ok(self) -> bool:
        return self.I + self.II + self.III >= self.total - 1e-12

    def scaled(self) -> tuple:
        if self.S_alpha == 0:
            return (0.0, 0.0, 0.0)
        return (self.I / self.S_alpha, self.II / self.S_alpha, self.III / self.S_alpha)

    def to_dict(self) -> dict:
        return {"I": self.I, "II": self.II, "III": self.III, "h": self.h, "total": self.total,
                "S_alpha": self.S_alpha, "triangle_ok": self.triangle_ok}


def box_decomposition(f: TestFunction, ctx: DiscContext, delta: float, w, alpha: float) -> BoxTerms:
    """Normal push, tangential traverse at depth ``δ + h`` and normal return, ``h = S(|P_δ − w|)``."""
    w = G.as_point(w)
    zeta = _zeta_of(ctx, delta, w)
    rad = abs(zeta)
    if rad == 0:
        return BoxTerms(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    h = s_of_t(ctx, rad)
    Pd, Pdh = ctx.P_at(delta), ctx.P_at(delta + h)
    wh = w - h * ctx.nu
    for q in (Pdh, wh):
        if not G.point_in_box(q, ctx.domain.box):
            raise LipschitzError("pushed point leaves the neighbourhood box")
    fv = lambda q: complex(f(q))  # noqa: E731
    I = abs(fv(Pd) - fv(Pdh))
    II = abs(fv(Pdh) - fv(wh))
    III = abs(fv(wh) - fv(w))
    return BoxTerms(I, II, III, h, abs(fv(Pd) - fv(w)), h**alpha)


@dataclass
class GainReport:
    rows: list
    alpha: float
    k0: object
    delta0: float
    verdict: str
    constant: float
    band: float

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "k0": self.k0, "delta0": self.delta0, "verdict": self.verdict,
                "C": self.constant, "band": self.band, "rows": self.rows}

    def to_csv(self) -> str:
        cols = ["delta", "R", "sup", "mean", "argmax_abs_zeta", "I", "II", "III", "h"]
        lines = [",".join(cols)]
        for r in self.rows:
            lines.append(",".join(f"{float(r[c]):.17g}" for c in cols))
        return "\n".join(lines) + "\n"


def contact_order(ctx: DiscContext) -> float:
    """Exact line type when the base point and direction allow it, else the numeric estimate."""
    from .typeoracle import TypeOracleError, line_type

    try:
        return float(line_type(ctx.domain.exact_poly, ctx.P, ctx.v))
    except (TypeOracleError, E.ExprError):
        est = estimate_k0(ctx)
        return est.k0


def band_ratio(values) -> float:
    vals = [float(v) for v in values]
    top = max(vals)
    if top == 0:
        return 1.0
    low = min(vals)
    return math.inf if low == 0 else top / low


def verify_main_theorem(f: TestFunction, ctx: DiscContext, alpha: float, levels: int = 6, fill: float = 0.95,
                        N: int = 256, delta0: float | None = None, k0: float | None = None,
                        band_limit: float = 10.0) -> GainReport:
    """Per-level sup of the gain ratio over 𝔻(δ_j), ``δ_j = δ0·2^{-j}``.

    PASS when the largest level sup is within ``band_limit`` of the smallest;
    the recorded constant is the overall sup.
    """
    k0 = contact_order(ctx) if k0 is None else k0
    if math.isnan(k0) or not alpha < 1.0 / k0:
        raise PreconditionError(f"alpha = {alpha} must be below 1/k0 = 1/{k0}")
    d0 = ctx.delta0 if delta0 is None else delta0
    rows = []
    f_center = None
    for j in range(levels):
        delta = d0 * 2.0 ** (-j)
        R = r_of_t(ctx, delta).value
        pts = disc_samples(ctx, delta, fill, N, radius=R)
        f_center = complex(f(ctx.P_at(delta)))
        fw = np.asarray(f(pts), dtype=complex)
        zetas = (pts - ctx.P_at(delta)[None, :]) @ ctx.v.conj()
        ratios = np.zeros(len(pts))
        for i, (zeta, val) in enumerate(zip(zetas, fw)):
            rad = abs(zeta)
            if rad == 0:
                continue
            s = s_of_t(ctx, float(rad))
            diff = abs(f_center - val)
            ratios[i] = (diff / s**alpha) if s > 0 else (0.0 if diff == 0 else math.inf)
        i = int(np.argmax(ratios))
        box = box_decomposition(f, ctx, delta, pts[i], alpha)
        rows.append({
            "delta": delta, "R": R, "sup": float(ratios[i]), "mean": float(np.mean(ratios)),
            "argmax": [[float(x.real), float(x.imag)] for x in pts[i]],
            "argmax_abs_zeta": float(abs(zetas[i])),
            "I": box.I, "II": box.II, "III": box.III, "h": box.h, "total": box.total,
            "S_alpha": box.S_alpha, "triangle_ok": box.triangle_ok,
        })
    sups = [r["sup"] for r in rows]
    band = band_ratio(sups)
    verdict = "PASS" if band <= band_limit else "FAIL"
    k0_out = "inf" if math.isinf(k0) else int(k0)
    return GainReport(rows, alpha, k0_out, d0, verdict, float(max(sups)), band)


def uniformity_diagnostic(f: TestFunction, domain, points, alpha: float, **kwargs) -> list:
    """Per-point constants of :func:`verify_main_theorem` over sampled boundary points.

    Diagnostic only: the recorded constants are not a certificate that one
    constant works uniformly.
    """
    out = []
    for P in points:
        ctx = DiscContext(domain, P=P)
        try:
            rep = verify_main_theorem(f, ctx, alpha, **kwargs)
            out.append({"point": [[float(x.real), float(x.imag)] for x in ctx.P], "C": rep.constant,
                        "verdict": rep.verdict, "k0": rep.k0})
        except PreconditionError as exc:
            out.append({"point": [[float(x.real), float(x.imag)] for x in ctx.P], "C": None,
                        "verdict": "SKIPPED", "reason": str(exc)})
    return out
