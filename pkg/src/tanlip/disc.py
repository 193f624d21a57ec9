"""Disc functionals S(t), R(t), the disc 𝔻(t) and contact-order estimates.

For a boundary point ``P``, unit complex tangent ``v`` and outward normal
``ν``::

    S(t) = max{ r(P + ζv) : |ζ| ≤ t }
    R(t) = sup{ ρ : P − tν + ζv ∈ Ω ∩ U for |ζ| ≤ ρ }

All evaluations go through an :class:`~tanlip.poly.AffineSlice` of the
defining polynomial along ``(ζ, t) ↦ P + ζv − tν`` whose coefficients are
computed exactly, so small values of ``S`` carry no cancellation error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import geometry as G
from .poly import AffineSlice

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DiscError(ValueError):
    pass


class RadiusOutOfRange(DiscError):
    pass


class Inconsistency(DiscError):
    pass


class FlatDirection(DiscError):
    pass


@dataclass(frozen=True)
class DiscConfig:
    n_theta: int = 64
    n_rho: int = 64
    n_starts: int = 4
    refine_rel_step: float = 1e-8
    max_bisect: int = 60
    k_max: int = 12
    tol_r_rel: float = 1e-10
    tol_r_abs: float = 1e-15
    tol_s_scale: float = 1e-9


DEFAULT_CONFIG = DiscConfig()


def disc_max(fun: Callable, radius: float, config: DiscConfig = DEFAULT_CONFIG) -> tuple:
    """Maximum of the real function ``fun(ζ)`` over the closed disc ``|ζ| ≤ radius``.

    Polar grid (ρ from 0 to ``radius`` inclusive) followed by compass ascent
    in (ρ, θ) from the best few grid nodes, halving steps on failure.
    Returns ``(value, argmax ζ)``.
    """
    if radius <= 0:
        z0 = np.zeros(1, dtype=complex)
        return float(fun(z0)[0]), 0j
    n_r, n_t = config.n_rho, config.n_theta
    rho = np.linspace(0.0, radius, n_r)
    theta = np.arange(n_t) * (2.0 * np.pi / n_t)
    grid = (rho[:, None] * np.exp(1j * theta)[None, :]).reshape(-1)
    vals = np.asarray(fun(grid), dtype=float)
    k = min(config.n_starts, vals.size)
    order = np.argsort(-vals, kind="stable")[:k]
    cr = rho[order // n_t].copy()
    ct = theta[order % n_t].copy()
    best = vals[order].copy()
    dr = np.full(k, radius / (n_r - 1))
    dt = np.full(k, 2.0 * np.pi / n_t)
    stop = config.refine_rel_step * radius
    moves = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
    for _ in range(400):
        active = dr > stop
        if not np.any(active):
            break
        nr = np.clip(cr[:, None] + moves[None, :, 0] * dr[:, None], 0.0, radius)
        nt = ct[:, None] + moves[None, :, 1] * dt[:, None]
        cand = np.asarray(fun((nr * np.exp(1j * nt)).reshape(-1)), dtype=float).reshape(k, 4)
        j = np.argmax(cand, axis=1)
        cv = cand[np.arange(k), j]
        improved = (cv > best) & active
        cr = np.where(improved, nr[np.arange(k), j], cr)
        ct = np.where(improved, nt[np.arange(k), j], ct)
        best = np.where(improved, cv, best)
        shrink = active & ~improved
        dr = np.where(shrink, dr * 0.5, dr)
        dt = np.where(shrink, dt * 0.5, dt)
    i = int(np.argmax(best))
    return float(best[i]), complex(cr[i] * np.exp(1j * ct[i]))


@dataclass
class RadiusResult:
    value: float
    clamped: bool = False
    empty: bool = False
    mode: str = "definition"

    def __float__(self):
        return self.value


class DiscContext:
    """Base point, tangent direction and cached slice of one domain.

    ``form="raw"`` builds S from the defining function as given; ``"graph"``
    uses the graph-form function of the normalized chart, i.e. the depth of
    the boundary below the tangent disc along ``−ν``. The two coincide when
    ``r = Re z_n + h(z')`` at ``P``.
    """

    def __init__(self, domain, P=None, v=None, config: DiscConfig = DEFAULT_CONFIG, point_index: int = 0):
        self.domain = domain
        self.config = config
        r = domain.expr
        P = G.as_point(domain.base_points[point_index] if P is None else P, domain.dimension)
        self.P = P
        self.frame = G.tangent_frame(r, P)
        self.nu = self.frame.normal
        if v is None:
            v = self.frame.tangent_basis[0]
        v = G.as_point(v, domain.dimension)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise DiscError("tangent direction must be nonzero")
        self.v = v / norm
        resid = G.tangency_residual(r, P, self.v)
        if resid > 1e-10:
            raise DiscError(f"direction is not complex tangent at P (residual {resid:.3e})")
        self.t_max = G.box_radius(P, self.v, domain.box)
        if self.t_max <= 0:
            raise DiscError("base point on the edge of the neighbourhood box")
        self.delta0 = 1e-2 * self.t_max
        self._s_cache: dict = {}

    @cached_property
    def chart(self) -> G.NormalizedChart:
        return G.normalize_chart(self.domain.expr, self.P)

    @cached_property
    def slice(self) -> AffineSlice:
        """``(ζ, t) ↦ r(P + ζv − tν)``."""
        return AffineSlice(self.domain.poly, self.P, self.v, -self.nu)

    def disc_point(self, zeta, depth: float = 0.0) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        return self.P[None, :] - depth * self.nu[None, :] + zeta.reshape(-1, 1) * self.v[None, :]

    def P_at(self, depth: float) -> np.ndarray:
        return self.P - depth * self.nu

    # graph-form depth: root t of r(P + ζv − tν) = 0 near t = 0
    def graph_depth(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex).reshape(-1)
        sl = self.slice
        t = np.zeros(zeta.size)
        for _ in range(60):
            f = sl.real_at(zeta, t)
            df = sl.t_derivative(zeta, t)
            step = f / df
            t = t - step
            if np.all(np.abs(step) <= 4e-16 * np.abs(t)):
                break
        return t

    def _profile(self, form: str) -> Callable:
        if form == "raw":
            return lambda z: self.slice.real(z, 0.0)
        if form == "graph":
            return self.graph_depth
        raise ValueError(f"unknown S form {form!r}")

    def tol_S(self, s: float, t: float) -> float:
        return self.config.tol_s_scale * max(abs(s), t ** self.config.k_max)

    def tol_R(self, radius: float) -> float:
        return self.config.tol_r_rel * radius + self.config.tol_r_abs


def s_of_t(ctx: DiscContext, t: float, form: str = "raw") -> float:
    """``S(t)``, clamped at 0 from below."""
    if not 0 < t <= ctx.t_max * (1 + 1e-12):
        if t == 0:
            return 0.0
        raise RadiusOutOfRange(f"t = {t} outside (0, t_max = {ctx.t_max}]")
    key = (form, float(t))
    if key not in ctx._s_cache:
        val, _ = disc_max(ctx._profile(form), min(t, ctx.t_max), ctx.config)
        ctx._s_cache[key] = max(val, 0.0)
    return ctx._s_cache[key]


def _largest_feasible(feasible_value: Callable, rmax: float, ctx: DiscContext) -> tuple:
    """Largest ρ in [0, rmax] with ``feasible_value(ρ) < 0`` for a nondecreasing function."""
    m0 = feasible_value(0.0)
    if m0 >= 0:
        return 0.0, False, True
    if feasible_value(rmax) < 0:
        return rmax, True, False
    root = brentq(feasible_value, 0.0, rmax, xtol=ctx.config.tol_r_abs * 1e-3,
                  rtol=1e-13, maxiter=ctx.config.max_bisect * 4)
    return float(root), False, False


def r_of_t(ctx: DiscContext, t: float, mode: str = "definition") -> RadiusResult:
    """``R(t)``: radius of the largest tangent disc centred at ``P_t = P − tν``.

    ``mode="definition"`` tests ``max_{|ζ|≤ρ} r(P_t + ζv) < 0``; ``"inverse"``
    solves ``S(ρ) = t`` with the graph-form S; ``"both"`` runs the two and
    raises :class:`Inconsistency` when they differ by more than ``10·tol_R``.
    """
    if t <= 0:
        raise RadiusOutOfRange("depth must be positive")
    center = ctx.P_at(t)
    if not G.point_in_box(center, ctx.domain.box):
        raise RadiusOutOfRange(f"P_t leaves the neighbourhood box at t = {t}")
    rmax = min(G.box_radius(center, ctx.v, ctx.domain.box), ctx.t_max)
    if mode == "both":
        a = r_of_t(ctx, t, "definition")
        b = r_of_t(ctx, t, "inverse")
        if abs(a.value - b.value) > 10 * ctx.tol_R(max(a.value, b.value)):
            raise Inconsistency(f"R({t}): definition {a.value!r} vs inverse {b.value!r}")
        return a
    if mode == "definition":
        sl = ctx.slice

        def value(rho):
            return disc_max(lambda z: sl.real(z, t), rho, ctx.config)[0]
    elif mode == "inverse":
        prof = ctx._profile("graph")

        def value(rho):
            return disc_max(prof, rho, ctx.config)[0] - t
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rho, clamped, empty = _largest_feasible(value, rmax, ctx)
    return RadiusResult(rho, clamped, empty, mode)


def disc_samples(ctx: DiscContext, delta: float, fill: float = 0.95, N: int = 256,
                 radius: float | None = None) -> np.ndarray:
    """Points ``P_δ + ρe^{iθ}v`` with ``ρ ≤ fill·R(δ)``, stratified on rings.

    Rings sit at ``fill·R·sqrt((i+1)/n_rings)`` (equal-area) so the outermost
    ring is exactly at ``fill·R``; each ring carries equally spaced angles
    with a golden-ratio offset. Rows of the result are points in C^n.
    """
    if not 0 <= fill <= 0.95:
        raise DiscError("fill must lie in [0, 0.95]")
    center = ctx.P_at(delta)
    if fill == 0 or N <= 1:
        return center[None, :].copy()
    R = r_of_t(ctx, delta).value if radius is None else radius
    n_rings = max(1, int(round(math.sqrt(N))))
    per_ring = int(math.ceil(N / n_rings))
    zetas = []
    for i in range(n_rings):
        rho = fill * R * math.sqrt((i + 1) / n_rings)
        off = 2.0 * math.pi * ((i * GOLDEN) % 1.0) / per_ring
        for j in range(per_ring):
            zetas.append(rho * np.exp(1j * (off + 2.0 * math.pi * j / per_ring)))
    zetas = np.array(zetas[:N])
    pts = ctx.disc_point(zetas, delta)
    from .expr import evaluate

    vals = evaluate(ctx.domain.expr, [pts[:, j] for j in range(pts.shape[1])]).real
    if np.any(vals >= 0):
        raise DiscError("disc sample outside the domain (internal consistency failure)")
    return pts


@dataclass
class K0Estimate:
    k0: float  # even integer, math.inf for a flat direction, or math.nan if undetermined
    c_limit: float
    residual: float
    slope: float
    t_grid: list = field(default_factory=list)
    s_values: list = field(default_factory=list)

    @property
    def determined(self) -> bool:
        return not math.isnan(self.k0)

    def to_dict(self) -> dict:
        k0 = self.k0
        k0_out = "inf" if math.isinf(k0) else ("undetermined" if math.isnan(k0) else int(k0))
        return {"k0": k0_out, "c_limit": self.c_limit, "residual": self.residual, "slope": self.slope}


def estimate_k0(ctx: DiscContext, j_range=(4, 20), n_fit: int = 8, form: str = "raw") -> K0Estimate:
    """Contact order from the log–log slope of S on ``t_j = t_max·2^{-j}``."""
    t = np.array([ctx.t_max * 2.0 ** (-j) for j in range(j_range[0], j_range[1] + 1)])
    s = np.array([s_of_t(ctx, float(x), form) for x in t])
    flat_tol = 1e-9 * t ** ctx.config.k_max
    if np.all(s <= flat_tol):
        return K0Estimate(math.inf, 0.0, 0.0, math.inf, t.tolist(), s.tolist())
    tt, ss = t[-n_fit:], s[-n_fit:]
    if np.any(ss <= 0):
        return K0Estimate(math.nan, math.nan, math.inf, math.nan, t.tolist(), s.tolist())
    slope = float(np.polyfit(np.log(tt), np.log(ss), 1)[0])
    k0 = 2.0 * round(slope / 2.0)
    residual = abs(slope - k0)
    if residual > 0.1 or k0 <= 0:
        return K0Estimate(math.nan, math.nan, residual, slope, t.tolist(), s.tolist())
    c = float(np.median(ss / tt ** k0))
    return K0Estimate(k0, c, residual, slope, t.tolist(), s.tolist())


def superadditivity_bound(k0: float) -> float:
    """``(3^{1/k0} − 2^{1/k0}) / 2``."""
    return 0.5 * (3.0 ** (1.0 / k0) - 2.0 ** (1.0 / k0))


def superadditivity_margin(ctx: DiscContext, v_small: float, x: float, k0: float | None = None,
                           delta0: float | None = None) -> float:
    """``(R(v + x) − R(v)) / R(x)`` inside the window ``0 < v ≤ δ0``, ``v/2 ≤ x ≤ 2δ0``."""
    d0 = ctx.delta0 if delta0 is None else delta0
    if not (0 < v_small <= d0 and v_small / 2 <= x <= 2 * d0):
        raise DiscError(f"(v, x) = ({v_small}, {x}) outside the admissible window for delta0 = {d0}")
    R = lambda u: r_of_t(ctx, u).value  # noqa: E731
    return (R(v_small + x) - R(v_small)) / R(x)


@dataclass
class SCurve:
    t_grid: list
    s_values: list
    r_values: list
    k0: object = "undetermined"
    c_limit: float = math.nan

    def to_csv(self) -> str:
        lines = ["t,S,R"]
        for t, s, r in zip(self.t_grid, self.s_values, self.r_values):
            lines.append(f"{t:.17g},{s:.17g},{r:.17g}")
        return "\n".join(lines) + "\n"


def build_scurve(ctx: DiscContext, t_grid: Sequence[float], with_r: bool = True, with_k0: bool = True) -> SCurve:
    t_grid = sorted(float(t) for t in t_grid)
    s_vals = [s_of_t(ctx, t) for t in t_grid]
    r_vals = [r_of_t(ctx, t).value for t in t_grid] if with_r else [math.nan] * len(t_grid)
    k0: object = "undetermined"
    c = math.nan
    if with_k0:
        est = estimate_k0(ctx)
        k0 = est.to_dict()["k0"]
        c = est.c_limit
    return SCurve(t_grid, s_vals, r_vals, k0, c)


def dyadic_grid(ctx: DiscContext, j_lo: int, j_hi: int) -> list:
    return [ctx.t_max * 2.0 ** (-j) for j in range(j_lo, j_hi + 1)]


def quadratic_bound_profile(ctx: DiscContext, t_top: float = 1e-2, depths=(8, 12, 16)) -> list:
    """``max S(t)/t²`` over dyadic grids below ``t_top`` of increasing depth."""
    t_top = min(t_top, ctx.t_max)
    out = []
    for d in depths:
        grid = [t_top * 2.0 ** (-j) for j in range(d + 1)]
        out.append(max(s_of_t(ctx, t) / t**2 for t in grid))
    return out
