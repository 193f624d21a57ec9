"""Normals, complex tangent frames, normalized charts and boundary distance."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expr as E

BOUNDARY_TOL = 1e-8
GRADIENT_TOL = 1e-6


class GeometryError(ValueError):
    pass


class DegenerateGradient(GeometryError):
    pass


class NotOnBoundary(GeometryError):
    pass


class OutsideDomain(GeometryError):
    pass


def as_point(z, n: int | None = None) -> np.ndarray:
    p = np.asarray(z, dtype=complex).reshape(-1)
    if n is not None and p.size != n:
        raise E.DimensionError(f"point has {p.size} coordinates, expected {n}")
    return p


def hermitian(u, v) -> complex:
    """``⟨u, v⟩ = Σ u_j conj(v_j)``."""
    return complex(np.vdot(v, u))


def dbar_gradient(r: E.Expr, z, n: int | None = None) -> np.ndarray:
    """``(∂r/∂z̄_j)(z)``; twice this is the real gradient under C^n ≅ R^2n."""
    z = as_point(z, n)
    n = z.size
    return np.array([E.evaluate(g, list(z)) for g in E.gradient_exprs(r, n, conjugated=True)])


def dz_gradient(r: E.Expr, z, n: int | None = None) -> np.ndarray:
    z = as_point(z, n)
    return np.array([E.evaluate(g, list(z)) for g in E.gradient_exprs(r, z.size)])


def real_gradient_norm(r: E.Expr, z) -> float:
    return float(2.0 * np.linalg.norm(dbar_gradient(r, z)))


def _check_boundary(r: E.Expr, P: np.ndarray):
    val = E.evaluate(r, list(P))
    if abs(val) > BOUNDARY_TOL:
        raise NotOnBoundary(f"|r(P)| = {abs(val):.3e} exceeds {BOUNDARY_TOL}")
    g = dbar_gradient(r, P)
    if 2.0 * np.linalg.norm(g) < GRADIENT_TOL:
        raise DegenerateGradient(f"|grad r(P)| = {2 * np.linalg.norm(g):.3e} below {GRADIENT_TOL}")
    return g


def outward_normal(r: E.Expr, P) -> np.ndarray:
    """Outward unit normal at the boundary point ``P``."""
    P = as_point(P)
    g = _check_boundary(r, P)
    return g / np.linalg.norm(g)


@dataclass(frozen=True)
class TangentFrame:
    base_point: np.ndarray
    normal: np.ndarray
    tangent_basis: np.ndarray  # rows are the n-1 tangent vectors

    def to_dict(self) -> dict:
        return {
            "base_point": _cvec(self.base_point),
            "normal": _cvec(self.normal),
            "tangent_basis": [_cvec(v) for v in self.tangent_basis],
        }


def _cvec(v) -> list:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v, dtype=complex)]


def _complete_frame(nu: np.ndarray) -> np.ndarray:
    # Gram-Schmidt of the standard basis against ν, skipping the pivot e_k
    # with largest |ν_k|; ties go to the lowest index.
    n = nu.size
    pivot = int(np.argmax(np.abs(nu)))
    basis = [nu]
    for j in range(n):
        if j == pivot:
            continue
        w = np.zeros(n, dtype=complex)
        w[j] = 1.0
        for _ in range(2):
            for b in basis:
                w = w - hermitian(w, b) * b
        w = w / np.linalg.norm(w)
        basis.append(w)
    return np.array(basis[1:])


def tangent_frame(r: E.Expr, P) -> TangentFrame:
    P = as_point(P)
    nu = outward_normal(r, P)
    return TangentFrame(P, nu, _complete_frame(nu))


def tangency_residual(r: E.Expr, P, v) -> float:
    """``|Σ_j (∂r/∂z_j)(P) v_j|``."""
    return abs(complex(np.dot(dz_gradient(r, P), as_point(v))))


@dataclass(frozen=True)
class NormalizedChart:
    """Coordinates ``w = U (z - P)`` with ν ↦ e_n and the tangent frame ↦ e_1..e_{n-1}."""

    unitary: np.ndarray
    translation: np.ndarray
    pullback: E.Expr = field(compare=False)

    def to_chart(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (z + self.translation) @ self.unitary.T

    def from_chart(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        return w @ self.unitary.conj() - self.translation

    def is_identity(self) -> bool:
        n = self.unitary.shape[0]
        return bool(np.allclose(self.unitary, np.eye(n), atol=0) and not np.any(self.translation))

    def to_dict(self) -> dict:
        return {
            "unitary": [_cvec(row) for row in self.unitary],
            "translation": _cvec(self.translation),
            "pullback": E.unparse(self.pullback),
        }


def normalize_chart(r: E.Expr, P) -> NormalizedChart:
    frame = tangent_frame(r, P)
    P = frame.base_point
    n = P.size
    U = np.vstack([frame.tangent_basis.conj(), frame.normal.conj()[None, :]])
    # z_j = P_j + Σ_k conj(U_kj) w_k
    Uh = U.conj().T
    mapping = {}
    for j in range(n):
        acc: E.Expr = E.const(complex(P[j])) if P[j] != 0 else E.ZERO
        for k in range(n):
            c = Uh[j, k]
            if c == 0:
                continue
            term = E.Var(k + 1) if c == 1 else E.Mul(E.const(complex(c)), E.Var(k + 1))
            acc = term if (isinstance(acc, E.Const) and acc.is_zero()) else E.Add(acc, term)
        mapping[j + 1] = acc
    return NormalizedChart(U, -P, E.substitute(r, mapping))


def dist_to_boundary_est(r: E.Expr, z) -> float:
    """``|r(z)| / |∇r(z)|`` for an interior point ``z``.

    First-order exact and two-sided comparable to the true distance near the
    boundary; exact for affine ``r``.
    """
    z = as_point(z)
    val = E.evaluate(r, list(z)).real
    if val >= 0:
        raise OutsideDomain(f"r(z) = {val:.3e} >= 0")
    g = real_gradient_norm(r, z)
    if g < GRADIENT_TOL:
        raise DegenerateGradient(f"|grad r(z)| = {g:.3e}")
    return abs(val) / g


def line_search_distance(r: E.Expr, z, s_max: float = 1.0, iters: int = 200) -> float:
    """Distance from interior ``z`` to the zero set along the gradient direction.

    Bisection on ``s ↦ r(z + s·ĝ)``; used as an independent reference for
    :func:`dist_to_boundary_est`.
    """
    z = as_point(z)
    g = 2.0 * dbar_gradient(r, z)
    u = g / np.linalg.norm(g)
    f = lambda s: E.evaluate(r, list(z + s * u)).real  # noqa: E731
    if f(0.0) >= 0:
        raise OutsideDomain("point is not interior")
    hi = s_max
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e6:
            raise GeometryError("no boundary crossing along the gradient")
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17 * max(hi, 1e-300):
            break
    return 0.5 * (lo + hi)


@dataclass
class TransversalReport:
    s_grid: list
    ratios: list
    min_ratio: float
    max_ratio: float
    c0: float
    cos_angle: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "s_grid": list(self.s_grid),
            "ratios": list(self.ratios),
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "c0": self.c0,
            "cos_angle": self.cos_angle,
            "passed": self.passed,
        }


def transversal_dist_check(r: E.Expr, P, n_vec, s_grid: Sequence[float], box=None) -> TransversalReport:
    """Check ``c0·s ≤ dist(P − s·n) ≤ s`` along a transverse direction.

    Passes when the largest ratio is at most ``1 + 1e-2`` and the ratios stay
    within a factor 2 of each other (so the recorded ``c0`` is stable).
    """
    P = as_point(P)
    n_vec = as_point(n_vec)
    n_vec = n_vec / np.linalg.norm(n_vec)
    nu = outward_normal(r, P)
    cos_angle = float(np.real(hermitian(n_vec, nu)))
    if abs(cos_angle) < 1e-2:
        raise GeometryError(f"direction is not transverse: <n, nu> = {cos_angle:.3e}")
    ratios = []
    for s in s_grid:
        q = P - s * n_vec
        if box is not None and not point_in_box(q, box):
            raise GeometryError(f"s = {s} leaves the neighbourhood box")
        ratios.append(dist_to_boundary_est(r, q) / s)
    lo, hi = float(min(ratios)), float(max(ratios))
    passed = hi <= 1 + 1e-2 and lo > 0 and hi / lo <= 2.0
    return TransversalReport(list(map(float, s_grid)), [float(x) for x in ratios], lo, hi, lo, cos_angle, passed)


def point_in_box(z, box) -> bool:
    """``box`` is a (2n, 2) array of real/imag bounds, interleaved per coordinate."""
    z = as_point(z)
    box = np.asarray(box, dtype=float)
    parts = np.column_stack([z.real, z.imag]).reshape(-1)
    return bool(np.all(parts >= box[:, 0] - 1e-15) and np.all(parts <= box[:, 1] + 1e-15))


def points_in_box(pts, box) -> np.ndarray:
    """Vectorized :func:`point_in_box` over the rows of ``pts``."""
    pts = np.asarray(pts, dtype=complex)
    box = np.asarray(box, dtype=float)
    parts = np.stack([pts.real, pts.imag], axis=-1).reshape(pts.shape[0], -1)
    return np.all((parts >= box[:, 0] - 1e-15) & (parts <= box[:, 1] + 1e-15), axis=1)


def box_radius(center, v, box) -> float:
    """Largest ``t`` with ``center + ζ·v`` in the box for all ``|ζ| ≤ t``."""
    c = as_point(center)
    v = as_point(v)
    box = np.asarray(box, dtype=float)
    t = np.inf
    for j in range(c.size):
        a = abs(v[j])
        if a == 0:
            continue
        for part, val in ((0, c[j].real), (1, c[j].imag)):
            lo, hi = box[2 * j + part]
            t = min(t, (hi - val) / a, (val - lo) / a)
    return float(max(t, 0.0))
