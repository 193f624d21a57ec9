"""Exact order-of-contact computations for polynomial defining functions.

Everything here runs in Gaussian-rational arithmetic: the order of vanishing
is discontinuous in the coefficients, so no floating shortcut is taken.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import norm, qmc

from . import expr as E
from .poly import SNAP_DENOMINATOR, GaussQ, Poly, compose_curve, to_poly

INF = math.inf
DENOMINATOR_CAP = SNAP_DENOMINATOR


class TypeOracleError(ValueError):
    pass


class NotOnZeroSet(TypeOracleError):
    pass


@dataclass(frozen=True)
class HoloCurve:
    """Polynomial holomorphic curve ζ ↦ F(ζ); components are ``{degree: coeff}``."""

    components: tuple

    def __post_init__(self):
        comps = tuple({int(k): GaussQ.of(v) for k, v in c.items() if GaussQ.of(v)} for c in self.components)
        object.__setattr__(self, "components", comps)
        if all(set(c) <= {0} for c in comps):
            raise TypeOracleError("curve must have a nonconstant component")

    @property
    def base(self) -> tuple:
        return tuple(c.get(0, GaussQ()) for c in self.components)

    @property
    def order(self) -> int:
        """``ord(F)``: least positive degree over all components."""
        return min(min((d for d in c if d > 0), default=INF) for c in self.components)

    @classmethod
    def line(cls, P: Sequence, v: Sequence) -> "HoloCurve":
        return cls(tuple({0: GaussQ.of(p), 1: GaussQ.of(x)} for p, x in zip(P, v)))

    def describe(self) -> str:
        parts = []
        for c in self.components:
            terms = []
            for d in sorted(c):
                coef = E.unparse(E.Const(c[d].re, c[d].im))
                mono = "z" if d == 1 else f"z^{d}"
                terms.append(coef if d == 0 else (f"{coef}*{mono}" if c[d] != 1 else mono))
            parts.append(" + ".join(terms) or "0")
        return "; ".join(parts)


def parse_curve(text: str, n: int | None = None) -> HoloCurve:
    """Parse ``"z^3; z^2; 0"`` style semicolon-separated components."""
    comps = []
    for src in text.split(";"):
        p = to_poly(E.parse_curve_component(src.strip()), 1, exact=True)
        if not p.is_holomorphic():
            raise TypeOracleError(f"curve component {src.strip()!r} is not holomorphic")
        comps.append({k[0]: v for k, v in p.terms.items()})
    if n is not None and len(comps) != n:
        raise TypeOracleError(f"curve has {len(comps)} components, domain dimension is {n}")
    return HoloCurve(tuple(comps))


@dataclass
class ContactReport:
    ord_rF: float  # even integer or inf
    ord_F: int
    ratio: object  # Fraction or inf
    leading_coefficient: GaussQ | None
    leading_coefficient_sign: str  # "positive", "zero", "negative", "n/a"
    pure_modulus: bool

    @property
    def finite(self) -> bool:
        return not math.isinf(self.ord_rF)

    def to_dict(self) -> dict:
        lc = self.leading_coefficient
        return {
            "ord": "inf" if not self.finite else int(self.ord_rF),
            "ord_F": self.ord_F,
            "ratio": "inf" if not self.finite else str(self.ratio),
            "leading_coefficient": None if lc is None else str(lc.re) if not lc.im else f"{lc.re}+{lc.im}i",
            "leading_coefficient_sign": self.leading_coefficient_sign,
            "pure_modulus": self.pure_modulus,
        }


def rational_point(P) -> list:
    out = []
    for x in P:
        if isinstance(x, (GaussQ, Fraction, int)):
            out.append(GaussQ.of(x))
        else:
            x = complex(x)
            out.append(GaussQ.snapped(x))
    return out


def compose_order(r: Poly, F: HoloCurve) -> ContactReport:
    """Order of vanishing of ``r∘F`` at ζ = 0, computed exactly."""
    if r.evaluate_exact(F.base):
        raise NotOnZeroSet("r(F(0)) != 0")
    comp = compose_curve(r, F.components)
    ord_F = F.order
    if not comp:
        return ContactReport(INF, ord_F, INF, None, "n/a", False)
    m = min(a + b for a, b in comp)
    stratum = {k: v for k, v in comp.items() if sum(k) == m}
    lc = comp.get((m // 2, m // 2)) if m % 2 == 0 else None
    pure = m % 2 == 0 and set(stratum) == {(m // 2, m // 2)}
    if lc is None:
        sign = "zero"
    elif lc.im != 0:
        sign = "n/a"
    else:
        sign = "positive" if lc.re > 0 else ("negative" if lc.re < 0 else "zero")
    return ContactReport(m, ord_F, Fraction(m, ord_F), lc, sign, pure)


def tangency_defect(r: Poly, P, v) -> GaussQ:
    """``Σ_j (∂r/∂z_j)(P) v_j`` in exact arithmetic."""
    Pq = rational_point(P)
    vq = rational_point(v)
    acc = GaussQ()
    for j in range(r.n):
        acc = acc + r.derive(j + 1).evaluate_exact(Pq) * vq[j]
    return acc


def line_type(r: Poly, P, v) -> float:
    """Exact contact order of the complex line ``ζ ↦ P + ζv``."""
    Pq, vq = rational_point(P), rational_point(v)
    if tangency_defect(r, Pq, vq):
        raise TypeOracleError("direction is not complex tangent at P")
    return compose_order(r, HoloCurve.line(Pq, vq)).ord_rF


def rational_tangent_basis(r: Poly, P) -> list:
    """Gaussian-rational basis of the complex tangent space at a rational point.

    With pivot ``k`` maximising ``|∂r/∂z_k(P)|``, the vectors
    ``e_j − (g_j/g_k)·e_k`` (``j ≠ k``) annihilate the gradient exactly.
    """
    Pq = rational_point(P)
    g = [r.derive(j + 1).evaluate_exact(Pq) for j in range(r.n)]
    mags = [float(x.re) ** 2 + float(x.im) ** 2 for x in g]
    k = int(np.argmax(mags))
    if mags[k] == 0:
        raise TypeOracleError("degenerate gradient at P")
    basis = []
    for j in range(r.n):
        if j == k:
            continue
        b = [GaussQ() for _ in range(r.n)]
        b[j] = GaussQ(1)
        b[k] = -(g[j] / g[k])
        basis.append(b)
    return basis


def _rationalize(x: float) -> Fraction:
    return Fraction(x).limit_denominator(DENOMINATOR_CAP)


@dataclass
class SweepResult:
    max_order: float
    argmax_direction: list
    histogram: dict
    exact: bool = True
    directions: list = field(default_factory=list)
    orders: list = field(default_factory=list)

    def to_dict(self) -> dict:
        key = lambda o: "inf" if math.isinf(o) else str(int(o))  # noqa: E731
        return {
            "max_order": key(self.max_order),
            "argmax_direction": [[float(x.real), float(x.imag)] for x in map(complex, self.argmax_direction)],
            "histogram": {key(k): v for k, v in sorted(self.histogram.items())},
            "exact": self.exact,
        }


def sweep_directions(r: Poly, P, n_dirs: int) -> list:
    """Axis directions of the rational tangent basis, then Halton points on the unit sphere."""
    basis = rational_tangent_basis(r, P)
    m = len(basis)
    dirs = [list(b) for b in basis]
    need = max(n_dirs - len(dirs), 0)
    if need:
        halton = qmc.Halton(d=2 * m, scramble=False).random(need + 1)[1:]
        gauss = norm.ppf(np.clip(halton, 1e-12, 1 - 1e-12))
        for row in gauss:
            coeffs = row[0::2] + 1j * row[1::2]
            coeffs = coeffs / np.linalg.norm(coeffs)
            cq = [GaussQ(_rationalize(c.real), _rationalize(c.imag)) for c in coeffs]
            v = [GaussQ() for _ in range(r.n)]
            for c, b in zip(cq, basis):
                v = [vi + c * bi for vi, bi in zip(v, b)]
            if any(v):
                dirs.append(v)
    return dirs[:n_dirs] if n_dirs >= m else dirs


def line_type_sweep(r: Poly, P, n_dirs: int = 128, numeric_context=None) -> SweepResult:
    """Maximum of :func:`line_type` over a deterministic set of tangent directions.

    At a base point where ``r`` does not vanish exactly the exact path is
    unavailable; if ``numeric_context`` (a callable ``v -> k0``) is given the
    sweep falls back to it and the result is flagged ``exact=False``.
    """
    if n_dirs < 8:
        raise TypeOracleError("n_dirs must be at least 8")
    Pq = rational_point(P)
    exact = not r.evaluate_exact(Pq)
    if not exact and numeric_context is None:
        raise NotOnZeroSet("base point is not exactly on the zero set; supply numeric_context")
    if exact:
        dirs = sweep_directions(r, Pq, n_dirs)
        orders = [compose_order(r, HoloCurve.line(Pq, v)).ord_rF for v in dirs]
    else:
        dirs, orders = numeric_context(n_dirs)
    hist = Counter(orders)
    best = max(orders)
    arg = dirs[orders.index(best)]
    return SweepResult(best, [complex(x) for x in arg], dict(hist), exact, dirs, orders)


def openness_bound(delta_q: int, n: int) -> Fraction:
    """``Δ^{n−1} / 2^{n−2}``."""
    if delta_q < 2 or n < 2:
        raise TypeOracleError("need delta_Q >= 2 and n >= 2")
    return Fraction(delta_q ** (n - 1), 2 ** (n - 2))


@dataclass
class ParityAudit:
    entries: list
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"entries": self.entries, "violations": self.violations, "passed": self.passed}


def parity_audit(r: Poly, P, curves: Sequence[HoloCurve]) -> ParityAudit:
    """Even order and positive ``|ζ|^m`` coefficient for every finite-order curve."""
    Pq = rational_point(P)
    entries, violations = [], []
    for F in curves:
        if [GaussQ.of(x) for x in F.base] != Pq:
            raise TypeOracleError(f"curve {F.describe()!r} is not based at P")
        rep = compose_order(r, F)
        row = {"curve": F.describe(), **rep.to_dict()}
        if not rep.finite:
            row["status"] = "skipped (infinite order)"
        elif rep.ord_rF % 2 or rep.leading_coefficient_sign != "positive":
            row["status"] = "violation"
            violations.append(row)
        else:
            row["status"] = "ok"
        entries.append(row)
    return ParityAudit(entries, violations)


def leading_form(r: Poly, P, v) -> Dict[tuple, complex]:
    """Lowest-degree homogeneous part of ``ζ ↦ r(P + ζv)`` as ``{(p, q): coeff}``."""
    comp = compose_curve(r, HoloCurve.line(rational_point(P), rational_point(v)).components)
    if not comp:
        return {}
    m = min(a + b for a, b in comp)
    return {k: complex(c) for k, c in comp.items() if sum(k) == m}


def leading_form_max(r: Poly, P, v, n_theta: int = 4096) -> tuple:
    """``(k, max_θ Σ c_pq e^{i(p−q)θ})``: order and leading constant of the line slice.

    The direction is normalized to unit length first, so the constant is the
    limit of ``S(t)/t^k`` for unit ``v``.
    """
    v = np.asarray([complex(x) for x in v])
    scale = np.linalg.norm(v)
    form = leading_form(r, P, v)
    if not form:
        return INF, 0.0
    k = sum(next(iter(form)))
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    vals = sum(c * np.exp(1j * (p - q) * theta) for (p, q), c in form.items()).real
    i = int(np.argmax(vals))
    # bounded polish around the best node
    f = lambda th: -sum(c * np.exp(1j * (p - q) * th) for (p, q), c in form.items()).real  # noqa: E731
    h = 2.0 * np.pi / n_theta
    res = minimize_scalar(f, bounds=(theta[i] - h, theta[i] + h), method="bounded", options={"xatol": 1e-12})
    best = max(vals[i], -res.fun)
    return k, float(best) / scale**k
