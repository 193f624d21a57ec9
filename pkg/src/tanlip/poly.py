"""Exact multivariate polynomials in z, z̄ with Gaussian-rational coefficients."""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Tuple

import numpy as np

from . import expr as E


SNAP_DENOMINATOR = 10**6


def snap_fraction(x: float, cap: int = SNAP_DENOMINATOR) -> Fraction:
    """The short rational (denominator ≤ cap) whose nearest double is ``x``, else ``x`` exactly."""
    q = Fraction(x).limit_denominator(cap)
    return q if float(q) == x else Fraction(x)


class GaussQ:
    """Gaussian rational ``re + i·im`` with exact :class:`Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def of(cls, x) -> "GaussQ":
        if isinstance(x, GaussQ):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        x = complex(x)
        return cls(Fraction(x.real), Fraction(x.imag))

    @classmethod
    def snapped(cls, x) -> "GaussQ":
        """Like :meth:`of`, but reads each float part through :func:`snap_fraction`."""
        if isinstance(x, (GaussQ, int, Fraction)):
            return cls.of(x)
        x = complex(x)
        return cls(snap_fraction(x.real), snap_fraction(x.imag))

    def __add__(self, o):
        o = GaussQ.of(o)
        return GaussQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = GaussQ.of(o)
        return GaussQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GaussQ.of(o) - self

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __mul__(self, o):
        o = GaussQ.of(o)
        return GaussQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GaussQ.of(o)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("GaussQ division by zero")
        return self * GaussQ(o.re / d, -o.im / d)

    def conj(self) -> "GaussQ":
        return GaussQ(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        try:
            o = GaussQ.of(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"GaussQ({self.re})"
        return f"GaussQ({self.re}, {self.im})"


Exponent = Tuple[int, ...]


class Poly:
    """Polynomial in ``z_1..z_n, z̄_1..z̄_n``.

    Terms map an exponent tuple ``(a_1..a_n, b_1..b_n)`` (holomorphic then
    antiholomorphic degrees) to a nonzero coefficient.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Dict[Exponent, GaussQ] | None = None):
        self.n = n
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def constant(cls, n: int, c) -> "Poly":
        return cls(n, {(0,) * (2 * n): GaussQ.of(c)})

    @classmethod
    def variable(cls, n: int, j: int, conjugated: bool = False) -> "Poly":
        exps = [0] * (2 * n)
        exps[j - 1 + (n if conjugated else 0)] = 1
        return cls(n, {tuple(exps): GaussQ(1)})

    def __add__(self, o: "Poly") -> "Poly":
        out = dict(self.terms)
        for k, v in o.terms.items():
            out[k] = out.get(k, GaussQ()) + v
        return Poly(self.n, out)

    def __neg__(self) -> "Poly":
        return Poly(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, o: "Poly") -> "Poly":
        return self + (-o)

    def __mul__(self, o) -> "Poly":
        if not isinstance(o, Poly):
            c = GaussQ.of(o)
            return Poly(self.n, {k: v * c for k, v in self.terms.items()})
        out: Dict[Exponent, GaussQ] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in o.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, GaussQ()) + v1 * v2
        return Poly(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.constant(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "Poly":
        n = self.n
        return Poly(n, {k[n:] + k[:n]: v.conj() for k, v in self.terms.items()})

    def __eq__(self, o):
        return isinstance(o, Poly) and self.n == o.n and self.terms == o.terms

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"Poly(n={self.n}, {len(self.terms)} terms)"

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def is_holomorphic(self) -> bool:
        return all(not any(k[self.n:]) for k in self.terms)

    def is_real(self) -> bool:
        return self == self.conj()

    def derive(self, j: int, conjugated: bool = False) -> "Poly":
        idx = j - 1 + (self.n if conjugated else 0)
        out = {}
        for k, v in self.terms.items():
            if k[idx]:
                kk = list(k)
                kk[idx] -= 1
                out[tuple(kk)] = v * k[idx]
        return Poly(self.n, out)

    def evaluate(self, z):
        """Numeric evaluation; ``z`` holds scalars or equal-shape arrays."""
        z = [np.asarray(x, dtype=complex) for x in z]
        zb = [np.conj(x) for x in z]
        cols = z + zb
        out = 0j
        for k, v in self.terms.items():
            term = complex(v)
            for x, e in zip(cols, k):
                if e:
                    term = term * x**e
            out = out + term
        if np.ndim(out) == 0:
            return complex(out)
        return np.asarray(out, dtype=complex) * np.ones(np.broadcast(*z).shape)

    def evaluate_exact(self, point) -> GaussQ:
        pt = [GaussQ.of(x) for x in point]
        cols = pt + [x.conj() for x in pt]
        out = GaussQ()
        for k, v in self.terms.items():
            term = v
            for x, e in zip(cols, k):
                for _ in range(e):
                    term = term * x
            out = out + term
        return out

    def monomial_strings(self) -> list:
        names = [f"z{j}" for j in range(1, self.n + 1)] + [f"conj(z{j})" for j in range(1, self.n + 1)]
        out = []
        for k in sorted(self.terms):
            parts = [nm if e == 1 else f"{nm}^{e}" for nm, e in zip(names, k) if e]
            out.append("*".join(parts) or "1")
        return out

    def to_expr(self) -> E.Expr:
        """Rebuild a DSL expression (exact constants)."""
        acc = None
        for k in sorted(self.terms):
            v = self.terms[k]
            term: E.Expr = E.Const(v.re, v.im)
            for idx, e in enumerate(k):
                if not e:
                    continue
                j = idx % self.n + 1
                base: E.Expr = E.Var(j) if idx < self.n else E.Conj(E.Var(j))
                term = E.Mul(term, base if e == 1 else E.Pow(base, e))
            acc = term if acc is None else E.Add(acc, term)
        return acc if acc is not None else E.ZERO


class NonPolynomialError(E.ExprError):
    pass


def to_poly(e: E.Expr, n: int, exact: bool = True) -> Poly:
    """Expand ``e`` into a :class:`Poly`.

    With ``exact`` (the default) decimal constants are rejected; otherwise
    they are converted exactly from their binary float values.
    """
    return _to_poly(e, n, exact)


def _to_poly(e, n, exact):
    rec = lambda u: _to_poly(u, n, exact)  # noqa: E731
    if isinstance(e, E.Const):
        if exact and not e.exact:
            raise NonPolynomialError(f"non-rational constant {E.unparse(e)}")
        return Poly.constant(n, GaussQ(Fraction(e.re), Fraction(e.im)))
    if isinstance(e, E.Var):
        if e.index > n:
            raise E.DimensionError(f"z{e.index} exceeds dimension {n}")
        return Poly.variable(n, e.index)
    if isinstance(e, E.Conj):
        return rec(e.arg).conj()
    if isinstance(e, E.Re):
        u = rec(e.arg)
        return (u + u.conj()) * GaussQ(Fraction(1, 2))
    if isinstance(e, E.Im):
        u = rec(e.arg)
        return (u - u.conj()) * GaussQ(0, Fraction(-1, 2))
    if isinstance(e, E.Abs2):
        u = rec(e.arg)
        return u * u.conj()
    if isinstance(e, E.Neg):
        return -rec(e.arg)
    if isinstance(e, E.Add):
        return rec(e.left) + rec(e.right)
    if isinstance(e, E.Sub):
        return rec(e.left) - rec(e.right)
    if isinstance(e, E.Mul):
        return rec(e.left) * rec(e.right)
    if isinstance(e, E.Pow):
        return rec(e.base) ** e.exp
    raise NonPolynomialError(f"cannot expand {e!r}")


# ------------------------------------------------- univariate compositions

def _upow_cache(poly1: Dict[int, GaussQ], kmax: int) -> list:
    """Powers 0..kmax of a univariate polynomial given as {degree: coeff}."""
    pows = [{0: GaussQ(1)}]
    for _ in range(kmax):
        prev = pows[-1]
        nxt: Dict[int, GaussQ] = {}
        for a, ca in prev.items():
            for b, cb in poly1.items():
                nxt[a + b] = nxt.get(a + b, GaussQ()) + ca * cb
        pows.append({k: v for k, v in nxt.items() if v})
    return pows


def compose_curve(p: Poly, components: Iterable[Dict[int, GaussQ]]) -> Dict[Tuple[int, int], GaussQ]:
    """Exact ``p(F(ζ), conj F(ζ))`` as ``{(deg ζ, deg ζ̄): coeff}``."""
    comps = list(components)
    if len(comps) != p.n:
        raise E.DimensionError(f"curve has {len(comps)} components, polynomial has n={p.n}")
    n = p.n
    kmax = [max((max(k[j], k[n + j]) for k in p.terms), default=0) for j in range(n)]
    pows = [_upow_cache(c, km) for c, km in zip(comps, kmax)]
    out: Dict[Tuple[int, int], GaussQ] = {}
    for k, coeff in p.terms.items():
        hol = {0: coeff}
        anti = {0: GaussQ(1)}
        for j in range(n):
            if k[j]:
                hol = _umul(hol, pows[j][k[j]])
            if k[n + j]:
                anti = _umul(anti, {d: c.conj() for d, c in pows[j][k[n + j]].items()})
        for a, ca in hol.items():
            for b, cb in anti.items():
                out[(a, b)] = out.get((a, b), GaussQ()) + ca * cb
    return {k: v for k, v in out.items() if v}


def _umul(x: Dict[int, GaussQ], y: Dict[int, GaussQ]) -> Dict[int, GaussQ]:
    out: Dict[int, GaussQ] = {}
    for a, ca in x.items():
        for b, cb in y.items():
            out[a + b] = out.get(a + b, GaussQ()) + ca * cb
    return out


class AffineSlice:
    """``p(a + ζ·b + t·c)`` for a real parameter ``t``, as a trivariate polynomial.

    Coefficients are computed exactly and rounded once; float inputs that are
    the nearest double to a short rational are read as that rational, so a
    base point such as (0.6, 0.8) lies exactly on the sphere. Evaluation is vectorised over ζ with ``t`` a scalar, which
    avoids the cancellation of evaluating ``r`` at points near ``a``.
    """

    def __init__(self, p: Poly, a, b, c):
        n = p.n
        a = [GaussQ.snapped(x) for x in a]
        b = [GaussQ.snapped(x) for x in b]
        c = [GaussQ.snapped(x) for x in c]
        terms: Dict[Tuple[int, int, int], GaussQ] = {}
        # each factor z_j is a + ζ b + t c; z̄_j is ā + ζ̄ b̄ + t c̄
        factor_cache: dict = {}

        def power(j, e, conj):
            key = (j, e, conj)
            if key not in factor_cache:
                if conj:
                    lin = {(0, 0, 0): a[j].conj(), (0, 1, 0): b[j].conj(), (0, 0, 1): c[j].conj()}
                else:
                    lin = {(0, 0, 0): a[j], (1, 0, 0): b[j], (0, 0, 1): c[j]}
                lin = {k: v for k, v in lin.items() if v}
                acc = {(0, 0, 0): GaussQ(1)}
                for _ in range(e):
                    acc = _tmul(acc, lin)
                factor_cache[key] = acc
            return factor_cache[key]

        for k, coeff in p.terms.items():
            acc = {(0, 0, 0): coeff}
            for j in range(n):
                if k[j]:
                    acc = _tmul(acc, power(j, k[j], False))
                if k[n + j]:
                    acc = _tmul(acc, power(j, k[n + j], True))
            for kk, v in acc.items():
                terms[kk] = terms.get(kk, GaussQ()) + v
        self.exact_terms = {k: v for k, v in terms.items() if v}
        keys = sorted(self.exact_terms)
        self.p = np.array([k[0] for k in keys], dtype=int)
        self.q = np.array([k[1] for k in keys], dtype=int)
        self.m = np.array([k[2] for k in keys], dtype=int)
        self.coef = np.array([complex(self.exact_terms[k]) for k in keys], dtype=complex)
        self.deg_zeta = int(max(self.p.max(initial=0), self.q.max(initial=0)))
        self.deg_t = int(self.m.max(initial=0))

    def _zeta_part(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.reshape(-1)
        pw = np.ones((self.deg_zeta + 1, flat.size), dtype=complex)
        for d in range(1, self.deg_zeta + 1):
            pw[d] = pw[d - 1] * flat
        return pw, np.conj(pw), zeta.shape

    def __call__(self, zeta, t: float = 0.0):
        """Complex value at ζ (array) and scalar t."""
        if self.coef.size == 0:
            return np.zeros(np.shape(zeta))
        pw, pwb, shape = self._zeta_part(zeta)
        ct = self.coef * float(t) ** self.m if t != 0 else np.where(self.m == 0, self.coef, 0)
        vals = ct @ (pw[self.p] * pwb[self.q])
        return vals.reshape(shape)

    def real(self, zeta, t: float = 0.0):
        return np.real(self(zeta, t))

    def t_derivative(self, zeta, t: float = 0.0):
        """∂/∂t of the slice at (ζ, t), elementwise array t allowed."""
        if self.coef.size == 0:
            return np.zeros(np.shape(zeta))
        pw, pwb, shape = self._zeta_part(zeta)
        basis = pw[self.p] * pwb[self.q]
        t = np.broadcast_to(np.asarray(t, dtype=float).reshape(-1), (basis.shape[1],))
        mm = np.maximum(self.m - 1, 0)
        tw = np.where(self.m[:, None] > 0, self.m[:, None] * t[None, :] ** mm[:, None], 0.0)
        return np.real(np.sum(self.coef[:, None] * tw * basis, axis=0)).reshape(shape)

    def real_at(self, zeta, t):
        """Real value with elementwise ``t`` (same size as ``zeta``)."""
        if self.coef.size == 0:
            return np.zeros(np.shape(zeta))
        pw, pwb, shape = self._zeta_part(zeta)
        basis = pw[self.p] * pwb[self.q]
        t = np.broadcast_to(np.asarray(t, dtype=float).reshape(-1), (basis.shape[1],))
        tw = t[None, :] ** self.m[:, None]
        return np.real(np.sum(self.coef[:, None] * tw * basis, axis=0)).reshape(shape)

    def lowest_zeta_order(self, t_free: bool = False) -> float:
        """Least total ζ-degree among terms with no ``t`` factor (inf if none)."""
        sel = [k for k in self.exact_terms if k[2] == 0 and (k[0] + k[1]) > 0]
        return min((k[0] + k[1] for k in sel), default=float("inf"))


def _tmul(x, y):
    out = {}
    for (a1, b1, c1), v1 in x.items():
        for (a2, b2, c2), v2 in y.items():
            k = (a1 + a2, b1 + b2, c1 + c2)
            out[k] = out.get(k, GaussQ()) + v1 * v2
    return {k: v for k, v in out.items() if v}
