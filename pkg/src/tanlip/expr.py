"""Defining-function expressions over C^n.

The DSL covers polynomial expressions in z_1..z_n and their conjugates::

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := '-' factor | atom ('^' uint)?
    atom   := 'Re(' expr ')' | 'Im(' expr ')' | 'abs2(' expr ')' | 'conj(' expr ')'
            | var | const | '(' expr ')'
    var    := 'z' uint
    const  := rational | rational 'i' | '(' rational ('+'|'-') rational 'i' ')'

``abs2(u)`` means ``|u|^2``. Rationals are ``p`` or ``p/q``; decimal literals
are accepted for evaluation but rejected by the exact polynomial backend.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

Number = Union[Fraction, float]


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    """Syntax error; ``offset`` is a byte offset into the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class DimensionError(ExprError):
    pass


class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    def __add__(self, other):
        return Add(self, _lift(other))

    def __radd__(self, other):
        return Add(_lift(other), self)

    def __sub__(self, other):
        return Sub(self, _lift(other))

    def __rsub__(self, other):
        return Sub(_lift(other), self)

    def __mul__(self, other):
        return Mul(self, _lift(other))

    def __rmul__(self, other):
        return Mul(_lift(other), self)

    def __pow__(self, k: int):
        return Pow(self, int(k))

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return unparse(self)


@dataclass(frozen=True)
class Const(Expr):
    re: Number = Fraction(0)
    im: Number = Fraction(0)

    @property
    def exact(self) -> bool:
        return isinstance(self.re, Fraction) and isinstance(self.im, Fraction)

    @property
    def value(self) -> complex:
        return complex(float(self.re), float(self.im))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_one(self) -> bool:
        return self.re == 1 and self.im == 0


@dataclass(frozen=True)
class Var(Expr):
    index: int


@dataclass(frozen=True)
class Conj(Expr):
    arg: Expr


@dataclass(frozen=True)
class Re(Expr):
    arg: Expr


@dataclass(frozen=True)
class Im(Expr):
    arg: Expr


@dataclass(frozen=True)
class Abs2(Expr):
    arg: Expr


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int


ZERO = Const(Fraction(0), Fraction(0))
ONE = Const(Fraction(1), Fraction(0))
HALF = Const(Fraction(1, 2), Fraction(0))


def const(value) -> Const:
    """Build a constant, keeping it exact whenever ``value`` is rational.

    Python floats are converted exactly (every float is a binary rational),
    so constants produced internally stay usable by the exact backend.
    """
    if isinstance(value, Const):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(Fraction(value), Fraction(0))
    if isinstance(value, tuple):
        re_, im_ = value
        return Const(_exact(re_), _exact(im_))
    value = complex(value)
    return Const(_exact(value.real), _exact(value.imag))


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    x = float(x)
    if not np.isfinite(x):
        raise ExprError(f"non-finite constant {x!r}")
    return Fraction(x)


def _lift(x) -> Expr:
    return x if isinstance(x, Expr) else const(x)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)
_RATIONAL = r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?(?:/\d+)?"
_PAREN_CONST = re.compile(
    rf"\(\s*(?P<rs>[+-]?)\s*(?P<re>{_RATIONAL})\s*(?P<sign>[+-])\s*(?P<im>{_RATIONAL})\s*i\s*\)"
)
_FUNCS = {"Re": Re, "Im": Im, "abs2": Abs2, "conj": Conj}


def _number(text: str) -> Number:
    if "/" in text:
        num, den = text.split("/")
        if any(c in num for c in ".eE"):
            raise ExprError(f"malformed rational {text!r}")
        if int(den) == 0:
            raise ExprError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    if any(c in text for c in ".eE"):
        return float(text)
    return Fraction(int(text))


class _Parser:
    def __init__(self, source: str, n: int, curve: bool = False):
        self.src = source
        self.n = n
        self.curve = curve
        self.pos = 0

    def error(self, message: str, pos: int | None = None):
        pos = self.pos if pos is None else pos
        raise ParseError(message, len(self.src[:pos].encode("utf-8")))

    def skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        if self.pos >= len(self.src):
            return None
        m = _TOKEN.match(self.src, self.pos)
        if m is None:
            self.error(f"unexpected character {self.src[self.pos]!r}")
        return m

    def expect(self, ch: str):
        m = self.peek()
        if m is None or m.group() != ch:
            self.error(f"expected {ch!r}")
        self.pos = m.end()

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek() is not None:
            self.error("trailing input")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while True:
            m = self.peek()
            if m is None or m.group() not in "+-":
                return left
            self.pos = m.end()
            right = self.term()
            left = Add(left, right) if m.group() == "+" else Sub(left, right)

    def term(self) -> Expr:
        left = self.factor()
        while True:
            m = self.peek()
            if m is None or m.group() != "*":
                return left
            self.pos = m.end()
            left = Mul(left, self.factor())

    def factor(self) -> Expr:
        m = self.peek()
        if m is not None and m.group() == "-":
            self.pos = m.end()
            return Neg(self.factor())
        base = self.atom()
        m = self.peek()
        if m is not None and m.group() == "^":
            self.pos = m.end()
            m = self.peek()
            if m is None or m.lastgroup != "num" or not m.group().isdigit():
                self.error("exponent must be a non-negative integer")
            self.pos = m.end()
            return Pow(base, int(m.group()))
        return base

    def atom(self) -> Expr:
        m = self.peek()
        if m is None:
            self.error("unexpected end of input")
        start = m.start()
        kind, text = m.lastgroup, m.group()
        if text == "(":
            pc = _PAREN_CONST.match(self.src, start)
            if pc is not None:
                self.pos = pc.end()
                try:
                    re_ = _number(pc.group("re"))
                    im_ = _number(pc.group("im"))
                except ExprError as exc:
                    self.error(str(exc), start)
                if pc.group("rs") == "-":
                    re_ = -re_
                if pc.group("sign") == "-":
                    im_ = -im_
                return Const(re_, im_)
            self.pos = m.end()
            e = self.expr()
            self.expect(")")
            return e
        if kind == "num":
            self.pos = m.end()
            try:
                value = _number(text)
            except ExprError as exc:
                self.error(str(exc), start)
            # imaginary unit suffix: "3i", "1/2i"
            if self.pos < len(self.src) and self.src[self.pos] == "i" and not (
                self.pos + 1 < len(self.src) and (self.src[self.pos + 1].isalnum() or self.src[self.pos + 1] == "_")
            ):
                self.pos += 1
                return Const(Fraction(0), value)
            return Const(value, Fraction(0))
        if kind == "name":
            if text in _FUNCS:
                self.pos = m.end()
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return _FUNCS[text](e)
            if self.curve and text == "z":
                self.pos = m.end()
                return Var(1)
            vm = re.fullmatch(r"z(\d+)", text)
            if vm is not None and not self.curve:
                j = int(vm.group(1))
                if not 1 <= j <= self.n:
                    self.error(f"variable index z{j} out of range 1..{self.n}", start)
                self.pos = m.end()
                return Var(j)
            self.error(f"unknown identifier {text!r}", start)
        self.error(f"unexpected token {text!r}", start)


def parse(source: str, n: int) -> Expr:
    """Parse DSL text into an :class:`Expr` over ``z1..zn``."""
    if n < 1:
        raise ExprError("dimension must be positive")
    return _Parser(source, n).parse()


def parse_curve_component(source: str) -> Expr:
    """Parse a polynomial in the single curve parameter, written ``z``."""
    return _Parser(source, 1, curve=True).parse()


# -------------------------------------------------------------- unparsing

_PREC = {Add: 1, Sub: 1, Mul: 2, Neg: 3, Pow: 4}


def _fmt_number(x: Number) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def _fmt_const(c: Const) -> str:
    re_, im_ = c.re, c.im
    if im_ == 0 and re_ >= 0 and not isinstance(im_, float):
        return _fmt_number(re_)
    if re_ == 0 and im_ >= 0 and not isinstance(re_, float):
        return _fmt_number(im_) + "i"
    sign = "-" if im_ < 0 else "+"
    rs = "-" if re_ < 0 else ""
    return f"({rs}{_fmt_number(abs(re_))}{sign}{_fmt_number(abs(im_))}i)"


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


def unparse(e: Expr) -> str:
    """Render ``e`` so that ``parse(unparse(e))`` rebuilds the same tree."""
    if isinstance(e, Const):
        return _fmt_const(e)
    if isinstance(e, Var):
        return f"z{e.index}"
    if isinstance(e, (Conj, Re, Im, Abs2)):
        name = {Conj: "conj", Re: "Re", Im: "Im", Abs2: "abs2"}[type(e)]
        return f"{name}({unparse(e.arg)})"
    if isinstance(e, Neg):
        inner = unparse(e.arg)
        return "-" + (inner if _prec(e.arg) >= 3 else f"({inner})")
    if isinstance(e, Pow):
        inner = unparse(e.base)
        if _prec(e.base) < 5 or (isinstance(e.base, Const) and inner.startswith("-")):
            inner = f"({inner})"
        return f"{inner}^{e.exp}"
    if isinstance(e, (Add, Sub, Mul)):
        p = _prec(e)
        left = unparse(e.left)
        if _prec(e.left) < p:
            left = f"({left})"
        right = unparse(e.right)
        if _prec(e.right) <= p and not isinstance(e.right, Neg):
            right = f"({right})"
        op = {Add: " + ", Sub: " - ", Mul: "*"}[type(e)]
        return f"{left}{op}{right}"
    raise TypeError(f"not an Expr: {e!r}")


# ------------------------------------------------------------- evaluation

def max_index(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Const):
        return 0
    return max(max_index(c) for c in children(e))


def children(e: Expr) -> tuple:
    if isinstance(e, (Conj, Re, Im, Abs2, Neg)):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, (Add, Sub, Mul)):
        return (e.left, e.right)
    return ()


def evaluate(e: Expr, z: Sequence, n: int | None = None):
    """Evaluate ``e`` at ``z``; coordinates may be scalars or numpy arrays."""
    if n is not None and len(z) != n:
        raise DimensionError(f"point has {len(z)} coordinates, expected {n}")
    if max_index(e) > len(z):
        raise DimensionError(f"expression uses z{max_index(e)} but point has {len(z)} coordinates")
    out = _eval(e, z)
    if np.ndim(out) == 0:
        return complex(out)
    return np.asarray(out, dtype=complex)


def _eval(e: Expr, z):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return z[e.index - 1]
    if isinstance(e, Add):
        return _eval(e.left, z) + _eval(e.right, z)
    if isinstance(e, Sub):
        return _eval(e.left, z) - _eval(e.right, z)
    if isinstance(e, Mul):
        return _eval(e.left, z) * _eval(e.right, z)
    if isinstance(e, Neg):
        return -_eval(e.arg, z)
    if isinstance(e, Pow):
        b = _eval(e.base, z)
        out = 1.0 + 0j
        for _ in range(e.exp):
            out = out * b
        return out
    if isinstance(e, Conj):
        return np.conj(_eval(e.arg, z))
    if isinstance(e, Re):
        return np.real(_eval(e.arg, z)) + 0j
    if isinstance(e, Im):
        return np.imag(_eval(e.arg, z)) + 0j
    if isinstance(e, Abs2):
        u = _eval(e.arg, z)
        return (u * np.conj(u)).real + 0j
    raise TypeError(f"not an Expr: {e!r}")


def check_real_valued(e: Expr, points: Sequence) -> float:
    """Worst ``|Im e| / (1 + |Re e|)`` over the given points (rows of coordinates)."""
    pts = np.asarray(points, dtype=complex)
    vals = evaluate(e, [pts[:, j] for j in range(pts.shape[1])])
    return float(np.max(np.abs(vals.imag) / (1.0 + np.abs(vals.real))))


# -------------------------------------------------------- differentiation

def _add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and a.is_zero():
        return b
    if isinstance(b, Const) and b.is_zero():
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.re + b.re, a.im + b.im)
    return Add(a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const) and b.is_zero():
        return a
    if isinstance(a, Const) and a.is_zero():
        return _neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.re - b.re, a.im - b.im)
    return Sub(a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.re, -a.im)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(a: Expr, b: Expr) -> Expr:
    for x, y in ((a, b), (b, a)):
        if isinstance(x, Const):
            if x.is_zero():
                return ZERO
            if x.is_one():
                return y
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re)
    return Mul(a, b)


def _conj(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(a.re, -a.im)
    if isinstance(a, Conj):
        return a.arg
    return Conj(a)


@lru_cache(maxsize=4096)
def wirtinger_derive(e: Expr, j: int, conjugated: bool = False) -> Expr:
    """``∂e/∂z_j`` (or ``∂e/∂z̄_j`` when ``conjugated``), simplified."""
    if j < 1:
        raise ExprError("variable index must be >= 1")
    d = lambda u: wirtinger_derive(u, j, conjugated)  # noqa: E731
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if (e.index == j and not conjugated) else ZERO
    if isinstance(e, Conj):
        # ∂ conj(u)/∂z = conj(∂u/∂z̄)
        return _conj(wirtinger_derive(e.arg, j, not conjugated))
    if isinstance(e, Re):
        u = e.arg
        return _mul(HALF, _add(d(u), d(Conj(u))))
    if isinstance(e, Im):
        u = e.arg
        return _mul(Const(Fraction(0), Fraction(-1, 2)), _sub(d(u), d(Conj(u))))
    if isinstance(e, Abs2):
        u = e.arg
        return _add(_mul(d(u), _conj(u)), _mul(u, d(Conj(u))))
    if isinstance(e, Neg):
        return _neg(d(e.arg))
    if isinstance(e, Add):
        return _add(d(e.left), d(e.right))
    if isinstance(e, Sub):
        return _sub(d(e.left), d(e.right))
    if isinstance(e, Mul):
        return _add(_mul(d(e.left), e.right), _mul(e.left, d(e.right)))
    if isinstance(e, Pow):
        if e.exp == 0:
            return ZERO
        inner = e.base if e.exp == 2 else (ONE if e.exp == 1 else Pow(e.base, e.exp - 1))
        return _mul(_mul(const(e.exp), inner), d(e.base))
    raise TypeError(f"not an Expr: {e!r}")


def gradient_exprs(e: Expr, n: int, conjugated: bool = False) -> tuple:
    return tuple(wirtinger_derive(e, j, conjugated) for j in range(1, n + 1))


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace each ``Var(j)`` by ``mapping[j]`` (unmapped variables are kept)."""
    if isinstance(e, Var):
        return mapping.get(e.index, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exp)
    if isinstance(e, (Conj, Re, Im, Abs2, Neg)):
        return type(e)(substitute(e.arg, mapping))
    return type(e)(substitute(e.left, mapping), substitute(e.right, mapping))
