"""Symbolic complex scalars and matrices over gate parameters.

Parameters only ever occur inside the argument of ``cos``, ``sin`` or
``exp(i*...)``, and those arguments are linear forms over the parameters plus
a constant multiple of pi (:class:`LinComb`).  This keeps trig elimination
total: every expression can be rewritten into a polynomial over fresh
variables ``s_t = sin(t)`` and ``c_t = cos(t)`` with exact coefficients in
Q(sqrt 2)(i) (:class:`Coef`).
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

SQRT2 = math.sqrt(2.0)


class UnsupportedExpression(ValueError):
    """Raised when an expression falls outside the trig-eliminable fragment."""


# ---------------------------------------------------------------------------
# Exact coefficients
# ---------------------------------------------------------------------------


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class Coef:
    """Exact complex number ``(a + b*sqrt2) + i*(c + d*sqrt2)`` with rational a..d."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a=0, b=0, c=0, d=0):
        self.a = _frac(a)
        self.b = _frac(b)
        self.c = _frac(c)
        self.d = _frac(d)

    @staticmethod
    def of(x) -> "Coef":
        if isinstance(x, Coef):
            return x
        if isinstance(x, complex):
            raise TypeError("inexact complex value cannot become an exact coefficient")
        return Coef(x)

    def _t(self):
        return (self.a, self.b, self.c, self.d)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Coef(other)
        return isinstance(other, Coef) and self._t() == other._t()

    def __hash__(self):
        return hash(self._t())

    def __repr__(self):
        return f"Coef({self.a}, {self.b}, {self.c}, {self.d})"

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def is_one(self) -> bool:
        return self.a == 1 and not (self.b or self.c or self.d)

    def is_real(self) -> bool:
        return not (self.c or self.d)

    def __add__(self, o: "Coef") -> "Coef":
        return Coef(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    def __sub__(self, o: "Coef") -> "Coef":
        return Coef(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def __neg__(self) -> "Coef":
        return Coef(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, o: "Coef") -> "Coef":
        # (x + i y)(u + i v) with x, y, u, v in Q(sqrt2)
        xa, xb, ya, yb = self.a, self.b, self.c, self.d
        ua, ub, va, vb = o.a, o.b, o.c, o.d
        # real: x*u - y*v
        ra = xa * ua + 2 * xb * ub - (ya * va + 2 * yb * vb)
        rb = xa * ub + xb * ua - (ya * vb + yb * va)
        # imag: x*v + y*u
        ia = xa * va + 2 * xb * vb + ya * ua + 2 * yb * ub
        ib = xa * vb + xb * va + ya * ub + yb * ua
        return Coef(ra, rb, ia, ib)

    def conj(self) -> "Coef":
        return Coef(self.a, self.b, -self.c, -self.d)

    def real(self) -> "Coef":
        return Coef(self.a, self.b)

    def imag(self) -> "Coef":
        return Coef(self.c, self.d)

    def inverse(self) -> "Coef":
        # 1/z = conj(z) / |z|^2, |z|^2 = n = na + nb*sqrt2
        na = self.a**2 + 2 * self.b**2 + self.c**2 + 2 * self.d**2
        nb = 2 * (self.a * self.b + self.c * self.d)
        den = na * na - 2 * nb * nb
        if den == 0:
            raise ZeroDivisionError("division by zero coefficient")
        inv_n = Coef(na / den, -nb / den)
        return self.conj() * inv_n

    def __truediv__(self, o: "Coef") -> "Coef":
        return self * o.inverse()

    def __complex__(self) -> complex:
        return complex(float(self.a) + float(self.b) * SQRT2, float(self.c) + float(self.d) * SQRT2)

    def text(self) -> str:
        """Readable form, e.g. ``1/2*sqrt2`` or ``(1 + i*sqrt2)``."""

        def part(p: Fraction, q: Fraction) -> str:
            items = []
            if p:
                items.append(str(p))
            if q:
                items.append("sqrt2" if q == 1 else f"{q}*sqrt2")
            return " + ".join(items).replace("+ -", "- ") if items else "0"

        re_, im_ = part(self.a, self.b), part(self.c, self.d)
        if im_ == "0":
            return re_
        im_txt = "i" if im_ == "1" else f"i*({im_})"
        if re_ == "0":
            return im_txt
        return f"({re_} + {im_txt})"


ZERO = Coef(0)
ONE = Coef(1)
I_UNIT = Coef(0, 0, 1)
INV_SQRT2 = Coef(0, Fraction(1, 2))

# e^{i k pi/4}, k = 0..7
_EIGHTH_ROOTS = (
    Coef(1),
    Coef(0, Fraction(1, 2), 0, Fraction(1, 2)),
    Coef(0, 0, 1),
    Coef(0, Fraction(-1, 2), 0, Fraction(1, 2)),
    Coef(-1),
    Coef(0, Fraction(-1, 2), 0, Fraction(-1, 2)),
    Coef(0, 0, -1),
    Coef(0, Fraction(1, 2), 0, Fraction(-1, 2)),
)


def exact_expi_pi(multiple: Fraction) -> Coef:
    """``e^{i*multiple*pi}`` exactly; ``multiple`` must be a multiple of 1/4."""
    k = multiple * 4
    if k.denominator != 1:
        raise UnsupportedExpression(f"no exact value table entry for angle {multiple}*pi")
    return _EIGHTH_ROOTS[k.numerator % 8]


# ---------------------------------------------------------------------------
# Linear forms (trig arguments, gate parameters)
# ---------------------------------------------------------------------------


def _fmt_frac_times(coef: Fraction, atom: str) -> str:
    if coef == 1:
        return atom
    if coef == -1:
        return "-" + atom
    if coef.denominator == 1:
        return f"{coef.numerator}*{atom}"
    if coef.numerator == 1:
        return f"{atom}/{coef.denominator}"
    if coef.numerator == -1:
        return f"-{atom}/{coef.denominator}"
    return f"{coef.numerator}*{atom}/{coef.denominator}"


class LinComb:
    """``sum_i k_i * p_i + pi_coef * pi + offset``.

    ``offset`` is a plain float used only for concrete angles that are not
    rational multiples of pi; symbolic reasoning rejects it.
    """

    __slots__ = ("terms", "pi", "offset", "_hash")

    def __init__(self, terms: Iterable[tuple[int, Fraction]] = (), pi=0, offset: float = 0.0):
        acc: dict[int, Fraction] = {}
        for idx, k in terms:
            acc[idx] = acc.get(idx, Fraction(0)) + _frac(k)
        self.terms = tuple(sorted((i, k) for i, k in acc.items() if k))
        self.pi = _frac(pi)
        self.offset = float(offset)
        self._hash = hash((self.terms, self.pi, self.offset))

    # constructors
    @staticmethod
    def param(i: int, k=1) -> "LinComb":
        return LinComb(((i, _frac(k)),))

    @staticmethod
    def const_pi(multiple) -> "LinComb":
        return LinComb((), multiple)

    @staticmethod
    def const_float(value: float) -> "LinComb":
        """Concrete angle; snapped to an exact multiple of pi/2^k when it is one."""
        ratio = value / math.pi
        for den in (1, 2, 4, 8, 16, 32, 64, 128, 256):
            num = round(ratio * den)
            if abs(num / den - ratio) < 1e-12:
                return LinComb((), Fraction(num, den))
        return LinComb((), 0, value)

    def __eq__(self, other):
        return (
            isinstance(other, LinComb)
            and self.terms == other.terms
            and self.pi == other.pi
            and self.offset == other.offset
        )

    def __hash__(self):
        return self._hash

    def __add__(self, other: "LinComb") -> "LinComb":
        return LinComb(self.terms + other.terms, self.pi + other.pi, self.offset + other.offset)

    def __neg__(self) -> "LinComb":
        return LinComb(((i, -k) for i, k in self.terms), -self.pi, -self.offset)

    def __sub__(self, other: "LinComb") -> "LinComb":
        return self + (-other)

    def scale(self, k) -> "LinComb":
        k = _frac(k)
        return LinComb(((i, c * k) for i, c in self.terms), self.pi * k, self.offset * float(k))

    def is_constant(self) -> bool:
        return not self.terms

    def is_exact(self) -> bool:
        return self.offset == 0.0

    def params(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.terms)

    def coef(self, i: int) -> Fraction:
        for j, k in self.terms:
            if j == i:
                return k
        return Fraction(0)

    def eval(self, params: Sequence[float] = ()) -> float:
        total = float(self.pi) * math.pi + self.offset
        for i, k in self.terms:
            if i >= len(params):
                raise KeyError(f"unbound parameter p{i}")
            total += float(k) * params[i]
        return total

    def substitute(self, values: Mapping[int, "LinComb"]) -> "LinComb":
        """Replace parameters by linear forms (used to instantiate rewrites)."""
        out = LinComb((), self.pi, self.offset)
        for i, k in self.terms:
            out = out + values[i].scale(k)
        return out

    def mod_2pi(self) -> "LinComb":
        """Reduce the constant part of a concrete angle into [0, 2pi)."""
        if self.terms:
            return self
        if self.offset:
            val = math.fmod(self.eval(), 2 * math.pi)
            if val < 0:
                val += 2 * math.pi
            return LinComb.const_float(val)
        p = self.pi - 2 * math.floor(self.pi / 2)
        return LinComb((), p)

    def is_zero_mod_2pi(self) -> bool:
        if self.terms:
            return False
        if self.offset:
            v = math.fmod(self.eval(), 2 * math.pi)
            return abs(v) < 1e-12 or abs(abs(v) - 2 * math.pi) < 1e-12
        return (self.pi / 2).denominator == 1

    def __str__(self) -> str:
        parts = [_fmt_frac_times(k, f"p{i}") for i, k in self.terms]
        if self.pi:
            parts.append(_fmt_frac_times(self.pi, "pi"))
        if self.offset:
            parts.append(repr(self.offset))
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Expression trees
# ---------------------------------------------------------------------------


class Expr:
    """Immutable expression node.

    ``op`` is one of ``num``, ``var``, ``add``, ``mul``, ``cos``, ``sin``,
    ``expi``.  ``num`` holds a :class:`Coef`, ``var`` a name (trig variables
    produced by :func:`normalize_trig`), trig nodes a :class:`LinComb`.
    Commutative operands are kept sorted so structural equality is canonical.
    """

    __slots__ = ("op", "args", "_hash", "_key")

    def __init__(self, op: str, args: tuple):
        self.op = op
        self.args = args
        self._hash = hash((op, args))
        self._key = None

    def __eq__(self, other):
        return isinstance(other, Expr) and self._hash == other._hash and self.op == other.op and self.args == other.args

    def __hash__(self):
        return self._hash

    @property
    def key(self) -> str:
        if self._key is None:
            self._key = str(self)
        return self._key

    def __str__(self) -> str:
        op, args = self.op, self.args
        if op == "num":
            return args[0].text()
        if op == "var":
            return args[0]
        if op == "add":
            return "(" + " + ".join(str(a) for a in args) + ")"
        if op == "mul":
            return "*".join(str(a) for a in args)
        if op == "expi":
            return f"exp(i*({args[0]}))"
        return f"{op}({args[0]})"

    __repr__ = __str__

    # arithmetic sugar
    def __add__(self, other):
        return add(self, _lift(other))

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, _lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return mul(num(-1), self)

    def __sub__(self, other):
        return add(self, -_lift(other))

    def is_zero(self) -> bool:
        return self.op == "num" and self.args[0].is_zero()

    def is_one(self) -> bool:
        return self.op == "num" and self.args[0].is_one()


def _lift(x) -> Expr:
    return x if isinstance(x, Expr) else num(x)


def num(value) -> Expr:
    return Expr("num", (Coef.of(value),))


def var(name: str) -> Expr:
    return Expr("var", (name,))


ZERO_E = num(0)
ONE_E = num(1)
I_E = num(I_UNIT)


def _split_coef(e: Expr) -> tuple[Coef, Expr | None]:
    if e.op == "num":
        return e.args[0], None
    if e.op == "mul" and e.args[0].op == "num":
        rest = e.args[1:]
        return e.args[0].args[0], rest[0] if len(rest) == 1 else Expr("mul", rest)
    return ONE, e


def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        t = _lift(t)
        if t.op == "add":
            flat.extend(t.args)
        else:
            flat.append(t)
    const = ZERO
    grouped: dict[Expr, Coef] = {}
    for t in flat:
        c, rest = _split_coef(t)
        if rest is None:
            const = const + c
        else:
            grouped[rest] = grouped.get(rest, ZERO) + c
    out = []
    for rest, c in grouped.items():
        if c.is_zero():
            continue
        out.append(rest if c.is_one() else mul(Expr("num", (c,)), rest))
    out.sort(key=lambda e: e.key)
    if not const.is_zero():
        out.insert(0, Expr("num", (const,)))
    if not out:
        return ZERO_E
    if len(out) == 1:
        return out[0]
    return Expr("add", tuple(out))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        f = _lift(f)
        if f.op == "mul":
            flat.extend(f.args)
        else:
            flat.append(f)
    const = ONE
    rest = []
    for f in flat:
        if f.op == "num":
            const = const * f.args[0]
        else:
            rest.append(f)
    if const.is_zero():
        return ZERO_E
    rest.sort(key=lambda e: e.key)
    if not rest:
        return Expr("num", (const,))
    if const.is_one():
        return rest[0] if len(rest) == 1 else Expr("mul", tuple(rest))
    return Expr("mul", (Expr("num", (const,)),) + tuple(rest))


def _trig(op: str, arg: LinComb) -> Expr:
    if arg.is_constant() and arg.is_exact():
        # fold the trivial angle only; other constants are kept for normalize_trig
        if arg.pi == 0:
            return {"cos": ONE_E, "sin": ZERO_E, "expi": ONE_E}[op]
    return Expr(op, (arg,))


def cos(arg: LinComb) -> Expr:
    return _trig("cos", arg)


def sin(arg: LinComb) -> Expr:
    return _trig("sin", arg)


def expi(arg: LinComb) -> Expr:
    return _trig("expi", arg)


def eval_expr(e: Expr, params: Sequence[float] = (), env: Mapping[str, float] | None = None) -> complex:
    """Evaluate at a concrete parameter vector (``env`` binds trig variables)."""
    op, args = e.op, e.args
    if op == "num":
        return complex(args[0])
    if op == "var":
        if env is None or args[0] not in env:
            raise KeyError(f"unbound variable {args[0]}")
        return complex(env[args[0]])
    if op == "add":
        return sum((eval_expr(a, params, env) for a in args), 0j)
    if op == "mul":
        out = 1 + 0j
        for a in args:
            out *= eval_expr(a, params, env)
        return out
    theta = args[0].eval(params)
    if op == "cos":
        return complex(math.cos(theta))
    if op == "sin":
        return complex(math.sin(theta))
    if op == "expi":
        return cmath.exp(1j * theta)
    raise ValueError(f"unknown op {op}")


def expr_params(e: Expr) -> set[int]:
    if e.op in ("cos", "sin", "expi"):
        return set(e.args[0].params())
    if e.op in ("add", "mul"):
        out: set[int] = set()
        for a in e.args:
            out |= expr_params(a)
        return out
    return set()


def _iter_lincombs(e: Expr):
    if e.op in ("cos", "sin", "expi"):
        yield e.args[0]
    elif e.op in ("add", "mul"):
        for a in e.args:
            yield from _iter_lincombs(a)


# ---------------------------------------------------------------------------
# Polynomials over trig variables
# ---------------------------------------------------------------------------


def half_angle_scales(lincombs: Iterable[LinComb]) -> dict[int, int]:
    """Per-parameter denominator lcm; ``p_i = scale_i * t_i`` makes all coefficients integral."""
    scales: dict[int, int] = {}
    for lc in lincombs:
        if not lc.is_exact():
            raise UnsupportedExpression(f"inexact constant in trig argument: {lc}")
        for i, k in lc.terms:
            d = k.denominator
            scales[i] = scales.get(i, 1) * d // math.gcd(scales.get(i, 1), d)
    return scales


def atom_name(i: int, scale: int) -> str:
    return f"p{i}" if scale == 1 else f"p{i}_{scale}"


def sin_var(i: int, scale: int) -> str:
    return "s_" + atom_name(i, scale)


def cos_var(i: int, scale: int) -> str:
    return "c_" + atom_name(i, scale)


class PolyRing:
    """Polynomials in ``s_t, c_t`` for each atomic angle ``t = p_i / scale_i``.

    Monomials are exponent tuples ``(e_s0, e_c0, e_s1, e_c1, ...)`` over the
    sorted parameter indices; values are :class:`Coef`.
    """

    def __init__(self, scales: Mapping[int, int]):
        self.scales = dict(sorted(scales.items()))
        self.index = {p: k for k, p in enumerate(self.scales)}
        self.nvars = 2 * len(self.scales)
        self.unit = tuple([0] * self.nvars)
        self._exp_cache: dict[tuple[int, int], dict] = {}

    def var_names(self) -> list[str]:
        names = []
        for p, s in self.scales.items():
            names += [sin_var(p, s), cos_var(p, s)]
        return names

    def trig_pairs(self) -> list[tuple[str, str]]:
        return [(sin_var(p, s), cos_var(p, s)) for p, s in self.scales.items()]

    def const(self, c: Coef) -> dict:
        return {} if c.is_zero() else {self.unit: c}

    def _var(self, pos: int) -> dict:
        e = [0] * self.nvars
        e[pos] = 1
        return {tuple(e): ONE}

    @staticmethod
    def add(x: dict, y: dict) -> dict:
        out = dict(x)
        for m, c in y.items():
            v = out.get(m)
            v = c if v is None else v + c
            if v.is_zero():
                out.pop(m, None)
            else:
                out[m] = v
        return out

    @staticmethod
    def neg(x: dict) -> dict:
        return {m: -c for m, c in x.items()}

    def sub(self, x: dict, y: dict) -> dict:
        return self.add(x, self.neg(y))

    @staticmethod
    def mul(x: dict, y: dict) -> dict:
        if not x or not y:
            return {}
        out: dict = {}
        for m1, c1 in x.items():
            for m2, c2 in y.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                v = out.get(m)
                v = c1 * c2 if v is None else v + c1 * c2
                out[m] = v
        return {m: c for m, c in out.items() if not c.is_zero()}

    @staticmethod
    def scale(x: dict, c: Coef) -> dict:
        if c.is_zero():
            return {}
        return {m: v * c for m, v in x.items()}

    @staticmethod
    def real(x: dict) -> dict:
        return {m: c.real() for m, c in x.items() if not c.real().is_zero()}

    @staticmethod
    def imag(x: dict) -> dict:
        return {m: c.imag() for m, c in x.items() if not c.imag().is_zero()}

    def _unit_exp(self, p: int, power: int) -> dict:
        """``e^{i*power*t_p}`` as a polynomial (``c + i*s`` raised to ``power``)."""
        key = (p, power)
        hit = self._exp_cache.get(key)
        if hit is not None:
            return hit
        k = self.index[p]
        s_pos, c_pos = 2 * k, 2 * k + 1
        base = self.add(self._var(c_pos), self.scale(self._var(s_pos), I_UNIT if power > 0 else -I_UNIT))
        out = self.const(ONE)
        for _ in range(abs(power)):
            out = self.mul(out, base)
        self._exp_cache[key] = out
        return out

    def expi(self, lc: LinComb) -> dict:
        if not lc.is_exact():
            raise UnsupportedExpression(f"inexact constant in trig argument: {lc}")
        out = self.const(exact_expi_pi(lc.pi))
        for p, k in lc.terms:
            if p not in self.scales:
                raise UnsupportedExpression(f"parameter p{p} missing from ring")
            n = k * self.scales[p]
            if n.denominator != 1:
                raise UnsupportedExpression(f"non-integral coefficient after half-angle substitution: {lc}")
            out = self.mul(out, self._unit_exp(p, int(n)))
        return out

    def from_expr(self, e: Expr) -> dict:
        op = e.op
        if op == "num":
            return self.const(e.args[0])
        if op == "add":
            return reduce(self.add, (self.from_expr(a) for a in e.args), {})
        if op == "mul":
            return reduce(self.mul, (self.from_expr(a) for a in e.args), self.const(ONE))
        if op == "expi":
            return self.expi(e.args[0])
        if op == "cos":
            return self.real(self.expi(e.args[0]))
        if op == "sin":
            return self.imag(self.expi(e.args[0]))
        raise UnsupportedExpression(f"cannot normalize node {op}")

    def to_expr(self, x: dict) -> Expr:
        names = self.var_names()
        terms = []
        for m, c in x.items():
            factors = [num(c)]
            for pos, power in enumerate(m):
                factors += [var(names[pos])] * power
            terms.append(mul(*factors))
        return add(*terms)

    def eval(self, x: dict, params: Sequence[float]) -> complex:
        env = self.trig_env(params)
        vals = [env[n] for n in self.var_names()]
        total = 0j
        for m, c in x.items():
            term = complex(c)
            for v, power in zip(vals, m):
                if power:
                    term *= v**power
            total += term
        return total

    def trig_env(self, params: Sequence[float]) -> dict[str, float]:
        env = {}
        for p, s in self.scales.items():
            t = params[p] / s
            env[sin_var(p, s)] = math.sin(t)
            env[cos_var(p, s)] = math.cos(t)
        return env


def normalize_trig(e: Expr, scales: Mapping[int, int] | None = None) -> Expr:
    """Rewrite ``e`` into a trig-free polynomial over ``s_t``/``c_t`` variables.

    Half-angle substitution picks ``t = p_i / scale_i``; the exponential and
    trig nodes are expanded with Euler's formula, parity and angle-sum
    identities; constant angles use the exact k*pi/4 value table.  Each
    ``(s_t, c_t)`` pair carries the side constraint ``s_t^2 + c_t^2 = 1``
    (see :func:`trig_constraints`).
    """
    if scales is None:
        scales = half_angle_scales(_iter_lincombs(e))
    ring = PolyRing(scales)
    return ring.to_expr(ring.from_expr(e))


def trig_constraints(scales: Mapping[int, int]) -> list[tuple[str, str]]:
    return PolyRing(scales).trig_pairs()


def trig_env(params: Sequence[float], scales: Mapping[int, int]) -> dict[str, float]:
    return PolyRing(scales).trig_env(params)


def expr_scales(e: Expr) -> dict[int, int]:
    return half_angle_scales(_iter_lincombs(e))


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


class SymMatrix:
    """Dense square matrix of :class:`Expr` with power-of-two dimension."""

    __slots__ = ("dim", "rows")

    def __init__(self, rows: Sequence[Sequence[Expr]]):
        self.rows = tuple(tuple(_lift(x) for x in r) for r in rows)
        self.dim = len(self.rows)
        if any(len(r) != self.dim for r in self.rows):
            raise ValueError("matrix must be square")
        if self.dim & (self.dim - 1):
            raise ValueError(f"dimension {self.dim} is not a power of two")

    @staticmethod
    def identity(dim: int) -> "SymMatrix":
        return SymMatrix([[ONE_E if r == c else ZERO_E for c in range(dim)] for r in range(dim)])

    def __getitem__(self, rc: tuple[int, int]) -> Expr:
        return self.rows[rc[0]][rc[1]]

    def __eq__(self, other):
        return isinstance(other, SymMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "SymMatrix(" + "; ".join(", ".join(str(x) for x in r) for r in self.rows) + ")"

    def entries(self):
        for r in self.rows:
            yield from r

    def eval(self, params: Sequence[float] = (), env=None) -> np.ndarray:
        return np.array([[eval_expr(x, params, env) for x in r] for r in self.rows], dtype=complex)

    def scale(self, k: Expr) -> "SymMatrix":
        return SymMatrix([[mul(k, x) for x in r] for r in self.rows])

    def map(self, fn) -> "SymMatrix":
        return SymMatrix([[fn(x) for x in r] for r in self.rows])


def matmul(a: SymMatrix, b: SymMatrix) -> SymMatrix:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    n = a.dim
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            terms = [mul(a.rows[i][k], b.rows[k][j]) for k in range(n) if not a.rows[i][k].is_zero() and not b.rows[k][j].is_zero()]
            row.append(add(*terms) if terms else ZERO_E)
        rows.append(row)
    return SymMatrix(rows)


def tensor(a: SymMatrix, b: SymMatrix) -> SymMatrix:
    n, m = a.dim, b.dim
    rows = [[None] * (n * m) for _ in range(n * m)]
    for i in range(n):
        for j in range(n):
            for k in range(m):
                for l in range(m):
                    rows[i * m + k][j * m + l] = mul(a.rows[i][j], b.rows[k][l])
    return SymMatrix(rows)


def embed(gate: SymMatrix, qubits: Sequence[int], q: int) -> SymMatrix:
    """Lift a gate matrix acting on ``qubits`` (qubit 0 = most significant bit) to ``q`` qubits."""
    d = len(qubits)
    if gate.dim != 1 << d:
        raise ValueError("gate dimension does not match its qubit count")
    size = 1 << q
    rows = [[ZERO_E] * size for _ in range(size)]
    shifts = [q - 1 - k for k in qubits]
    mask = 0
    for s in shifts:
        mask |= 1 << s
    for col in range(size):
        sub_c = 0
        for s in shifts:
            sub_c = (sub_c << 1) | ((col >> s) & 1)
        base = col & ~mask
        for sub_r in range(1 << d):
            x = gate.rows[sub_r][sub_c]
            if x.is_zero():
                continue
            row = base
            for pos, s in enumerate(shifts):
                if (sub_r >> (d - 1 - pos)) & 1:
                    row |= 1 << s
            rows[row][col] = x
    return SymMatrix(rows)
