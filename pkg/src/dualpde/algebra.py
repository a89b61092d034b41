"""Exact arithmetic: rationals, multivariate polynomials over Q and the
fraction field Q(x1..xn) with its partial derivations.

Field elements of Q(x) are handled as either :class:`fractions.Fraction`
(constants) or :class:`RatFunc` (everything else).  Arithmetic on RatFunc
demotes to Fraction whenever the result is constant, which keeps the
constant-coefficient systems that dominate in practice on the fast path.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Tuple, Union

from .errors import DomainError

Rat = Fraction
Exp = Tuple[int, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _grlex_key(e: Exp):
    # graded lex with x_n > x_{n-1} > ... > x_1
    return (sum(e), tuple(reversed(e)))


class Poly:
    """Sparse polynomial in ``nvars`` commuting variables over Q."""

    __slots__ = ("terms", "nvars", "_hash")

    def __init__(self, terms: Dict[Exp, Fraction] | None = None, nvars: int = 0):
        self.nvars = nvars
        self.terms = {e: Fraction(c) for e, c in (terms or {}).items() if c != 0}
        self._hash = None

    @classmethod
    def _raw(cls, terms, nvars):
        p = cls.__new__(cls)
        p.terms = terms
        p.nvars = nvars
        p._hash = None
        return p

    @classmethod
    def const(cls, c, nvars: int) -> "Poly":
        c = Fraction(c)
        return cls._raw({(0,) * nvars: c} if c else {}, nvars)

    @classmethod
    def var(cls, i: int, nvars: int) -> "Poly":
        """The variable x_i, 1-based."""
        if not 1 <= i <= nvars:
            raise DomainError(f"variable x{i} out of range for n={nvars}")
        e = [0] * nvars
        e[i - 1] = 1
        return cls._raw({tuple(e): _ONE}, nvars)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, _ZERO)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, v: int) -> int:
        return max((e[v] for e in self.terms), default=-1)

    def variables(self):
        used = set()
        for e in self.terms:
            used.update(i for i, a in enumerate(e) if a)
        return used

    def leading(self) -> Tuple[Exp, Fraction]:
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __neg__(self):
        return Poly._raw({e: -c for e, c in self.terms.items()}, self.nvars)

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other, self.nvars)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, _ZERO) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly._raw(out, self.nvars)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other, self.nvars)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        if not c:
            return Poly._raw({}, self.nvars)
        return Poly._raw({e: c * a for e, a in self.terms.items()}, self.nvars)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(Fraction(other))
        if len(other.terms) == 1:
            (f, d), = other.terms.items()
            return Poly._raw(
                {tuple(a + b for a, b in zip(e, f)): c * d for e, c in self.terms.items()},
                self.nvars,
            )
        out: Dict[Exp, Fraction] = {}
        for e, c in self.terms.items():
            for f, d in other.terms.items():
                g = tuple(a + b for a, b in zip(e, f))
                s = out.get(g, _ZERO) + c * d
                if s:
                    out[g] = s
                else:
                    del out[g]
        return Poly._raw(out, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("negative polynomial power")
        out = Poly.const(1, self.nvars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def diff(self, i: int) -> "Poly":
        """Partial derivative in x_{i+1} (0-based index)."""
        out = {}
        for e, c in self.terms.items():
            a = e[i]
            if a:
                f = list(e)
                f[i] = a - 1
                out[tuple(f)] = c * a
        return Poly._raw(out, self.nvars)

    def evaluate(self, point) -> Fraction:
        total = _ZERO
        for e, c in self.terms.items():
            t = c
            for x, a in zip(point, e):
                if a:
                    t *= Fraction(x) ** a
            total += t
        return total

    def coeffs_in(self, v: int) -> Dict[int, "Poly"]:
        """Coefficients w.r.t. variable index v (0-based); keys are degrees."""
        out: Dict[int, Dict[Exp, Fraction]] = {}
        for e, c in self.terms.items():
            f = list(e)
            d = f[v]
            f[v] = 0
            out.setdefault(d, {})[tuple(f)] = c
        return {d: Poly._raw(t, self.nvars) for d, t in out.items()}

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        _, lc = self.leading()
        return self.scale(1 / lc) if lc != 1 else self

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def format_poly(p: Poly, names=None) -> str:
    if not p.terms:
        return "0"
    names = names or [f"x{i + 1}" for i in range(p.nvars)]
    parts = []
    for e in sorted(p.terms, key=_grlex_key, reverse=True):
        c = p.terms[e]
        mono = "*".join(
            names[i] if a == 1 else f"{names[i]}^{a}" for i, a in enumerate(e) if a
        )
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        parts.append(("-" if c < 0 else "+", body))
    first_sign, first = parts[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        s += f" {sign} {body}"
    return s


def divexact(f: Poly, g: Poly) -> Poly:
    """Exact quotient f / g; raises DomainError if g does not divide f."""
    if g.is_zero():
        raise DomainError("division by zero polynomial")
    if len(g.terms) == 1:
        (ge, gc), = g.terms.items()
        out = {}
        for e, c in f.terms.items():
            q = tuple(a - b for a, b in zip(e, ge))
            if min(q, default=0) < 0:
                raise DomainError("inexact polynomial division")
            out[q] = c / gc
        return Poly._raw(out, f.nvars)
    ge, gc = g.leading()
    q: Dict[Exp, Fraction] = {}
    r = f
    while r.terms:
        re_, rc = r.leading()
        t = tuple(a - b for a, b in zip(re_, ge))
        if min(t, default=0) < 0:
            raise DomainError("inexact polynomial division")
        c = rc / gc
        q[t] = c
        r = r - g * Poly._raw({t: c}, f.nvars)
    return Poly._raw(q, f.nvars)


def _integral(p: Poly) -> Poly:
    """Scale to coprime integer coefficients (keeps PRS coefficients small)."""
    if not p.terms:
        return p
    den, g = 1, 0
    for c in p.terms.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    for c in p.terms.values():
        g = math.gcd(g, c.numerator * (den // c.denominator))
    f = Fraction(den, g)
    return Poly._raw({e: c * f for e, c in p.terms.items()}, p.nvars)


def _prem(a: Poly, b: Poly, v: int) -> Poly:
    db = b.degree_in(v)
    lcb = b.coeffs_in(v)[db]
    r = a
    while not r.is_zero():
        dr = r.degree_in(v)
        if dr < db:
            break
        lcr = r.coeffs_in(v)[dr]
        shift = [0] * a.nvars
        shift[v] = dr - db
        r = _integral(lcb * r - lcr * Poly._raw({tuple(shift): _ONE}, a.nvars) * b)
    return r


def _content(f: Poly, v: int) -> Poly:
    c = None
    for coeff in f.coeffs_in(v).values():
        c = coeff if c is None else poly_gcd(c, coeff)
        if c.is_constant():
            return Poly.const(1, f.nvars)
    return c.monic()


_PRIME = 2_147_483_647


def _image_mod(f: Poly, v: int, point) -> Dict[int, int] | None:
    """f mod p with every variable except x_v set to point values; None if a
    denominator vanishes mod p."""
    out: Dict[int, int] = {}
    for e, c in f.terms.items():
        if c.denominator % _PRIME == 0:
            return None
        t = c.numerator * pow(c.denominator, -1, _PRIME)
        for i, a in enumerate(e):
            if a and i != v:
                t = t * pow(point[i], a, _PRIME)
        out[e[v]] = (out.get(e[v], 0) + t) % _PRIME
    return {k: c for k, c in out.items() if c}


def _udeg(p):
    return max(p) if p else -1


def _urem(a, b):
    db = _udeg(b)
    inv = pow(b[db], -1, _PRIME)
    a = dict(a)
    while _udeg(a) >= db:
        da = _udeg(a)
        f = a[da] * inv % _PRIME
        for k, c in b.items():
            s = (a.get(k + da - db, 0) - f * c) % _PRIME
            if s:
                a[k + da - db] = s
            else:
                a.pop(k + da - db, None)
    return a


def _coprime_image(a: Poly, b: Poly, v: int) -> bool:
    """Sufficient test that primitive a, b (w.r.t. x_v) are coprime: at a
    point keeping both leading coefficients nonzero mod p, the univariate
    images have a constant gcd.  A False answer proves nothing."""
    da, db = a.degree_in(v), b.degree_in(v)
    for t in range(3):
        point = [(1000003 * (t + 1) + 7919 * i) % _PRIME for i in range(a.nvars)]
        ia, ib = _image_mod(a, v, point), _image_mod(b, v, point)
        if ia is None or ib is None or _udeg(ia) != da or _udeg(ib) != db:
            continue
        while ib:
            ia, ib = ib, _urem(ia, ib)
        return _udeg(ia) == 0
    return False


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd in Q[x1..xn] by content/primitive-part recursion."""
    n = f.nvars
    if f.is_zero():
        return g.monic()
    if g.is_zero():
        return f.monic()
    if f.is_constant() or g.is_constant():
        return Poly.const(1, n)
    if len(f.terms) == 1 and len(g.terms) == 1:
        e = tuple(min(a, b) for a, b in zip(next(iter(f.terms)), next(iter(g.terms))))
        return Poly._raw({e: _ONE}, n)
    vf, vg = f.variables(), g.variables()
    v = max(vf | vg)
    if v not in vf:
        return poly_gcd(f, _content(g, v))
    if v not in vg:
        return poly_gcd(_content(f, v), g)
    cf, cg = _content(f, v), _content(g, v)
    c = poly_gcd(cf, cg)
    a, b = _integral(divexact(f, cf)), _integral(divexact(g, cg))
    if a.degree_in(v) < b.degree_in(v):
        a, b = b, a
    if _coprime_image(a, b, v):
        return c.monic()
    while True:
        r = _prem(a, b, v)
        if r.is_zero():
            h = b
            break
        if r.degree_in(v) == 0:
            h = Poly.const(1, n)
            break
        a, b = b, _integral(divexact(r, _content(r, v)))
    if not h.is_constant():
        h = divexact(h, _content(h, v))
    return (c * h).monic()


class RatFunc:
    """Reduced fraction num/den in Q(x1..xn), den monic under graded lex."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, nvars: int | None = None):
        if not isinstance(num, Poly):
            if nvars is None:
                nvars = den.nvars if isinstance(den, Poly) else 0
            num = Poly.const(num, nvars)
        if den is None:
            den = Poly.const(1, num.nvars)
        elif not isinstance(den, Poly):
            den = Poly.const(den, num.nvars)
        if den.is_zero():
            raise DomainError("zero denominator")
        if num.is_zero():
            den = Poly.const(1, num.nvars)
        elif not den.is_constant():
            g = poly_gcd(num, den)
            if not g.is_constant():
                num, den = divexact(num, g), divexact(den, g)
        _, lc = den.leading()
        if lc != 1:
            num, den = num.scale(1 / lc), den.scale(1 / lc)
        self.num = num
        self.den = den
        self._hash = None

    @property
    def nvars(self):
        return self.num.nvars

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.den.is_constant() and self.num == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            if self.is_constant():
                self._hash = hash(self.num.constant_value())
            else:
                self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self):
        return not self.num.is_zero()

    def __neg__(self):
        return _mk(-self.num, self.den)

    def __add__(self, other):
        if isinstance(other, RatFunc):
            return _add(self.num, self.den, other.num, other.den)
        if isinstance(other, (int, Fraction)):
            return _mk(self.num + self.den.scale(Fraction(other)), self.den, reduced=True)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (RatFunc, int, Fraction)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RatFunc):
            return _mul(self.num, self.den, other.num, other.den)
        if isinstance(other, (int, Fraction)):
            if not other:
                return _ZERO
            return _mk(self.num.scale(Fraction(other)), self.den, reduced=True)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise DomainError("division by zero in Q(x)")
        return _mk(self.den, self.num)

    def __truediv__(self, other):
        if isinstance(other, RatFunc):
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            if not other:
                raise DomainError("division by zero in Q(x)")
            return _mk(self.num.scale(1 / Fraction(other)), self.den, reduced=True)
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return _mk(self.num ** k, self.den ** k, reduced=True)

    def diff(self, i: int):
        """Partial derivative in x_{i+1} (0-based index)."""
        dn = self.num.diff(i)
        dd = self.den.diff(i)
        if dd.is_zero():
            # dn may still share factors with den
            return _mk(dn, self.den)
        g = poly_gcd(self.den, dd)
        t = dn * divexact(self.den, g) - self.num * divexact(dd, g)
        return _mk(t, self.den * divexact(self.den, g))

    def evaluate(self, point) -> Fraction:
        d = self.den.evaluate(point)
        if not d:
            raise DomainError("pole at evaluation point")
        return self.num.evaluate(point) / d

    def __repr__(self):
        return f"RatFunc({format_coeff(self)!r})"

    def __str__(self):
        return format_coeff(self)


def _mk(num: Poly, den: Poly, reduced: bool = False):
    """Build a field element, demoting constants to Fraction.

    ``reduced`` tells that num/den is already in lowest terms, so only the
    denominator is normalized."""
    if num.is_zero():
        return _ZERO
    if den.is_constant():
        if num.is_constant():
            return num.constant_value() / den.constant_value()
        reduced = True
    if not reduced:
        g = poly_gcd(num, den)
        if not g.is_constant():
            num, den = divexact(num, g), divexact(den, g)
        if den.is_constant() and num.is_constant():
            return num.constant_value() / den.constant_value()
    _, lc = den.leading()
    r = RatFunc.__new__(RatFunc)
    r.num = num.scale(1 / lc) if lc != 1 else num
    r.den = den.scale(1 / lc) if lc != 1 else den
    r._hash = None
    return r


def _add(n1: Poly, d1: Poly, n2: Poly, d2: Poly):
    # Henrici: lowest terms need only gcd(d1, d2) and gcd(t, g)
    if d1 == d2:
        return _mk(n1 + n2, d1)
    g = poly_gcd(d1, d2)
    if g.is_constant():
        return _mk(n1 * d2 + n2 * d1, d1 * d2, reduced=True)
    e1, e2 = divexact(d1, g), divexact(d2, g)
    t = n1 * e2 + n2 * e1
    if t.is_zero():
        return _ZERO
    h = poly_gcd(t, g)
    if h.is_constant():
        return _mk(t, d1 * e2, reduced=True)
    return _mk(divexact(t, h), e1 * divexact(d2, h), reduced=True)


def _mul(n1: Poly, d1: Poly, n2: Poly, d2: Poly):
    if d1.is_constant() and d2.is_constant():
        return _mk(n1 * n2, d1 * d2, reduced=True)
    g1, g2 = poly_gcd(n1, d2), poly_gcd(n2, d1)
    if not g1.is_constant():
        n1, d2 = divexact(n1, g1), divexact(d2, g1)
    if not g2.is_constant():
        n2, d1 = divexact(n2, g2), divexact(d1, g2)
    return _mk(n1 * n2, d1 * d2, reduced=True)


# ---------------------------------------------------------------------------
# helpers treating Fraction and RatFunc uniformly


Coeff = Union[Fraction, RatFunc]


def coerce(a, nvars: int | None = None) -> Coeff:
    if isinstance(a, RatFunc):
        return a.num.constant_value() if a.is_constant() else a
    if isinstance(a, Poly):
        return _mk(a, Poly.const(1, a.nvars))
    return Fraction(a)


def kdiff(a: Coeff, i: int) -> Coeff:
    """Partial derivative d/dx_{i+1} of a coefficient (0-based index)."""
    if isinstance(a, RatFunc):
        return a.diff(i)
    return _ZERO


def is_const(a: Coeff) -> bool:
    return not isinstance(a, RatFunc)


def kinv(a: Coeff) -> Coeff:
    if isinstance(a, RatFunc):
        return a.inverse()
    if not a:
        raise DomainError("division by zero in Q(x)")
    return 1 / a


def kevaluate(a: Coeff, point) -> Fraction:
    if isinstance(a, RatFunc):
        return a.evaluate(point)
    return Fraction(a)


def format_coeff(a: Coeff, names=None) -> str:
    if not isinstance(a, RatFunc):
        return str(Fraction(a))
    num = format_poly(a.num, names)
    if a.den == 1:
        return num
    return f"({num})/({format_poly(a.den, names)})"


def variable(i: int, nvars: int) -> RatFunc:
    """x_i (1-based) as an element of Q(x1..xn)."""
    return _mk(Poly.var(i, nvars), Poly.const(1, nvars))


def field_arith(a, b, op: str, nvars: int | None = None) -> RatFunc:
    """Exact field operation returning a RatFunc in canonical form."""
    if nvars is None:
        nvars = next((x.nvars for x in (a, b) if isinstance(x, RatFunc)), 0)
    if op == "add":
        r = a + b
    elif op == "sub":
        r = a - b
    elif op == "mul":
        r = a * b
    elif op == "div":
        if not b:
            raise DomainError("division by zero in Q(x)")
        r = a / Fraction(b) if not isinstance(b, RatFunc) else a / b
    else:
        raise ValueError(f"unknown field operation {op!r}")
    return as_ratfunc(r, nvars)


def as_ratfunc(a, nvars: int) -> RatFunc:
    if isinstance(a, RatFunc):
        return a
    return RatFunc(Poly.const(a, nvars))


def partial(f, i: int, nvars: int | None = None) -> RatFunc:
    """Exact partial derivative in x_i (1-based)."""
    if nvars is None:
        nvars = f.nvars if isinstance(f, RatFunc) else 0
    if not 1 <= i <= max(nvars, i):
        raise DomainError("bad variable index")
    return as_ratfunc(kdiff(f, i - 1), nvars)


def lcm_denominators(coeffs: Iterable[Coeff], nvars: int) -> Poly:
    out = Poly.const(1, nvars)
    for c in coeffs:
        if isinstance(c, RatFunc) and not c.den.is_constant():
            g = poly_gcd(out, c.den)
            out = divexact(out * c.den, g)
    return out
