"""Linear differential operators over Q(x1..xn).

A scalar operator is stored in normal form sum a^mu d_mu (coefficients on the
left).  An operator matrix is stored row by row; each row is a dict
``{(k, mu): a}`` meaning sum a * d_mu applied to unknown k.  The same dicts
double as jet-linear forms sum a * y^k_mu, which is what the jet and
involutive layers work with.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .algebra import (
    Poly,
    RatFunc,
    coerce,
    format_coeff,
    kdiff,
    kevaluate,
    lcm_denominators,
)
from .errors import DomainError, ShapeError

MultiIndex = Tuple[int, ...]
Row = Dict[Tuple[int, MultiIndex], object]

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# multi-indices


def zero_index(n: int) -> MultiIndex:
    return (0,) * n


def unit(i: int, n: int) -> MultiIndex:
    """1_i as a multi-index, i is 0-based."""
    e = [0] * n
    e[i] = 1
    return tuple(e)


def add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def bump(mu: MultiIndex, i: int) -> MultiIndex:
    e = list(mu)
    e[i] += 1
    return tuple(e)


def index_class(mu: MultiIndex) -> int:
    """Smallest i (1-based) with mu_i != 0; n for the zero index."""
    for i, a in enumerate(mu):
        if a:
            return i + 1
    return len(mu)


def indices_of_order(n: int, q: int) -> List[MultiIndex]:
    """All multi-indices of length n and order q."""
    if n == 0:
        return [()] if q == 0 else []
    if n == 1:
        return [(q,)]
    out = []
    for a in range(q, -1, -1):
        for rest in indices_of_order(n - 1, q - a):
            out.append((a,) + rest)
    return out


def sub_indices(mu: MultiIndex):
    """All lambda <= mu componentwise."""
    if not mu:
        yield ()
        return
    for a in range(mu[0] + 1):
        for rest in sub_indices(mu[1:]):
            yield (a,) + rest


def index_name(mu: MultiIndex) -> str:
    """d_{112} style label: each variable repeated by its exponent."""
    return "".join(str(i + 1) * a for i, a in enumerate(mu))


def parse_index(digits: str, n: int) -> MultiIndex:
    e = [0] * n
    for ch in digits:
        i = int(ch) - 1
        if not 0 <= i < n:
            raise DomainError(f"derivative index {ch} out of range for n={n}")
        e[i] += 1
    return tuple(e)


# ---------------------------------------------------------------------------
# sparse row helpers


def _acc(out: dict, key, c):
    s = out.get(key)
    s = c if s is None else s + c
    if s:
        out[key] = s
    else:
        out.pop(key, None)


def row_add(a: Row, b: Row, c=_ONE) -> Row:
    out = dict(a)
    for key, v in b.items():
        _acc(out, key, c * v if c != 1 else v)
    return out


def row_scale(a: Row, c) -> Row:
    if not c:
        return {}
    return {key: c * v for key, v in a.items()}


def row_order(row: Row) -> int:
    return max((sum(mu) for _, mu in row), default=-1)


def row_is_constant(row: Row) -> bool:
    return all(not isinstance(v, RatFunc) for v in row.values())


def row_derivative(row: Row, i: int) -> Row:
    """Formal total derivative d_i of a row (i 0-based)."""
    out: Row = {}
    for (k, mu), c in row.items():
        _acc(out, (k, bump(mu, i)), c)
        if isinstance(c, RatFunc):
            dc = kdiff(c, i)
            if dc:
                _acc(out, (k, mu), dc)
    return out


class DerivativeCache:
    """Memoizes d_mu applied to a fixed family of rows."""

    def __init__(self, rows: Sequence[Row], n: int):
        self.rows = list(rows)
        self.n = n
        self._cache: Dict[Tuple[int, MultiIndex], Row] = {}

    def get(self, k: int, mu: MultiIndex) -> Row:
        key = (k, mu)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if not any(mu):
            res = self.rows[k]
        else:
            # peel off the last nonzero variable
            i = max(j for j, a in enumerate(mu) if a)
            nu = list(mu)
            nu[i] -= 1
            res = row_derivative(self.get(k, tuple(nu)), i)
        self._cache[key] = res
        return res


def act(row: Row, cache: DerivativeCache) -> Row:
    """sum_{(k,mu)} a * d_mu(B_k) for the rows B held by ``cache``."""
    out: Row = {}
    for (k, mu), c in row.items():
        for key, v in cache.get(k, mu).items():
            _acc(out, key, c * v)
    return out


# ---------------------------------------------------------------------------
# scalar operators


class DiffOp:
    """Scalar operator sum a^mu d_mu in normal form."""

    __slots__ = ("terms", "n")

    def __init__(self, terms: Optional[Dict[MultiIndex, object]] = None, n: int = 0):
        self.n = n
        self.terms = {}
        for mu, c in (terms or {}).items():
            c = coerce(c)
            if c:
                if len(mu) != n:
                    raise ShapeError("multi-index length does not match n")
                self.terms[tuple(mu)] = c

    @classmethod
    def d(cls, *idx: int, n: int) -> "DiffOp":
        """d_{i1 i2 ...} with 1-based variable indices."""
        e = [0] * n
        for i in idx:
            e[i - 1] += 1
        return cls({tuple(e): _ONE}, n)

    @classmethod
    def scalar(cls, a, n: int) -> "DiffOp":
        return cls({zero_index(n): a}, n)

    def order(self) -> int:
        return max((sum(mu) for mu in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def as_row(self, k: int = 0) -> Row:
        return {(k, mu): c for mu, c in self.terms.items()}

    @classmethod
    def from_row(cls, row: Row, n: int, k: int = 0) -> "DiffOp":
        op = cls(n=n)
        op.terms = {mu: c for (kk, mu), c in row.items() if kk == k}
        return op

    def __eq__(self, other):
        if isinstance(other, DiffOp):
            return self.n == other.n and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "DiffOp") -> "DiffOp":
        return DiffOp.from_row(row_add(self.as_row(), other.as_row()), self.n)

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return DiffOp.from_row(row_add(self.as_row(), other.as_row(), -_ONE), self.n)

    def __neg__(self):
        return DiffOp.from_row(row_scale(self.as_row(), -_ONE), self.n)

    def scale(self, c) -> "DiffOp":
        return DiffOp.from_row(row_scale(self.as_row(), coerce(c)), self.n)

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return compose(self, other)
        return self.scale(other)

    def __repr__(self):
        return f"DiffOp({format_diffop(self)!r})"

    __str__ = lambda self: format_diffop(self)


def compose(P: DiffOp, Q: DiffOp) -> DiffOp:
    """Normal form of P o Q."""
    if P.n != Q.n:
        raise ShapeError("operators live in different dimensions")
    cache = DerivativeCache([Q.as_row()], Q.n)
    return DiffOp.from_row(act(P.as_row(), cache), P.n)


def scalar_adjoint(P: DiffOp) -> DiffOp:
    """ad(a d_mu) = (-1)^|mu| d_mu o a, expanded by Leibniz."""
    out: Row = {}
    for mu, a in P.terms.items():
        sign = -1 if sum(mu) % 2 else 1
        for lam in sub_indices(mu):
            c = sign
            for m, l in zip(mu, lam):
                c *= comb(m, l)
            da = a
            for i, l in enumerate(lam):
                for _ in range(l):
                    da = kdiff(da, i)
                    if not da:
                        break
                if not da:
                    break
            if da:
                _acc(out, (0, tuple(m - l for m, l in zip(mu, lam))), da * c)
    return DiffOp.from_row(out, P.n)


def format_diffop(P: DiffOp, unknown: Optional[str] = None) -> str:
    if not P.terms:
        return "0"
    return format_row(P.as_row(), [unknown] if unknown else None, P.n)


def _row_sort_key(key):
    k, mu = key
    return (-sum(mu), tuple(-a for a in reversed(mu)), k)


def format_row(row: Row, labels: Optional[Sequence[str]], n: int) -> str:
    """Human/parser-friendly rendering, e.g. ``d3(eta2) - x3*d1(eta3)``."""
    if not row:
        return "0"
    parts = []
    for key in sorted(row, key=_row_sort_key):
        k, mu = key
        c = row[key]
        head = f"d{index_name(mu)}" if any(mu) else ""
        if labels is None:
            atom = head or "1"
        else:
            atom = f"{head}({labels[k]})" if head else labels[k]
        neg = False
        if isinstance(c, RatFunc):
            cs = format_coeff(c)
            if " " in cs or "/" in cs:
                cs = f"({cs})"
            elif cs.startswith("-"):
                neg, cs = True, cs[1:]
            body = f"{cs}*{atom}"
        else:
            neg = c < 0
            mag = abs(c)
            body = atom if mag == 1 else f"{mag}*{atom}"
        parts.append(("-" if neg else "+", body))
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        s += f" {sign} {body}"
    return s


# ---------------------------------------------------------------------------
# operator matrices


def _default_labels(prefix: str, count: int) -> List[str]:
    return [f"{prefix}{i + 1}" for i in range(count)]


class OpMatrix:
    """p x m matrix of operators mapping m unknowns to p equations.

    ``source_weights`` / ``target_weights`` are the diagonal pairings used by
    :func:`adjoint`; they default to 1 and are set to 2 on off-diagonal slots
    of symmetric-tensor bundles (see :mod:`dualpde.gallery`).
    """

    __slots__ = ("rows", "m", "n", "source_labels", "target_labels",
                 "source_weights", "target_weights")

    def __init__(self, rows: Sequence[Row], m: int, n: int,
                 source_labels: Optional[Sequence[str]] = None,
                 target_labels: Optional[Sequence[str]] = None,
                 source_weights: Optional[Sequence] = None,
                 target_weights: Optional[Sequence] = None):
        self.rows = [dict(r) for r in rows]
        self.m = m
        self.n = n
        for r in self.rows:
            for (k, mu) in r:
                if not 0 <= k < m or len(mu) != n:
                    raise ShapeError("row entry outside the declared shape")
        p = len(self.rows)
        self.source_labels = list(source_labels) if source_labels else _default_labels("u", m)
        self.target_labels = list(target_labels) if target_labels else _default_labels("e", p)
        if len(self.source_labels) != m or len(self.target_labels) != p:
            raise ShapeError("label count does not match shape")
        if len(set(self.source_labels)) != m or len(set(self.target_labels)) != p:
            raise ShapeError("labels must be pairwise distinct")
        self.source_weights = tuple(Fraction(w) for w in source_weights) if source_weights else (_ONE,) * m
        self.target_weights = tuple(Fraction(w) for w in target_weights) if target_weights else (_ONE,) * p
        if len(self.source_weights) != m or len(self.target_weights) != p:
            raise ShapeError("weight count does not match shape")
        if not all(self.source_weights) or not all(self.target_weights):
            raise DomainError("pairing weights must be nonzero")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_entries(cls, entries, p: int, m: int, n: int, **kw) -> "OpMatrix":
        """Build from {(row, col): DiffOp} (0-based)."""
        rows: List[Row] = [{} for _ in range(p)]
        for (i, k), op in entries.items():
            if not (0 <= i < p and 0 <= k < m):
                raise ShapeError("entry outside the declared shape")
            for mu, c in op.terms.items():
                _acc(rows[i], (k, mu), c)
        return cls(rows, m, n, **kw)

    @classmethod
    def from_lists(cls, table, n: int, **kw) -> "OpMatrix":
        """Build from a nested list of DiffOp / scalars (0 allowed)."""
        p = len(table)
        m = len(table[0]) if p else kw.pop("m", 0)
        entries = {}
        for i, line in enumerate(table):
            if len(line) != m:
                raise ShapeError("ragged operator table")
            for k, op in enumerate(line):
                if not isinstance(op, DiffOp):
                    op = DiffOp.scalar(op, n)
                if op.terms:
                    entries[(i, k)] = op
        return cls.from_entries(entries, p, m, n, **kw)

    @classmethod
    def identity(cls, m: int, n: int, labels=None, weights=None) -> "OpMatrix":
        rows = [{(k, zero_index(n)): _ONE} for k in range(m)]
        return cls(rows, m, n, labels, labels, weights, weights)

    @classmethod
    def zero(cls, p: int, m: int, n: int, **kw) -> "OpMatrix":
        return cls([{} for _ in range(p)], m, n, **kw)

    # -- access -------------------------------------------------------------

    @property
    def p(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.p, self.m)

    def entry(self, i: int, k: int) -> DiffOp:
        return DiffOp.from_row(self.rows[i], self.n, k)

    @property
    def entries(self) -> Dict[Tuple[int, int], DiffOp]:
        out = {}
        for i, r in enumerate(self.rows):
            for k in sorted({kk for kk, _ in r}):
                out[(i, k)] = DiffOp.from_row(r, self.n, k)
        return out

    def order(self) -> int:
        return max((row_order(r) for r in self.rows), default=-1)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def is_constant(self) -> bool:
        return all(row_is_constant(r) for r in self.rows)

    def __eq__(self, other):
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return (self.shape == other.shape and self.n == other.n
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.shape, self.n))

    def same_labels(self, other: "OpMatrix") -> bool:
        return (self.source_labels == other.source_labels
                and self.target_labels == other.target_labels)

    # -- derived matrices ---------------------------------------------------

    def with_rows(self, rows: Sequence[Row], target_labels=None, target_weights=None) -> "OpMatrix":
        """Same source bundle, new rows."""
        return OpMatrix(rows, self.m, self.n, self.source_labels, target_labels,
                        self.source_weights, target_weights)

    def select_rows(self, idx: Iterable[int]) -> "OpMatrix":
        idx = list(idx)
        return OpMatrix([self.rows[i] for i in idx], self.m, self.n, self.source_labels,
                        [self.target_labels[i] for i in idx], self.source_weights,
                        [self.target_weights[i] for i in idx])

    def select_cols(self, idx: Sequence[int]) -> "OpMatrix":
        pos = {k: j for j, k in enumerate(idx)}
        rows = [{(pos[k], mu): c for (k, mu), c in r.items() if k in pos} for r in self.rows]
        return OpMatrix(rows, len(idx), self.n, [self.source_labels[k] for k in idx],
                        self.target_labels, [self.source_weights[k] for k in idx],
                        self.target_weights)

    def scale_rows(self, factors: Sequence) -> "OpMatrix":
        rows = [row_scale(r, coerce(f)) for r, f in zip(self.rows, factors)]
        return OpMatrix(rows, self.m, self.n, self.source_labels, self.target_labels,
                        self.source_weights, self.target_weights)

    def __neg__(self):
        return self.scale_rows([-1] * self.p)

    def __add__(self, other: "OpMatrix") -> "OpMatrix":
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        rows = [row_add(a, b) for a, b in zip(self.rows, other.rows)]
        return OpMatrix(rows, self.m, self.n, self.source_labels, self.target_labels,
                        self.source_weights, self.target_weights)

    def __sub__(self, other: "OpMatrix") -> "OpMatrix":
        return self + (-other)

    def __matmul__(self, other: "OpMatrix") -> "OpMatrix":
        return matmul(self, other)

    def relabel(self, source_labels=None, target_labels=None,
                source_weights=None, target_weights=None) -> "OpMatrix":
        return OpMatrix(self.rows, self.m, self.n,
                        source_labels or self.source_labels,
                        target_labels or self.target_labels,
                        source_weights or self.source_weights,
                        target_weights or self.target_weights)

    def row_string(self, i: int) -> str:
        return format_row(self.rows[i], self.source_labels, self.n)

    def __repr__(self):
        return f"OpMatrix({self.p}x{self.m}, n={self.n}, order={self.order()})"

    def __str__(self):
        lines = [f"{self.target_labels[i]}: {self.row_string(i)}" for i in range(self.p)]
        return "\n".join(lines) if lines else "(empty)"


def matmul(A: OpMatrix, B: OpMatrix) -> OpMatrix:
    """A . B, entrywise sum_k A[i,k] o B[k,j]."""
    if A.m != B.p:
        raise ShapeError(f"cannot compose {A.shape} with {B.shape}")
    if A.n != B.n:
        raise ShapeError("matrices live in different dimensions")
    if A.source_weights != B.target_weights:
        raise ShapeError("pairing weights of the shared bundle disagree")
    cache = DerivativeCache(B.rows, B.n)
    rows = [act(r, cache) for r in A.rows]
    return OpMatrix(rows, B.m, A.n, B.source_labels, A.target_labels,
                    B.source_weights, A.target_weights)


def apply(A: OpMatrix, f: Sequence) -> list:
    """Apply A to a vector of functions in Q(x)."""
    if len(f) != A.m:
        raise ShapeError(f"expected {A.m} components, got {len(f)}")
    f = [coerce(v) for v in f]
    memo: Dict[Tuple[int, MultiIndex], object] = {}

    def deriv(k, mu):
        key = (k, mu)
        if key not in memo:
            if not any(mu):
                memo[key] = f[k]
            else:
                i = max(j for j, a in enumerate(mu) if a)
                nu = list(mu)
                nu[i] -= 1
                memo[key] = kdiff(deriv(k, tuple(nu)), i)
        return memo[key]

    out = []
    for r in A.rows:
        s = _ZERO
        for (k, mu), c in r.items():
            v = deriv(k, mu)
            if v:
                s = s + c * v
        out.append(coerce(s))
    return out


def adjoint(A: OpMatrix) -> OpMatrix:
    """Formal adjoint W_src^-1 . ad(A)^T . W_tgt; an involutive anti-homomorphism.

    With all weights 1 this is the plain transpose of entrywise adjoints.
    """
    rows: List[Row] = [{} for _ in range(A.m)]
    for i, r in enumerate(A.rows):
        for k in sorted({kk for kk, _ in r}):
            ad = scalar_adjoint(DiffOp.from_row(r, A.n, k))
            w = A.target_weights[i] / A.source_weights[k]
            for mu, c in ad.terms.items():
                _acc(rows[k], (i, mu), c * w if w != 1 else c)
    return OpMatrix(rows, A.p, A.n, A.target_labels, A.source_labels,
                    A.target_weights, A.source_weights)


# ---------------------------------------------------------------------------
# principal symbol


class SymbolMatrix:
    """Top-order part of an operator matrix with d_mu -> chi^mu.

    ``entries[(i, k)]`` maps exponent tuples of chi to coefficients in Q(x).
    """

    def __init__(self, entries, p: int, m: int, n: int, q: int):
        self.entries = entries
        self.p, self.m, self.n, self.q = p, m, n, q

    def __eq__(self, other):
        return (isinstance(other, SymbolMatrix) and self.entries == other.entries
                and (self.p, self.m, self.q) == (other.p, other.m, other.q))

    def evaluate(self, chi, x=None) -> List[List[Fraction]]:
        """Numeric matrix at chi (and x for non-constant coefficients)."""
        M = [[_ZERO] * self.m for _ in range(self.p)]
        for (i, k), poly in self.entries.items():
            s = _ZERO
            for e, c in poly.items():
                t = kevaluate(c, x) if isinstance(c, RatFunc) else c
                for v, a in zip(chi, e):
                    if a:
                        t *= Fraction(v) ** a
                s += t
            M[i][k] = s
        return M

    def generic_rank(self, seed: int = 0, samples: int = 3) -> int:
        """Max rank over random exact evaluations (a lower bound that is
        exact with overwhelming probability); see :meth:`exact_rank`."""
        rng = random.Random(seed)
        best = 0
        for _ in range(samples):
            chi = [Fraction(rng.randint(-97, 97)) for _ in range(self.n)]
            x = [Fraction(rng.randint(-97, 97), rng.randint(1, 13)) for _ in range(self.n)]
            try:
                best = max(best, rank(self.evaluate(chi, x)))
            except DomainError:
                continue
        return best

    def polynomial_matrix(self) -> List[List[Poly]]:
        """Entries as polynomials in (x1..xn, chi1..chin) after clearing
        row denominators; rank and vanishing of det are unchanged."""
        n = self.n
        out = []
        for i in range(self.p):
            coeffs = [c for k in range(self.m) for c in self.entries.get((i, k), {}).values()]
            Lf = coerce(lcm_denominators(coeffs, n))
            line = []
            for k in range(self.m):
                acc = Poly.const(0, 2 * n)
                for e, c in self.entries.get((i, k), {}).items():
                    cc = c * Lf
                    if isinstance(cc, RatFunc):
                        num = cc.num
                    else:
                        num = Poly.const(cc, n)
                    lifted = Poly({xe + e: v for xe, v in num.terms.items()}, 2 * n)
                    acc = acc + lifted
                line.append(acc)
            out.append(line)
        return out

    def exact_rank(self) -> int:
        """Rank over Q(x)(chi) by fraction-free (Bareiss) elimination."""
        return bareiss(self.polynomial_matrix())[0]

    def determinant(self):
        """Exact determinant as a polynomial in chi (x-dependent entries are
        returned with row denominators cleared).  Square matrices only."""
        if self.p != self.m:
            raise ShapeError("determinant of a non-square symbol")
        r, det = bareiss(self.polynomial_matrix())
        return det if r == self.p else Poly.const(0, 2 * self.n)

    def __repr__(self):
        return f"SymbolMatrix({self.p}x{self.m}, q={self.q})"


def principal_symbol(A: OpMatrix, q: Optional[int] = None) -> SymbolMatrix:
    if q is None:
        q = A.order()
    if q != A.order():
        raise DomainError(f"symbol order {q} differs from operator order {A.order()}")
    entries: Dict[Tuple[int, int], Dict[MultiIndex, object]] = {}
    for i, r in enumerate(A.rows):
        for (k, mu), c in r.items():
            if sum(mu) == q:
                entries.setdefault((i, k), {})[mu] = c
    return SymbolMatrix(entries, A.p, A.m, A.n, q)


# ---------------------------------------------------------------------------
# small exact linear algebra over Q


def rank(M: List[List[Fraction]]) -> int:
    M = [list(r) for r in M]
    rk = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rk, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rk], M[piv] = M[piv], M[rk]
        pr = M[rk]
        inv = 1 / pr[c]
        for i in range(rk + 1, len(M)):
            if M[i][c]:
                f = M[i][c] * inv
                M[i] = [a - f * b for a, b in zip(M[i], pr)]
        rk += 1
    return rk


def bareiss(M: List[List[Poly]]):
    """Fraction-free elimination; returns (rank, last pivot).

    For a nonsingular square matrix the last pivot is +-det.
    """
    from .algebra import divexact

    A = [list(r) for r in M]
    p = len(A)
    m = len(A[0]) if p else 0
    nv = A[0][0].nvars if p and m else 0
    prev = Poly.const(1, nv)
    sign = 1
    rk = 0
    used_cols = []
    for c in range(m):
        piv = None
        best = None
        for i in range(rk, p):
            if not A[i][c].is_zero():
                size = len(A[i][c].terms)
                if best is None or size < best:
                    piv, best = i, size
        if piv is None:
            continue
        if piv != rk:
            A[rk], A[piv] = A[piv], A[rk]
            sign = -sign
        P = A[rk][c]
        for i in range(rk + 1, p):
            for j in range(c + 1, m):
                t = P * A[i][j] - A[i][c] * A[rk][j]
                A[i][j] = divexact(t, prev) if not t.is_zero() else t
            A[i][c] = Poly.const(0, nv)
        prev = P
        rk += 1
        used_cols.append(c)
    det = prev.scale(sign) if rk == p == m else Poly.const(0, nv)
    return rk, det
