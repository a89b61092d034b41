"""Finite-order jet systems R_q: prolongation, projection, symbols,
characters and the involution test.

A :class:`JetSystem` is a reduced row echelon form over the jet coordinates
y^k_mu with |mu| <= q.  Rows of lower order are always accompanied by their
derivatives up to order q, so the row space is the full fibre of R_q.
Each row carries a certificate: the operator combination of the original
equations that produces it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Tuple

from .algebra import kdiff, kinv
from .coords import CoordinateChange, candidate_changes
from .errors import DeltaIrregularWarning, DomainError, OrderBudgetExceeded
from .involutive import jet_key, leading
from .operators import (
    OpMatrix,
    Row,
    bump,
    index_class,
    indices_of_order,
    row_derivative,
    row_order,
)

_ONE = Fraction(1)


@dataclass
class CharacterTable:
    q: int
    beta: Tuple[int, ...]
    alpha: Tuple[int, ...]
    dim_g_q: int
    dim_g_q1: int

    def as_dict(self):
        return {"q": self.q, "beta": list(self.beta), "alpha": list(self.alpha),
                "dim_g_q": self.dim_g_q, "dim_g_q1": self.dim_g_q1}


@dataclass
class TabularRow:
    label: str
    leading: Tuple[int, tuple]
    cls: int
    multiplicative: Tuple[int, ...]
    nonmultiplicative: Tuple[int, ...]


@dataclass
class JanetTabular:
    n: int
    rows: List[TabularRow]
    beta: Tuple[int, ...]

    def render(self) -> List[str]:
        """One line per equation: multiplicative variables, '•' otherwise."""
        out = []
        for r in self.rows:
            cells = [str(i) if i in r.multiplicative else "•" for i in range(1, self.n + 1)]
            out.append(f"{r.label}: " + " ".join(cells))
        return out


@dataclass
class InvolutionResult:
    involutive: bool
    reason: str = ""

    def __bool__(self):
        return self.involutive


def top_jets(m: int, n: int, q: int) -> int:
    return m * comb(q + n - 1, n - 1)


def jet_count(m: int, n: int, q: int) -> int:
    return m * comb(q + n, n)


def class_count(n: int, q: int, i: int) -> int:
    """Multi-indices of order q and class i (1-based)."""
    if q == 0:
        return 1 if i == n else 0
    return comb(q + n - i - 1, q - 1)


class JetSystem:
    """Order-q linear system with certificates.

    ``rows`` and ``certs`` are parallel lists; certificates are rows over the
    equations of ``original`` (an OpMatrix written in the current coordinates).
    """

    def __init__(self, original: OpMatrix, q: int, rows: List[Row], certs: List[Row],
                 change: Optional[CoordinateChange] = None):
        self.original = original
        self.n = original.n
        self.m = original.m
        self.q = q
        self.rows = rows
        self.certs = certs
        self.change = change or CoordinateChange.identity(self.n)

    # -- construction --------------------------------------------------------

    @classmethod
    def from_operator(cls, A: OpMatrix, q: Optional[int] = None) -> "JetSystem":
        q = A.order() if q is None else q
        if q < 0:
            q = 0
        gens = [(dict(r), {(t, (0,) * A.n): _ONE}) for t, r in enumerate(A.rows)]
        return cls._echelon(A, q, _close(gens, q, A.n))

    @classmethod
    def _echelon(cls, A: OpMatrix, q: int, pairs, change=None) -> "JetSystem":
        piv: Dict[tuple, Tuple[Row, Row]] = {}
        for row, cert in pairs:
            _insert(piv, row, cert)
        keys = sorted(piv, key=lambda key: jet_key(*key), reverse=True)
        return cls(A, q, [piv[k][0] for k in keys], [piv[k][1] for k in keys], change)

    # -- basic queries ---------------------------------------------------------

    def leading_jets(self) -> List[tuple]:
        return [leading(r) for r in self.rows]

    def num_jets(self) -> int:
        return jet_count(self.m, self.n, self.q)

    def dim(self) -> int:
        """Fibre dimension of R_q."""
        return self.num_jets() - len(self.rows)

    def rows_of_order(self, s: int) -> List[int]:
        return [i for i, r in enumerate(self.rows) if sum(leading(r)[1]) == s]

    def certificate(self, i: int) -> OpMatrix:
        A = self.original
        return OpMatrix([self.certs[i]], A.p, A.n, A.target_labels, [f"r{i + 1}"],
                        A.target_weights, None)

    def as_operator(self) -> OpMatrix:
        A = self.original
        return OpMatrix(self.rows, A.m, A.n, A.source_labels,
                        [f"r{i + 1}" for i in range(len(self.rows))], A.source_weights)

    def check_certificates(self) -> bool:
        """Every certificate applied to the original rows reproduces its row."""
        from .operators import DerivativeCache, act

        cache = DerivativeCache(self.original.rows, self.n)
        return all(act(c, cache) == r for r, c in zip(self.rows, self.certs))

    def __repr__(self):
        return f"JetSystem(q={self.q}, m={self.m}, n={self.n}, rows={len(self.rows)})"


def _close(pairs, q: int, n: int):
    """Add derivatives of lower-order rows so that every row has order <= q
    and the list spans the full fibre at order q."""
    out = []
    seen_cache = {}
    for row, cert in pairs:
        if not row:
            continue
        s = row_order(row)
        layer = [(row, cert)]
        out.extend(layer)
        for _ in range(q - s):
            nxt = {}
            for r, c in layer:
                for i in range(n):
                    dr = row_derivative(r, i)
                    key = frozenset(dr.items())
                    if key in seen_cache:
                        continue
                    seen_cache[key] = True
                    nxt[key] = (dr, row_derivative(c, i))
            layer = list(nxt.values())
            out.extend(layer)
    return out


def _insert(piv: Dict[tuple, Tuple[Row, Row]], row: Row, cert: Row):
    """Gauss-Jordan insertion keeping the echelon fully reduced."""
    row = dict(row)
    cert = dict(cert)
    # reduce against existing pivots, largest jets first
    changed = True
    while changed:
        changed = False
        for key in sorted((k for k in row if k in piv), key=lambda k: jet_key(*k), reverse=True):
            c = row.get(key)
            if c is None:
                continue
            prow, pcert = piv[key]
            _axpy(row, prow, -c)
            _axpy(cert, pcert, -c)
            changed = True
    if not row:
        return False
    lt = leading(row)
    inv = kinv(row[lt])
    if inv != 1:
        row = {k: v * inv for k, v in row.items()}
        cert = {k: v * inv for k, v in cert.items()}
    # eliminate the new pivot from the others
    for key, (prow, pcert) in piv.items():
        c = prow.get(lt)
        if c is not None:
            _axpy(prow, row, -c)
            _axpy(pcert, cert, -c)
    piv[lt] = (row, cert)
    return True


def _axpy(y: Row, x: Row, a):
    for k, v in x.items():
        old = y.get(k)
        t = a * v
        if old is None:
            y[k] = t
        else:
            s = old + t
            if s:
                y[k] = s
            else:
                del y[k]


# ---------------------------------------------------------------------------
# prolongation / projection


def prolong(S: JetSystem, r: int = 1) -> JetSystem:
    """rho_r: all formal derivatives up to order r of every row."""
    if r < 0:
        raise DomainError("negative prolongation")
    pairs = list(zip(S.rows, S.certs))
    out = list(pairs)
    layer = pairs
    for _ in range(r):
        nxt = []
        for row, cert in layer:
            for i in range(S.n):
                nxt.append((row_derivative(row, i), row_derivative(cert, i)))
        out.extend(nxt)
        layer = nxt
    return JetSystem._echelon(S.original, S.q + r, out, S.change)


def project(S: JetSystem, to_order: int) -> JetSystem:
    """Rows of order <= to_order; exact because the echelon is degree compatible."""
    if to_order > S.q:
        raise DomainError("projection target above system order")
    keep = [i for i, r in enumerate(S.rows) if row_order(r) <= to_order]
    return JetSystem(S.original, to_order, [S.rows[i] for i in keep],
                     [S.certs[i] for i in keep], S.change)


def new_lower_order_rows(S: JetSystem) -> int:
    """How many equations of order <= q appear after one prolongation."""
    P = project(prolong(S, 1), S.q)
    return len(P.rows) - len(S.rows)


# ---------------------------------------------------------------------------
# symbols and characters


def beta_counts(S: JetSystem) -> Tuple[int, ...]:
    beta = [0] * S.n
    for lt in S.leading_jets():
        k, mu = lt
        if sum(mu) == S.q:
            beta[index_class(mu) - 1] += 1
    return tuple(beta)


def characters(S: JetSystem) -> CharacterTable:
    q, n, m = S.q, S.n, S.m
    beta = beta_counts(S)
    alpha = tuple(m * class_count(n, q, i) - beta[i - 1] for i in range(1, n + 1))
    return CharacterTable(q, beta, alpha, sum(alpha), sum(i * a for i, a in enumerate(alpha, 1)))


def symbol_rank(S: JetSystem, order: Optional[int] = None) -> int:
    """Independent check: rank of the order-q parts of all rows by plain
    elimination (exact for constant coefficients, evaluated at a fixed
    rational point otherwise)."""
    from .algebra import kevaluate
    from .operators import rank

    q = S.q if order is None else order
    cols = [(k, mu) for k in range(S.m) for mu in indices_of_order(S.n, q)]
    pos = {c: i for i, c in enumerate(cols)}
    pt = [Fraction(3 + 2 * i, 7 + i) for i in range(S.n)]
    M = []
    for r in S.rows:
        line = [Fraction(0)] * len(cols)
        for key, v in r.items():
            if sum(key[1]) == q:
                line[pos[key]] = kevaluate(v, pt)
        if any(line):
            M.append(line)
    return rank(M) if M else 0


def dim_symbol_next(S: JetSystem) -> int:
    """dim g_{q+1} by direct prolongation."""
    P = prolong(S, 1)
    top = sum(1 for lt in P.leading_jets() if sum(lt[1]) == S.q + 1)
    return top_jets(S.m, S.n, S.q + 1) - top


def janet_tabular(S: JetSystem, warn: bool = True) -> JanetTabular:
    rows = []
    for i, lt in enumerate(S.leading_jets()):
        k, mu = lt
        if sum(mu) != S.q:
            continue
        c = index_class(mu)
        rows.append(TabularRow(f"r{i + 1}", lt, c, tuple(range(1, c + 1)),
                               tuple(range(c + 1, S.n + 1))))
    rows.sort(key=lambda r: -r.cls)
    ct = characters(S)
    if warn and any(a < b for a, b in zip(ct.alpha, ct.alpha[1:])):
        warnings.warn("characters are not non-increasing; coordinates look delta-irregular",
                      DeltaIrregularWarning, stacklevel=2)
    return JanetTabular(S.n, rows, ct.beta)


def is_involutive(S: JetSystem) -> InvolutionResult:
    ct = characters(S)
    gained = new_lower_order_rows(S)
    if gained:
        return InvolutionResult(False, f"projection yields {gained} new equation(s) of order <= {S.q}")
    g1 = dim_symbol_next(S)
    if g1 != ct.dim_g_q1:
        return InvolutionResult(
            False, f"dim g_(q+1) = {g1} but the characters predict {ct.dim_g_q1} "
                   "(symbol not involutive in these coordinates)")
    return InvolutionResult(True, "")


def complete_to_involution(S: JetSystem, max_order: Optional[int] = None):
    """Prolongation/projection loop; returns (system, characters)."""
    max_order = S.q + 5 if max_order is None else max_order
    if max_order < S.q:
        raise DomainError("max_order below system order")
    while True:
        if S.q > max_order:
            raise OrderBudgetExceeded(f"no involutive system up to order {max_order}", max_order)
        P = prolong(S, 1)
        Pq = project(P, S.q)
        if len(Pq.rows) > len(S.rows):
            S = Pq
            continue
        ct = characters(S)
        top = sum(1 for lt in P.leading_jets() if sum(lt[1]) == S.q + 1)
        if top_jets(S.m, S.n, S.q + 1) - top == ct.dim_g_q1:
            return S, ct
        if S.q + 1 > max_order:
            raise OrderBudgetExceeded(f"no involutive system up to order {max_order}", max_order)
        S = P


# ---------------------------------------------------------------------------
# coordinates


def change_coordinates(S: JetSystem, T: CoordinateChange) -> JetSystem:
    """Rewrite the system (and its original equations) in x_bar = A x."""
    A = T.transform_operator(S.original)
    pairs = [(T.transform_row(r), T.transform_row(c)) for r, c in zip(S.rows, S.certs)]
    composed = _compose_changes(S.change, T)
    return JetSystem._echelon(A, S.q, pairs, composed)


def _compose_changes(first: CoordinateChange, second: CoordinateChange) -> CoordinateChange:
    n = first.n
    M = [[sum(second.matrix[i][l] * first.matrix[l][j] for l in range(n)) for j in range(n)]
         for i in range(n)]
    return CoordinateChange(M)


def find_delta_regular(S: JetSystem, seed: int = 0, tries: int = 10):
    """Best change among identity and ``tries`` random unipotent ones,
    ranked lexicographically by (beta^n, ..., beta^1)."""
    best = None
    for T in candidate_changes(S.n, seed, tries):
        S2 = S if T.is_identity() else change_coordinates(S, T)
        score = tuple(reversed(beta_counts(S2)))
        if best is None or score > best[0]:
            best = (score, T, S2)
    return best[1], best[2]


# ---------------------------------------------------------------------------
# Spencer operator


def spencer_apply(f: Dict[tuple, object], q: int, n: int) -> Dict[tuple, object]:
    """(df)^k_{mu,i} = d_i f^k_mu - f^k_{mu+1_i} for |mu| <= q.

    ``f`` maps (k, mu) with |mu| <= q+1 to coefficients; missing entries are 0.
    Keys of the result are (k, mu, i) with i 1-based.
    """
    out = {}
    ks = sorted({k for k, _ in f})
    for k in ks:
        for s in range(q + 1):
            for mu in indices_of_order(n, s):
                for i in range(n):
                    v = kdiff(f.get((k, mu), 0) or Fraction(0), i) - (f.get((k, bump(mu, i)), 0) or 0)
                    out[(k, mu, i + 1)] = v
    return out


def spencer_forms(omega: Dict[tuple, object], q: int, n: int) -> Dict[tuple, object]:
    """Spencer operator on 1-forms T*(x)J_q -> wedge^2 T*(x)J_(q-1).

    ``omega`` maps (k, mu, i) to coefficients; the result maps (k, mu, i, j),
    i < j, to (d_i w_{mu,j} - w_{mu+1_i,j}) - (d_j w_{mu,i} - w_{mu+1_j,i}).
    """
    out = {}
    ks = sorted({k for k, _, _ in omega})
    z = Fraction(0)
    for k in ks:
        for s in range(q):
            for mu in indices_of_order(n, s):
                for i in range(n):
                    for j in range(i + 1, n):
                        a = kdiff(omega.get((k, mu, j + 1), z), i) - omega.get((k, bump(mu, i), j + 1), z)
                        b = kdiff(omega.get((k, mu, i + 1), z), j) - omega.get((k, bump(mu, j), i + 1), z)
                        out[(k, mu, i + 1, j + 1)] = a - b
    return out
