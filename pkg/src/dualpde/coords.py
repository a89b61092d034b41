"""Linear changes of independent variables x_bar = A x.

Derivatives transform by the chain rule d_i = sum_j A[j][i] dbar_j and
coefficients by substitution x = A^-1 x_bar.  Everything is exact.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List, Sequence

from .algebra import Poly, RatFunc, coerce
from .errors import DomainError

_ONE = Fraction(1)


def _inverse(A: List[List[Fraction]]) -> List[List[Fraction]]:
    n = len(A)
    M = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            raise DomainError("singular coordinate change")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for i in range(n):
            if i != c and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return [r[n:] for r in M]


class CoordinateChange:
    """x_bar = matrix . x with an invertible rational matrix."""

    def __init__(self, matrix: Sequence[Sequence]):
        self.matrix = [[Fraction(v) for v in r] for r in matrix]
        n = len(self.matrix)
        if any(len(r) != n for r in self.matrix):
            raise DomainError("coordinate change must be square")
        self.inverse_matrix = _inverse(self.matrix)

    @classmethod
    def identity(cls, n: int) -> "CoordinateChange":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @property
    def n(self) -> int:
        return len(self.matrix)

    def is_identity(self) -> bool:
        return all(self.matrix[i][j] == (i == j) for i in range(self.n) for j in range(self.n))

    def inverse(self) -> "CoordinateChange":
        return CoordinateChange(self.inverse_matrix)

    def __eq__(self, other):
        return isinstance(other, CoordinateChange) and self.matrix == other.matrix

    def __hash__(self):
        return hash(tuple(map(tuple, self.matrix)))

    def describe(self) -> List[str]:
        """Human-readable lines such as 'xb3 = x1 + x2 + x3'."""
        out = []
        for i, r in enumerate(self.matrix):
            terms = []
            for j, a in enumerate(r):
                if not a:
                    continue
                mag = abs(a)
                body = f"x{j + 1}" if mag == 1 else f"{mag}*x{j + 1}"
                terms.append(("-" if a < 0 else "+", body))
            s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
            for sign, body in terms[1:]:
                s += f" {sign} {body}"
            out.append(f"xb{i + 1} = {s}")
        return out

    def to_json(self):
        return [[str(v) for v in r] for r in self.matrix]

    # -- action on coefficients and rows -----------------------------------

    def _subst_poly(self, p: Poly) -> Poly:
        # x_i = sum_j Ainv[i][j] xbar_j
        n = self.n
        lin = [Poly({tuple(int(j == l) for l in range(n)): a for j, a in enumerate(self.inverse_matrix[i]) if a}, n)
               for i in range(n)]
        out = Poly.const(0, n)
        for e, c in p.terms.items():
            t = Poly.const(c, n)
            for i, a in enumerate(e):
                if a:
                    t = t * lin[i] ** a
            out = out + t
        return out

    def transform_coeff(self, c):
        if not isinstance(c, RatFunc):
            return c
        return coerce(RatFunc(self._subst_poly(c.num), self._subst_poly(c.den)))

    def transform_row(self, row: Dict) -> Dict:
        """Rewrite an operator row written in x as one written in x_bar."""
        n = self.n
        A = self.matrix
        # d_i as a linear form in dbar_j
        dcache: Dict[tuple, Dict[tuple, Fraction]] = {}

        def dpow(mu):
            if mu in dcache:
                return dcache[mu]
            if not any(mu):
                res = {mu: _ONE}
            else:
                i = max(j for j, a in enumerate(mu) if a)
                nu = list(mu)
                nu[i] -= 1
                prev = dpow(tuple(nu))
                res = {}
                for e, c in prev.items():
                    for j in range(n):
                        a = A[j][i]
                        if a:
                            f = list(e)
                            f[j] += 1
                            f = tuple(f)
                            s = res.get(f, 0) + c * a
                            if s:
                                res[f] = s
                            else:
                                res.pop(f, None)
            dcache[mu] = res
            return res

        out: Dict = {}
        for (k, mu), c in row.items():
            cc = self.transform_coeff(c)
            for e, a in dpow(mu).items():
                key = (k, e)
                s = out.get(key)
                v = cc * a
                s = v if s is None else s + v
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return out

    def transform_operator(self, A):
        """Same operator matrix written in the new coordinates."""
        from .operators import OpMatrix

        return OpMatrix([self.transform_row(r) for r in A.rows], A.m, A.n, A.source_labels,
                        A.target_labels, A.source_weights, A.target_weights)


def candidate_changes(n: int, seed: int, tries: int) -> List[CoordinateChange]:
    """Identity followed by ``tries`` distinct random unipotent lower-triangular
    integer changes with entries in -2..2; deterministic in ``seed``."""
    out = [CoordinateChange.identity(n)]
    if n < 2:
        return out
    rng = random.Random(seed)
    seen = {out[0]}
    attempts = 0
    while len(out) < tries + 1 and attempts < 50 * (tries + 1):
        attempts += 1
        M = [[int(i == j) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i):
                M[i][j] = rng.randint(-2, 2)
        T = CoordinateChange(M)
        if T not in seen:
            seen.add(T)
            out.append(T)
    return out
