"""Compatibility conditions and differential sequences."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Union

from .algebra import RatFunc, kinv
from .coords import CoordinateChange, candidate_changes
from .errors import OrderBudgetExceeded, ShapeError
from .involutive import PommaretBasis, leading
from .modules import DEFAULT_TRIES, minimal_rows
from .operators import DerivativeCache, OpMatrix, Row, act, row_order


@dataclass
class CCResult:
    cc: OpMatrix
    order: int
    completion_order: int
    change: CoordinateChange = None
    notes: List[str] = field(default_factory=list)

    @property
    def rows(self) -> int:
        return self.cc.p


def normalize_row(row: Row) -> Row:
    """Constant rows: primitive integer coefficients, leading one positive.
    Other rows: monic in the leading jet."""
    if not row:
        return row
    lt = leading(row)
    if all(not isinstance(v, RatFunc) for v in row.values()):
        den = 1
        for v in row.values():
            den = den * v.denominator // gcd(den, v.denominator)
        nums = [int(v * den) for v in row.values()]
        g = 0
        for a in nums:
            g = gcd(g, a)
        f = Fraction(den, g)
        if row[lt] < 0:
            f = -f
        return {k: v * f for k, v in row.items()}
    inv = kinv(row[lt])
    return {k: v * inv for k, v in row.items()}


def interreduce(rows: Sequence[Row]) -> List[Row]:
    """Reduced row echelon form over K (an invertible K-linear change of
    generators, so the row module is unchanged)."""
    from .involutive import jet_key
    from .jets import _insert

    piv = {}
    for r in rows:
        _insert(piv, r, {})
    keys = sorted(piv, key=lambda k: jet_key(*k))
    return [piv[k][0] for k in keys]


def verify_cc(cc: OpMatrix, A: OpMatrix) -> bool:
    """True iff cc . A vanishes identically."""
    if cc.m != A.p:
        raise ShapeError(f"cannot compose {cc.shape} with {A.shape}")
    if cc.n != A.n:
        raise ShapeError("operators live in different dimensions")
    cache = DerivativeCache(A.rows, A.n)
    return all(not act(r, cache) for r in cc.rows)


def generate_cc(A: OpMatrix, max_order: Optional[int] = None, seed: int = 0,
                coords: str = "auto", tries: int = DEFAULT_TRIES) -> CCResult:
    """Generating compatibility conditions of A, written in A's target labels.

    The rows of A are completed to a Pommaret basis with certificates; the
    certificates of all non-multiplicative prolongations (which reduce to
    zero) and of the generators themselves span the syzygy module, and a
    greedy pass keeps a generating subset.  If completion fails in the given
    coordinates the computation is redone after a linear change of
    variables and the result is transformed back.
    """
    q = max(A.order(), 0)
    budget = q + 5 if max_order is None else max_order
    cands = candidate_changes(A.n, seed, tries if coords == "auto" else 0)
    last = None
    for T in cands:
        At = A if T.is_identity() else T.transform_operator(A)
        try:
            B = PommaretBasis(A.m, A.n, budget, track=True, ncert=A.p)
            B.add(At.rows)
        except OrderBudgetExceeded as exc:
            last = exc
            continue
        syz = B.syzygy_rows()
        if not T.is_identity():
            back = T.inverse()
            syz = [back.transform_row(s) for s in syz]
        syz_budget = max((row_order(s) for s in syz), default=0) + 5
        kept = minimal_rows(syz, A.p, A.n, syz_budget, seed=seed, coords=coords, tries=tries)
        kept = [normalize_row(r) for r in interreduce(kept)]
        cc = OpMatrix(kept, A.p, A.n, A.target_labels,
                      [f"c{i + 1}" for i in range(len(kept))], A.target_weights, None)
        notes = []
        if not T.is_identity():
            notes.append("completion used the change " + "; ".join(T.describe()))
        res = CCResult(cc, max(cc.order(), 0) if kept else 0, B.max_basis_order(), T, notes)
        return res
    raise OrderBudgetExceeded(
        f"no involutive completion up to order {budget} in {len(cands)} coordinate systems",
        budget) from last


@dataclass
class DiffSequence:
    operators: List[OpMatrix]
    fiber_dims: List[int]
    orders: List[int]

    def euler_poincare(self) -> int:
        return euler_poincare(self.fiber_dims)

    def is_complex(self) -> bool:
        return all(verify_cc(b, a) for a, b in zip(self.operators, self.operators[1:]))


def build_sequence(A: OpMatrix, steps: int, max_order: Optional[int] = None, seed: int = 0,
                   coords: str = "auto") -> DiffSequence:
    """A followed by ``steps`` successive generating CC operators."""
    ops = [A]
    for _ in range(steps):
        ops.append(generate_cc(ops[-1], max_order, seed=seed, coords=coords).cc)
    dims = [A.m] + [op.p for op in ops]
    return DiffSequence(ops, dims, [max(op.order(), 0) for op in ops])


def euler_poincare(seq: Union[DiffSequence, Sequence[int]]) -> int:
    """Alternating sum of fibre dimensions."""
    dims = seq.fiber_dims if isinstance(seq, DiffSequence) else list(seq)
    return sum(d if i % 2 == 0 else -d for i, d in enumerate(dims))
