"""Row modules of operator matrices: membership, equality, normal forms.

A Pommaret basis only exists in delta-regular coordinates, so every helper
here retries under the deterministic list of coordinate changes from
:func:`dualpde.coords.candidate_changes` when completion runs past the order
budget.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

from .coords import candidate_changes
from .errors import OrderBudgetExceeded, ShapeError
from .involutive import PommaretBasis, jet_key, leading
from .operators import OpMatrix, Row, row_order

DEFAULT_TRIES = 12


def _budget(rows: Sequence[Row], max_order: Optional[int]) -> int:
    if max_order is not None:
        return max_order
    return max((row_order(r) for r in rows), default=0) + 5


class RowModule:
    """The left D-module spanned by some rows, with a Pommaret basis
    computed in (possibly changed) coordinates ``change``."""

    def __init__(self, rows: Sequence[Row], m: int, n: int, max_order: Optional[int] = None,
                 seed: int = 0, coords: str = "auto", tries: int = DEFAULT_TRIES):
        self.m, self.n = m, n
        self.rows = [dict(r) for r in rows]
        self._opts = (max_order, seed, coords, tries)
        self._build()

    def _build(self):
        max_order, seed, coords, tries = self._opts
        m, n = self.m, self.n
        budget = _budget(self.rows, max_order)
        cands = candidate_changes(n, seed, tries if coords == "auto" else 0)
        last = None
        for T in cands:
            try:
                B = PommaretBasis(m, n, budget)
                B.add([T.transform_row(r) if not T.is_identity() else r for r in self.rows])
            except OrderBudgetExceeded as exc:
                last = exc
                continue
            self.basis, self.change = B, T
            self._back = T.inverse()
            return
        raise OrderBudgetExceeded(
            f"no Pommaret basis of the row module up to order {budget} "
            f"in {len(cands)} coordinate systems", budget) from last

    @classmethod
    def of(cls, A: OpMatrix, **kw) -> "RowModule":
        return cls(A.rows, A.m, A.n, **kw)

    def _to(self, row: Row) -> Row:
        return row if self.change.is_identity() else self.change.transform_row(row)

    def contains(self, row: Row) -> bool:
        return self.basis.contains(self._to(row))

    def normal_form(self, row: Row) -> Row:
        """Fully reduced remainder, written back in the original coordinates."""
        r = self.basis.reduce(self._to(row), full=True)
        return r if self.change.is_identity() else self._back.transform_row(r)

    def contains_all(self, rows: Sequence[Row]) -> bool:
        return all(self.contains(r) for r in rows)

    def add(self, rows: Sequence[Row]):
        """Enlarge the module in place; if the current coordinates stop being
        delta-regular the basis is rebuilt from scratch."""
        self.rows.extend(dict(r) for r in rows)
        try:
            self.basis.add([self._to(r) for r in rows])
        except OrderBudgetExceeded:
            self._build()


def in_row_module(row: Row, A: OpMatrix, **kw) -> bool:
    return RowModule.of(A, **kw).contains(row)


def row_module_contains(A: OpMatrix, B: OpMatrix, **kw) -> bool:
    """Every row of B lies in the row module of A."""
    if A.m != B.m:
        raise ShapeError(f"row modules live in D^{A.m} and D^{B.m}")
    if not B.rows or all(not r for r in B.rows):
        return True
    return RowModule.of(A, **kw).contains_all(B.rows)


def row_module_equal(A: OpMatrix, B: OpMatrix, **kw) -> bool:
    """Mutual reduction to zero of the two row modules."""
    return row_module_contains(A, B, **kw) and row_module_contains(B, A, **kw)


def sort_rows(rows: Sequence[Row]) -> List[Row]:
    """Deterministic order: by operator order, then by leading jet."""
    def key(r):
        lt = leading(r)
        return (row_order(r), jet_key(*lt) if lt else ())
    return sorted(rows, key=key)


def minimal_rows(rows: Sequence[Row], m: int, n: int, max_order: Optional[int] = None,
                 seed: int = 0, coords: str = "auto", tries: int = DEFAULT_TRIES) -> List[Row]:
    """Greedy generating subset: scan rows by (order, leading jet) and keep a
    row only when it is not in the module of the rows kept so far."""
    rows = [r for r in sort_rows(rows) if r]
    budget = _budget(rows, max_order)
    cands = candidate_changes(n, seed, tries if coords == "auto" else 0)
    last = None
    for T in cands:
        try:
            B = PommaretBasis(m, n, budget)
            kept = []
            for r in rows:
                rt = r if T.is_identity() else T.transform_row(r)
                if not B.contains(rt):
                    kept.append(r)
                    B.add([rt])
            return kept
        except OrderBudgetExceeded as exc:
            last = exc
            continue
    raise OrderBudgetExceeded(f"minimization needs order > {budget}", budget) from last
