"""Pommaret bases of row modules over D = K[d1..dn].

Elements are operator rows ``{(k, mu): a}``.  Optionally each element
carries its certificate inline: keys with k >= m describe the element as an
operator combination of the original generators (generator t sits at
unknown index m + t).  Reductions then update row and certificate at once,
and a row that reduces to zero leaves behind a syzygy.

Leading jets are compared with :func:`jet_key`: higher order first, then
higher class, then reverse lexicographic on mu, then smaller unknown index.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .algebra import kinv
from .errors import OrderBudgetExceeded
from .operators import DerivativeCache, Row, bump, index_class

_ONE = Fraction(1)


def jet_key(k: int, mu) -> tuple:
    """Larger key = larger jet."""
    return (sum(mu),) + tuple(-a for a in mu) + (-k,)


def _heap_key(k, mu):
    # min-heap key: smallest value = largest jet
    return (-sum(mu),) + tuple(mu) + (k,)


def _heap_decode(h):
    return h[-1], tuple(h[1:-1])


def leading(row: Row, m: Optional[int] = None):
    """Leading (k, mu) among keys with k < m (all keys when m is None)."""
    best = None
    bk = None
    for key in row:
        k, mu = key
        if m is not None and k >= m:
            continue
        kk = jet_key(k, mu)
        if bk is None or kk > bk:
            best, bk = key, kk
    return best


def split(row: Row, m: int) -> Tuple[Row, Row]:
    """(module part, certificate part) of an extended row; the certificate
    part is re-indexed so generator t has unknown index t."""
    a, c = {}, {}
    for (k, mu), v in row.items():
        if k < m:
            a[(k, mu)] = v
        else:
            c[(k - m, mu)] = v
    return a, c


def make_monic(row: Row, lt) -> Row:
    c = row[lt]
    if c == 1:
        return row
    inv = kinv(c)
    return {key: v * inv for key, v in row.items()}


def pommaret_divides(mu, nu) -> bool:
    """True when nu lies in the Pommaret cone of mu."""
    c = index_class(mu) - 1 if any(mu) else len(mu) - 1
    if not any(mu):
        return True
    for j in range(c + 1, len(mu)):
        if nu[j] != mu[j]:
            return False
    return nu[c] >= mu[c]


class _Elem:
    __slots__ = ("row", "lt", "cls", "cache", "serial")

    def __init__(self, row: Row, lt, serial: int):
        self.row = row
        self.lt = lt
        mu = lt[1]
        self.cls = index_class(mu) if any(mu) else len(mu)
        self.cache = DerivativeCache([row], len(mu))
        self.serial = serial

    def prolong(self, nu) -> Row:
        return self.cache.get(0, nu)

    def nonmultiplicative(self, n: int) -> range:
        # 0-based indices of x_{cls+1} .. x_n
        return range(self.cls, n)


class PommaretBasis:
    """Incrementally completed Pommaret basis of a submodule of D^m.

    ``ncert`` generators are tracked by certificates when ``track`` is set.
    """

    def __init__(self, m: int, n: int, max_order: int, track: bool = False, ncert: int = 0):
        self.m = m
        self.n = n
        self.max_order = max_order
        self.track = track
        self.ncert = ncert
        self.index: Dict[tuple, _Elem] = {}
        self._queue: List = []
        self._serial = 0
        self.generators: List[Row] = []
        self.syzygies: List[Row] = []

    # -- bookkeeping ------------------------------------------------------

    @property
    def elements(self) -> List[_Elem]:
        return sorted(self.index.values(), key=lambda e: jet_key(*e.lt), reverse=True)

    def _push(self, row: Row):
        lt = leading(row, self.m)
        if lt is None:
            if self.track:
                cert = {key: v for key, v in row.items() if key[0] >= self.m}
                if cert:
                    self.syzygies.append(cert)
            return
        self._serial += 1
        heapq.heappush(self._queue, (jet_key(*lt), self._serial, row))

    def add_generator(self, row: Row):
        """Queue a generator; with tracking it gets the next certificate slot."""
        row = {key: v for key, v in row.items() if key[0] < self.m}
        if self.track:
            t = len(self.generators)
            if t >= self.ncert:
                raise ValueError("more generators than certificate slots")
            row[(self.m + t, (0,) * self.n)] = _ONE
        self.generators.append(row)
        self._push(row)

    # -- divisor search and normal forms -------------------------------------

    def find_divisor(self, k: int, nu):
        idx = self.index
        n = self.n
        g = idx.get((k, (0,) * n))
        if g is not None:
            return g, nu
        for c in range(n):
            a_max = nu[c]
            if not a_max:
                continue
            tail = nu[c + 1:]
            head = (0,) * c
            for a in range(1, a_max + 1):
                g = idx.get((k, head + (a,) + tail))
                if g is not None:
                    mu = g.lt[1]
                    return g, tuple(x - y for x, y in zip(nu, mu))
        return None, None

    def reduce(self, row: Row, full: bool = True) -> Row:
        """Involutive normal form.  With ``full`` every term is reduced, else
        only until the leading jet is irreducible."""
        m = self.m
        f = dict(row)
        if not self.track:
            for key in [key for key in f if key[0] >= m]:
                del f[key]
        heap = [_heap_key(k, mu) for (k, mu) in f if k < m]
        heapq.heapify(heap)
        rem: Row = {}
        while heap:
            h = heapq.heappop(heap)
            key = _heap_decode(h)
            c = f.get(key)
            if c is None:
                continue
            g, nu = self.find_divisor(*key)
            if g is None:
                rem[key] = f.pop(key)
                if not full:
                    break
                continue
            for k2, v in g.prolong(nu).items():
                if not self.track and k2[0] >= m:
                    continue
                old = f.get(k2)
                t = c * v
                if old is None:
                    f[k2] = -t
                    if k2[0] < m:
                        heapq.heappush(heap, _heap_key(*k2))
                else:
                    s = old - t
                    if s:
                        f[k2] = s
                    else:
                        del f[k2]
        rem.update(f)
        return rem

    def contains(self, row: Row) -> bool:
        r = self.reduce({key: v for key, v in row.items() if key[0] < self.m}, full=False)
        return not any(k < self.m for k, _ in r)

    # -- completion -------------------------------------------------------------

    def _insert(self, row: Row):
        lt = leading(row, self.m)
        if sum(lt[1]) > self.max_order:
            raise OrderBudgetExceeded(
                f"involutive completion needs order > {self.max_order}", self.max_order)
        row = make_monic(row, lt)
        self._serial += 1
        e = _Elem(row, lt, self._serial)
        # elements whose leading jet falls in the new cone go back to the queue
        k, mu = lt
        for key in list(self.index):
            if key[0] == k and pommaret_divides(mu, key[1]):
                old = self.index.pop(key)
                self._push(old.row)
        self.index[lt] = e
        for j in e.nonmultiplicative(self.n):
            self._push(e.cache.get(0, bump((0,) * self.n, j)))

    def _drain(self):
        while self._queue:
            _, _, row = heapq.heappop(self._queue)
            r = self.reduce(row, full=False)
            if leading(r, self.m) is None:
                if self.track:
                    cert = {key: v for key, v in r.items() if key[0] >= self.m}
                    if cert:
                        self.syzygies.append(cert)
                continue
            self._insert(r)

    def complete(self) -> "PommaretBasis":
        """Run until every non-multiplicative prolongation reduces to zero."""
        while True:
            self._drain()
            dirty = False
            for e in self.elements:
                for j in e.nonmultiplicative(self.n):
                    r = self.reduce(e.prolong(bump((0,) * self.n, j)), full=False)
                    if leading(r, self.m) is not None:
                        self._push(r)
                        dirty = True
            if not dirty:
                return self

    def add(self, rows: Iterable[Row]) -> "PommaretBasis":
        for r in rows:
            self.add_generator(r)
        return self.complete()

    # -- outputs ------------------------------------------------------------------

    def basis_rows(self) -> List[Row]:
        return [split(e.row, self.m)[0] for e in self.elements]

    def certificates(self) -> List[Row]:
        return [split(e.row, self.m)[1] for e in self.elements]

    def leading_jets(self) -> List[tuple]:
        return [e.lt for e in self.elements]

    def syzygy_rows(self) -> List[Row]:
        """Certificates of zero: syzygies among the tracked generators.

        Taken from all non-multiplicative prolongations of the final basis plus
        the normal forms of the generators; together they generate the whole
        syzygy module.
        """
        if not self.track:
            raise ValueError("syzygies need certificate tracking")
        m = self.m
        out = []
        for e in self.elements:
            for j in e.nonmultiplicative(self.n):
                r = self.reduce(e.prolong(bump((0,) * self.n, j)), full=False)
                mod, cert = split(r, m)
                assert not mod
                if cert:
                    out.append(cert)
        for t, g in enumerate(self.generators):
            r = self.reduce(g, full=False)
            mod, cert = split(r, m)
            assert not mod
            if cert:
                out.append(cert)
        return out

    def max_basis_order(self) -> int:
        return max((sum(e.lt[1]) for e in self.index.values()), default=-1)

    def class_n_unknowns(self) -> set:
        """Unknowns owning a basis element whose leading jet is a pure power
        of d_n (including order zero)."""
        n = self.n
        out = set()
        for k, mu in self.index:
            if not any(mu[:n - 1]):
                out.add(k)
        return out


def module_basis(rows: Sequence[Row], m: int, n: int, max_order: int,
                 track: bool = False) -> PommaretBasis:
    B = PommaretBasis(m, n, max_order, track=track, ncert=len(rows) if track else 0)
    return B.add(rows)
