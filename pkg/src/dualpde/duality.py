"""Differential rank, the double-duality torsion test and parametrizations."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import List, Optional, Sequence

from .algebra import kinv
from .cc import generate_cc, verify_cc
from .coords import CoordinateChange
from .errors import NotTorsionFree, PreconditionFailed, ShapeError
from .involutive import jet_key, leading
from .jets import CharacterTable, class_count
from .modules import RowModule, row_module_equal
from .operators import (
    DiffOp,
    OpMatrix,
    Row,
    adjoint,
    index_class,
    indices_of_order,
    matmul,
    row_derivative,
)

_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# differential rank


@dataclass
class RankCertificate:
    rank: int
    witness_rows: List[int]
    character_table: CharacterTable
    module_rank: int
    change: CoordinateChange


def _module_characters(M: RowModule) -> CharacterTable:
    """Characters of the module at q = top order of its Pommaret basis."""
    n, m = M.n, M.m
    elems = list(M.basis.index.items())
    q = max((sum(mu) for (_, mu) in M.basis.index), default=0)
    q = max(q, 1)
    beta = [0] * n
    for (k, mu), e in elems:
        s = sum(mu)
        c = e.cls
        t = q - s
        if t == 0:
            beta[(index_class(mu) if any(mu) else n) - 1] += 1
            continue
        # nu over variables 1..c of degree t, counted by class i
        for i in range(1, c + 1):
            beta[i - 1] += comb(t - 1 + c - i, c - i)
    alpha = tuple(m * class_count(n, q, i) - beta[i - 1] for i in range(1, n + 1))
    return CharacterTable(q, tuple(beta), alpha, sum(alpha), sum(i * a for i, a in enumerate(alpha, 1)))


def _rank_of_rows(rows, m, n, max_order=None, seed=0):
    if not any(rows):
        return 0, None
    M = RowModule(rows, m, n, max_order=max_order, seed=seed)
    return len(M.basis.class_n_unknowns()), M


def differential_rank(A: OpMatrix, max_order: Optional[int] = None, seed: int = 0) -> RankCertificate:
    """rk_D of the operator: m minus the rank of its cokernel, the latter read
    off as the last character alpha^n of a Pommaret basis."""
    rk, M = _rank_of_rows(A.rows, A.m, A.n, max_order, seed)
    if M is None:
        ct = CharacterTable(0, (0,) * A.n, tuple(A.m * class_count(A.n, 0, i) for i in range(1, A.n + 1)),
                            A.m, A.m * A.n)
        return RankCertificate(0, [], ct, A.m, CoordinateChange.identity(A.n))
    # greedy witness subset
    witness, cur = [], 0
    for i, r in enumerate(A.rows):
        if cur == rk:
            break
        if not r:
            continue
        trial, _ = _rank_of_rows([A.rows[j] for j in witness + [i]], A.m, A.n, max_order, seed)
        if trial > cur:
            witness.append(i)
            cur = trial
    return RankCertificate(rk, witness, _module_characters(M), A.m - rk, M.change)


def rank_additivity_check(A: OpMatrix, B: OpMatrix, max_order: Optional[int] = None,
                          seed: int = 0) -> bool:
    """For B generating the CC of A: rk coker(A) + rk coker(B) = m."""
    if B.m != A.p:
        raise ShapeError(f"cannot compose {B.shape} with {A.shape}")
    if not verify_cc(B, A):
        raise PreconditionFailed("B . A is not zero")
    cc = generate_cc(A, max_order, seed=seed).cc
    if not row_module_equal(cc, B, seed=seed):
        raise PreconditionFailed("B does not generate the compatibility conditions of A")
    rA = differential_rank(A, max_order, seed).rank
    rB = differential_rank(B, max_order, seed).rank if B.p else 0
    return (A.m - rA) + (B.m - rB) == A.m


# ---------------------------------------------------------------------------
# double duality


@dataclass
class TorsionGenerator:
    row: Row
    remainder: Row
    annihilator: Optional[DiffOp] = None

    @property
    def certified(self) -> bool:
        return self.annihilator is not None


@dataclass
class DualityReport:
    d1: OpMatrix
    ad_d1: OpMatrix
    ad_d: OpMatrix
    d: OpMatrix
    d1_prime: OpMatrix
    torsion_generators: List[TorsionGenerator]
    torsion_free: bool
    parametrizes: Optional[bool] = None
    notes: List[str] = field(default_factory=list)


def _named(A: OpMatrix, prefix: str) -> OpMatrix:
    return A.relabel(target_labels=[f"{prefix}{i + 1}" for i in range(A.p)])


def double_duality_test(D1: OpMatrix, max_order: Optional[int] = None, seed: int = 0,
                        certify: bool = True) -> DualityReport:
    """ad -> CC -> ad -> CC, then compare the last CC with D1."""
    ad_d1 = adjoint(D1)
    r1 = generate_cc(ad_d1, max_order, seed=seed)
    ad_d = _named(r1.cc, "a")
    d = adjoint(ad_d)
    d = d.relabel(source_labels=[f"p{i + 1}" for i in range(d.m)])
    r2 = generate_cc(d, max_order, seed=seed)
    d1_prime = r2.cc
    notes = r1.notes + r2.notes
    M = RowModule.of(D1, seed=seed)
    gens: List[TorsionGenerator] = []
    for r in d1_prime.rows:
        if M.contains(r):
            continue
        rem = M.normal_form(r)
        gens.append(TorsionGenerator(dict(r), rem))
        M.add([r])
    report = DualityReport(D1, ad_d1, ad_d, d, d1_prime, gens, not gens, notes=notes)
    if gens and certify:
        D1mod = RowModule.of(D1, seed=seed)
        for t in gens:
            t.annihilator = find_annihilator(t.row, D1mod, D1.n)
    if not gens:
        report.parametrizes = verify_cc(D1, d) and row_module_equal(d1_prime, D1, seed=seed)
    return report


def _nullspace(rows: List[dict]) -> List[dict]:
    """First left-kernel vector of sparse rows over K, or [] if independent."""
    piv = {}
    for i, r in enumerate(rows):
        v = dict(r)
        combo = {i: _ONE}
        while True:
            hits = [k for k in v if k in piv]
            if not hits:
                break
            hit = max(hits, key=lambda k: jet_key(*k))
            pv, pc = piv[hit]
            c = v[hit]
            _axpy(v, pv, -c)
            _axpy(combo, pc, -c)
        if not v:
            return [combo]
        lt = leading(v)
        inv = kinv(v[lt])
        piv[lt] = ({k: a * inv for k, a in v.items()}, {k: a * inv for k, a in combo.items()})
    return []


def _axpy(y, x, a):
    for k, v in x.items():
        s = y.get(k, 0) + a * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


def find_annihilator(t: Row, M: RowModule, n: int, bounds: Sequence[int] = (2, 4)) -> Optional[DiffOp]:
    """Nonzero scalar P of least order (within the bounds) with P.t in M.

    The normal form modulo a Pommaret basis is K-linear, so this is a kernel
    computation on the normal forms of d_mu t.
    """
    top = max(bounds)
    nfs, mus = [], []
    cache = {(0,) * n: t}

    def deriv(mu):
        if mu not in cache:
            i = max(j for j, a in enumerate(mu) if a)
            nu = list(mu)
            nu[i] -= 1
            cache[mu] = row_derivative(deriv(tuple(nu)), i)
        return cache[mu]

    for s in range(top + 1):
        for mu in indices_of_order(n, s):
            mus.append(mu)
            nfs.append(M.normal_form(deriv(mu)))
        if s in bounds or s < min(bounds):
            ker = _nullspace(nfs)
            if ker:
                c = ker[0]
                return DiffOp({mus[i]: a for i, a in c.items()}, n)
    return None


def apply_scalar(P: DiffOp, t: Row) -> Row:
    from .operators import DerivativeCache, act

    cache = DerivativeCache([t], P.n)
    return act(P.as_row(0), cache)


# ---------------------------------------------------------------------------
# parametrizations


def minimum_parametrization(D1: OpMatrix, max_order: Optional[int] = None, seed: int = 0,
                            report: Optional[DualityReport] = None) -> OpMatrix:
    """Parametrization of D1 by rk_D(ad_d) potentials.

    Rows of ad(d) are scanned preferring leading jets of high class (ties by
    row index) and kept while they raise the differential rank; the adjoint
    of the kept rows is returned.
    """
    rep = report or double_duality_test(D1, max_order, seed=seed, certify=False)
    if not rep.torsion_free:
        raise NotTorsionFree(f"{len(rep.torsion_generators)} torsion generator(s); "
                             "no parametrization exists")
    ad_d = rep.ad_d
    target = differential_rank(ad_d, max_order, seed).rank

    def pref(i):
        r = ad_d.rows[i]
        lt = leading(r)
        cls = index_class(lt[1]) if lt and any(lt[1]) else ad_d.n
        return (-cls, i)

    chosen, cur = [], 0
    for i in sorted(range(ad_d.p), key=pref):
        if cur == target:
            break
        trial, _ = _rank_of_rows([ad_d.rows[j] for j in chosen + [i]], ad_d.m, ad_d.n, max_order, seed)
        if trial > cur:
            chosen.append(i)
            cur = trial
    chosen.sort()
    sel = ad_d.select_rows(chosen)
    Dp = adjoint(sel)
    Dp = Dp.relabel(source_labels=[f"phi{i + 1}" for i in range(Dp.m)])
    if not verify_cc(D1, Dp):
        raise AssertionError("selected parametrization does not compose to zero")
    return Dp


def relative_parametrization_ricci(n: int, metric=None):
    """(ad(Ricci), constraint d_i lambda^{ri}) with the identities checked."""
    from .gallery import cauchy, einstein, get_metric, ricci, sym_labels, trace_reversal, _pos

    if n < 3:
        raise ShapeError("relative parametrization needs n >= 3")
    met = get_metric(metric, n)
    X = adjoint(ricci(n, met))
    X = X.relabel(source_labels=sym_labels("lam", n), target_labels=sym_labels("s", n))
    pos = _pos(n)
    rows = []
    for r in range(n):
        row = {}
        for i in range(n):
            e = [0] * n
            e[i] = 1
            key = (pos[(r, i)], tuple(e))
            row[key] = row.get(key, 0) + _ONE
        rows.append(row)
    constraint = OpMatrix(rows, X.m, n, X.source_labels,
                          [f"k{r + 1}" for r in range(n)], X.source_weights, None)
    if not verify_cc(cauchy(n, met), X):
        raise AssertionError("Cauchy . ad(Ricci) is not zero")
    if matmul(X, trace_reversal(n, met)).rows != einstein(n, met).rows:
        raise AssertionError("Einstein differs from ad(Ricci) . C")
    return X, constraint
