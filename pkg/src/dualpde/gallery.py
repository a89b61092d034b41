"""Named operators: elasticity and gravitation chains, stress functions,
the contact structure, grad/curl/div.

Conventions
-----------
* Symmetric 2-tensors are indexed by pairs i <= j in the order
  (11) < (12) < ... < (1n) < (22) < ... < (nn).
* A column holding Omega_ij (i < j) collects the coefficients of both
  Omega_ij and Omega_ji.  The natural pairing sum_{i,j} sigma^ij Omega_ij then
  has weight 2 on off-diagonal slots; these weights ride along as
  ``source_weights`` / ``target_weights`` and enter :func:`adjoint`.
* Minkowski metric is diag(1, 1, 1, -1) with x4 as time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

from .algebra import variable
from .errors import DegenerateMetric, ShapeError
from .operators import OpMatrix, _acc, adjoint, matmul, zero_index

_ONE = Fraction(1)
_HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# metrics and index helpers


def _inv(g):
    n = len(g)
    M = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(g)]
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            raise DegenerateMetric("metric is singular")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for i in range(n):
            if i != c and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return [r[n:] for r in M]


@dataclass(frozen=True)
class Metric:
    n: int
    g: Tuple[Tuple[Fraction, ...], ...]
    g_inv: Tuple[Tuple[Fraction, ...], ...]
    name: str = "custom"

    @classmethod
    def from_matrix(cls, g: Sequence[Sequence], name: str = "custom") -> "Metric":
        g = [[Fraction(v) for v in r] for r in g]
        n = len(g)
        if n < 1 or any(len(r) != n for r in g):
            raise DegenerateMetric("metric must be a square matrix")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise DegenerateMetric("metric must be symmetric")
        gi = _inv(g)
        return cls(n, tuple(map(tuple, g)), tuple(map(tuple, gi)), name)

    @classmethod
    def euclid(cls, n: int) -> "Metric":
        return cls.from_matrix([[int(i == j) for j in range(n)] for i in range(n)], "euclid")

    @classmethod
    def minkowski(cls, n: int = 4) -> "Metric":
        return cls.from_matrix(
            [[(-1 if i == n - 1 else 1) if i == j else 0 for j in range(n)] for i in range(n)],
            "minkowski")


def get_metric(metric, n: int) -> Metric:
    if metric is None or metric == "euclid":
        return Metric.euclid(n)
    if metric == "minkowski":
        return Metric.minkowski(n)
    if isinstance(metric, Metric):
        if metric.n != n:
            raise DegenerateMetric(f"metric has dimension {metric.n}, expected {n}")
        return metric
    return Metric.from_matrix(metric)


def sym_pairs(n: int) -> List[Tuple[int, int]]:
    """0-based (i, j), i <= j, in the standard order."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def sym_weights(n: int, metric=None) -> List[Fraction]:
    """Diagonal pairing on S2: 2 on off-diagonal slots, times w^ii w^jj when
    the metric is diagonal (indices of the dual tensor raised by the metric).
    Non-diagonal metrics keep the plain 1/2 weights."""
    W = [_ONE if i == j else Fraction(2) for i, j in sym_pairs(n)]
    if metric is None:
        return W
    gi = get_metric(metric, n).g_inv
    if any(gi[i][j] for i in range(n) for j in range(n) if i != j):
        return W
    return [w * gi[i][i] * gi[j][j] for w, (i, j) in zip(W, sym_pairs(n))]


def sym_labels(prefix: str, n: int) -> List[str]:
    return [f"{prefix}{i + 1}{j + 1}" for i, j in sym_pairs(n)]


def _pos(n: int):
    p = {}
    for a, (i, j) in enumerate(sym_pairs(n)):
        p[(i, j)] = a
        p[(j, i)] = a
    return p


def _d(n: int, *idx: int):
    """Multi-index for d_{idx...} (0-based variable indices)."""
    e = [0] * n
    for i in idx:
        e[i] += 1
    return tuple(e)


def _vec_labels(prefix: str, n: int) -> List[str]:
    return [f"{prefix}{i + 1}" for i in range(n)]


# ---------------------------------------------------------------------------
# elasticity / gravitation chain


def killing(n: int, metric=None) -> OpMatrix:
    """Omega_ij = w_rj d_i xi^r + w_ir d_j xi^r."""
    if n < 2:
        raise ShapeError("killing needs n >= 2")
    g = get_metric(metric, n).g
    rows = []
    for i, j in sym_pairs(n):
        row = {}
        for r in range(n):
            if g[r][j]:
                _acc(row, (r, _d(n, i)), g[r][j])
            if g[i][r]:
                _acc(row, (r, _d(n, j)), g[i][r])
        rows.append(row)
    return OpMatrix(rows, n, n, _vec_labels("xi", n), sym_labels("Om", n),
                    None, sym_weights(n, metric))


def cauchy(n: int, metric=None) -> OpMatrix:
    """Stress equations: the formal adjoint of the Killing operator."""
    A = adjoint(killing(n, metric))
    return A.relabel(source_labels=sym_labels("s", n), target_labels=_vec_labels("f", n))


def ricci(n: int, metric=None) -> OpMatrix:
    """2 R_ij = w^rs (d_rs O_ij + d_ij O_rs - d_ri O_sj - d_sj O_ri)."""
    if n < 2:
        raise ShapeError("ricci needs n >= 2")
    gi = get_metric(metric, n).g_inv
    pos = _pos(n)
    rows = []
    for i, j in sym_pairs(n):
        row = {}
        for r in range(n):
            for s in range(n):
                w = gi[r][s]
                if not w:
                    continue
                w = w * _HALF
                _acc(row, (pos[(i, j)], _d(n, r, s)), w)
                _acc(row, (pos[(r, s)], _d(n, i, j)), w)
                _acc(row, (pos[(s, j)], _d(n, r, i)), -w)
                _acc(row, (pos[(r, i)], _d(n, s, j)), -w)
        rows.append(row)
    W = sym_weights(n, metric)
    return OpMatrix(rows, len(W), n, sym_labels("Om", n), sym_labels("R", n), W, W)


def trace_reversal(n: int, metric=None) -> OpMatrix:
    """C: Omega -> Omega - 1/2 w tr(Omega), tr(Omega) = w^kl Omega_kl."""
    if n < 3:
        raise ShapeError("trace reversal is only used for n >= 3")
    met = get_metric(metric, n)
    g, gi = met.g, met.g_inv
    W = sym_weights(n, metric)
    T = [_ONE if i == j else Fraction(2) for i, j in sym_pairs(n)]
    pairs = sym_pairs(n)
    z = zero_index(n)
    rows = []
    for a, (i, j) in enumerate(pairs):
        row = {(a, z): _ONE}
        for b, (k, l) in enumerate(pairs):
            c = -_HALF * g[i][j] * T[b] * gi[k][l]
            if c:
                _acc(row, (b, z), c)
        rows.append(row)
    return OpMatrix(rows, len(W), n, sym_labels("Om", n), sym_labels("Om", n), W, W)


def einstein(n: int, metric=None) -> OpMatrix:
    """E_ij = R_ij - 1/2 w_ij tr(R)."""
    if n < 3:
        raise ShapeError("einstein needs n >= 3")
    E = matmul(trace_reversal(n, metric), ricci(n, metric))
    return E.relabel(target_labels=sym_labels("E", n))


def div_op(n: int, metric=None) -> OpMatrix:
    """(div E)_j = w^rs d_r E_sj."""
    gi = get_metric(metric, n).g_inv
    pos = _pos(n)
    rows = []
    for j in range(n):
        row = {}
        for r in range(n):
            for s in range(n):
                if gi[r][s]:
                    _acc(row, (pos[(s, j)], _d(n, r)), gi[r][s])
        rows.append(row)
    return OpMatrix(rows, len(sym_pairs(n)), n, sym_labels("E", n),
                    _vec_labels("b", n), sym_weights(n, metric), None)


def _riemann_rows(n: int):
    """Pairs of pairs (A, B), A <= B, minus one cyclic relation per 4-subset."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    drop = {((i, l), (j, k)) for i, j, k, l in combinations(range(n), 4)}
    out = []
    for a in range(len(pairs)):
        for b in range(a, len(pairs)):
            if (pairs[a], pairs[b]) not in drop:
                out.append((pairs[a], pairs[b]))
    return out


def _riemann_component(n: int, pos, i, j, k, l):
    """2 R_ijkl = d_ik O_jl + d_jl O_ik - d_jk O_il - d_il O_jk."""
    row = {}
    for (a, b), (c, d), s in (((i, k), (j, l), 1), ((j, l), (i, k), 1),
                              ((j, k), (i, l), -1), ((i, l), (j, k), -1)):
        _acc(row, (pos[(c, d)], _d(n, a, b)), Fraction(s, 2))
    return row


# n = 3 rows are indexed by the Hodge dual phi_ab of R_ijkl
_DUAL3 = [
    ((1, 2, 1, 2), 1),   # phi11 <-> R2323
    ((1, 2, 0, 2), -1),  # phi12 <-> -R2313
    ((1, 2, 0, 1), 1),   # phi13 <-> R2312
    ((0, 2, 0, 2), 1),   # phi22 <-> R1313
    ((0, 2, 0, 1), -1),  # phi23 <-> -R1312
    ((0, 1, 0, 1), 1),   # phi33 <-> R1212
]


def riemann(n: int, metric=None) -> OpMatrix:
    """Linearized Riemann operator on Omega (independent components only)."""
    if n < 2:
        raise ShapeError("riemann needs n >= 2")
    pos = _pos(n)
    W = sym_weights(n, metric)
    if n == 3:
        rows = []
        for (i, j, k, l), s in _DUAL3:
            row = _riemann_component(n, pos, i, j, k, l)
            rows.append({key: v * s for key, v in row.items()})
        return OpMatrix(rows, len(W), n, sym_labels("Om", n), sym_labels("phi", n), W, W)
    rows, labels = [], []
    for (i, j), (k, l) in _riemann_rows(n):
        rows.append(_riemann_component(n, pos, i, j, k, l))
        labels.append(f"R{i + 1}{j + 1}{k + 1}{l + 1}")
    return OpMatrix(rows, len(W), n, sym_labels("Om", n), labels, W, None)


# ---------------------------------------------------------------------------
# stress functions (n = 2, 3, Euclidean)


def airy() -> OpMatrix:
    """sigma11 = d22 phi, sigma12 = -d12 phi, sigma22 = d11 phi."""
    n = 2
    rows = [{(0, _d(n, 1, 1)): _ONE}, {(0, _d(n, 0, 1)): -_ONE}, {(0, _d(n, 0, 0)): _ONE}]
    return OpMatrix(rows, 1, n, ["phi"], sym_labels("s", n), None, sym_weights(n))


# rows sigma11..sigma33, columns phi11, phi12, phi13, phi22, phi23, phi33
_BELTRAMI = [
    [None, None, None, ((2, 2), 1), ((1, 2), -2), ((1, 1), 1)],
    [None, ((2, 2), -1), ((1, 2), 1), None, ((0, 2), 1), ((0, 1), -1)],
    [None, ((1, 2), 1), ((1, 1), -1), ((0, 2), -1), ((0, 1), 1), None],
    [((2, 2), 1), None, ((0, 2), -2), None, None, ((0, 0), 1)],
    [((1, 2), -1), ((0, 2), 1), ((0, 1), 1), None, ((0, 0), -1), None],
    [((1, 1), 1), ((0, 1), -2), None, ((0, 0), 1), None, None],
]


def beltrami() -> OpMatrix:
    n = 3
    rows = []
    for line in _BELTRAMI:
        row = {}
        for k, cell in enumerate(line):
            if cell:
                (a, b), c = cell
                row[(k, _d(n, a, b))] = Fraction(c)
        rows.append(row)
    W = sym_weights(n)
    return OpMatrix(rows, 6, n, sym_labels("phi", n), sym_labels("s", n), W, W)


def maxwell() -> OpMatrix:
    """Beltrami with only phi11 = A, phi22 = B, phi33 = C kept."""
    B = beltrami().select_cols([0, 3, 5])
    return B.relabel(source_labels=["A", "B", "C"], source_weights=[1, 1, 1])


def morera() -> OpMatrix:
    """Beltrami with only phi23 = L, phi13 = M, phi12 = N kept."""
    B = beltrami().select_cols([4, 2, 1])
    return B.relabel(source_labels=["L", "M", "N"], source_weights=[1, 1, 1])


# ---------------------------------------------------------------------------
# contact structure (n = 3)


def contact_system() -> OpMatrix:
    """Infinitesimal contact transformations of dx1 - x3 dx2."""
    n = 3
    x3 = variable(3, n)
    d1, d2, d3 = _d(n, 0), _d(n, 1), _d(n, 2)
    z = zero_index(n)
    rows = [
        {(0, d1): -_ONE, (1, d2): _ONE, (1, d1): x3, (2, d3): _ONE},
        {(0, d2): _ONE, (0, d1): x3, (2, z): -_ONE},
        {(0, d3): _ONE, (1, z): _ONE},
    ]
    return OpMatrix(rows, 3, n, _vec_labels("xi", n), _vec_labels("eta", n))


def contact_parametrization() -> OpMatrix:
    """xi = (phi, -d3 phi, d2 phi + x3 d1 phi)."""
    n = 3
    x3 = variable(3, n)
    rows = [
        {(0, zero_index(n)): _ONE},
        {(0, _d(n, 2)): -_ONE},
        {(0, _d(n, 1)): _ONE, (0, _d(n, 0)): x3},
    ]
    return OpMatrix(rows, 1, n, ["phi"], _vec_labels("xi", n))


def contact_cc() -> OpMatrix:
    """zeta = d3 eta2 - d2 eta3 - x3 d1 eta3 + eta1."""
    n = 3
    x3 = variable(3, n)
    row = {(1, _d(n, 2)): _ONE, (2, _d(n, 1)): -_ONE, (2, _d(n, 0)): -x3, (0, zero_index(n)): _ONE}
    return OpMatrix([row], 3, n, _vec_labels("eta", n), ["zeta"])


# ---------------------------------------------------------------------------
# vector calculus


def grad(n: int = 3) -> OpMatrix:
    rows = [{(0, _d(n, i)): _ONE} for i in range(n)]
    return OpMatrix(rows, 1, n, ["u"], _vec_labels("g", n))


def curl() -> OpMatrix:
    n = 3
    rows = [
        {(1, _d(n, 2)): -_ONE, (2, _d(n, 1)): _ONE},
        {(0, _d(n, 2)): _ONE, (2, _d(n, 0)): -_ONE},
        {(0, _d(n, 1)): -_ONE, (1, _d(n, 0)): _ONE},
    ]
    return OpMatrix(rows, 3, n, _vec_labels("v", n), _vec_labels("c", n))


def divergence(n: int = 3) -> OpMatrix:
    """Vector divergence d_i v^i."""
    row = {(i, _d(n, i)): _ONE for i in range(n)}
    return OpMatrix([row], n, n, _vec_labels("w", n), ["dv"])


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimFormulas:
    n: int
    killing_target: int
    riemann: int
    bianchi: int
    ricci_vs_riemann_gap: int


def dim_formulas(n: int) -> DimFormulas:
    if n < 2:
        raise ShapeError("dim_formulas needs n >= 2")
    return DimFormulas(
        n,
        n * (n + 1) // 2,
        n * n * (n * n - 1) // 12,
        n * n * (n * n - 1) * (n - 2) // 24,
        n * (n + 1) * (n + 2) * (n - 3) // 12,
    )


GALLERY = {
    "killing": lambda n, metric: killing(n, metric),
    "riemann": lambda n, metric: riemann(n, metric),
    "ricci": lambda n, metric: ricci(n, metric),
    "einstein": lambda n, metric: einstein(n, metric),
    "div": lambda n, metric: div_op(n, metric),
    "cauchy": lambda n, metric: cauchy(n, metric),
    "airy": lambda n, metric: airy(),
    "beltrami": lambda n, metric: beltrami(),
    "maxwell": lambda n, metric: maxwell(),
    "morera": lambda n, metric: morera(),
    "contact": lambda n, metric: contact_system(),
    "contact-param": lambda n, metric: contact_parametrization(),
    "contact-cc": lambda n, metric: contact_cc(),
    "grad": lambda n, metric: grad(n),
    "curl": lambda n, metric: curl(),
    "vdiv": lambda n, metric: divergence(n),
}


# gravitation lives in space-time; everything else defaults to space
DEFAULT_DIMS = {"einstein": 4, "ricci": 4}


def default_dimension(name: str) -> int:
    return DEFAULT_DIMS.get(name, 3)


def gallery(name: str, n: Optional[int] = None, metric=None) -> OpMatrix:
    try:
        ctor = GALLERY[name]
    except KeyError:
        raise KeyError(f"unknown gallery operator {name!r}") from None
    return ctor(default_dimension(name) if n is None else n, metric)
