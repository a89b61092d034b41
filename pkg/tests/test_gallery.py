from fractions import Fraction

import pytest

from dualpde.cc import generate_cc, verify_cc
from dualpde.errors import DegenerateMetric, ShapeError
from dualpde.gallery import (
    GALLERY,
    Metric,
    airy,
    beltrami,
    cauchy,
    contact_parametrization,
    contact_system,
    dim_formulas,
    div_op,
    einstein,
    gallery,
    killing,
    maxwell,
    morera,
    ricci,
    riemann,
    sym_labels,
    sym_weights,
    trace_reversal,
)
from dualpde.modules import row_module_equal
from dualpde.operators import OpMatrix, adjoint, matmul

F = Fraction


def test_shapes():
    assert killing(2).shape == (3, 2)
    assert killing(4, "minkowski").shape == (10, 4)
    assert ricci(3).shape == einstein(3).shape == (6, 6)
    assert div_op(4).shape == (4, 10)
    assert (airy().shape, beltrami().shape) == ((3, 1), (6, 6))
    assert maxwell().shape == morera().shape == (6, 3)
    assert riemann(4).shape == (20, 10)


def test_sym_ordering_and_weights():
    assert sym_labels("s", 3) == ["s11", "s12", "s13", "s22", "s23", "s33"]
    assert sym_weights(3) == [1, 2, 2, 1, 2, 1]
    assert sym_weights(4, "minkowski")[3] == -2  # (14) slot


def test_einstein_plane_rows():
    E = einstein(3)
    # 2 E11 = -(d22 O33 + d33 O22 - 2 d23 O23) for the stated Ricci formula
    assert {k: 2 * v for k, v in E.rows[0].items()} == {
        (5, (0, 2, 0)): -1, (3, (0, 0, 2)): -1, (4, (0, 1, 1)): 2}
    # 2 E12 = d33 O12 + d12 O33 - d13 O23 - d23 O13
    assert {k: 2 * v for k, v in E.rows[1].items()} == {
        (1, (0, 0, 2)): 1, (5, (1, 1, 0)): 1, (4, (1, 0, 1)): -1, (2, (0, 1, 1)): -1}


def test_einstein_time_derivatives_in_e33():
    for metric, w44 in (("minkowski", -1), ("euclid", 1)):
        E = einstein(4, metric)
        row = E.rows[sym_labels("E", 4).index("E33")]
        tt = {k: v for k, v in row.items() if k[1] == (0, 0, 0, 2)}
        assert tt == {(0, (0, 0, 0, 2)): F(-w44, 2), (4, (0, 0, 0, 2)): F(-w44, 2)}


def test_einstein_is_trace_reversed_ricci():
    for n in (3, 4):
        for metric in ("euclid", "minkowski") if n == 4 else ("euclid",):
            E = einstein(n, metric)
            assert matmul(trace_reversal(n, metric), ricci(n, metric)).rows == E.rows
            assert row_module_equal(adjoint(E), E)
            assert verify_cc(div_op(n, metric), E)


def test_cauchy_is_adjoint_of_killing():
    assert cauchy(3).rows == adjoint(killing(3)).rows
    # -2 d_r sigma^{rs} with the S2 weights folded in
    assert cauchy(3).rows[0] == {(0, (1, 0, 0)): -2, (1, (0, 1, 0)): -2, (2, (0, 0, 1)): -2}
    stress = OpMatrix([{(0, (1, 0)): 1, (1, (0, 1)): 1}, {(1, (1, 0)): 1, (2, (0, 1)): 1}], 3, 2)
    assert row_module_equal(cauchy(2), stress)


def test_beltrami_from_riemann():
    B = beltrami()
    assert row_module_equal(adjoint(riemann(3)), B)
    rows = [{k: v * s for k, v in r.items()} for s, r in zip([1, 2, 2, 1, 2, 1], B.rows)]
    Bs = OpMatrix(rows, 6, 3)
    assert adjoint(Bs) == Bs


def test_airy_from_plane_riemann():
    cc = generate_cc(killing(2)).cc
    assert row_module_equal(adjoint(cc), airy())


def test_maxwell_and_morera_are_restrictions():
    B = beltrami()
    for op, cols in ((maxwell(), [0, 3, 5]), (morera(), [4, 2, 1])):
        for r, full in zip(op.rows, B.rows):
            assert r == {(cols.index(k), mu): v for (k, mu), v in full.items() if k in cols}


def test_contact_pair():
    assert matmul(contact_system(), contact_parametrization()).is_zero()
    assert adjoint(contact_system()).rows == (-contact_system()).rows


@pytest.mark.parametrize("n,riem,bian,gap", [(2, 1, 0, -2), (3, 6, 3, 0), (4, 20, 20, 10)])
def test_dim_formulas(n, riem, bian, gap):
    d = dim_formulas(n)
    assert (d.riemann, d.bianchi, d.ricci_vs_riemann_gap) == (riem, bian, gap)
    assert d.killing_target == n * (n + 1) // 2


def test_metric_validation():
    with pytest.raises(DegenerateMetric):
        Metric.from_matrix([[1, 0], [0, 0]])
    with pytest.raises(DegenerateMetric):
        Metric.from_matrix([[1, 2], [3, 1]])
    with pytest.raises(ShapeError):
        einstein(2)
    with pytest.raises(KeyError):
        gallery("nope")


def test_every_gallery_entry_builds():
    for name in GALLERY:
        A = gallery(name, 3)
        assert A.p >= 1 and A.m >= 1
