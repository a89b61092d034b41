import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualpde.cc import build_sequence, euler_poincare, generate_cc, normalize_row, verify_cc
from dualpde.errors import OrderBudgetExceeded, ShapeError
from dualpde.gallery import (
    cauchy,
    contact_cc,
    contact_system,
    curl,
    div_op,
    einstein,
    grad,
    killing,
)
from dualpde.modules import RowModule, row_module_equal
from dualpde.operators import OpMatrix, matmul

from oracles import syzygy_oracle
from randops import random_operator

seeds = st.integers(0, 10**6)


def test_killing_plane_gives_single_riemann_row():
    r = generate_cc(killing(2))
    assert r.rows == 1 and r.order == 2
    row = r.cc.rows[0]
    # d22 Om11 + d11 Om22 - 2 d12 Om12 in (Om11, Om12, Om22)
    expected = {(0, (0, 2)): 1, (2, (2, 0)): 1, (1, (1, 1)): -2}
    assert row == expected


def test_contact_cc_is_zeta():
    r = generate_cc(contact_system())
    assert r.rows == 1 and r.order == 1
    assert row_module_equal(r.cc, contact_cc())


def test_grad_gives_curl():
    r = generate_cc(grad(3))
    assert r.rows == 3 and r.order == 1
    assert row_module_equal(r.cc, curl())


def test_killing_spacetime_chain():
    r = generate_cc(killing(4, "minkowski"))
    assert r.rows == 20 and r.order == 2
    b = generate_cc(r.cc)
    assert b.rows == 20 and b.order == 1


def test_verify_cc_examples():
    assert verify_cc(div_op(4, "minkowski"), einstein(4, "minkowski"))
    assert verify_cc(curl(), grad(3))
    assert not verify_cc(curl(), curl())
    # grad after curl does not even compose: 1 column against 3 rows
    with pytest.raises(ShapeError):
        verify_cc(grad(3), curl())


def test_generate_cc_respects_budget():
    # d11 u = d22 u = 0 completes only with d122 u at order 3
    A = OpMatrix([{(0, (2, 0)): 1}, {(0, (0, 2)): 1}], 1, 2)
    with pytest.raises(OrderBudgetExceeded):
        generate_cc(A, max_order=2, coords="identity")
    r = generate_cc(A, max_order=3)
    assert r.completion_order == 3 and r.rows == 1
    assert r.cc.rows[0] == {(0, (0, 2)): 1, (1, (2, 0)): -1}


def test_cc_rows_are_normalized():
    for row in generate_cc(killing(3)).cc.rows:
        assert normalize_row(row) == row
        assert all(v.denominator == 1 for v in row.values())


def test_sequences():
    s = build_sequence(killing(4, "minkowski"), 2)
    assert s.fiber_dims == [4, 10, 20, 20]
    assert s.orders == [1, 2, 1]
    assert s.is_complex()
    s = build_sequence(contact_system(), 1)
    assert s.fiber_dims == [3, 3, 1] and s.orders == [1, 1]
    s = build_sequence(einstein(4, "minkowski"), 1)
    assert s.fiber_dims == [10, 10, 4]
    assert row_module_equal(s.operators[1], div_op(4, "minkowski"))


def test_euler_poincare():
    assert euler_poincare([1, 3, 3, 1]) == 0
    assert euler_poincare([6, 20, 20, 10, 4]) == 0
    assert euler_poincare(build_sequence(contact_system(), 1)) == 3 - 3 + 1


def test_elasticity_cc_is_cauchy():
    assert row_module_equal(generate_cc(einstein(3)).cc, div_op(3))
    # Cauchy = ad(Killing) is onto: no conditions
    assert generate_cc(cauchy(3)).rows == 0


# -- properties ----------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_cc_is_sound(seed):
    A = random_operator(random.Random(seed))
    r = generate_cc(A)
    assert verify_cc(r.cc, A)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_cc_matches_syzygy_oracle(seed):
    A = random_operator(random.Random(seed), constant=True)
    r = generate_cc(A)
    s = max(r.order, r.completion_order)
    oracle = syzygy_oracle(A, s)
    if r.rows:
        M = RowModule(r.cc.rows, A.p, A.n)
        assert all(M.contains(row) for row in oracle)
    else:
        assert oracle == []
    if oracle:
        O = RowModule(oracle, A.p, A.n)
        assert all(O.contains(row) for row in r.cc.rows)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_sequences_compose_to_zero(seed):
    A = random_operator(random.Random(seed), constant=True)
    s = build_sequence(A, 2)
    for a, b in zip(s.operators, s.operators[1:]):
        if b.p:
            assert matmul(b, a).is_zero()
    assert s.fiber_dims[1:] == [op.p for op in s.operators]
