import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualpde.cc import generate_cc, verify_cc
from dualpde.errors import NotTorsionFree, PreconditionFailed, ShapeError
from dualpde.gallery import (
    airy,
    cauchy,
    contact_cc,
    contact_parametrization,
    contact_system,
    curl,
    einstein,
    grad,
    killing,
    ricci,
)
from dualpde.duality import (
    apply_scalar,
    differential_rank,
    double_duality_test,
    minimum_parametrization,
    rank_additivity_check,
    relative_parametrization_ricci,
)
from dualpde.modules import RowModule, row_module_equal
from dualpde.operators import OpMatrix, adjoint

from oracles import rank_oracle
from randops import random_operator

seeds = st.integers(0, 10**6)


def scaled(A, i, c):
    rows = [dict(r) for r in A.rows]
    rows[i] = {k: v * c for k, v in rows[i].items()}
    return OpMatrix(rows, A.m, A.n, A.source_labels, A.target_labels, A.source_weights)


# -- differential rank ---------------------------------------------------------


@pytest.mark.parametrize("make,expected", [
    (contact_system, 2),
    (lambda: einstein(4, "minkowski"), 6),
    (lambda: grad(3), 1),
    (curl, 2),
    (airy, 1),
    (lambda: cauchy(3), 3),
])
def test_rank_examples(make, expected):
    A = make()
    r = differential_rank(A)
    assert r.rank == expected
    assert r.module_rank == A.m - expected
    assert len(r.witness_rows) == expected


def test_rank_agrees_with_symbol_oracle():
    for A in (grad(3), curl(), airy(), cauchy(2), einstein(4, "minkowski")):
        assert differential_rank(A).rank == rank_oracle(A)


def test_rank_of_empty_operator():
    r = differential_rank(OpMatrix.zero(2, 3, 2))
    assert r.rank == 0 and r.module_rank == 3 and r.witness_rows == []


def test_rank_additivity():
    assert rank_additivity_check(killing(3), generate_cc(killing(3)).cc)
    assert rank_additivity_check(grad(3), curl())
    assert rank_additivity_check(contact_system(), contact_cc())
    with pytest.raises(PreconditionFailed):
        rank_additivity_check(curl(), curl())
    with pytest.raises(ShapeError):
        rank_additivity_check(grad(3), grad(3))


# -- double duality ------------------------------------------------------------


def test_einstein_is_not_parametrizable():
    rep = double_duality_test(einstein(4, "minkowski"))
    assert not rep.torsion_free
    assert len(rep.torsion_generators) == 10
    M = RowModule.of(einstein(4, "minkowski"))
    box = None
    for t in rep.torsion_generators:
        P = t.annihilator
        assert t.certified and P.order() == 2
        assert M.contains(apply_scalar(P, t.row))
        box = box or P
        assert P == box
    # d44 - d33 - d22 - d11 up to sign
    assert sorted(box.terms.values()) in ([-1, -1, -1, 1], [-1, 1, 1, 1])


def test_zeta_and_contact_are_parametrizable():
    for A in (contact_cc(), contact_system()):
        rep = double_duality_test(A)
        assert rep.torsion_free and rep.parametrizes
        assert verify_cc(A, rep.d)


def test_grad_module_is_torsion():
    rep = double_duality_test(grad(3))
    assert not rep.torsion_free
    assert all(t.certified and t.annihilator.order() == 1 for t in rep.torsion_generators)


def test_stress_equations_are_parametrizable():
    rep = double_duality_test(cauchy(3))
    assert rep.torsion_free and rep.parametrizes
    assert row_module_equal(rep.d1_prime, cauchy(3))


# -- parametrizations ------------------------------------------------------------


def test_airy_parametrizes_plane_stress():
    P = minimum_parametrization(cauchy(2))
    assert P.m == 1
    assert row_module_equal(P, airy())


def test_three_stress_potentials():
    P = minimum_parametrization(cauchy(3))
    assert P.shape == (6, 3)
    assert verify_cc(cauchy(3), P)


def test_contact_minimum_parametrization():
    P = minimum_parametrization(contact_system())
    assert P.m == 1
    assert row_module_equal(P, contact_parametrization())


def test_zeta_minimum_parametrization():
    # one potential cannot reach rank 2: the kept rows of ad(d) need two
    P = minimum_parametrization(contact_cc())
    assert verify_cc(contact_cc(), P)
    assert P.m == differential_rank(adjoint(P)).rank == 2


def test_torsion_blocks_parametrization():
    with pytest.raises(NotTorsionFree):
        minimum_parametrization(grad(3))


def test_relative_parametrization():
    X, K = relative_parametrization_ricci(4, "minkowski")
    assert X.shape == (10, 10) and K.shape == (4, 10)
    assert row_module_equal(X, adjoint(ricci(4, "minkowski")))
    assert verify_cc(cauchy(4, "minkowski"), X)
    with pytest.raises(ShapeError):
        relative_parametrization_ricci(2)


# -- properties ----------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_rank_is_adjoint_invariant(seed):
    A = random_operator(random.Random(seed))
    assert differential_rank(A).rank == differential_rank(adjoint(A)).rank


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_rank_matches_oracle(seed):
    A = random_operator(random.Random(seed), constant=True)
    assert differential_rank(A).rank == rank_oracle(A)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 5).map(Fraction) | st.integers(-5, -1).map(Fraction))
def test_witness_is_stable_under_rescaling(seed, c):
    rng = random.Random(seed)
    A = random_operator(rng)
    i = rng.randrange(A.p)
    assert differential_rank(scaled(A, i, c)).witness_rows == differential_rank(A).witness_rows


def _selected(P, ad_d):
    return sorted(ad_d.rows.index(r) for r in adjoint(P).rows)


def test_minimum_parametrization_stable_under_rescaling():
    rep = double_duality_test(cauchy(3))
    base = _selected(minimum_parametrization(cauchy(3), report=rep), rep.ad_d)
    for i in range(rep.ad_d.p):
        rep2 = double_duality_test(cauchy(3))
        rep2.ad_d = scaled(rep.ad_d, i, Fraction(-3, 2))
        P2 = minimum_parametrization(cauchy(3), report=rep2)
        assert _selected(P2, rep2.ad_d) == base
