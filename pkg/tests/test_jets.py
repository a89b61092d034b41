import random
import warnings
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from dualpde.algebra import partial, variable
from dualpde.coords import CoordinateChange
from dualpde.errors import DeltaIrregularWarning, DomainError
from dualpde.gallery import (
    airy,
    beltrami,
    contact_parametrization,
    contact_system,
    einstein,
    maxwell,
    morera,
)
from dualpde.involutive import jet_key
from dualpde.jets import (
    JetSystem,
    change_coordinates,
    characters,
    complete_to_involution,
    dim_symbol_next,
    find_delta_regular,
    is_involutive,
    janet_tabular,
    new_lower_order_rows,
    prolong,
    project,
    spencer_apply,
    spencer_forms,
    symbol_rank,
)
from dualpde.modules import RowModule
from dualpde.operators import OpMatrix, apply, indices_of_order

from oracles import coeff_to_sympy
from randops import random_operator

seeds = st.integers(0, 10**6)


def system(A):
    return JetSystem.from_operator(A)


# -- contact structure -------------------------------------------------------


def test_contact_system_shape():
    S = system(contact_system())
    assert len(S.rows) == 3 and S.num_jets() == 12 and S.dim() == 9


def test_contact_characters():
    ct = characters(system(contact_system()))
    assert ct.alpha == (3, 2, 1)
    assert ct.beta == (0, 1, 2)
    assert ct.dim_g_q == 6


def test_contact_is_involutive():
    S = system(contact_system())
    assert is_involutive(S)
    assert new_lower_order_rows(S) == 0
    assert dim_symbol_next(S) == characters(S).dim_g_q1 == 10


def test_contact_tabular():
    tab = janet_tabular(system(contact_system()))
    assert [r.cls for r in tab.rows] == [3, 3, 2]
    assert tab.render()[-1].endswith("1 2 •")


def test_contact_subsystem_needs_new_coordinates():
    # rows eta1, eta2 alone: not involutive as given, involutive after a
    # unipotent change; eta3 is not a consequence of them
    C = contact_system()
    sub = C.select_rows([0, 1])
    S = system(sub)
    assert not is_involutive(S)
    assert new_lower_order_rows(S) == 0
    _, S2 = find_delta_regular(S)
    assert is_involutive(S2)
    assert not RowModule.of(sub).contains(C.rows[2])
    x1, x2, x3 = (variable(i, 3) for i in (1, 2, 3))
    eta = apply(C, [0, x1 - x2 * x3, 0])
    assert eta[0] == 0 and eta[1] == 0 and eta[2] != 0


def test_parametrization_completes_to_full_first_jet():
    S, ct = complete_to_involution(system(contact_parametrization()))
    assert S.q == 1 and len(S.rows) == 4 and S.dim() == 0
    assert ct.alpha == (0, 0, 0)


# -- small systems -------------------------------------------------------------


def test_zero_matrix_has_no_rows():
    S = system(OpMatrix.zero(1, 2, 3))
    assert S.rows == [] and S.dim() == 2


def test_single_first_order_equation_prolonged():
    S = prolong(system(OpMatrix([{(0, (0, 1)): 1}], 1, 2)), 1)
    assert sorted(S.leading_jets()) == sorted([(0, (0, 1)), (0, (1, 1)), (0, (0, 2))])
    assert S.dim() == 3


def test_airy_leading_jets_and_tabular():
    S = system(airy())
    assert S.leading_jets() == [(0, (0, 2)), (0, (1, 1)), (0, (2, 0))]
    assert janet_tabular(S).render() == ["r1: 1 2", "r2: 1 •", "r3: 1 •"]
    assert S.dim() == 3


def test_negative_prolongation_rejected():
    with pytest.raises(DomainError):
        prolong(system(airy()), -1)
    with pytest.raises(DomainError):
        project(system(airy()), 3)


# -- elasticity and gravitation -----------------------------------------------


def test_beltrami():
    S = system(beltrami())
    ct = characters(S)
    assert ct.alpha == (18, 9, 3) and ct.dim_g_q == 30
    assert dim_symbol_next(S) == 45 == ct.dim_g_q1
    tab = janet_tabular(S)
    assert [r.cls for r in tab.rows] == [3, 3, 3, 2, 2, 2]


@pytest.mark.parametrize("make", [maxwell, morera])
def test_stress_restrictions_need_delta_regular_coordinates(make):
    S = system(make())
    assert not is_involutive(S)
    T, S2 = find_delta_regular(S)
    assert not T.is_identity()
    ct = characters(S2)
    assert is_involutive(S2)
    assert ct.alpha == (9, 3, 0) and ct.dim_g_q == 12
    assert ct.beta[2] == 3
    tab = janet_tabular(S2)
    assert sum(r.cls == 3 for r in tab.rows) == 3 and sum(r.cls == 2 for r in tab.rows) == 3


def test_increasing_characters_warn():
    # d1 u = 0 has alpha = (0, 1); a shear x2 -> x2 + c x1 repairs it
    S = system(OpMatrix([{(0, (1, 0)): 1}], 1, 2))
    with pytest.warns(DeltaIrregularWarning):
        janet_tabular(S)
    _, S2 = find_delta_regular(S)
    assert characters(S2).alpha == (1, 0)


def test_find_delta_regular_keeps_good_coordinates():
    T, _ = find_delta_regular(system(beltrami()))
    assert T.is_identity()
    T, _ = find_delta_regular(system(maxwell()), tries=0)
    assert T.is_identity()


def test_einstein_characters():
    S = system(einstein(4, "minkowski"))
    ct = characters(S)
    assert ct.alpha == (40, 30, 16, 4)
    assert ct.beta == (0, 0, 4, 6)
    assert ct.dim_g_q == 90
    assert dim_symbol_next(S) == 164
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tab = janet_tabular(S)
    assert [r.cls for r in tab.rows].count(4) == 6
    assert [r.cls for r in tab.rows].count(3) == 4


# -- Spencer operator ------------------------------------------------------------


def _holonomic(f, n, q):
    """j_q(f) as a jet dict for one unknown."""
    out = {}
    for s in range(q + 1):
        for mu in indices_of_order(n, s):
            g = f
            for i, a in enumerate(mu):
                for _ in range(a):
                    g = partial(g, i + 1, n)
            out[(0, mu)] = g
    return out


def test_spencer_kills_holonomic_jets():
    x1, x2 = variable(1, 2), variable(2, 2)
    f = x1 ** 3 * x2 - 2 * x2 ** 2 + x1
    df = spencer_apply(_holonomic(f, 2, 2), 1, 2)
    assert df and all(v == 0 for v in df.values())


def test_spencer_detects_non_holonomic():
    jet = {(0, (0, 0)): Fraction(0), (0, (1, 0)): Fraction(1)}
    df = spencer_apply(jet, 0, 2)
    assert df[(0, (0, 0), 1)] == -1 and df[(0, (0, 0), 2)] == 0


def test_spencer_squares_to_zero():
    x1, x2, x3 = (variable(i, 3) for i in (1, 2, 3))
    jet = {(0, mu): x1 ** mu[0] * x2 + mu[1] * x3 - mu[2] * x1 * x2
           for s in range(4) for mu in indices_of_order(3, s)}
    omega = spencer_apply(jet, 2, 3)
    assert all(v == 0 for v in spencer_forms(omega, 2, 3).values())


# -- properties ----------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_certificates_reproduce_rows(seed):
    A = random_operator(random.Random(seed))
    S = system(A)
    assert S.check_certificates()
    assert prolong(S, 1).check_certificates()


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_rows_are_autoreduced(seed):
    S = prolong(system(random_operator(random.Random(seed))), 1)
    lead = S.leading_jets()
    assert len(set(lead)) == len(lead)
    for r, lt in zip(S.rows, lead):
        assert r[lt] == 1
        for other in lead:
            if other != lt:
                assert other not in r or jet_key(*other) < jet_key(*lt)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_symbol_rank_matches_sympy(seed):
    rng = random.Random(seed)
    S = system(random_operator(rng, constant=True))
    cols = [(k, mu) for k in range(S.m) for mu in indices_of_order(S.n, S.q)]
    M = sympy.Matrix([[coeff_to_sympy(r.get(c, 0), S.n) for c in cols] for r in S.rows]) \
        if S.rows else sympy.zeros(0, len(cols))
    ref = M.rank()
    assert symbol_rank(S) == ref
    assert characters(S).dim_g_q == len(cols) - ref


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_dimension_is_coordinate_free(seed):
    rng = random.Random(seed)
    A = random_operator(rng, constant=True)
    n = A.n
    M = [[Fraction(1 if i == j else (rng.randint(-2, 2) if i > j else 0)) for j in range(n)]
         for i in range(n)]
    S = system(A)
    S2 = change_coordinates(S, CoordinateChange(M))
    assert S2.dim() == S.dim()
    assert characters(S2).dim_g_q == characters(S).dim_g_q
    assert prolong(S2, 1).dim() == prolong(S, 1).dim()
