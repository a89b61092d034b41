"""Seeded random sparse operator matrices shared by property and acceptance tests."""

import random
from fractions import Fraction

from dualpde.algebra import coerce, variable
from dualpde.operators import OpMatrix, indices_of_order


def random_coeff(rng, n, constant):
    c = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 1, 2]))
    if constant or rng.random() < 0.6:
        return c
    return coerce(c * variable(rng.randint(1, n), n) + rng.randint(-2, 2))


def random_operator(rng, n=None, constant=None, max_order=2, max_size=3, p=None, m=None):
    n = n or rng.randint(1, 3)
    if constant is None:
        constant = rng.random() < 0.5
    p = p or rng.randint(1, max_size)
    m = m or rng.randint(1, max_size)
    jets = [mu for s in range(max_order + 1) for mu in indices_of_order(n, s)]
    rows = []
    for _ in range(p):
        row = {}
        for k in range(m):
            if rng.random() < 0.5:
                continue
            for mu in rng.sample(jets, rng.randint(1, 2)):
                row[(k, mu)] = random_coeff(rng, n, constant)
        rows.append(row)
    if not any(rows):
        rows[0][(0, jets[-1])] = Fraction(1)
    return OpMatrix(rows, m, n)


def random_corpus(count=50, seed=0):
    rng = random.Random(seed)
    return [random_operator(rng) for _ in range(count)]
