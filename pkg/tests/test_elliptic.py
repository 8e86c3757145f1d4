from __future__ import annotations

import numpy as np
import pytest

from thetapencil.elliptic import (DecompositionError, build_pencil, check_pencil_identities, combrack_residual,
                                  random_regular_u, verify_splitting_relations)
from thetapencil.heisenberg import HeisenbergError
from thetapencil.lie import jacobiator, killing_semisimple


def test_dimension_and_brackets(pencil22):
    assert pencil22.dim == 6
    r = check_pencil_identities(pencil22)
    assert max(r.values()) < 1e-10


def test_bracket_reproduces_pointwise_commutator(pencil22):
    rng = np.random.default_rng(0)
    for _ in range(3):
        x = rng.normal(size=6) + 1j * rng.normal(size=6)
        y = rng.normal(size=6) + 1j * rng.normal(size=6)
        assert combrack_residual(pencil22, x, y) < 1e-9


@pytest.mark.parametrize("n,m,k", [(3, 2, 1), (3, 2, 2), (2, 3, 1)])
def test_other_parameters(n, m, k):
    p = build_pencil(n, m, k, 0.2 + 1.1j, seed=3)
    assert p.dim == m * (n * n - 1)
    assert max(check_pencil_identities(p).values()) < 1e-8


def test_pencil_members_are_semisimple(pencil23):
    for u in random_regular_u(pencil23, 2):
        rep = killing_semisimple(pencil23.at(u))
        assert rep.semisimple and rep.ideal_dims == [3, 3, 3]
        assert jacobiator(pencil23.at(u)) < 1e-10


def test_splitting_relations(pencil22):
    for u in random_regular_u(pencil22, 2, seed=5):
        r = verify_splitting_relations(pencil22, u)
        assert r["cross_block"] < 1e-7 and r["in_block"] < 1e-7 and r["in_block_coefficient_rel"] < 1e-7


def test_non_coprime_rejected():
    with pytest.raises(HeisenbergError):
        build_pencil(4, 2, 2, 1j)
