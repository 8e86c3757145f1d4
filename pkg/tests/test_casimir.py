from __future__ import annotations

import pytest

from thetapencil.casimir import (casimir_T, casimir_quadratic, centrality, degree_ledger, gz_formula,
                                 kernel_element)
from thetapencil.elliptic import random_regular_u
from thetapencil.lie import is_casimir


@pytest.mark.parametrize("fixture", ["pencil22", "pencil23"])
def test_degree_ledger(fixture, request):
    p = request.getfixturevalue(fixture)
    led = degree_ledger(p)
    m = p.basis.m
    assert led.multiset(2) == sorted([0] + [1] * (m - 2) + [2])
    assert led.gz_sum == led.dimension == gz_formula(2, m) == 3 * m
    assert led.jacobian_rank == led.expected_rank
    assert max(e.centrality for e in led.entries) < 1e-6


def test_kernel_element_vanishes(pencil22):
    ker = kernel_element(pencil22, 2)
    ref = casimir_T(pencil22, pencil22.mu2, 2).norm()
    assert ker.norm() / ref < 1e-10


def test_quadratic_casimir_is_u_independent_and_central(pencil23):
    q = casimir_quadratic(pencil23)
    assert q.degree_u() == 0
    f = q.at(0.0)
    assert is_casimir(f, pencil23.c1) < 1e-8
    assert is_casimir(f, pencil23.c2) < 1e-8
    assert centrality(q, pencil23, random_regular_u(pencil23, 3)) < 1e-8


def test_t_of_mu1_is_central_off_the_ends(pencil22):
    t = casimir_T(pencil22, pencil22.mu1, 2)
    assert is_casimir(t.at(0.7 + 0.2j), pencil22.at(0.7 + 0.2j)) < 1e-8
