from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetapencil.degenerate import (Cyclo, DegenerateError, cross_validate, exact_compatibility_defects,
                                    exact_degree_ledger, exact_jacobi_defects, joint_quadratic_casimirs,
                                    literal_rational_defect, rational_split_check, rational_structure_constants,
                                    resultant_m, trig_dimension, trig_space_closure, trig_structure_constants)
from thetapencil.elliptic import build_pencil

fracs = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([3, 4, 5, 8]), st.lists(fracs, min_size=4, max_size=4),
       st.lists(fracs, min_size=4, max_size=4))
def test_cyclotomic_field_axioms(n, a, b):
    x, y = Cyclo.make(n, a), Cyclo.make(n, b)
    assert abs((x * y).to_complex() - x.to_complex() * y.to_complex()) < 1e-9
    assert x * y == y * x
    if x:
        assert x * x.inverse() == Cyclo.rational(n, 1)


def test_zeta_has_order_n():
    for n in (3, 4, 6):
        z = Cyclo.zeta(n)
        p = Cyclo.rational(n, 1)
        for _ in range(n):
            p = p * z
        assert p == Cyclo.rational(n, 1)


@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_rational_brackets_exact(n, m):
    mu1 = [1] + [0] * m
    mu2 = [0] * m + [1]
    ep = rational_structure_constants(n, m, mu1, mu2)
    assert ep.dim == m * (n * n - 1)
    assert exact_jacobi_defects(ep.c1) == exact_jacobi_defects(ep.c2) == 0
    assert exact_compatibility_defects(ep.c1, ep.c2) == 0
    assert ep.c1.asymmetry_count() == 0
    assert rational_split_check(ep, 0)


def test_rational_common_zero_rejected():
    with pytest.raises(DegenerateError):
        rational_structure_constants(2, 2, [1, 0, -1], [1, 0, -1])
    assert resultant_m([1, 0, -1], [2, 0, -2], 2) == 0


def test_literal_reading_is_not_closed():
    d = literal_rational_defect(3, [1, 0, 0, 1], [0, 1, 0, 0])
    assert d["image"] == 5 and d["products"] == 6 and not d["contained"]


@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 2)])
def test_trig_brackets_exact(n, m):
    mu1 = [1] + [0] * (m - 1) + [(-1) ** m]
    mu2 = [0, 1] + [0] * (m - 1)
    ep = trig_structure_constants(n, m, mu1, mu2)
    assert ep.dim == trig_dimension(n, m) == m * (n * n - 1)
    assert exact_jacobi_defects(ep.c1) == exact_jacobi_defects(ep.c2) == 0
    assert exact_compatibility_defects(ep.c1, ep.c2) == 0


def test_trig_space_closure():
    r = trig_space_closure(2, 1)
    assert r["dim"] == 3 and r["outside"] == 0


def test_trig_matches_elliptic_minimal_indices():
    ep = trig_structure_constants(2, 2, [1, 0, 1], [0, 1, 0])
    rep = cross_validate(build_pencil(2, 2, 1, 1j), ep)
    assert rep.dims_match and rep.elliptic_indices == rep.exact_indices == [0, 2]
    assert rep.ok


def test_rational_minimal_indices_are_recorded():
    ep = rational_structure_constants(2, 2, [1, 0, 0], [0, 0, 1])
    led = exact_degree_ledger(ep.c1, ep.c2)
    assert led.complete and led.indices == [0, 1] and led.gz_sum == 4
    assert joint_quadratic_casimirs(ep.c1, ep.c2) == 1
