from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetapencil.shift import (FAMILIES, ShiftError, admissible_search, build_q83, center_stability,
                               family_grid_check, family_vector, k_not_casimir, lenard_magri, q83_parameters,
                               reduce_and_classify, same_span, shift, verify_quartic_casimirs)


@pytest.fixture(scope="module")
def q83():
    return build_q83(1.0, 1.0)


def test_parameters_at_unit_k():
    p = q83_parameters(1.0, 1.0)
    assert np.allclose(p, (-1.1180340, 2.2360680, 1.4953488, 3.3437015), atol=5e-8)


def test_nonpositive_parameters_rejected():
    with pytest.raises(ShiftError):
        build_q83(0.0, 1.0)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_quadratic_jacobi_for_all_parameters(k1, k2):
    inst = build_q83(k1, k2)
    assert inst.poisson.jacobi_residual() < 1e-12
    assert all(family_grid_check(inst, f) < 1e-11 * inst.poisson.norm() for f in FAMILIES)


def test_perturbed_parameters_break_jacobi():
    inst = build_q83(1.0, 1.0)
    g = inst.poisson.gamma.copy()
    g[0, 1] *= 1.01
    g[1, 0] *= 1.01
    from thetapencil.shift import QuadraticPoisson
    assert QuadraticPoisson(g).jacobi_residual() > 1e-6


def test_quartic_casimirs(q83):
    r = verify_quartic_casimirs(q83)
    assert max(r["defects"]) < 1e-12
    assert r["mutual"] < 1e-12
    assert r["jacobian_rank"] == 4


def test_random_vector_is_not_admissible(q83):
    a = np.random.default_rng(0).normal(size=8)
    assert q83.poisson.admissibility(a) > 1e-3
    with pytest.raises(ShiftError):
        shift(q83, "c+", 1.0, 1.0)


def test_admissible_vectors_scale(q83):
    for f in FAMILIES:
        a = family_vector(f, 0.4, -1.3)
        for s in (1e-3, 1.0, 1e3):
            scale = q83.poisson.norm() * (s * np.abs(a).max()) ** 2
            assert q83.poisson.admissibility(s * a) < 1e-14 * scale


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_shift_and_reduction(q83, family):
    res = shift(q83, family, 1.0, 0.7)
    assert res.quadratic_residual < 1e-12
    assert res.diagnostics["compatibility"] < 1e-10
    assert res.diagnostics["quadratic_linear"] < 1e-12
    rep = reduce_and_classify(res)
    assert rep.center_dim == 2
    assert rep.semisimple and rep.ideal_dims == [3, 3]
    stab = center_stability(q83, family)
    assert stab["dims"] == [2] and stab["drift"] < 1e-8


def test_center_of_a_plus(q83):
    res = shift(q83, "a+", 1.0, 1.0)
    rep = reduce_and_classify(res)
    expected = np.zeros((8, 2))
    expected[[0, 4], 0] = 1
    expected[[2, 6], 1] = 1
    assert same_span(rep.center, expected) < 1e-10
    assert k_not_casimir(q83, rep.center) > 1e-3


def test_lenard_magri_integrals(q83):
    rep = reduce_and_classify(shift(q83, "a+", 1.0, 0.7))
    lm = lenard_magri(rep.quotient_c1, rep.quotient_c2)
    assert lm.commute_c1 < 1e-9 and lm.commute_c2 < 1e-9
    assert lm.independent >= 4
    assert lm.lambda0_casimir < 1e-9


def test_admissible_search_finds_the_four_planes(q83):
    ad = admissible_search(q83.poisson, starts=120, seed=1)
    assert sorted(ad.dims) == [2, 2, 2, 2]
    assert ad.direct_sum and all(ad.linear)
    assert all(ad.matches.values())
