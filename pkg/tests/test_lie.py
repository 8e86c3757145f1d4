from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetapencil.lie import (LieStructure, center_vectors, compatibility_residual, is_casimir, jacobiator,
                             killing_semisimple, quotient_by, recover_r_operator)
from thetapencil.poly import PolyElement


def so3() -> LieStructure:
    c = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        c[i, j, k], c[j, i, k] = 1, -1
    return LieStructure(c, "so3")


def direct_sum(a: LieStructure, b: LieStructure) -> LieStructure:
    n, m = a.dim, b.dim
    c = np.zeros((n + m,) * 3, dtype=complex)
    c[:n, :n, :n] = a.c
    c[n:, n:, n:] = b.c
    return LieStructure(c)


def test_so3_is_lie_and_semisimple():
    c = so3()
    assert jacobiator(c) < 1e-15
    rep = killing_semisimple(c)
    assert rep.semisimple and rep.ideal_dims == [3]


def test_perturbed_tensor_fails_jacobi():
    rng = np.random.default_rng(1)
    noise = rng.normal(size=(3, 3, 3))
    bad = LieStructure.from_tensor(so3().c + 1e-3 * noise)
    assert jacobiator(bad) > 1e-6


def test_quadratic_casimir_of_so3():
    f = PolyElement.from_tensor(np.eye(3))
    assert is_casimir(f, so3()) < 1e-15
    assert is_casimir(PolyElement.var(3, 0), so3()) > 0.1


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_scaled_copies_are_compatible(s, t):
    a = so3()
    b = LieStructure(s * a.c)
    assert compatibility_residual(a, b) < 1e-14
    assert jacobiator(LieStructure(a.c + t * b.c)) < 1e-13 * (1 + abs(s * t))


def test_center_and_quotient():
    c = direct_sum(so3(), LieStructure(np.zeros((1, 1, 1))))
    z = center_vectors(c)
    assert z.shape[1] == 1
    q, _ = quotient_by(c, z)
    assert q.dim == 3
    assert killing_semisimple(q).ideal_dims == [3]


def test_ideal_decomposition_of_sum():
    rep = killing_semisimple(direct_sum(so3(), so3()))
    assert rep.semisimple and rep.ideal_dims == [3, 3]


def test_r_operator_recovers_scaling():
    a = so3()
    r = recover_r_operator(a, LieStructure(2 * a.c))
    assert r.residual < 1e-12


def test_r_operator_detects_unreachable_bracket():
    a = so3()
    rng = np.random.default_rng(3)
    b = LieStructure.from_tensor(rng.normal(size=(3, 3, 3)))
    assert recover_r_operator(a, b).residual > 1e-3
