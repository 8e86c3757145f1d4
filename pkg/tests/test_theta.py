from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetapencil.theta import (Lattice, ThetaError, branch_value, build_theta_space, find_roots, pencil_roots,
                               quasi_periodicity_residual, theta_generator, theta_product)


def test_lattice_rejects_real_tau():
    with pytest.raises(ThetaError):
        Lattice(1.0 + 0j)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_space_is_quasi_periodic(m):
    lat = Lattice(0.3 + 1.1j)
    for f in build_theta_space(m, lat):
        r1, r2 = quasi_periodicity_residual(f)
        assert r1 < 1e-12 and r2 < 1e-12
        assert f.recurrence_residual() < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_random_theta_has_m_roots_summing_to_zero(m, seed):
    lat = Lattice(1j)
    rng = np.random.default_rng(seed)
    space = build_theta_space(m, lat)
    f = space[0] * complex(rng.normal(), rng.normal())
    for g in space[1:]:
        f = f + g * complex(rng.normal(), rng.normal())
    rs = find_roots(f)
    assert len(rs) == m
    assert np.abs(f(rs.roots)).max() < 1e-8 * np.abs(f.seeds).max()
    assert rs.root_sum_residual < 1e-8


def test_theta_product_vanishes_at_prescribed_roots():
    lat = Lattice(0.2 + 0.9j)
    roots = [0.1 + 0.2j, 0.5 + 0.3j, -0.6 - 0.5j]
    f = theta_product(roots, lat)
    assert np.abs(f(np.array(roots))).max() < 1e-10
    assert max(quasi_periodicity_residual(f)) < 1e-12


def test_generator_is_order_one():
    g = theta_generator(Lattice(1j))
    assert g.order == 1


def test_branch_value_is_not_regular(pencil22):
    z, u = branch_value(pencil22.mu1, pencil22.mu2, 0.3 + 0.2j)
    _, regular = pencil_roots(pencil22.mu1, pencil22.mu2, u)
    assert not regular
    _, regular = pencil_roots(pencil22.mu1, pencil22.mu2, u + 1e-2)
    assert regular
