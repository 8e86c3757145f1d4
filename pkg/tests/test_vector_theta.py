from __future__ import annotations

import numpy as np
import pytest

from thetapencil.elliptic import build_pencil
from thetapencil.theta import Lattice, ThetaError
from thetapencil.vector_theta import (as_scalar_theta, build_multi_pencil, build_vector_theta_basis,
                                      common_zero_margin, compare_with_scalar, vector_section_dimension,
                                      reconstruction_residual, space_rank, verify_multi)


@pytest.fixture(scope="module")
def multi():
    return build_multi_pencil(2, 1, 3, 2, 1j, seed=3)


def test_dimension_formula():
    assert vector_section_dimension(3, 2, 1) == 3
    assert vector_section_dimension(5, 3, 1) == 5
    assert len(build_vector_theta_basis(3, 2, Lattice(1j))) == 3


def test_basis_functional_equations():
    lat = Lattice(0.1 + 1.2j)
    pts = np.array([0.13 + 0.21j, -0.4 + 0.5j, 0.7 - 0.2j])
    for f in build_vector_theta_basis(3, 2, lat):
        assert max(f.functional_residuals(pts)) < 1e-10


def test_non_coprime_rejected():
    with pytest.raises(ThetaError):
        build_vector_theta_basis(4, 2, Lattice(1j))


def test_brackets_and_combinations(multi):
    v = verify_multi(multi)
    assert len(multi.brackets) == 3
    assert max(v["jacobi"]) < 1e-7
    assert max(v["compatibility"].values()) < 1e-7
    assert v["combination_jacobi"] < 1e-7
    assert reconstruction_residual(multi) < 1e-8
    assert space_rank(multi.space) == multi.dim == 9


def test_sections_have_no_common_zero(multi):
    assert common_zero_margin(multi.mus) > 1e-6


def test_line_bundle_case_matches_scalar_pencil():
    p = build_multi_pencil(2, 1, 2, 1, 1j, seed=3)
    mus = tuple(as_scalar_theta(mu) for mu in p.mus)
    e = build_pencil(2, 2, 1, 1j, mus=mus)
    r = compare_with_scalar(p, e)
    assert r["bracket_difference"] < 1e-9
