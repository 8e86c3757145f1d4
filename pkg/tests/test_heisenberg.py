from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thetapencil.heisenberg import (HeisenbergError, build_pair, commutator_constants, dual_basis, sectors,
                                    sl_basis)

coprime = st.integers(2, 7).flatmap(lambda n: st.tuples(st.just(n), st.sampled_from(
    [k for k in range(1, n) if np.gcd(n, k) == 1])))


@given(coprime)
def test_relations(nk):
    assert build_pair(*nk).relation_residual() < 1e-13


def test_non_coprime_rejected():
    with pytest.raises(HeisenbergError):
        build_pair(4, 2)


@given(coprime)
def test_basis_is_traceless_and_dual(nk):
    n, k = nk
    b = dual_basis(sl_basis(build_pair(n, k)))
    assert len(b.elements) == n * n - 1
    assert all(abs(np.trace(t)) < 1e-12 for t in b.elements.values())
    assert np.allclose(b.pairing_matrix(), n * np.eye(n * n - 1))


@given(coprime)
def test_commutator_constants_match_matrices(nk):
    n, k = nk
    pair = build_pair(n, k)
    for s1 in sectors(n):
        for s2 in sectors(n):
            c, s3 = commutator_constants(n, k, s1, s2)
            lhs = pair.t(*s1) @ pair.t(*s2) - pair.t(*s2) @ pair.t(*s1)
            assert np.abs(lhs - c * pair.t(*s3)).max() < 1e-12
