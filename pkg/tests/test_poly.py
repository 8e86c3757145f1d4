from __future__ import annotations

import numpy as np
from hypothesis import given, settings, strategies as st

from thetapencil.poly import PolyElement

N = 3


@st.composite
def polys(draw):
    terms = draw(st.dictionaries(st.tuples(*[st.integers(0, 2)] * N),
                                 st.integers(-5, 5).filter(bool), max_size=5))
    return PolyElement.from_terms(N, {k: complex(v) for k, v in terms.items()})


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), polys())
def test_ring_axioms(f, g, h):
    assert (f * (g + h)).allclose(f * g + f * h)
    assert (f * g).allclose(g * f)
    assert (f - f).max_abs() == 0


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), st.integers(0, N - 1))
def test_leibniz(f, g, i):
    assert (f * g).diff(i).allclose(f.diff(i) * g + f * g.diff(i))


@settings(max_examples=40, deadline=None)
@given(polys(), polys())
def test_evaluation_is_a_ring_map(f, g):
    x = np.array([0.3, -1.2, 0.7])
    assert abs((f * g)(x) - f(x) * g(x)) < 1e-9 * (1 + abs(f(x) * g(x)))


def test_tensor_round_trip():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(N, N))
    A = A + A.T
    f = PolyElement.from_tensor(A)
    assert np.allclose(f.to_symmetric_tensor(2), A)
    x = rng.normal(size=N)
    assert abs(f(x) - x @ A @ x) < 1e-12
