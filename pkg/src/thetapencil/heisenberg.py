"""Clock and shift matrices and the t_{alpha,beta} basis of sl_n."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class HeisenbergError(ValueError):
    pass


Sector = tuple[int, int]


def check_nk(n: int, k: int) -> None:
    if n < 2:
        raise HeisenbergError(f"n must be >= 2, got {n}")
    if not 1 <= k < n:
        raise HeisenbergError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    if math.gcd(n, k) != 1:
        raise HeisenbergError(f"n={n} and k={k} are not coprime")


@dataclass(frozen=True)
class HeisenbergPair:
    """``a = diag(eps^j)``, ``b`` the cyclic shift; ``b a = eps a b`` with eps = e^{2 pi i k/n}."""

    n: int
    k: int

    def __post_init__(self):
        check_nk(self.n, self.k)

    @property
    def eps(self) -> complex:
        return np.exp(2j * np.pi * self.k / self.n)

    def root(self, power: int) -> complex:
        """``eps**power`` computed from the reduced exponent."""
        return np.exp(2j * np.pi * ((self.k * power) % self.n) / self.n)

    @cached_property
    def a(self) -> np.ndarray:
        return np.diag([self.root(j) for j in range(self.n)])

    @cached_property
    def b(self) -> np.ndarray:
        # b e_j = e_{j-1}, i.e. b[i, i+1] = 1
        return np.roll(np.eye(self.n, dtype=complex), 1, axis=1)

    def relation_residual(self) -> float:
        n, a, b = self.n, self.a, self.b
        eye = np.eye(n)
        r = [
            np.abs(np.linalg.matrix_power(a, n) - eye).max(),
            np.abs(np.linalg.matrix_power(b, n) - eye).max(),
            np.abs(b @ a - self.eps * a @ b).max(),
        ]
        return float(max(r))

    def t(self, alpha: int, beta: int) -> np.ndarray:
        """``a^alpha b^beta`` for integer exponents (reduced mod n)."""
        n = self.n
        return np.linalg.matrix_power(self.a, alpha % n) @ np.linalg.matrix_power(self.b, beta % n)

    def t_dual(self, alpha: int, beta: int) -> np.ndarray:
        """``t^{alpha,beta} = eps^{alpha beta} t_{-alpha,-beta}``; pairs with t to trace n."""
        return self.root(alpha * beta) * self.t(-alpha, -beta)


def build_pair(n: int, k: int) -> HeisenbergPair:
    pair = HeisenbergPair(n, k)
    res = pair.relation_residual()
    if res > 1e-14:
        raise HeisenbergError(f"Heisenberg relations fail (residual {res:.2e})")
    return pair


def sectors(n: int) -> list[Sector]:
    """All (alpha, beta) in [0, n)^2 except (0, 0), row-major."""
    return [(a, b) for a in range(n) for b in range(n) if (a, b) != (0, 0)]


def add_sectors(n: int, s1: Sector, s2: Sector) -> Sector:
    return ((s1[0] + s2[0]) % n, (s1[1] + s2[1]) % n)


def commutator_constants(n: int, k: int, s1: Sector, s2: Sector) -> tuple[complex, Sector]:
    """``[t_s1, t_s2] = coeff * t_{s1+s2}``."""
    a1, b1 = s1
    a2, b2 = s2
    w = lambda p: np.exp(2j * np.pi * ((k * p) % n) / n)
    return w(b1 * a2) - w(b2 * a1), add_sectors(n, s1, s2)


@dataclass(frozen=True)
class SLBasis:
    pair: HeisenbergPair
    elements: dict
    duals: dict

    @property
    def n(self) -> int:
        return self.pair.n

    def pairing_matrix(self) -> np.ndarray:
        keys = list(self.elements)
        return np.array([[np.trace(self.duals[s] @ self.elements[r]) for r in keys] for s in keys])

    def project(self, mat: np.ndarray, sector: Sector) -> complex:
        """Coefficient of ``t_sector`` in ``mat`` (exact projection by the dual)."""
        return np.trace(self.duals[sector] @ mat) / self.n


def sl_basis(pair: HeisenbergPair) -> SLBasis:
    elements = {s: pair.t(*s) for s in sectors(pair.n)}
    return SLBasis(pair, elements, {})


def dual_basis(basis: SLBasis) -> SLBasis:
    duals = {s: basis.pair.t_dual(*s) for s in basis.elements}
    return SLBasis(basis.pair, basis.elements, duals)
