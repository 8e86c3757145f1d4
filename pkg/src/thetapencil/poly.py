"""Sparse commutative polynomials with complex coefficients.

Terms are kept as an integer exponent matrix plus a coefficient vector so
that products with linear forms and derivatives stay vectorized.  Rows are
sorted lexicographically and like terms merged on construction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

PRUNE_REL = 1e-14


def _canonical(exps: np.ndarray, coeffs: np.ndarray, nvars: int, prune: bool = True):
    exps = np.asarray(exps, dtype=np.int64).reshape(-1, nvars)
    coeffs = np.asarray(coeffs, dtype=complex).ravel()
    if coeffs.size == 0:
        return np.zeros((0, nvars), dtype=np.int64), np.zeros(0, dtype=complex)
    uniq, inv = np.unique(exps, axis=0, return_inverse=True)
    summed = np.zeros(len(uniq), dtype=complex)
    np.add.at(summed, inv.ravel(), coeffs)
    keep = summed != 0
    if prune and keep.any():
        keep &= np.abs(summed) > PRUNE_REL * np.abs(summed).max()
    return uniq[keep], summed[keep]


@dataclass(frozen=True, eq=False)
class PolyElement:
    num_vars: int
    exps: np.ndarray
    coeffs: np.ndarray

    @classmethod
    def from_terms(cls, num_vars: int, terms: dict, prune: bool = True) -> "PolyElement":
        if not terms:
            return cls.zero(num_vars)
        e = np.array(list(terms.keys()), dtype=np.int64).reshape(-1, num_vars)
        c = np.array(list(terms.values()), dtype=complex)
        return cls.make(num_vars, e, c, prune)

    @classmethod
    def make(cls, num_vars, exps, coeffs, prune: bool = True) -> "PolyElement":
        e, c = _canonical(exps, coeffs, num_vars, prune)
        return cls(num_vars, e, c)

    @classmethod
    def zero(cls, num_vars: int) -> "PolyElement":
        return cls(num_vars, np.zeros((0, num_vars), dtype=np.int64), np.zeros(0, dtype=complex))

    @classmethod
    def constant(cls, num_vars: int, value: complex) -> "PolyElement":
        return cls.make(num_vars, np.zeros((1, num_vars)), [value])

    @classmethod
    def var(cls, num_vars: int, i: int, coeff: complex = 1.0) -> "PolyElement":
        e = np.zeros((1, num_vars), dtype=np.int64)
        e[0, i] = 1
        return cls.make(num_vars, e, [coeff])

    @classmethod
    def linear(cls, vec) -> "PolyElement":
        vec = np.asarray(vec, dtype=complex)
        n = vec.size
        return cls.make(n, np.eye(n, dtype=np.int64), vec)

    @classmethod
    def from_tensor(cls, tensor: np.ndarray) -> "PolyElement":
        """``sum A[i1..ip] x_i1 ... x_ip`` for a dense coefficient tensor."""
        tensor = np.asarray(tensor, dtype=complex)
        p, n = tensor.ndim, tensor.shape[0]
        idx = np.argwhere(tensor != 0)
        if idx.size == 0:
            return cls.zero(n)
        exps = np.zeros((len(idx), n), dtype=np.int64)
        for col in range(p):
            np.add.at(exps, (np.arange(len(idx)), idx[:, col]), 1)
        return cls.make(n, exps, tensor[tuple(idx.T)])

    def to_symmetric_tensor(self, degree: int) -> np.ndarray:
        """Symmetric tensor whose full contraction reproduces the degree part."""
        n = self.num_vars
        out = np.zeros((n,) * degree, dtype=complex)
        for e, c in zip(self.exps, self.coeffs):
            if e.sum() != degree:
                continue
            word = [i for i in range(n) for _ in range(e[i])]
            perms = set(itertools.permutations(word))
            for w in perms:
                out[w] += c / len(perms)
        return out

    @property
    def terms(self) -> dict:
        return {tuple(int(v) for v in e): complex(c) for e, c in zip(self.exps, self.coeffs)}

    def __len__(self):
        return len(self.coeffs)

    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if len(self) else -1

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max()) if len(self) else 0.0

    def _check(self, other: "PolyElement"):
        if self.num_vars != other.num_vars:
            raise ValueError("polynomials live in different variable sets")

    def __add__(self, other: "PolyElement") -> "PolyElement":
        self._check(other)
        return PolyElement.make(self.num_vars, np.vstack([self.exps, other.exps]),
                                np.concatenate([self.coeffs, other.coeffs]))

    def __sub__(self, other: "PolyElement") -> "PolyElement":
        return self + other * -1.0

    def __neg__(self):
        return self * -1.0

    def __mul__(self, other):
        if isinstance(other, PolyElement):
            self._check(other)
            if not len(self) or not len(other):
                return PolyElement.zero(self.num_vars)
            e = (self.exps[:, None, :] + other.exps[None, :, :]).reshape(-1, self.num_vars)
            c = np.multiply.outer(self.coeffs, other.coeffs).ravel()
            return PolyElement.make(self.num_vars, e, c)
        return PolyElement(self.num_vars, self.exps, self.coeffs * complex(other))

    __rmul__ = __mul__

    def times_linear(self, vec) -> "PolyElement":
        """Product with the linear form ``sum_k vec[k] x_k``."""
        vec = np.asarray(vec, dtype=complex)
        nz = np.flatnonzero(vec)
        if not len(self) or nz.size == 0:
            return PolyElement.zero(self.num_vars)
        e = np.repeat(self.exps[None, :, :], nz.size, axis=0)
        e[np.arange(nz.size), :, nz] += 1
        c = np.multiply.outer(vec[nz], self.coeffs)
        return PolyElement.make(self.num_vars, e.reshape(-1, self.num_vars), c.ravel(), prune=False)

    def diff(self, i: int) -> "PolyElement":
        mask = self.exps[:, i] > 0
        e = self.exps[mask].copy()
        c = self.coeffs[mask] * e[:, i]
        e[:, i] -= 1
        return PolyElement(self.num_vars, e, c)

    def __call__(self, x) -> np.ndarray:
        """Evaluate at one point (shape (N,)) or many (shape (P, N))."""
        x = np.asarray(x, dtype=complex)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if not len(self):
            out = np.zeros(len(x), dtype=complex)
        else:
            mon = np.prod(x[:, None, :] ** self.exps[None, :, :], axis=2)
            out = mon @ self.coeffs
        return out[0] if single else out

    def allclose(self, other: "PolyElement", tol: float = 1e-12) -> bool:
        d = self - other
        ref = max(self.max_abs(), other.max_abs(), 1e-300)
        return d.max_abs() <= tol * ref
