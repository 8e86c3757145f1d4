"""Rational and trigonometric degenerations in exact arithmetic.

Rational case: theta is replaced by ``z``.  The pencil polynomials ``mu1, mu2``
live in ``{sum_{a<=m} c_a z^a : c_{m-1} = 0}``; the matrix space is sl_n with
coefficients of degree < m, the space on which ``Z = mu1 P + mu2 Q`` splits
uniquely (the untwisted constrained space always meets ``mu1 A`` and ``mu2 A``
in ``mu1 mu2``, see ``literal_rational_defect``).

Trigonometric case (``k = 1``): with ``w = exp(2 pi i z)`` the pencil polynomials
satisfy ``a_m = (-1)^m a_0``.  The matrix space is spanned by
``w^{beta/n} a^alpha b^beta`` grouped into sectors ``(alpha, beta mod n)``; a
sector with ``beta = 0`` carries the twisted boundary condition
``a_m = (-1)^m zeta^{-alpha} a_0``, the degenerate form of the elliptic
zero-sum shift ``alpha/n``.

Both cases feed the shared bracket assembly.  Splits are solved over Q or
Q(zeta_n), so Jacobi and compatibility identities are checked as exact zeros.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy
from sympy.polys.matrices import DomainMatrix

from .heisenberg import check_nk, sectors
from .lie import LieStructure
from .pipeline import assemble_brackets


class DegenerateError(ValueError):
    pass


# ---------------------------------------------------------------------------
# cyclotomic numbers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cyclotomic(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first."""
    x = sympy.symbols("x")
    return tuple(int(c) for c in reversed(sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()))


@dataclass(frozen=True)
class Cyclo:
    """Element of Q(zeta_n) as rational coordinates on ``1, zeta, ..., zeta^{phi(n)-1}``."""

    n: int
    coeffs: tuple

    @classmethod
    def make(cls, n: int, coeffs) -> "Cyclo":
        phi = _cyclotomic(n)
        d = len(phi) - 1
        c = [Fraction(v) for v in coeffs]
        # reduce modulo the monic Phi_n
        for top in range(len(c) - 1, d - 1, -1):
            lead = c[top]
            if lead:
                for i, p in enumerate(phi):
                    c[top - d + i] -= lead * p
        c = c[:d] + [Fraction(0)] * max(0, d - len(c))
        return cls(n, tuple(c))

    @classmethod
    def rational(cls, n: int, q) -> "Cyclo":
        return cls.make(n, [q])

    @classmethod
    def zeta(cls, n: int, power: int = 1) -> "Cyclo":
        c = [0] * (power % n + 1)
        c[power % n] = 1
        return cls.make(n, c)

    def _coerce(self, other) -> "Cyclo":
        if isinstance(other, Cyclo):
            if other.n != self.n:
                raise DegenerateError("cyclotomic fields differ")
            return other
        return Cyclo.rational(self.n, other)

    def __add__(self, other):
        o = self._coerce(other)
        return Cyclo(self.n, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.n, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        prod = [Fraction(0)] * (2 * len(self.coeffs))
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    prod[i + j] += a * b
        return Cyclo.make(self.n, prod)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash((self.n, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def inverse(self) -> "Cyclo":
        if not self:
            raise ZeroDivisionError("inverse of zero")
        d = len(self.coeffs)
        # column i holds self * zeta^i; solve for the preimage of 1
        cols = [(self * Cyclo.make(self.n, [0] * i + [1])).coeffs for i in range(d)]
        A = [[cols[i][r] for i in range(d)] for r in range(d)]
        return Cyclo(self.n, tuple(field_solve(A, [Fraction(int(r == 0)) for r in range(d)])))

    def to_complex(self) -> complex:
        z = np.exp(2j * np.pi / self.n)
        return complex(sum(float(c) * z**i for i, c in enumerate(self.coeffs)))

    def __repr__(self):
        return f"Cyclo({self.n}, {[str(c) for c in self.coeffs]})"


def to_complex(v) -> complex:
    return v.to_complex() if isinstance(v, Cyclo) else complex(v)


def as_fraction(v) -> Fraction:
    """Rational value of an exact scalar; raises for irrational cyclotomic numbers."""
    if isinstance(v, Cyclo):
        if not v.is_rational():
            raise DegenerateError("value is not rational")
        return v.coeffs[0]
    return Fraction(v)


# ---------------------------------------------------------------------------
# exact structure constants
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ExactStructure:
    """Sparse exact constants ``{(i, j, k): c^k_ij}``; zero entries are never stored."""

    dim: int
    entries: dict
    label: str = ""

    def __post_init__(self):
        self.entries = {key: v for key, v in self.entries.items() if v}

    def asymmetry_count(self) -> int:
        bad = 0
        for (i, j, k), v in self.entries.items():
            w = self.entries.get((j, i, k), 0)
            if v + w:
                bad += 1
        return bad

    def by_pair(self) -> dict:
        out: dict = {}
        for (i, j, k), v in self.entries.items():
            out.setdefault((i, j), []).append((k, v))
        return out

    def to_lie(self) -> LieStructure:
        c = np.zeros((self.dim,) * 3, dtype=complex)
        for key, v in self.entries.items():
            c[key] = to_complex(v)
        return LieStructure(c, self.label)

    def is_rational(self) -> bool:
        return all(not isinstance(v, Cyclo) or v.is_rational() for v in self.entries.values())

    def poisson_matrix(self, x) -> list[list]:
        """``Pi[i][j] = sum_k c^k_ij x_k`` in exact arithmetic."""
        M = [[0] * self.dim for _ in range(self.dim)]
        for (i, j, k), v in self.entries.items():
            M[i][j] = M[i][j] + v * x[k]
        return M


def _jacobi_entries(a: ExactStructure, b: ExactStructure) -> dict:
    """``sum_m a^m_ij b^l_mk + cyclic(i, j, k)`` for i < j < k, nonzero entries only."""
    pa, pb = a.by_pair(), b.by_pair()
    first_b: dict = {}
    for (mm, kk), lst in pb.items():
        first_b.setdefault(mm, {})[kk] = lst
    out = {}
    n = a.dim
    for i, j, k in itertools.combinations(range(n), 3):
        acc: dict = {}
        for (x, y, z) in ((i, j, k), (j, k, i), (k, i, j)):
            for mm, v in pa.get((x, y), ()):
                for l, w in first_b.get(mm, {}).get(z, ()):
                    acc[l] = acc.get(l, 0) + v * w
        for l, v in acc.items():
            if v:
                out[(i, j, k, l)] = v
    return out


def exact_jacobi_defects(c: ExactStructure) -> int:
    """Number of nonzero Jacobiator entries; 0 means the identity holds exactly."""
    return len(_jacobi_entries(c, c))


def exact_compatibility_defects(c1: ExactStructure, c2: ExactStructure) -> int:
    j1 = _jacobi_entries(c1, c2)
    j2 = _jacobi_entries(c2, c1)
    keys = set(j1) | set(j2)
    return sum(1 for key in keys if j1.get(key, 0) + j2.get(key, 0))


# ---------------------------------------------------------------------------
# exact linear algebra helpers
# ---------------------------------------------------------------------------

def _to_dm(rows) -> DomainMatrix:
    QQ = sympy.QQ
    return DomainMatrix([[QQ.convert(Fraction(v)) for v in r] for r in rows],
                        (len(rows), len(rows[0])), QQ)


def exact_rank(rows) -> int:
    """Rank over Q of a matrix of rationals."""
    if not rows or not rows[0]:
        return 0
    return _to_dm(rows).rank()


def _inv(x):
    return x.inverse() if isinstance(x, Cyclo) else 1 / Fraction(x)


def field_rank(rows) -> int:
    """Rank of a matrix over Q or Q(zeta_n) by Gaussian elimination."""
    M = [list(r) for r in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = _inv(M[rank][c])
        for r in range(rank + 1, len(M)):
            if M[r][c]:
                f = M[r][c] * inv
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        rank += 1
    return rank


def field_solve(A, b) -> list:
    """Unique solution of a consistent (possibly tall) system over Q or Q(zeta_n)."""
    rows, cols = len(A), len(A[0])
    M = [list(A[r]) + [b[r]] for r in range(rows)]
    pivots = []
    rank = 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if M[r][c]), None)
        if piv is None:
            raise DegenerateError("split is not unique (mu1 and mu2 share a zero)")
        M[rank], M[piv] = M[piv], M[rank]
        inv = _inv(M[rank][c])
        M[rank] = [x * inv for x in M[rank]]
        for r in range(rows):
            if r != rank and M[r][c]:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        pivots.append(rank)
        rank += 1
    if any(M[r][cols] for r in range(rank, rows)):
        raise DegenerateError("target is not of the form mu1 P + mu2 Q")
    return [M[r][cols] for r in range(cols)]


# ---------------------------------------------------------------------------
# sl_n in the elementary basis (rational constants)
# ---------------------------------------------------------------------------

def sl_elementary(n: int):
    """Labels and rational structure constants of sl_n in the basis E_ij (i != j), H_i."""
    labels = [("E", i, j) for i in range(n) for j in range(n) if i != j] + [("H", i) for i in range(n - 1)]

    def matrix(lab):
        M = [[Fraction(0)] * n for _ in range(n)]
        if lab[0] == "E":
            M[lab[1]][lab[2]] = Fraction(1)
        else:
            M[lab[1]][lab[1]] = Fraction(1)
            M[lab[1] + 1][lab[1] + 1] = Fraction(-1)
        return M

    def coords(M):
        out = {}
        for lab in labels:
            if lab[0] == "E" and M[lab[1]][lab[2]]:
                out[lab] = M[lab[1]][lab[2]]
        run = Fraction(0)
        for i in range(n - 1):
            run += M[i][i]
            if run:
                out[("H", i)] = run
        return out

    mats = {lab: matrix(lab) for lab in labels}
    table = {}
    for A in labels:
        for B in labels:
            X, Y = mats[A], mats[B]
            C = [[sum(X[i][l] * Y[l][j] - Y[i][l] * X[l][j] for l in range(n)) for j in range(n)]
                 for i in range(n)]
            table[(A, B)] = list(coords(C).items())
    return labels, table


# ---------------------------------------------------------------------------
# shared split machinery
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ExactPencil:
    kind: str
    n: int
    m: int
    mu1: tuple
    mu2: tuple
    labels: list
    c1: ExactStructure
    c2: ExactStructure
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.labels)


def _times(f: dict, mu, step: int) -> dict:
    """Product of a sparse exponent map with a dense polynomial whose exponents advance by ``step``."""
    out: dict = {}
    for e, c in f.items():
        for j, a in enumerate(mu):
            if a:
                out[e + step * j] = out.get(e + step * j, 0) + c * a
    return out


def _product(f: dict, g: dict) -> dict:
    out: dict = {}
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
    return out


class _Splitter:
    """Exact split ``Z = mu1 P + mu2 Q`` with ``P, Q`` in a sector's scalar space.

    ``basis(key)`` lists the sector's functions as exponent maps; ``step`` is the
    exponent spacing of the mu polynomials.
    """

    def __init__(self, mu1, mu2, basis, step: int):
        self.mu = (mu1, mu2)
        self.basis = basis
        self.step = step
        self._cols: dict = {}
        self._cache: dict = {}

    def columns(self, key):
        if key not in self._cols:
            self._cols[key] = [_times(f, mu, self.step) for mu in self.mu for f in self.basis(key)]
        return self._cols[key]

    def rank(self, key) -> int:
        cols = self.columns(key)
        rows = sorted({e for c in cols for e in c})
        return field_rank([[c.get(e, 0) for c in cols] for e in rows])

    def split(self, key, target: dict):
        tkey = (key, tuple(sorted((e, c) for e, c in target.items() if c)))
        if tkey not in self._cache:
            cols = self.columns(key)
            rows = sorted({e for c in cols for e in c} | {e for e, c in target.items() if c})
            A = [[c.get(e, 0) for c in cols] for e in rows]
            sol = field_solve(A, [target.get(e, 0) for e in rows])
            half = len(sol) // 2
            self._cache[tkey] = (sol[:half], sol[half:])
        return self._cache[tkey]


# ---------------------------------------------------------------------------
# rational family
# ---------------------------------------------------------------------------

def rational_exponents(m: int) -> list[int]:
    """Exponents allowed in the order-m scalar space ``c_{m-1} = 0``."""
    return [a for a in range(m + 1) if a != m - 1]


def _check_rational_mu(mu, m, name):
    mu = [Fraction(v) for v in mu]
    mu = mu + [Fraction(0)] * max(0, m + 1 - len(mu))
    if len(mu) > m + 1 or any(mu[m + 1:]) or (m >= 1 and mu[m - 1]):
        raise DegenerateError(f"{name} is not in the order-{m} space (degree <= m, c_(m-1) = 0)")
    return mu[: m + 1]


def resultant_m(mu1, mu2, m: int) -> Fraction:
    """Resultant of mu1, mu2 as binary forms of degree m (vanishes on a common zero, infinity included)."""
    # Sylvester matrix with both polynomials padded to formal degree m
    rows = []
    for shift in range(m):
        rows.append([0] * shift + [Fraction(c) for c in reversed(mu1)] + [0] * (m - 1 - shift))
    for shift in range(m):
        rows.append([0] * shift + [Fraction(c) for c in reversed(mu2)] + [0] * (m - 1 - shift))
    return Fraction(str(_to_dm(rows).det()))


def literal_rational_defect(m: int, mu1, mu2) -> dict:
    """Dimensions showing why the constrained space cannot serve as the sector space.

    ``image`` is ``dim(mu1 A + mu2 A)`` for ``A = {c_{m-1} = 0}``, ``products``
    is ``dim(A A)``, ``contained`` says whether every product splits.
    """
    mu1 = _check_rational_mu(mu1, m, "mu1")
    mu2 = _check_rational_mu(mu2, m, "mu2")
    A = [{a: Fraction(1)} for a in rational_exponents(m)]
    cols = [_times(f, mu, 1) for mu in (mu1, mu2) for f in A]
    prods = [{a + b: Fraction(1)} for a in rational_exponents(m) for b in rational_exponents(m)]
    rows = sorted({e for c in cols + prods for e in c})
    img = [[c.get(e, 0) for c in cols] for e in rows]
    both = [[c.get(e, 0) for c in cols + prods] for e in rows]
    pr = [[c.get(e, 0) for c in prods] for e in rows]
    return dict(image=exact_rank(img), products=exact_rank(pr), order_2m=2 * m,
                contained=exact_rank(both) == exact_rank(img), unique=exact_rank(img) == 2 * m)


def rational_structure_constants(n: int, m: int, mu1, mu2) -> ExactPencil:
    """Exact brackets for the rational degeneration; ``mu`` given as coefficient lists in z.

    The matrix space is sl_n with polynomial coefficients of degree < m.  Products
    have degree <= 2m - 2 and split uniquely as ``mu1 P + mu2 Q`` precisely when
    the degree-m resultant of ``mu1, mu2`` is nonzero.
    """
    if n < 2 or m < 2:
        raise DegenerateError("need n >= 2 and m >= 2 (m = 1 admits no pair without a common zero)")
    mu1 = _check_rational_mu(mu1, m, "mu1")
    mu2 = _check_rational_mu(mu2, m, "mu2")
    res = resultant_m(mu1, mu2, m)
    if res == 0:
        raise DegenerateError("resultant is zero: mu1 and mu2 have a common zero")
    basis = [{j: Fraction(1)} for j in range(m)]
    splitter = _Splitter(mu1, mu2, lambda key: basis, 1)
    sl_labels, table = sl_elementary(n)
    labels = [(A, i) for A in sl_labels for i in range(m)]

    def decompose(A, i, B, j, C):
        return splitter.split(None, _product(basis[i], basis[j]))

    sp = assemble_brackets(labels, lambda A, B: table[(A, B)], decompose, 2)
    N = len(labels)
    return ExactPencil("rational", n, m, tuple(mu1), tuple(mu2), labels,
                       ExactStructure(N, sp[0], "[,]_1 rational"),
                       ExactStructure(N, sp[1], "[,]_2 rational"),
                       dict(resultant=str(res)))


def rational_split_check(pencil: ExactPencil, index: int) -> bool:
    """``mu1 * z^index`` must split as ``(z^index, 0)`` exactly."""
    m = pencil.m
    splitter = _Splitter(pencil.mu1, pencil.mu2, lambda key: [{j: Fraction(1)} for j in range(m)], 1)
    P, Q = splitter.split(None, _times({index: Fraction(1)}, pencil.mu1, 1))
    return list(P) == [Fraction(int(i == index)) for i in range(m)] and not any(Q)


# ---------------------------------------------------------------------------
# trigonometric family
# ---------------------------------------------------------------------------

def trig_sector_basis(n: int, m: int, sector) -> list[dict]:
    """Scalar functions of one trig sector as maps from exponents of ``w^{1/n}`` to Q(zeta_n).

    For ``beta = r != 0`` the functions are ``w^{(r + n j)/n}``, ``j < m``.  For
    ``r = 0`` they are ``w^j`` (``0 < j < m``) and ``1 + (-1)^m zeta^{-alpha} w^m``,
    so the product of the ``w``-roots equals ``zeta^alpha``.
    """
    alpha, r = sector
    one = Cyclo.rational(n, 1)
    if r:
        return [{r + n * j: one} for j in range(m)]
    out = [{n * j: one} for j in range(1, m)]
    out.append({0: one, n * m: Cyclo.zeta(n, -alpha) * ((-1) ** m)})
    return out


def _check_trig_mu(mu, n, m, name):
    mu = [Cyclo.rational(n, v) if not isinstance(v, Cyclo) else v for v in mu]
    mu = mu + [Cyclo.rational(n, 0)] * max(0, m + 1 - len(mu))
    if len(mu) > m + 1 or mu[m] != mu[0] * ((-1) ** m):
        raise DegenerateError(f"{name} violates a_m = (-1)^m a_0")
    return mu


def trig_dimension(n: int, m: int) -> int:
    return len(sectors(n)) * m


def trig_structure_constants(n: int, m: int, mu1, mu2) -> ExactPencil:
    """Exact brackets for the trigonometric degeneration (k = 1); ``mu`` as coefficient lists in w."""
    check_nk(n, 1)
    if m < 2:
        raise DegenerateError("m = 1 admits no pair without a common zero")
    mu1 = _check_trig_mu(mu1, n, m, "mu1")
    mu2 = _check_trig_mu(mu2, n, m, "mu2")
    labels = [(s, j) for s in sectors(n) for j in range(m)]
    bases = {s: trig_sector_basis(n, m, s) for s in sectors(n)}
    splitter = _Splitter(mu1, mu2, lambda s: bases[s], n)
    for s in sectors(n):
        if splitter.rank(s) != 2 * m:
            raise DegenerateError(f"mu1 and mu2 have a common zero (sector {s})")
    cache: dict = {}

    def sl_table(A, B):
        if (A, B) not in cache:
            (a1, b1), (a2, b2) = A, B
            coeff = Cyclo.zeta(n, b1 * a2) - Cyclo.zeta(n, b2 * a1)
            C = ((a1 + a2) % n, (b1 + b2) % n)
            cache[(A, B)] = [] if C == (0, 0) or not coeff else [(C, coeff)]
        return cache[(A, B)]

    def decompose(A, i, B, j, C):
        # exponents of w^{1/n} add without reduction: r1 + r2 >= n carries a factor w
        return splitter.split(C, _product(bases[A][i], bases[B][j]))

    sp = assemble_brackets(labels, sl_table, decompose, 2)
    N = len(labels)
    return ExactPencil("trig", n, m, tuple(mu1), tuple(mu2), labels,
                       ExactStructure(N, sp[0], "[,]_1 trig"),
                       ExactStructure(N, sp[1], "[,]_2 trig"))


def trig_space_closure(n: int, m: int) -> dict:
    """Check that commutators of the order-m matrix space land in the order-2m space.

    Returns the space dimension and the number of basis pairs whose product
    leaves the target sector's order-2m space (0 expected).
    """
    labels = [(s, j) for s in sectors(n) for j in range(m)]
    small = {s: trig_sector_basis(n, m, s) for s in sectors(n)}
    big = {s: trig_sector_basis(n, 2 * m, s) for s in sectors(n)}
    bad = 0
    for (A, i), (B, j) in itertools.product(labels, repeat=2):
        (a1, b1), (a2, b2) = A, B
        C = ((a1 + a2) % n, (b1 + b2) % n)
        if C == (0, 0) or not (Cyclo.zeta(n, b1 * a2) - Cyclo.zeta(n, b2 * a1)):
            continue
        prod = _product(small[A][i], small[B][j])
        rows = sorted({e for f in big[C] for e in f} | set(prod))
        M = [[f.get(e, 0) for f in big[C]] for e in rows]
        aug = [row + [prod.get(e, 0)] for row, e in zip(M, rows)]
        if field_rank(aug) != field_rank(M):
            bad += 1
    return dict(dim=len(labels), outside=bad)


# ---------------------------------------------------------------------------
# minimal indices of the Poisson pencil
# ---------------------------------------------------------------------------

def _block_toeplitz(A, B, d):
    """Matrix of v(u) = sum_{i<=d} v_i u^i  ->  (A + u B) v(u)."""
    N = len(A)
    rows = []
    for r in range(d + 2):
        for i in range(N):
            row = []
            for c in range(d + 1):
                if r == c:
                    row.extend(A[i])
                elif r == c + 1:
                    row.extend(B[i])
                else:
                    row.extend([0] * N)
            rows.append(row)
    return rows


def minimal_indices_from_kernels(kernel_dims: list[int]) -> list[int]:
    """Indices from ``k_d = dim`` of the polynomial kernel of degree <= d, d = 0..D."""
    prev_inc = 0
    prev = 0
    out = []
    for d, k in enumerate(kernel_dims):
        inc = k - prev
        out.extend([d] * (inc - prev_inc))
        prev_inc, prev = inc, k
    return sorted(out)


@dataclass
class MinimalIndexLedger:
    """Kronecker data of ``Pi_1(x) + u Pi_2(x)`` at one generic point.

    ``corank`` is the generic kernel dimension; ``indices`` are the minimal
    indices found up to degree ``len(kernel_dims) - 1``.  The sum of
    ``2 e + 1`` equals the dimension exactly when the pencil has no Jordan part.
    """

    indices: list
    kernel_dims: list
    corank: int
    gz_sum: int
    dimension: int
    exact: bool

    @property
    def complete(self) -> bool:
        return len(self.indices) == self.corank

    @property
    def ok(self) -> bool:
        return self.complete and self.gz_sum == self.dimension


def _ledger(kernel_dim, corank, N, d_max, exact) -> MinimalIndexLedger:
    dims: list[int] = []
    idx: list[int] = []
    for d in range(d_max + 1):
        dims.append(kernel_dim(d))
        idx = minimal_indices_from_kernels(dims)
        if len(idx) >= corank:
            break
    return MinimalIndexLedger(idx, dims, corank, sum(2 * e + 1 for e in idx), N, exact)


def exact_degree_ledger(c1: ExactStructure, c2: ExactStructure, d_max: int = 8, seed: int = 1) -> MinimalIndexLedger:
    """Minimal indices of ``Pi_1(x) + u Pi_2(x)`` at a random rational point, exactly."""
    if not (c1.is_rational() and c2.is_rational()):
        raise DegenerateError("exact ledger needs rational constants; use numeric_degree_ledger")
    rng = random.Random(seed)
    N = c1.dim
    x = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(N)]
    A = [[as_fraction(v) for v in r] for r in c1.poisson_matrix(x)]
    B = [[as_fraction(v) for v in r] for r in c2.poisson_matrix(x)]
    u = Fraction(rng.randint(1, 97), rng.randint(1, 13))
    corank = N - exact_rank([[a + u * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)])
    return _ledger(lambda d: (d + 1) * N - exact_rank(_block_toeplitz(A, B, d)), corank, N, d_max, True)


def numeric_degree_ledger(c1: LieStructure, c2: LieStructure, d_max: int = 8, seed: int = 1,
                          tol: float = 1e-9) -> MinimalIndexLedger:
    rng = np.random.default_rng(seed)
    N = c1.dim
    x = rng.normal(size=N) + 1j * rng.normal(size=N)
    A = np.einsum("ijk,k->ij", c1.c, x)
    B = np.einsum("ijk,k->ij", c2.c, x)

    def rank(T):
        s = np.linalg.svd(T, compute_uv=False)
        return int(np.sum(s > tol * s[0]))

    u = complex(rng.normal(), rng.normal())
    corank = N - rank(A + u * B)
    return _ledger(lambda d: (d + 1) * N - rank(np.array(_block_toeplitz(A.tolist(), B.tolist(), d), dtype=complex)),
                   corank, N, d_max, False)


def sparse_rank(rows: list[dict], ncols: int) -> int:
    """Rank over Q of a sparse matrix given as ``{column: rational}`` rows."""
    QQ = sympy.QQ
    data = {i: {j: QQ.convert(Fraction(v)) for j, v in r.items() if v} for i, r in enumerate(rows)}
    data = {i: r for i, r in data.items() if r}
    if not data:
        return 0
    return DomainMatrix(data, (len(rows), ncols), QQ).rank()


def joint_quadratic_casimirs(c1: ExactStructure, c2: ExactStructure) -> int:
    """Dimension of quadratic forms ad-invariant for both brackets, exactly."""
    N = c1.dim
    pairs = [(a, b) for a in range(N) for b in range(a, N)]
    col = {p: i for i, p in enumerate(pairs)}
    rows = []
    for tag, c in enumerate((c1, c2)):
        # {Q, x_j} = sum_i dQ/dx_i c^k_ij x_k; the coefficient of x_a x_k must vanish
        eqs: dict = {}
        for (i, j, k), v in c.entries.items():
            v = as_fraction(v)
            for a in range(N):
                factor = 2 if a == i else 1
                eq = eqs.setdefault((j, min(a, k), max(a, k)), {})
                ci = col[(min(i, a), max(i, a))]
                eq[ci] = eq.get(ci, 0) + factor * v
        rows.extend(eqs.values())
    return len(pairs) - sparse_rank(rows, len(pairs))


@dataclass
class CrossReport:
    dims_match: bool
    elliptic_indices: list
    exact_indices: list
    exact_jacobi: tuple
    exact_compatibility: int
    elliptic_residuals: dict

    @property
    def ok(self) -> bool:
        return (self.dims_match and self.elliptic_indices == self.exact_indices
                and self.exact_jacobi == (0, 0) and self.exact_compatibility == 0)


def cross_validate(elliptic, exact: ExactPencil) -> CrossReport:
    """Compare an elliptic pencil with an exact degenerate instance of the same (n, m)."""
    from .lie import compatibility_residual, jacobiator
    el = numeric_degree_ledger(elliptic.c1, elliptic.c2)
    ex = exact_degree_ledger(exact.c1, exact.c2) if exact.c1.is_rational() and exact.c2.is_rational() \
        else numeric_degree_ledger(exact.c1.to_lie(), exact.c2.to_lie())
    res = dict(jacobi_c1=jacobiator(elliptic.c1), jacobi_c2=jacobiator(elliptic.c2),
               compatibility=compatibility_residual(elliptic.c1, elliptic.c2))
    return CrossReport(elliptic.dim == exact.dim, el.indices, ex.indices,
                       (exact_jacobi_defects(exact.c1), exact_jacobi_defects(exact.c2)),
                       exact_compatibility_defects(exact.c1, exact.c2), res)
