"""Scalar theta functions of order m as truncated Fourier series.

An element of Theta_m(tau) is written as ``f(z) = sum_r a_r exp(2 pi i r z)``.
The two functional equations

    f(z + 1) = f(z),    f(z + tau) = (-1)^m exp(-2 pi i m z) f(z)

are equivalent to the coefficient recurrence
``a_{r+m} = (-1)^m exp(2 pi i r tau) a_r``, so a function is fixed by its
``m`` seed coefficients ``a_0, ..., a_{m-1}``.  The generator ``theta`` of
Theta_1 is the seed ``a_0 = 1``; it vanishes at the lattice points.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI_I = 2j * np.pi

# evaluation is guaranteed for |Im z| <= EVAL_WINDOW * Im tau
EVAL_WINDOW = 3.0
MAX_TRUNCATION = 4000
DEFAULT_TRUNC_TOL = 1e-17

# root finding
GRID_SIZE = 64
DEDUP_DIST = 1e-6
BOUNDARY_SAMPLES = 2048
REGULARITY_DELTA = 1e-4
ANCHOR = 0.013 + 0.017j


class ThetaError(ValueError):
    """Raised when a theta-space construction or root search fails."""


@dataclass(frozen=True)
class Lattice:
    """The lattice generated by 1 and ``tau``."""

    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        if not (math.isfinite(tau.real) and math.isfinite(tau.imag)):
            raise ThetaError(f"tau must be finite, got {tau}")
        if tau.imag <= 0:
            raise ThetaError(f"Im(tau) must be positive, got {tau}")
        object.__setattr__(self, "tau", tau)

    @property
    def nome(self) -> complex:
        return cmath.exp(TWO_PI_I * self.tau)

    def coords(self, z):
        """Real coordinates (s, t) with ``z = s + t*tau``."""
        z = np.asarray(z, dtype=complex)
        t = z.imag / self.tau.imag
        s = z.real - t * self.tau.real
        return s, t

    def reduce(self, z, anchor: complex = ANCHOR):
        """Representative of ``z`` in the parallelogram anchored at ``anchor``."""
        s, t = self.coords(np.asarray(z, dtype=complex) - anchor)
        return anchor + (s - np.floor(s)) + (t - np.floor(t)) * self.tau

    def nearest_point(self, z):
        """Closest lattice point to ``z``."""
        z = np.asarray(z, dtype=complex)
        s, t = self.coords(z)
        s0, t0 = np.floor(s), np.floor(t)
        best = None
        best_d = None
        for ds in (0.0, 1.0):
            for dt in (0.0, 1.0):
                for ex in (-1.0, 0.0, 1.0):
                    p = (s0 + ds + ex) + (t0 + dt) * self.tau
                    d = np.abs(z - p)
                    if best is None:
                        best, best_d = p, d
                    else:
                        better = d < best_d
                        best = np.where(better, p, best)
                        best_d = np.where(better, d, best_d)
        return best

    def distance(self, z, w=0.0):
        """Distance between ``z`` and ``w`` modulo the lattice."""
        d = np.asarray(z, dtype=complex) - np.asarray(w, dtype=complex)
        return np.abs(d - self.nearest_point(d))


def truncation_order(m: int, lattice: Lattice, trunc_tol: float = DEFAULT_TRUNC_TOL) -> int:
    """Smallest ``N`` such that all dropped terms are below ``trunc_tol``.

    The bare Gaussian bound ``|q|^(N^2/(2m)) < tol`` is widened by the linear
    drift of ``exp(2 pi i r z)`` over the evaluation window.
    """
    if trunc_tol <= 0 or trunc_tol >= 1:
        raise ThetaError("trunc_tol must lie in (0, 1)")
    log_inv = math.log(1.0 / trunc_tol)
    y = lattice.tau.imag
    n = m * (1 + 2 * EVAL_WINDOW) / 2 + math.sqrt(m * log_inv / (math.pi * y))
    n = int(math.ceil(n)) + 1
    if n > MAX_TRUNCATION:
        raise ThetaError(
            f"truncation budget exceeded (N={n}); |q| = {abs(lattice.nome):.6f} is too close to 1"
        )
    return n


def _seed_coefficients(m: int, tau: complex, indices: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    # closed form of the recurrence: a_{j+sm} = (-1)^{ms} exp(2 pi i tau (s j + m s(s-1)/2)) a_j
    j = np.mod(indices, m)
    s = (indices - j) // m
    expo = TWO_PI_I * tau * (s * j + m * s * (s - 1) / 2.0)
    sign = np.where((m * s) % 2 == 0, 1.0, -1.0)
    return sign * np.exp(expo) * seeds[j]


@dataclass(frozen=True, eq=False)
class ThetaFunction:
    """An element of Theta_m(tau), stored by its truncated Fourier coefficients."""

    order: int
    lattice: Lattice
    indices: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)

    @classmethod
    def from_seeds(cls, m: int, lattice: Lattice, seeds: Sequence[complex],
                   trunc_tol: float = DEFAULT_TRUNC_TOL) -> "ThetaFunction":
        if m < 1:
            raise ThetaError(f"order must be positive, got {m}")
        seeds = np.asarray(seeds, dtype=complex)
        if seeds.shape != (m,):
            raise ThetaError(f"expected {m} seed coefficients, got shape {seeds.shape}")
        if not np.all(np.isfinite(seeds)):
            raise ThetaError("seed coefficients must be finite")
        n = truncation_order(m, lattice, trunc_tol)
        idx = np.arange(-n, n + m)
        return cls(m, lattice, idx, _seed_coefficients(m, lattice.tau, idx, seeds))

    @property
    def seeds(self) -> np.ndarray:
        pos = [int(np.searchsorted(self.indices, j)) for j in range(self.order)]
        return self.coeffs[pos]

    def __call__(self, z, deriv: int = 0):
        return self.eval(z, deriv)

    def eval(self, z, deriv: int = 0):
        """Value of the ``deriv``-th derivative at ``z`` (scalar or array)."""
        if deriv < 0:
            raise ThetaError("deriv must be non-negative")
        z = np.asarray(z, dtype=complex)
        nz = self.coeffs != 0
        r = self.indices[nz]
        logc = np.log(self.coeffs[nz])
        if deriv:
            # (2 pi i r)^d folded into the log; r = 0 drops out
            keep = r != 0
            r, logc = r[keep], logc[keep]
            logc = logc + deriv * np.log(TWO_PI_I * r)
        expo = logc + TWO_PI_I * np.multiply.outer(z, r)
        return np.exp(expo).sum(axis=-1)

    def _combine(self, other: "ThetaFunction", a: complex, b: complex) -> "ThetaFunction":
        if self.order != other.order or self.lattice != other.lattice:
            raise ThetaError("cannot combine theta functions of different order or lattice")
        lo = min(self.indices[0], other.indices[0])
        hi = max(self.indices[-1], other.indices[-1])
        idx = np.arange(lo, hi + 1)
        c = np.zeros(idx.size, dtype=complex)
        c[self.indices - lo] += a * self.coeffs
        c[other.indices - lo] += b * other.coeffs
        return ThetaFunction(self.order, self.lattice, idx, c)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, scalar):
        return ThetaFunction(self.order, self.lattice, self.indices, complex(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def is_zero(self, tol: float = 1e-14) -> bool:
        return float(np.max(np.abs(self.seeds))) <= tol

    def recurrence_residual(self) -> float:
        """Max deviation from ``a_{r+m} = (-1)^m e^{2 pi i r tau} a_r`` over stored indices."""
        m, c, r = self.order, self.coeffs, self.indices
        lhs = c[m:]
        rhs = (-1) ** m * np.exp(TWO_PI_I * r[:-m] * self.lattice.tau) * c[:-m]
        scale = max(float(np.max(np.abs(c))), 1e-300)
        return float(np.max(np.abs(lhs - rhs))) / scale


def theta_generator(lattice: Lattice, trunc_tol: float = DEFAULT_TRUNC_TOL) -> ThetaFunction:
    """The fixed generator of Theta_1 (seed a_0 = 1), with its zero at z = 0."""
    return ThetaFunction.from_seeds(1, lattice, [1.0], trunc_tol)


def build_theta_space(m: int, lattice: Lattice, trunc_tol: float = DEFAULT_TRUNC_TOL) -> list[ThetaFunction]:
    """Basis ``e_0, ..., e_{m-1}`` of Theta_m with seeds ``a_i = delta_ij``."""
    if m < 1:
        raise ThetaError(f"m must be >= 1, got {m}")
    basis = [ThetaFunction.from_seeds(m, lattice, np.eye(m)[j], trunc_tol) for j in range(m)]
    pts = test_grid(lattice, 5)
    mat = np.array([f(pts) for f in basis]).T
    mat = mat / np.linalg.norm(mat, axis=0)
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] < 1e-6:
        raise ThetaError(f"theta basis degenerate (smallest singular value {sv[-1]:.3e})")
    return basis


def test_grid(lattice: Lattice, k: int = 5, anchor: complex = 0.11 + 0.07j) -> np.ndarray:
    """``k*k`` points on a sheared grid inside the fundamental parallelogram."""
    s = (np.arange(k) + 0.5) / k
    S, T = np.meshgrid(s, s, indexing="ij")
    return (anchor + S + T * lattice.tau).ravel()


def quasi_periodicity_residual(f: ThetaFunction, pts=None) -> tuple[float, float]:
    """Relative residuals of the two functional equations on a grid."""
    tau = f.lattice.tau
    if pts is None:
        pts = test_grid(f.lattice, 5)
    v = f(pts)
    scale = max(float(np.max(np.abs(v))), 1e-300)
    r1 = np.max(np.abs(f(pts + 1) - v)) / scale
    # the tau-shifted values are larger by |exp(-2 pi i m z)|; compare at their scale
    shifted = f(pts + tau)
    factor = (-1) ** f.order * np.exp(-TWO_PI_I * f.order * pts)
    r2 = np.max(np.abs(shifted - factor * v)) / max(float(np.max(np.abs(shifted))), 1e-300)
    return float(r1), float(r2)


def theta_product(roots: Sequence[complex], lattice: Lattice, scale: complex = 1.0,
                  trunc_tol: float = DEFAULT_TRUNC_TOL) -> ThetaFunction:
    """``scale * prod_i theta(z - x_i)`` as an element of Theta_m.

    The roots must sum to a lattice point; the last root is moved by that
    lattice vector so that the product genuinely lies in Theta_m.
    """
    roots = np.array(roots, dtype=complex)
    m = roots.size
    if m < 1:
        raise ThetaError("need at least one root")
    total = roots.sum()
    lp = complex(lattice.nearest_point(total))
    if abs(total - lp) > 1e-8:
        raise ThetaError(f"roots sum to {total}, which is not a lattice point")
    roots[-1] -= lp
    # wide order-1 coefficient window so the seed convolution is exact
    n1 = truncation_order(1, lattice, trunc_tol) + 2 * m + 4
    r = np.arange(-n1, n1 + 1)
    base = _seed_coefficients(1, lattice.tau, r, np.array([1.0 + 0j]))
    conv = np.array([1.0 + 0j])
    lo = 0
    for x in roots:
        # x may lie anywhere in the parallelogram; scale magnitudes are bounded
        shifted = base * np.exp(-TWO_PI_I * r * x)
        conv = np.convolve(conv, shifted)
        lo += -n1
    seeds = np.array([conv[j - lo] for j in range(m)])
    return ThetaFunction.from_seeds(m, lattice, scale * seeds, trunc_tol)


def fit_theta(values_fn, m: int, lattice: Lattice, trunc_tol: float = DEFAULT_TRUNC_TOL):
    """Least-squares coordinates of a callable in the seed basis of Theta_m.

    Returns ``(ThetaFunction, residual)``, the residual measured on a
    held-out grid and relative to the sup of the values there.
    """
    basis = build_theta_space(m, lattice, trunc_tol)
    pts = test_grid(lattice, max(3, int(math.ceil(math.sqrt(3 * m)))), anchor=0.031 + 0.047j)
    mat = np.array([b(pts) for b in basis]).T
    coef, *_ = np.linalg.lstsq(mat, values_fn(pts), rcond=None)
    f = ThetaFunction.from_seeds(m, lattice, coef, trunc_tol)
    val = test_grid(lattice, 5, anchor=0.173 + 0.091j)
    ref = values_fn(val)
    res = float(np.max(np.abs(f(val) - ref)) / max(np.max(np.abs(ref)), 1e-300))
    return f, res


# ---------------------------------------------------------------------------
# roots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    multiplicity_flags: np.ndarray
    lattice: Lattice
    boundary_count: int = 0

    def __len__(self):
        return len(self.roots)

    @property
    def root_sum_residual(self) -> float:
        return float(self.lattice.distance(self.roots.sum()))

    def min_separation(self) -> float:
        r = self.roots
        if r.size < 2:
            return math.inf
        d = [float(self.lattice.distance(r[i], r[j]))
             for i in range(r.size) for j in range(i + 1, r.size)]
        return min(d)

    def zero_sum_representatives(self) -> np.ndarray:
        """Root representatives whose plain sum is exactly zero."""
        r = self.roots.copy()
        r[-1] -= complex(self.lattice.nearest_point(r.sum()))
        # nearest_point removed the lattice part; the leftover is roundoff
        r[-1] -= r.sum()
        return r


def _periodic_modulus(f: ThetaFunction, z):
    # |f| * exp(-pi m (y^2 - y Im tau)/Im tau) is doubly periodic
    y = np.asarray(z).imag
    Y = f.lattice.tau.imag
    return np.abs(f(z)) * np.exp(-np.pi * f.order * (y * y - y * Y) / Y)


def _newton(f: ThetaFunction, z0: complex, iters: int = 60) -> tuple[complex, bool]:
    # Newton on f/f', quadratically convergent at multiple roots as well
    z = complex(z0)
    for _ in range(iters):
        f0, f1, f2 = f(z), f(z, 1), f(z, 2)
        den = f1 * f1 - f0 * f2
        if den == 0:
            return z, abs(f0) == 0
        step = f0 * f1 / den
        z -= step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            return z, True
    return z, abs(step) < 1e-10


def _winding(f: ThetaFunction, center: complex, radius: float, samples: int = 256) -> float:
    th = 2 * np.pi * np.arange(samples) / samples
    pts = center + radius * np.exp(1j * th)
    ratio = f(pts, 1) / f(pts)
    dz = 1j * radius * np.exp(1j * th) * (2 * np.pi / samples)
    return float(np.real(np.sum(ratio * dz) / (2j * np.pi)))


def boundary_count(f: ThetaFunction, anchor: complex = ANCHOR,
                   samples: int = BOUNDARY_SAMPLES) -> tuple[float, float]:
    """Argument-principle zero count over the parallelogram boundary (trapezoidal).

    Also returns the smallest normalized modulus seen on the boundary.
    """
    tau = f.lattice.tau
    per = samples // 4
    corners = [anchor, anchor + 1, anchor + 1 + tau, anchor + tau, anchor]
    total = 0.0 + 0j
    min_mod = math.inf
    for a, b in zip(corners[:-1], corners[1:]):
        t = (np.arange(per) + 0.5) / per
        pts = a + (b - a) * t
        v = f(pts)
        min_mod = min(min_mod, float(np.min(_periodic_modulus(f, pts))))
        total += np.sum(f(pts, 1) / v) * (b - a) / per
    return float(np.real(total / (2j * np.pi))), min_mod


def find_roots(f: ThetaFunction, anchor: complex = ANCHOR, _retry: int = 0) -> RootSet:
    """The ``m`` roots of ``f`` modulo the lattice, with multiplicity."""
    lat, m = f.lattice, f.order
    if f.is_zero():
        raise ThetaError("cannot locate roots of the zero function")
    count, min_mod = boundary_count(f, anchor)
    scale = float(np.max(_periodic_modulus(f, test_grid(lat, 8))))
    if min_mod < 1e-6 * scale or abs(count - m) > 1e-3:
        if _retry >= 4:
            raise ThetaError(f"argument-principle count {count:.4f} != {m} after boundary shifts")
        return find_roots(f, anchor + (0.0731 + 0.0519j) * (_retry + 1), _retry + 1)

    g = (np.arange(GRID_SIZE) + 0.5) / GRID_SIZE
    S, T = np.meshgrid(g, g, indexing="ij")
    Z = anchor + S + T * lat.tau
    H = _periodic_modulus(f, Z)
    is_min = np.ones_like(H, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= H <= np.roll(np.roll(H, di, axis=0), dj, axis=1)
    cand = Z[is_min]
    cand = cand[np.argsort(H[is_min])][: 4 * m + 4]

    found: list[complex] = []
    for z0 in cand:
        z, ok = _newton(f, z0)
        if not ok or not np.isfinite(z):
            continue
        z = complex(lat.reduce(z, anchor))
        # accept only genuine zeros
        if _periodic_modulus(f, z) > 1e-7 * scale:
            continue
        if all(lat.distance(z, w) > DEDUP_DIST for w in found):
            found.append(z)

    roots: list[complex] = []
    flags: list[bool] = []
    for i, z in enumerate(found):
        others = [float(lat.distance(z, w)) for j, w in enumerate(found) if j != i]
        rad = min([0.05] + [0.3 * d for d in others])
        mult = int(round(_winding(f, z, rad)))
        mult = max(mult, 1)
        clustered = mult > 1 or (min(others) if others else math.inf) < REGULARITY_DELTA
        roots.extend([z] * mult)
        flags.extend([clustered] * mult)
    if len(roots) != m:
        if _retry < 4:
            return find_roots(f, anchor + (0.0731 + 0.0519j) * (_retry + 1), _retry + 1)
        raise ThetaError(f"found {len(roots)} roots with multiplicity, expected {m}")
    rs = RootSet(np.array(roots), np.array(flags), lat, int(round(count)))
    if rs.root_sum_residual > 1e-6:
        raise ThetaError(f"root sum is {rs.root_sum_residual:.2e} away from the lattice")
    return rs


def pencil_member(mu1: ThetaFunction, mu2: ThetaFunction, u: complex) -> ThetaFunction:
    return mu2 - complex(u) * mu1


def pencil_roots(mu1: ThetaFunction, mu2: ThetaFunction, u: complex,
                 delta: float = REGULARITY_DELTA) -> tuple[RootSet, bool]:
    """Roots of ``mu2 - u mu1`` and whether ``u`` is a regular value."""
    if mu1.order != mu2.order or mu1.lattice != mu2.lattice:
        raise ThetaError("pencil ends must share order and lattice")
    g = pencil_member(mu1, mu2, u)
    ref = max(float(np.max(np.abs(mu1.seeds))), float(np.max(np.abs(mu2.seeds))))
    if g.is_zero(1e-13 * ref):
        raise ThetaError(f"mu2 - u*mu1 vanishes identically at u={u}")
    rs = find_roots(g)
    regular = (not bool(np.any(rs.multiplicity_flags))) and rs.min_separation() > delta
    return rs, regular


def branch_value(mu1: ThetaFunction, mu2: ThetaFunction, z0: complex, iters: int = 50) -> tuple[complex, complex]:
    """Newton on ``(z, u)`` for a double root of ``mu2 - u mu1`` started near ``z0``.

    Returns ``(z, u)``; at such ``u`` the pencil member is not regular.
    """
    z = complex(z0)
    a = complex(mu1(z))
    if abs(a) < 1e-12:
        raise ThetaError("start point is a zero of mu1")
    u = complex(mu2(z)) / a
    for _ in range(iters):
        f0 = complex(mu2(z)) - u * complex(mu1(z))
        f1 = complex(mu2.eval(z, 1)) - u * complex(mu1.eval(z, 1))
        f2 = complex(mu2.eval(z, 2)) - u * complex(mu1.eval(z, 2))
        J = np.array([[f1, -complex(mu1(z))], [f2, -complex(mu1.eval(z, 1))]])
        step = np.linalg.solve(J, [f0, f1])
        z, u = z - step[0], u - step[1]
        if abs(step[0]) + abs(step[1]) < 1e-15 * (1 + abs(u)):
            break
    return complex(mu1.lattice.reduce(z)), complex(u)
