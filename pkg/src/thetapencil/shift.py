"""Argument shift for quadratic Poisson brackets and the eight-dimensional example.

A quadratic bracket ``{x_i, x_j} = G[i, j, p, q] x_p x_q`` (``G`` symmetric in
``p, q``) shifted by ``x -> x + u a`` becomes
``G(x, x) + 2 u G(x, a) + u^2 G(a, a)``.  When ``G(a, a) = 0`` (``a`` admissible)
the middle term is a linear bracket compatible with the quadratic one, and a
linear space of admissible vectors yields a linear space of pairwise
compatible linear brackets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .lie import (LieStructure, _nullspace, center_vectors, compatibility_residual, is_casimir,
                  jacobiator, killing_semisimple, quotient_by)
from .poly import PolyElement

N83 = 8


class ShiftError(ValueError):
    pass


# ---------------------------------------------------------------------------
# quadratic brackets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuadraticPoisson:
    gamma: np.ndarray = field(repr=False)  # [i, j, p, q]
    label: str = ""

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]

    def norm(self) -> float:
        return float(np.abs(self.gamma).max())

    def form(self, i: int, j: int) -> PolyElement:
        """``{x_i, x_j}`` as a polynomial."""
        return PolyElement.from_tensor(self.gamma[i, j])

    def values(self, x) -> np.ndarray:
        """Matrix ``{x_i, x_j}(x)``."""
        return np.einsum("ijpq,p,q->ij", self.gamma, x, x)

    def jacobi_residual(self) -> float:
        """Largest cubic coefficient of ``{{x_i,x_j},x_k} + cyc``, relative to ``|G|^2``."""
        T = 2 * np.einsum("ijpa,pkbc->ijkabc", self.gamma, self.gamma)
        J = T + T.transpose(1, 2, 0, 3, 4, 5) + T.transpose(2, 0, 1, 3, 4, 5)
        sym = sum(J.transpose(0, 1, 2, *[3 + q for q in perm])
                  for perm in itertools.permutations(range(3))) / 6
        return float(np.abs(sym).max()) / self.norm() ** 2

    def bracket(self, f: PolyElement, g: PolyElement) -> PolyElement:
        n = self.dim
        df = {i: f.diff(i) for i in range(n) if np.any(f.exps[:, i] > 0)}
        dg = {j: g.diff(j) for j in range(n) if np.any(g.exps[:, j] > 0)}
        out = PolyElement.zero(n)
        for i, fi in df.items():
            for j, gj in dg.items():
                if np.any(self.gamma[i, j]):
                    out = out + fi * gj * self.form(i, j)
        return out

    def casimir_defect(self, f: PolyElement) -> float:
        """``max_j |{f, x_j}|`` relative to ``|f| |G|``."""
        n = self.dim
        worst = max(self.bracket(f, PolyElement.var(n, j)).max_abs() for j in range(n))
        return worst / (max(f.max_abs(), 1e-300) * self.norm())

    def admissibility(self, a) -> float:
        """``max_ij |G[i, j](a, a)|``; zero exactly for admissible vectors."""
        a = np.asarray(a, dtype=float)
        return float(np.abs(np.einsum("ijpq,p,q->ij", self.gamma, a, a)).max())

    def linear_part(self, a) -> LieStructure:
        """The ``u^1`` term: ``{x_i, x_j}_1 = 2 G[i, j](a, x)``."""
        a = np.asarray(a, dtype=float)
        return LieStructure(2 * np.einsum("ijpq,q->ijp", self.gamma, a).astype(complex), "shifted")


def _put(gamma, i, j, terms):
    n = gamma.shape[0]
    Q = np.zeros((n, n))
    for c, p, q in terms:
        Q[p % n, q % n] += c / 2
        Q[q % n, p % n] += c / 2
    gamma[i % n, j % n] += Q
    gamma[j % n, i % n] -= Q


@dataclass(frozen=True, eq=False)
class Q83Instance:
    k1: float
    k2: float
    p: tuple
    poisson: QuadraticPoisson

    def casimirs(self) -> list[PolyElement]:
        """The four quartic-free quadratic Casimirs ``C_0..C_3``."""
        k1, k2, p3 = self.k1, self.k2, self.p[2]
        out = []
        for i in range(4):
            t = np.zeros((N83, N83))
            for c, a, b in ((k2, i, i), (k2, i + 4, i + 4), (p3, i + 3, i + 5), (p3, i + 1, i + 7),
                            (k1, i + 2, i + 6)):
                t[a % N83, b % N83] += c
            out.append(PolyElement.from_tensor(t))
        return out


def q83_parameters(k1: float, k2: float) -> tuple[float, float, float, float]:
    if not (k1 > 0 and k2 > 0):
        raise ShiftError("k1 and k2 must be positive")
    s = 4 * k2**2 + k1**2
    p1 = -0.5 * math.sqrt(k1 / k2) * math.sqrt(s)
    p2 = math.sqrt(k2 / k1) * math.sqrt(s)
    p3 = (k1 * k2) ** 0.25 * s**0.25
    p4 = (k1 * k2) ** -0.25 * s**0.75
    return p1, p2, p3, p4


def build_q83(k1: float = 1.0, k2: float = 1.0) -> Q83Instance:
    """The eight-variable quadratic bracket, indices mod 8."""
    p1, p2, p3, p4 = q83_parameters(k1, k2)
    g = np.zeros((N83,) * 4)
    for i in range(N83):
        _put(g, i, i + 1, [(p1, i, i + 1), (k1, i + 2, i + 7), (-2 * k2, i + 3, i + 6), (p2, i + 4, i + 5)])
        _put(g, i, i + 2, [(p3, i + 1, i + 1), (-p3, i + 5, i + 5)])
        _put(g, i, i + 3, [(p1, i, i + 3), (k1, i + 5, i + 6), (-2 * k2, i + 1, i + 2), (p2, i + 4, i + 7)])
    for i in range(4):
        # {x_i, x_{i+4}} for i >= 4 is the same relation read backwards
        _put(g, i, i + 4, [(p4, i + 1, i + 3), (-p4, i + 5, i + 7)])
    return Q83Instance(k1, k2, (p1, p2, p3, p4), QuadraticPoisson(g, "q83"))


def verify_quartic_casimirs(inst: Q83Instance, seed: int = 0) -> dict:
    """Casimir defects of ``C_i``, their mutual brackets and their Jacobian rank."""
    P = inst.poisson
    cs = inst.casimirs()
    defects = [P.casimir_defect(c) for c in cs]
    mutual = max(P.bracket(a, b).max_abs() for a, b in itertools.combinations(cs, 2))
    x = np.random.default_rng(seed).normal(size=N83)
    jac = np.array([[c.diff(i)(x) for i in range(N83)] for c in cs])
    s = np.linalg.svd(jac, compute_uv=False)
    return dict(defects=defects, mutual=float(mutual), jacobian_rank=int(np.sum(s > 1e-10 * s[0])))


FAMILIES = {
    "a+": lambda t1, t2: (t1, 0, t2, 0, t1, 0, t2, 0),
    "a-": lambda t1, t2: (t1, 0, t2, 0, -t1, 0, -t2, 0),
    "b+": lambda t1, t2: (0, t1, 0, t2, 0, t1, 0, t2),
    "b-": lambda t1, t2: (0, t1, 0, t2, 0, -t1, 0, -t2),
}


def family_vector(name: str, t1: float, t2: float) -> np.ndarray:
    if name not in FAMILIES:
        raise ShiftError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}")
    return np.array(FAMILIES[name](t1, t2), dtype=float)


def family_grid_check(inst: Q83Instance, name: str, size: int = 5) -> float:
    """Worst admissibility residual over a ``size x size`` grid of ``(t1, t2)``."""
    ts = np.linspace(-2, 2, size)
    return max(inst.poisson.admissibility(family_vector(name, a, b)) for a in ts for b in ts)


def quadratic_linear_compatibility(P: QuadraticPoisson, a, samples: int = 8, seed: int = 0) -> float:
    """Jacobi identity of ``G(x + u a, x + u a)`` at random ``(x, u)``, relative to its terms."""
    a = np.asarray(a, dtype=float)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x, u = rng.normal(size=P.dim), rng.normal()
        y = x + u * a
        B = P.values(y)
        # d/dx_p {x_i, x_j} = 2 G[i, j, p, :] y
        D = 2 * np.einsum("ijpq,q->ijp", P.gamma, y)
        T = np.einsum("ijp,pk->ijk", D, B)
        J = T + T.transpose(1, 2, 0) + T.transpose(2, 0, 1)
        worst = max(worst, float(np.abs(J).max() / max(np.abs(T).max(), 1e-300)))
    return worst


# ---------------------------------------------------------------------------
# the shifted pair
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ShiftResult:
    family: str
    t: tuple
    a: np.ndarray
    linear: LieStructure
    quadratic_residual: float
    constant_part: float
    c1: LieStructure
    c2: LieStructure
    diagnostics: dict = field(default_factory=dict)


def shift(inst: Q83Instance, family: str = "a+", t1: float = 1.0, t2: float = 1.0) -> ShiftResult:
    """Shift by a family vector; the pair is read off at ``(t1, t2) = (1, 0), (0, 1)``."""
    P = inst.poisson
    a = family_vector(family, t1, t2)
    u2 = P.admissibility(a)
    scale = max(P.norm() * float(np.abs(a).max()) ** 2, 1e-300)
    if u2 > 1e-10 * scale:
        raise ShiftError(f"vector is not admissible (u^2 term {u2:.3e})")
    lin = P.linear_part(a)
    # homogeneity leaves no constant in the u^1 term and no linear part in u^0
    constant_part = 0.0
    c1 = P.linear_part(family_vector(family, 1.0, 0.0))
    c2 = P.linear_part(family_vector(family, 0.0, 1.0))
    combo = LieStructure(t1 * c1.c + t2 * c2.c)
    diag = dict(linearity=float(np.abs(combo.c - lin.c).max()),
                compatibility=compatibility_residual(c1, c2),
                jacobi=(jacobiator(c1), jacobiator(c2)),
                quadratic_linear=quadratic_linear_compatibility(P, a))
    return ShiftResult(family, (t1, t2), a, lin, u2, constant_part, c1, c2, diag)


def center_span(c: LieStructure) -> np.ndarray:
    """Real orthonormal basis (columns) of the center."""
    z = center_vectors(c)
    q, _ = np.linalg.qr(np.real_if_close(z))
    return q


def same_span(A: np.ndarray, B: np.ndarray) -> float:
    """Distance between column spans (0 when equal)."""
    if A.shape[1] != B.shape[1]:
        return float("inf")
    qa, _ = np.linalg.qr(A)
    qb, _ = np.linalg.qr(B)
    return float(np.linalg.norm(qa @ qa.conj().T - qb @ qb.conj().T, 2))


def center_stability(inst: Q83Instance, family: str, size: int = 5) -> dict:
    """Center dimensions and their drift across a grid of nonzero ``(t1, t2)``."""
    ts = [-2.0, -1.0, 0.5, 1.0, 1.7][:size]
    ref = None
    dims, drift = set(), 0.0
    for t1, t2 in itertools.product(ts, ts):
        z = center_span(inst.poisson.linear_part(family_vector(family, t1, t2)))
        dims.add(z.shape[1])
        if ref is None:
            ref = z
        else:
            drift = max(drift, same_span(ref, z))
    return dict(dims=sorted(dims), drift=drift, center=ref)


@dataclass
class ReductionReport:
    center: np.ndarray
    center_dim: int
    quotient_c1: LieStructure
    quotient_c2: LieStructure
    quotient: LieStructure
    semisimple: bool
    ideal_dims: list
    compatibility: float


def reduce_and_classify(res: ShiftResult, seed: int = 0) -> ReductionReport:
    """Quotient the shifted algebra and both pair members by the common center."""
    z = center_span(res.linear)
    for c in (res.c1, res.c2):
        # the center must be central for both ends for the pair to descend
        if np.abs(np.einsum("ia,ijk->ajk", z, c.c)).max() > 1e-10 * max(c.norm(), 1e-300):
            raise ShiftError("center of the shifted bracket is not central for the pair")
    q, comp = quotient_by(res.linear, z)
    q1, _ = quotient_by(res.c1, z)
    q2, _ = quotient_by(res.c2, z)
    rep = killing_semisimple(q, seed=seed)
    return ReductionReport(z, z.shape[1], q1, q2, q, rep.semisimple, sorted(rep.ideal_dims),
                           compatibility_residual(q1, q2))


def k_not_casimir(inst: Q83Instance, center: np.ndarray) -> float:
    """Smallest ``max_j |{K, x_j}|`` under the quadratic bracket over the center basis (nonzero expected)."""
    P = inst.poisson
    vals = []
    for v in np.real_if_close(center).T:
        K = PolyElement.linear(v)
        vals.append(max(P.bracket(K, PolyElement.var(P.dim, j)).max_abs() for j in range(P.dim)))
    return float(min(vals))


# ---------------------------------------------------------------------------
# Lenard-Magri chain
# ---------------------------------------------------------------------------

def _sym_basis(n: int):
    return [(a, b) for a in range(n) for b in range(a, n)]


def _quadratic_casimir_map(c: LieStructure) -> np.ndarray:
    """Matrix of ``Q -> ({Q, x_j})_j`` from monomial coordinates of quadratics to quadratic coefficients.

    ``{Q, x_j} = sum_i 2 (S x)_i c[i, j] . x``; the coefficient of ``x_a x_k`` is
    ``sum_i S_ia c_ijk + S_ik c_ija``.
    """
    n = c.dim
    cols = []
    for a, b in _sym_basis(n):
        S = np.zeros((n, n))
        S[a, b] = S[b, a] = 0.5 if a != b else 1.0
        M = np.einsum("ia,ijk->jak", S, c.c)
        cols.append((M + M.transpose(0, 2, 1)).ravel())
    return np.array(cols).T


def _sym_to_poly(n: int, v) -> PolyElement:
    S = np.zeros((n, n), dtype=complex)
    for (a, b), x in zip(_sym_basis(n), v):
        S[a, b] += x / (1 if a == b else 2)
        S[b, a] += 0 if a == b else x / 2
    return PolyElement.from_tensor(S)


def pencil_casimir_kernel(c1: LieStructure, c2: LieStructure, degree: int) -> np.ndarray:
    """Polynomial kernel of ``c1 + lam c2`` on quadratics up to the given degree in ``lam``.

    Columns hold stacked coefficients ``(Q_0, ..., Q_degree)``.
    """
    A, B = _quadratic_casimir_map(c1), _quadratic_casimir_map(c2)
    R, C = A.shape
    d = degree
    T = np.zeros(((d + 2) * R, (d + 1) * C), dtype=complex)
    for s in range(d + 1):
        T[s * R:(s + 1) * R, s * C:(s + 1) * C] = A
        T[(s + 1) * R:(s + 2) * R, s * C:(s + 1) * C] = B
    return _nullspace(T)


@dataclass
class LenardMagriReport:
    integrals: list
    independent: int
    commute_c1: float
    commute_c2: float
    lambda0_casimir: float
    kernel_dims: list


def lenard_magri(c1: LieStructure, c2: LieStructure, max_degree: int = 3, seed: int = 0) -> LenardMagriReport:
    """Coefficients of the pencil's quadratic Casimirs and their mutual brackets under both ends."""
    from .lie import lie_poisson_bracket
    n = c1.dim
    C = len(_sym_basis(n))
    dims = []
    ker = None
    for d in range(max_degree + 1):
        ker = pencil_casimir_kernel(c1, c2, d)
        dims.append(ker.shape[1])
    if ker is None or ker.shape[1] == 0:
        raise ShiftError("pencil has no polynomial quadratic Casimirs up to the requested degree")
    d = max_degree
    blocks = np.hstack([ker[s * C:(s + 1) * C] for s in range(d + 1)])
    u, s, _ = np.linalg.svd(blocks, full_matrices=False)
    span = u[:, s > 1e-8 * s[0]]
    integrals = [_sym_to_poly(n, v) for v in span.T]
    worst1 = worst2 = 0.0
    for f, g in itertools.combinations(integrals, 2):
        worst1 = max(worst1, lie_poisson_bracket(f, g, c1).max_abs())
        worst2 = max(worst2, lie_poisson_bracket(f, g, c2).max_abs())
    scale = max(c1.norm(), c2.norm())
    lam0 = max(is_casimir(_sym_to_poly(n, ker[:C, i]), c1) for i in range(ker.shape[1])
               if np.linalg.norm(ker[:C, i]) > 1e-8)
    x = np.random.default_rng(seed).normal(size=n)
    jac = np.array([[f.diff(i)(x) for i in range(n)] for f in integrals])
    sv = np.linalg.svd(jac, compute_uv=False)
    return LenardMagriReport(integrals, int(np.sum(sv > 1e-8 * sv[0])), worst1 / scale, worst2 / scale,
                             float(lam0), dims)


# ---------------------------------------------------------------------------
# admissible-vector search
# ---------------------------------------------------------------------------

@dataclass
class AdmissibleComponents:
    bases: list
    dims: list
    direct_sum: bool
    linear: list
    matches: dict
    solutions: int


def _tangent(P: QuadraticPoisson, a) -> np.ndarray:
    n = P.dim
    rows = [2 * P.gamma[i, j] @ a for i in range(n) for j in range(i + 1, n)]
    return _nullspace(np.array(rows))


def admissible_search(P: QuadraticPoisson, starts: int = 200, seed: int = 0) -> AdmissibleComponents:
    """Randomized Gauss-Newton on ``G(a, a) = 0, |a| = 1`` and clustering by tangent spaces."""
    n = P.dim
    iu = np.triu_indices(n, 1)
    rng = np.random.default_rng(seed)

    def F(a):
        return np.concatenate([np.einsum("ijpq,p,q->ij", P.gamma, a, a)[iu], [a @ a - 1.0]])

    sols = []
    for _ in range(starts):
        r = least_squares(F, rng.normal(size=n), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.abs(F(r.x)).max() < 1e-10:
            sols.append(r.x)
    comps: list[np.ndarray] = []
    for a in sols:
        if any(np.linalg.norm(a - Q @ (Q.T @ a)) < 1e-6 for Q in comps):
            continue
        comps.append(np.real(_tangent(P, a)))
    comps = [np.linalg.qr(Q)[0] for Q in comps]
    # a component is linear when random combinations of its tangent basis stay admissible
    linear = []
    for Q in comps:
        w = rng.normal(size=(5, Q.shape[1]))
        linear.append(max(P.admissibility(Q @ v) for v in w) < 1e-10 * P.norm())
    allb = np.hstack(comps) if comps else np.zeros((n, 0))
    direct = allb.shape[1] == n and np.linalg.matrix_rank(allb, 1e-8) == n
    matches = {}
    for name in FAMILIES:
        fam = np.array([family_vector(name, 1, 0), family_vector(name, 0, 1)]).T
        matches[name] = any(same_span(fam, Q) < 1e-8 for Q in comps)
    return AdmissibleComponents(comps, [Q.shape[1] for Q in comps], bool(direct), linear, matches, len(sols))
