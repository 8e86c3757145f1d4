"""Polynomial-in-u Casimir elements of the elliptic pencil.

A Casimir candidate of degree ``p`` is a sum over zero-sum sector words of
functions of ``p`` variables.  Each such function lies in the tensor product
of the sector spaces, so it is expanded in the product basis by collocation
on a tensor grid; the coefficient of ``phi_{s1,j1}(z1) ... phi_{sp,jp}(zp)``
becomes the coefficient of the ordered word ``e_a1 ... e_ap`` with
``e_a = phi_{s,j} t_s``.  Dependence on ``u`` is carried as an extra leading
axis of polynomial coefficients.

Two normalizations matter.  The betas of a word are lifted (the last one
shifted by a multiple of n) so they sum to exactly 0; only then does the
summand have the automorphy of the product space.  Each word is divided by
``prod_j theta(kappa_j)`` so that its values on the diagonal agree across
words, which is what makes the weighted sum central.

Centrality is checked at the Poisson level (ad-invariance of the symmetric
image); for ``p = 2`` the ordered word is also checked in the enveloping
algebra, where it differs from the symmetric image by a linear term.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .elliptic import PencilData, collocation_points, random_regular_u
from .heisenberg import Sector, sectors
from .lie import LieStructure, is_casimir
from .poly import PolyElement
from .theta import ThetaFunction, theta_generator, find_roots

TWO_PI_I = 2j * np.pi
NODE_SEPARATION = 0.05
DEGREE_TOL = 1e-9


# ---------------------------------------------------------------------------
# sector words
# ---------------------------------------------------------------------------

def build_dp(n: int, p: int) -> list[tuple[Sector, ...]]:
    """Words of ``p`` nonzero sectors summing to (0, 0) mod n."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    out = []
    for word in itertools.product(sectors(n), repeat=p):
        if sum(s[0] for s in word) % n == 0 and sum(s[1] for s in word) % n == 0:
            out.append(word)
    return out


def dp_cardinality(n: int, p: int) -> int:
    d = n * n - 1
    return (d**p + d * (-1) ** p) // (n * n)


def dp_phase(n: int, k: int, word) -> complex:
    """``exp(2 pi i k/n sum_{j1 <= j2} alpha_j1 beta_j2)``."""
    e = sum(word[a][0] * word[b][1] for a in range(len(word)) for b in range(a, len(word)))
    return np.exp(TWO_PI_I * ((k * e) % n) / n)


# ---------------------------------------------------------------------------
# u-polynomial arrays: axis 0 holds the coefficient of u^d
# ---------------------------------------------------------------------------

def _pmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros((a.shape[0] + b.shape[0] - 1,) + shape, dtype=complex)
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            out[i + j] = out[i + j] + a[i] * b[j]
    return out


def _padd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = max(a.shape[0], b.shape[0])
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros((d,) + shape, dtype=complex)
    out[:a.shape[0]] += a
    out[:b.shape[0]] += b
    return out


def _const(x) -> np.ndarray:
    return np.asarray(x, dtype=complex)[None]


# ---------------------------------------------------------------------------
# Casimir element
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class CasimirElement:
    p: int
    tensors: np.ndarray = field(repr=False)   # (deg+1, N, ..., N), ordered words
    label: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.tensors.shape[1]

    def tensor_at(self, u: complex) -> np.ndarray:
        powers = complex(u) ** np.arange(self.tensors.shape[0])
        return np.tensordot(powers, self.tensors, axes=(0, 0))

    def at(self, u: complex) -> PolyElement:
        return PolyElement.from_tensor(self.tensor_at(u))

    @property
    def u_coeffs(self) -> list[PolyElement]:
        return [PolyElement.from_tensor(t) for t in self.tensors]

    def coeff_norms(self) -> np.ndarray:
        return np.array([np.abs(_symmetrize(t)).max() for t in self.tensors])

    def norm(self) -> float:
        return float(self.coeff_norms().max())

    def u_range(self, tol: float = DEGREE_TOL) -> tuple[int, int]:
        """Lowest and highest u-power with a coefficient above ``tol`` relative to the largest."""
        c = self.coeff_norms()
        if c.max() == 0:
            return 0, -1
        live = np.flatnonzero(c > tol * c.max())
        return int(live[0]), int(live[-1])

    def degree_u(self, tol: float = DEGREE_TOL) -> int:
        """Degree in u after removing a common factor u^j."""
        lo, hi = self.u_range(tol)
        return hi - lo

    def stripped(self, tol: float = DEGREE_TOL) -> "CasimirElement":
        """Same element divided by its common u^j factor, with the dropped part recorded."""
        lo, hi = self.u_range(tol)
        dropped = float(self.coeff_norms()[:lo].max()) / self.norm() if lo > 0 else 0.0
        diag = dict(self.diagnostics, stripped_power=lo, stripped_residual=dropped)
        return CasimirElement(self.p, self.tensors[lo:hi + 1], self.label, diag)

    def __sub__(self, other: "CasimirElement") -> "CasimirElement":
        d = max(self.tensors.shape[0], other.tensors.shape[0])
        t = np.zeros((d,) + self.tensors.shape[1:], dtype=complex)
        t[:self.tensors.shape[0]] += self.tensors
        t[:other.tensors.shape[0]] -= other.tensors
        return CasimirElement(self.p, t, f"{self.label}-{other.label}")

    def scaled(self, s: complex) -> "CasimirElement":
        return CasimirElement(self.p, self.tensors * s, self.label, dict(self.diagnostics))


def _symmetrize(t: np.ndarray) -> np.ndarray:
    p = t.ndim
    perms = list(itertools.permutations(range(p)))
    return sum(t.transpose(pm) for pm in perms) / len(perms)


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

class _Assembler:
    """Tensor-grid collocation shared by all multivariable constructions."""

    def __init__(self, pencil: PencilData, p: int, extra_nodes: int = 2, seed: int = 5):
        self.pencil = pencil
        self.p = p
        b = pencil.basis
        self.n, self.m, self.k = b.n, b.m, b.k
        self.lattice = b.lattice
        self.theta = theta_generator(self.lattice)
        K = self.m + extra_nodes
        avoid = list(find_roots(self.theta).roots)
        pts = collocation_points(self.lattice, p * K + p * 6, avoid, seed=seed,
                                 separation=NODE_SEPARATION)
        self.nodes = [pts[j * K:(j + 1) * K] for j in range(p)]
        rest = pts[p * K:]
        self.held_out = [rest[j * 6:(j + 1) * 6] for j in range(p)]
        self._pinv = {}

    def offset(self, s: Sector) -> complex:
        return self.k * (s[0] + s[1] * self.lattice.tau) / self.n

    def lift(self, word):
        """Word with the last beta shifted by a multiple of n so the betas sum to 0."""
        total = sum(s[1] for s in word)
        last = word[-1]
        return tuple(word[:-1]) + ((last[0], last[1] - total),)

    def pinv(self, j: int, s: Sector) -> np.ndarray:
        key = (j, s)
        if key not in self._pinv:
            F = self.pencil.basis.sector_values(s, self.nodes[j])
            self._pinv[key] = np.linalg.pinv(F)
        return self._pinv[key]

    @staticmethod
    def grid(arrays):
        p = len(arrays)
        return [np.asarray(a).reshape((1,) * j + (-1,) + (1,) * (p - j - 1)) for j, a in enumerate(arrays)]

    def word_weight(self, word) -> complex:
        """``1 / prod_j theta(kappa_j)`` for the lifted word."""
        w = 1.0
        for s in self.lift(word):
            w = w / self.theta(self.offset(s))
        return complex(w)

    def expand(self, word, func) -> tuple[np.ndarray, float]:
        """Product-basis coefficients ``(deg+1, m, ..., m)`` and held-out residual."""
        vals = func(self.lift(word), self.grid(self.nodes))
        coef = vals
        for j, s in enumerate(word):
            coef = np.moveaxis(np.tensordot(self.pinv(j, s), coef, axes=(1, j + 1)), 0, j + 1)
        # held-out check on a diagonal-free sample of the product grid
        ho = self.grid(self.held_out)
        direct = func(self.lift(word), ho)
        phis = [self.pencil.basis.sector_values(s, self.held_out[j]) for j, s in enumerate(word)]
        recon = coef
        for j in range(self.p):
            recon = np.moveaxis(np.tensordot(phis[j], recon, axes=(1, j + 1)), 0, j + 1)
        ref = max(float(np.abs(direct).max()), 1e-300)
        return coef, float(np.abs(recon - direct).max()) / ref

    # building blocks ---------------------------------------------------

    def exp_factor(self, word, Z):
        e = 0
        for s, z in zip(word, Z):
            e = e + s[1] * z
        return np.exp(-TWO_PI_I * self.k * e / self.n)

    def quotient(self, word, Z, t, skip=()):
        """``prod_{j != t, j not in skip} theta(z_t - z_j + kappa_j)/theta(z_t - z_j)``."""
        out = 1.0
        for j, s in enumerate(word):
            if j == t or j in skip:
                continue
            d = Z[t] - Z[j]
            out = out * self.theta(d + self.offset(s)) / self.theta(d)
        return out

    def pencil_factor(self, z, deriv: int = 0, variant: str = "pencil"):
        mu1, mu2 = self.pencil.mu1, self.pencil.mu2
        if deriv and variant == "printed":
            return np.stack([mu2(z, deriv), -mu2(z, deriv)])
        return np.stack([mu2(z, deriv), -mu1(z, deriv)])

    def a_term(self, word, Z, t):
        return self.exp_factor(word, Z) * self.theta(self.offset(word[t])) * self.quotient(word, Z, t)

    def others_product(self, Z, t):
        out = _const(1.0)
        for j, z in enumerate(Z):
            if j != t:
                out = _pmul(out, self.pencil_factor(z))
        return out

    def t_summand(self, g_poly):
        """Summand function for T(g); ``g_poly(z)`` returns a u-polynomial array."""
        def func(word, Z):
            total = _const(0.0)
            for t in range(self.p):
                term = _pmul(g_poly(Z[t]), self.others_product(Z, t))
                total = _padd(total, term * self.a_term(word, Z, t)[None])
            return total
        return func

    def h_summand(self, variant: str = "pencil", b_scale: complex | None = None):
        # m/p keeps the tau-automorphy of the B correction in step with the
        # derivative term; m/n agrees with it only when p = n
        if b_scale is None:
            b_scale = self.m / self.p

        def func(word, Z):
            total = _const(0.0)
            for t in range(self.p):
                d = self.pencil_factor(Z[t], 1, variant)
                term = _pmul(d, self.others_product(Z, t))
                total = _padd(total, term * self.a_term(word, Z, t)[None])
            allp = _const(1.0)
            for z in Z:
                allp = _pmul(allp, self.pencil_factor(z))
            B = b_scale * self.exp_factor(word, Z) * (self.b1(word, Z) + self.b2(word, Z))
            return _padd(total, -allp * B[None])
        return func

    def b1(self, word, Z):
        out = 0.0
        for t in range(self.p):
            th_t = self.theta(self.offset(word[t]))
            for j in range(self.p):
                if j == t:
                    continue
                d = Z[t] - Z[j]
                out = out + (th_t * self.theta(d + self.offset(word[j]), 1) / self.theta(d)
                             * self.quotient(word, Z, t, skip=(j,)))
        return out

    def b2(self, word, Z):
        out = 0.0
        for t in range(self.p):
            out = out + self.theta(self.offset(word[t]), 1) * self.quotient(word, Z, t)
        return out

    def assemble(self, func, label: str) -> CasimirElement:
        b = self.pencil.basis
        N = b.dim
        words = build_dp(self.n, self.p)
        tensor = None
        worst = 0.0
        for word in words:
            coef, res = self.expand(word, func)
            worst = max(worst, res)
            if tensor is None:
                tensor = np.zeros((coef.shape[0],) + (N,) * self.p, dtype=complex)
            elif coef.shape[0] > tensor.shape[0]:
                pad = np.zeros((coef.shape[0] - tensor.shape[0],) + tensor.shape[1:], dtype=complex)
                tensor = np.concatenate([tensor, pad])
            idx = [np.array([b.index[(s, j)] for j in range(self.m)]) for s in word]
            sl = (slice(0, coef.shape[0]),) + np.ix_(*idx)
            tensor[sl] += dp_phase(self.n, self.k, word) * self.word_weight(word) * coef
        return CasimirElement(self.p, tensor, label, dict(expansion_residual=worst))


def _check_p(pencil: PencilData, p: int):
    if not 2 <= p <= pencil.basis.n:
        raise ValueError(f"p must lie in 2..n = 2..{pencil.basis.n}, got {p}")


def _upoly_theta(g: ThetaFunction):
    return lambda z: _const(g(z))


def casimir_T(pencil: PencilData, g, p: int, assembler: _Assembler | None = None) -> CasimirElement:
    """Casimir element T(g) for ``g``: a ThetaFunction, or a pair ``(g0, g1)`` meaning ``g0 + u g1``."""
    _check_p(pencil, p)
    asm = assembler or _Assembler(pencil, p)
    if isinstance(g, ThetaFunction):
        gp = _upoly_theta(g)
        label = "T(g)"
    else:
        g0, g1 = g
        gp = lambda z: np.stack([g0(z), g1(z)])
        label = "T(g0+u g1)"
    return asm.assemble(asm.t_summand(gp), label)


def casimir_h(pencil: PencilData, p: int, variant: str = "pencil", b_scale: complex | None = None,
              assembler: _Assembler | None = None) -> CasimirElement:
    """Casimir element h; ``variant='printed'`` uses ``mu2' - u mu2'`` as the derivative factor."""
    _check_p(pencil, p)
    asm = assembler or _Assembler(pencil, p)
    return asm.assemble(asm.h_summand(variant, b_scale), f"h[{variant}]")


def casimir_quadratic(pencil: PencilData) -> CasimirElement:
    """``T(mu2)`` at p = 2 with its factor u removed; u-independent."""
    c = casimir_T(pencil, pencil.mu2, 2).stripped()
    c.label = "C2"
    return c


def kernel_element(pencil: PencilData, p: int, assembler: _Assembler | None = None) -> CasimirElement:
    """``T(mu2 - u mu1)``, which should vanish identically."""
    return casimir_T(pencil, (pencil.mu2, -1.0 * pencil.mu1), p, assembler)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def centrality(c: CasimirElement, pencil: PencilData, us) -> float:
    """Worst ``is_casimir`` residual of ``c(u)`` against the pencil member at each ``u``."""
    return max(is_casimir(c.at(u), pencil.at(u)) for u in us)


def pbw_defect(c: CasimirElement, lie: LieStructure, u: complex) -> dict:
    """Enveloping-algebra centrality of the ordered quadratic word at ``u``.

    ``sum B_ab e_a e_b`` is central iff its symmetric part is ad-invariant and
    the linear remainder ``1/2 sum (B_ab - B_ba) [e_a, e_b]`` is central; for
    a semisimple algebra the latter must vanish.
    """
    if c.p != 2:
        raise ValueError("the ordered check is implemented for p = 2")
    B = c.tensor_at(u)
    S = 0.5 * (B + B.T)
    # [e_i, S] = sum_ab S_ab ([e_i,e_a] e_b + e_a [e_i,e_b]) -> symmetric M_i
    M = np.einsum("iar,ab->irb", lie.c, S) + np.einsum("ab,ibr->iar", S, lie.c)
    scale = max(float(np.abs(B).max()) * lie.norm(), 1e-300)
    lin = 0.5 * np.einsum("ab,abr->r", B - B.T, lie.c)
    return dict(symmetric=float(np.abs(M).max()) / scale, linear=float(np.abs(lin).max()) / scale)


def holomorphy_check(pencil: PencilData, p: int, func_kind: str = "T", g: ThetaFunction | None = None,
                     eps=(1e-3, 1e-4), seed: int = 17) -> float:
    """Growth ratio of the summed expression approaching ``z_1 = z_0``.

    A surviving simple pole makes ``|f(eps2)| / |f(eps1)|`` close to
    ``eps1/eps2``; a removable singularity keeps it near 1.  Returns the
    worst ratio over zero-sum words at the smallest-to-largest eps.
    """
    asm = _Assembler(pencil, p)
    if func_kind == "T":
        func = asm.t_summand(_upoly_theta(g if g is not None else pencil.mu1))
    else:
        func = asm.h_summand()
    rng = np.random.default_rng(seed)
    worst = 0.0
    base = collocation_points(pencil.basis.lattice, p, seed=seed, separation=NODE_SEPARATION)
    u = complex(rng.normal() + 1j * rng.normal())
    powers = u ** np.arange(p + 2)
    for word in build_dp(pencil.basis.n, p):
        vals = []
        for e in eps:
            Z = [np.array([z]) for z in base]
            Z[1] = Z[0] + e
            v = func(asm.lift(word), Z)
            vals.append(abs(np.tensordot(powers[:v.shape[0]], v, axes=(0, 0)).ravel()[0]))
        if vals[0] > 0:
            worst = max(worst, vals[-1] / vals[0])
    return worst


def off_diagonal_vanishing(pencil: PencilData, c_func, p: int, u: complex, seed: int = 23) -> float:
    """Values of a summand function at ``z_j1 = x_d1, z_j2 = x_d2`` (d1 != d2), relative."""
    from .theta import pencil_roots
    rs, _ = pencil_roots(pencil.mu1, pencil.mu2, u)
    x = rs.roots
    asm = _Assembler(pencil, p, seed=seed)
    func = c_func(asm)
    powers = complex(u) ** np.arange(p + 2)
    free = collocation_points(pencil.basis.lattice, p, list(x), seed=seed, separation=NODE_SEPARATION)
    worst, ref = 0.0, 0.0
    for word in build_dp(pencil.basis.n, p):
        Z0 = [np.array([z]) for z in free]
        word = asm.lift(word)
        v0 = func(word, Z0)
        ref = max(ref, abs(np.tensordot(powers[:v0.shape[0]], v0, axes=(0, 0)).ravel()[0]))
        for j1, j2 in itertools.permutations(range(p), 2):
            for d1, d2 in itertools.permutations(range(len(x)), 2):
                Z = list(Z0)
                Z[j1] = np.array([x[d1]])
                Z[j2] = np.array([x[d2]])
                v = func(word, Z)
                worst = max(worst, abs(np.tensordot(powers[:v.shape[0]], v, axes=(0, 0)).ravel()[0]))
    return worst / max(ref, 1e-300)


def diagonal_spread(c: CasimirElement, pencil: PencilData, u: complex) -> float:
    """Spread across words of the diagonal values ``g_word(x, ..., x)`` at each root x.

    Words are stored with their betas lifted to sum to 0, so no exponential
    factor appears.  Diagonal values are read from the product-basis
    expansion, so the removable singularities on the diagonal are never
    evaluated directly.  The phase weights are divided back out.
    """
    from .theta import pencil_roots
    b = pencil.basis
    n, k, p = b.n, b.k, c.p
    rs, _ = pencil_roots(pencil.mu1, pencil.mu2, u)
    T = c.tensor_at(u)
    worst = 0.0
    for x in rs.roots:
        phi = b.scalar_values(np.array([x]))[0]
        vals = []
        for word in build_dp(n, p):
            idx = [np.array([b.index[(s, j)] for j in range(b.m)]) for s in word]
            v = T[np.ix_(*idx)] / dp_phase(n, k, word)
            for ix in idx:
                v = np.tensordot(phi[ix], v, axes=(0, 0))
            vals.append(complex(v))
        vals = np.array(vals)
        spread = np.abs(vals - vals[0]).max() / max(np.abs(vals).max(), 1e-300)
        worst = max(worst, float(spread))
    return worst


# ---------------------------------------------------------------------------
# degree ledger
# ---------------------------------------------------------------------------

def complement_thetas(pencil: PencilData) -> list[ThetaFunction]:
    """Basis functions completing ``mu1, mu2`` to a basis of Theta_m."""
    b = pencil.basis
    chosen = [pencil.mu1.seeds, pencil.mu2.seeds]
    out = []
    for e in b.theta_basis:
        trial = np.array(chosen + [e.seeds])
        if np.linalg.matrix_rank(trial, tol=1e-8 * np.abs(trial).max()) == len(trial):
            chosen.append(e.seeds)
            out.append(e)
        if len(chosen) == b.m:
            break
    return out


@dataclass
class LedgerEntry:
    p: int
    label: str
    degree: int
    expected: int
    centrality: float
    expansion_residual: float


@dataclass
class DegreeLedger:
    entries: list
    gz_sum: int
    dimension: int
    kernel_residuals: dict
    jacobian_rank: int
    expected_rank: int
    us: list

    @property
    def degrees_ok(self) -> bool:
        return all(e.degree == e.expected for e in self.entries)

    @property
    def ok(self) -> bool:
        return self.degrees_ok and self.gz_sum == self.dimension and self.jacobian_rank == self.expected_rank

    def multiset(self, p: int) -> list[int]:
        return sorted(e.degree for e in self.entries if e.p == p)


def casimir_family(pencil: PencilData, p: int) -> list[CasimirElement]:
    """Generators for one p: T(mu1), T(g) for g in a complement, and h."""
    asm = _Assembler(pencil, p)
    out = []
    t1 = casimir_T(pencil, pencil.mu2, p, asm).stripped()
    t1.label = f"T(mu2)/u p={p}"
    out.append(t1)
    for i, g in enumerate(complement_thetas(pencil)):
        c = casimir_T(pencil, g, p, asm)
        c.label = f"T(g{i}) p={p}"
        out.append(c)
    h = casimir_h(pencil, p, assembler=asm)
    h.label = f"h p={p}"
    out.append(h)
    return out


def jacobian_rank(elements: list[CasimirElement], u: complex, seed: int = 3) -> int:
    """Rank of the gradients of all elements at a random point."""
    rng = np.random.default_rng(seed)
    N = elements[0].dim
    x = rng.normal(size=N) + 1j * rng.normal(size=N)
    rows = []
    for c in elements:
        f = c.at(u)
        g = np.array([f.diff(i)(x) for i in range(N)])
        rows.append(g / np.abs(g).max())
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(np.sum(s > 1e-8 * s[0]))


def degree_ledger(pencil: PencilData, p_max: int | None = None, n_u: int = 3, seed: int = 11) -> DegreeLedger:
    b = pencil.basis
    n, m = b.n, b.m
    p_max = n if p_max is None else p_max
    us = random_regular_u(pencil, n_u, seed)
    entries = []
    kernel = {}
    all_elems = []
    for p in range(2, p_max + 1):
        asm = _Assembler(pencil, p)
        ker = kernel_element(pencil, p, asm)
        ref = casimir_T(pencil, pencil.mu2, p, asm).norm()
        kernel[p] = ker.norm() / ref
        fam = casimir_family(pencil, p)
        expected = [p - 2] + [p - 1] * (len(fam) - 2) + [p]
        for c, e in zip(fam, expected):
            entries.append(LedgerEntry(p, c.label, c.degree_u(), e, centrality(c, pencil, us),
                                       c.diagnostics.get("expansion_residual", 0.0)))
        all_elems.extend(fam)
    gz = sum(2 * e.degree + 1 for e in entries)
    rank = jacobian_rank(all_elems, us[0])
    return DegreeLedger(entries, gz, m * (n * n - 1), kernel, rank, m * (p_max - 1), us)


def gz_formula(n: int, m: int) -> int:
    """Sum over p of (2(p-2)+1) + (m-2)(2p-1) + (2p+1)."""
    return sum((2 * (p - 2) + 1) + (m - 2) * (2 * p - 1) + (2 * p + 1) for p in range(2, n + 1))
