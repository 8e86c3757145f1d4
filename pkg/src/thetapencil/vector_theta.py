"""Rank-l vector theta functions (degree one in x) and the (l+1)-bracket family.

A section of degree one is ``f(z, x) = sum_alpha f_alpha(z) x_alpha`` with
``f_alpha(z+1) = e^{-2 pi i m alpha/l} f_alpha(z)`` and
``f_alpha(z+tau) = E(z) f_{alpha-1}(z)``, ``E(z) = e^{-2 pi i (m z/l + (m-l-1)/(2l))}``.
The Fourier exponents of ``f_alpha`` are ``t/l`` with ``t = -m alpha (mod l)``;
since ``gcd(m, l) = 1`` every integer ``t`` belongs to exactly one component, so
the section is a single sequence ``b_t`` with ``b_{t+m} = c^{-1} q^{t/l} b_t``
(``c = e^{-pi i (m-l-1)/l}``, ``q = e^{2 pi i tau}``), fixed by ``b_0..b_{m-1}``.

The matrix space is built sector by sector from the scalar one by a twist
``g(z) = e^{2 pi i phi z} h(z + s)`` matching the conjugation phases of
``a`` and ``b`` on ``t_{alpha,beta}``.  Commutators are quadratic in ``x``; they
split as ``sum_i mu_i P_i`` by collocation over z-points and the frame
``{e_a} + {e_a + e_b}``, which pins down a quadratic form in ``x`` exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .elliptic import COND_LIMIT, DecompositionError, collocation_points
from .heisenberg import SLBasis, Sector, build_pair, check_nk, commutator_constants, dual_basis, sectors, sl_basis
from .lie import LieStructure, compatibility_residual, jacobiator
from .pipeline import assemble_brackets
from .theta import EVAL_WINDOW, Lattice, ThetaError, test_grid

TWO_PI_I = 2j * np.pi


def vector_section_dimension(m: int, l: int, d: int) -> int:
    """``m (l+1)(l+2)...(l+d-1)/(d-1)!``, i.e. ``m * C(l+d-1, d-1)``."""
    if d < 1 or m < 1 or l < 1:
        raise ValueError("need m, l, d >= 1")
    return m * math.comb(l + d - 1, d - 1)


def check_ml(m: int, l: int) -> None:
    if not 1 <= l < m:
        raise ThetaError(f"need 1 <= l < m, got m={m}, l={l}")
    if math.gcd(m, l) != 1:
        raise ThetaError(f"m={m} and l={l} are not coprime")


def _truncation(m: int, l: int, lattice: Lattice, tol: float) -> int:
    """Half-width in ``t`` keeping every dropped term below ``tol`` on the evaluation window."""
    y = lattice.tau.imag
    L = math.log(1.0 / tol)
    t = m * EVAL_WINDOW + math.sqrt((m * EVAL_WINDOW) ** 2 + m * l * L / (math.pi * y))
    return int(math.ceil(t)) + m


def _coefficients(m: int, l: int, tau: complex, t: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    # b_{j+sm} = c^{-s} q^{(s j + m s(s-1)/2)/l} b_j  with  c^{-1} = e^{pi i (m-l-1)/l}
    j = np.mod(t, m)
    s = (t - j) // m
    expo = TWO_PI_I * tau * (s * j + m * s * (s - 1) / 2.0) / l + 1j * np.pi * s * (m - l - 1) / l
    return np.exp(expo) * seeds[j]


@dataclass(frozen=True, eq=False)
class VectorTheta:
    """A degree-one section, stored as its coefficient sequence ``b_t``."""

    m: int
    l: int
    lattice: Lattice
    t: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)

    @classmethod
    def from_seeds(cls, m: int, l: int, lattice: Lattice, seeds, trunc_tol: float = 1e-17) -> "VectorTheta":
        check_ml(m, l)
        seeds = np.asarray(seeds, dtype=complex)
        if seeds.shape != (m,):
            raise ThetaError(f"expected {m} seeds, got shape {seeds.shape}")
        T = _truncation(m, l, lattice, trunc_tol)
        t = np.arange(-T, T + m)
        return cls(m, l, lattice, t, _coefficients(m, l, lattice.tau, t, seeds))

    @cached_property
    def component_of(self) -> np.ndarray:
        """Component index of every ``t``: ``alpha = -m^{-1} t (mod l)``."""
        inv = pow(self.m, -1, self.l) if self.l > 1 else 0
        return np.mod(-inv * self.t, self.l)

    def components(self, z) -> np.ndarray:
        """Values ``(len(z), l)`` of ``f_alpha(z)``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        nz = self.coeffs != 0
        t, c, comp = self.t[nz], self.coeffs[nz], self.component_of[nz]
        terms = np.exp(np.log(c)[None, :] + TWO_PI_I * np.multiply.outer(z, t) / self.l)
        out = np.zeros((z.size, self.l), dtype=complex)
        for a in range(self.l):
            out[:, a] = terms[:, comp == a].sum(axis=1)
        return out

    def __call__(self, z, x) -> np.ndarray:
        """``f(z, x)`` for paired arrays of points and x-vectors (shape ``(P, l)``)."""
        return np.einsum("pa,pa->p", self.components(z), np.atleast_2d(x))

    def combine(self, other: "VectorTheta", a: complex, b: complex) -> "VectorTheta":
        if self.t.shape != other.t.shape:
            raise ThetaError("sections have different truncations")
        return VectorTheta(self.m, self.l, self.lattice, self.t, a * self.coeffs + b * other.coeffs)

    @property
    def seeds(self) -> np.ndarray:
        return self.coeffs[np.searchsorted(self.t, np.arange(self.m))]

    def functional_residuals(self, pts=None) -> tuple[float, float]:
        """Relative residuals of the ``z+1`` and ``z+tau`` identities, componentwise."""
        if pts is None:
            pts = test_grid(self.lattice, 5)
        m, l, tau = self.m, self.l, self.lattice.tau
        f0 = self.components(pts)
        f1 = self.components(pts + 1)
        ft = self.components(pts + tau)
        alpha = np.arange(l)
        r1 = np.abs(f1 - np.exp(-TWO_PI_I * m * alpha / l)[None, :] * f0).max() / np.abs(f0).max()
        E = np.exp(-TWO_PI_I * (m * pts / l + (m - l - 1) / (2 * l)))
        r2 = np.abs(ft - E[:, None] * np.roll(f0, 1, axis=1)).max() / np.abs(ft).max()
        return float(r1), float(r2)


def build_vector_theta_basis(m: int, l: int, lattice: Lattice, trunc_tol: float = 1e-17) -> list[VectorTheta]:
    """The ``m`` sections with seeds ``b_j = delta_ij``, checked for independence."""
    check_ml(m, l)
    basis = [VectorTheta.from_seeds(m, l, lattice, np.eye(m)[j], trunc_tol) for j in range(m)]
    pts = test_grid(lattice, 4)
    mat = np.array([f.components(pts).ravel() for f in basis]).T
    mat = mat / np.linalg.norm(mat, axis=0)
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] < 1e-8:
        raise ThetaError(f"vector theta basis degenerate (smallest singular value {sv[-1]:.3e})")
    return basis


def frame(l: int) -> np.ndarray:
    """``e_a`` and ``e_a + e_b`` (a < b): enough values to fix a quadratic form in ``l`` variables."""
    eye = np.eye(l)
    rows = [eye[a] for a in range(l)] + [eye[a] + eye[b] for a in range(l) for b in range(a + 1, l)]
    return np.array(rows, dtype=complex)


# ---------------------------------------------------------------------------
# the matrix space
# ---------------------------------------------------------------------------

def _phase(x: complex) -> float:
    return float(np.mod(np.angle(x) / (2 * np.pi), 1.0))


@dataclass(frozen=True, eq=False)
class VectorSectorSpace:
    """sl_n-valued degree-one sections, ``m`` per sector ``t_{alpha,beta}``."""

    n: int
    k: int
    m: int
    l: int
    lattice: Lattice
    sl: SLBasis
    sections: tuple
    twists: dict  # sector -> (phi, shift)
    labels: tuple

    @property
    def dim(self) -> int:
        return len(self.labels)

    @cached_property
    def index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    def scalar_components(self, sector: Sector, j: int, z) -> np.ndarray:
        phi, s = self.twists[sector]
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.exp(TWO_PI_I * phi * z)[:, None] * self.sections[j].components(z + s)

    def sector_values(self, sector: Sector, z, x) -> np.ndarray:
        """``(P, m)`` values of the sector's scalar sections at paired ``(z, x)``."""
        x = np.atleast_2d(x)
        return np.stack([np.einsum("pa,pa->p", self.scalar_components(sector, j, z), x)
                         for j in range(self.m)], axis=-1)

    def scalar_values(self, z, x) -> np.ndarray:
        """``(P, N)`` scalar parts of every basis element."""
        by_sector = {s: self.sector_values(s, z, x) for s in sectors(self.n)}
        return np.stack([by_sector[s][:, j] for s, j in self.labels], axis=-1)

    def evaluate_components(self, coords, z) -> np.ndarray:
        """Matrix components ``(P, l, n, n)`` of an element of the space."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros((z.size, self.l, self.n, self.n), dtype=complex)
        for a, (s, j) in enumerate(self.labels):
            if coords[a] != 0:
                comp = coords[a] * self.scalar_components(s, j, z)
                out += comp[:, :, None, None] * self.sl.elements[s][None, None]
        return out

    def functional_residuals(self, coords, pts=None) -> tuple[float, float]:
        if pts is None:
            pts = test_grid(self.lattice, 4)
        m, l, tau = self.m, self.l, self.lattice.tau
        a, b = self.sl.pair.a, self.sl.pair.b
        ai, bi = np.linalg.inv(a), np.linalg.inv(b)
        f0 = self.evaluate_components(coords, pts)
        f1 = self.evaluate_components(coords, pts + 1)
        ft = self.evaluate_components(coords, pts + tau)
        ph = np.exp(-TWO_PI_I * m * np.arange(l) / l)[None, :, None, None]
        r1 = np.abs(f1 - ph * (a @ f0 @ ai)).max() / np.abs(f0).max()
        E = np.exp(-TWO_PI_I * (m * pts / l + (m - l - 1) / (2 * l)))[:, None, None, None]
        r2 = np.abs(ft - E * np.roll(b @ f0 @ bi, 1, axis=1)).max() / np.abs(ft).max()
        return float(r1), float(r2)


def build_vector_space(n: int, k: int, m: int, l: int, lattice: Lattice) -> VectorSectorSpace:
    check_nk(n, k)
    check_ml(m, l)
    pair = build_pair(n, k)
    sl = dual_basis(sl_basis(pair))
    a, b = pair.a, pair.b
    twists = {}
    for s in sectors(n):
        t = sl.elements[s]
        i, j = np.argwhere(np.abs(t) > 0.5)[0]
        lam_a = (a @ t @ np.linalg.inv(a))[i, j] / t[i, j]
        lam_b = (b @ t @ np.linalg.inv(b))[i, j] / t[i, j]
        phi, psi = _phase(lam_a), _phase(lam_b)
        # g(z+1) picks up e^{2 pi i phi}; g(z+tau) picks up e^{2 pi i (phi tau - m s/l)} = lam_b
        twists[s] = (phi, l * (phi * lattice.tau - psi) / m)
    sections = tuple(build_vector_theta_basis(m, l, lattice))
    labels = tuple((s, j) for s in sectors(n) for j in range(m))
    return VectorSectorSpace(n, k, m, l, lattice, sl, sections, twists, labels)


# ---------------------------------------------------------------------------
# no-common-zero certificate
# ---------------------------------------------------------------------------

def common_zero_margin(mus, grid: int = 24, refine: int = 6) -> float:
    """Sampled lower bound for ``sigma_min[mu_{i,alpha}(z)] / |basis(z)|`` over the torus.

    The ratio is lattice periodic, so a grid over one parallelogram followed by
    local minimization from the smallest grid values certifies the absence of
    common zeros up to sampling.
    """
    mus = list(mus)
    lat = mus[0].lattice
    ref_basis = build_vector_theta_basis(mus[0].m, mus[0].l, lat)

    def ratio(z):
        z = np.atleast_1d(z)
        M = np.stack([mu.components(z) for mu in mus], axis=1)  # (P, l+1, l)
        R = np.stack([f.components(z) for f in ref_basis], axis=1)
        smin = np.linalg.svd(M, compute_uv=False)[:, -1]
        return smin / np.linalg.norm(R.reshape(len(z), -1), axis=1)

    s = (np.arange(grid) + 0.5) / grid
    S, T = np.meshgrid(s, s, indexing="ij")
    pts = (S + T * lat.tau).ravel()
    vals = ratio(pts)
    best = float(vals.min())
    for z0 in pts[np.argsort(vals)[:refine]]:
        f = lambda v: float(ratio(np.array([v[0] + 1j * v[1]]))[0])
        r = minimize(f, [z0.real, z0.imag], method="Nelder-Mead",
                     options=dict(xatol=1e-10, fatol=1e-14, maxiter=400))
        best = min(best, float(r.fun))
    return best


def random_sections(m: int, l: int, lattice: Lattice, seed: int = 3, margin_tol: float = 1e-3):
    """Seeded random ``mu_1..mu_{l+1}`` with a passing no-common-zero certificate."""
    check_ml(m, l)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        w = rng.normal(size=(l + 1, m)) + 1j * rng.normal(size=(l + 1, m))
        mus = [VectorTheta.from_seeds(m, l, lattice, row) for row in w]
        if common_zero_margin(mus) > margin_tol:
            return mus
    raise ThetaError("could not draw sections without common zeros")


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------

class MultiSplitter:
    """Per-sector collocation for ``Z = sum_i mu_i P_i`` with ``Z`` quadratic in x."""

    def __init__(self, space: VectorSectorSpace, mus, seed: int = 0, oversample: int = 2):
        self.space = space
        self.mus = list(mus)
        m, l = space.m, space.l
        nb = len(self.mus)
        fr = frame(l)
        nz = int(math.ceil(oversample * nb * m / len(fr)))
        rng = np.random.default_rng(seed + 17)
        self.data = {}
        self.conditions = {}
        for si, s in enumerate(sectors(space.n)):
            for attempt in range(5):
                z = collocation_points(space.lattice, nz, seed=seed + 101 * si + 7919 * attempt)
                Z, X = np.repeat(z, len(fr)), np.tile(fr, (nz, 1))
                M = self._matrix(s, Z, X)
                col = np.linalg.norm(M, axis=0)
                cond = np.linalg.cond(M / col)
                if cond < COND_LIMIT:
                    break
            else:
                raise DecompositionError(f"collocation for sector {s} ill-conditioned (cond {cond:.2e})")
            zv = collocation_points(space.lattice, nz, avoid=list(z), seed=seed + 50021 + 13 * si)
            Zv = np.repeat(zv, 2)
            Xv = rng.normal(size=(Zv.size, l)) + 1j * rng.normal(size=(Zv.size, l))
            self.data[s] = dict(z=Z, x=X, pinv=np.linalg.pinv(M / col) / col[:, None],
                                zv=Zv, xv=Xv, Mv=self._matrix(s, Zv, Xv))
            self.conditions[s] = float(cond)

    def _matrix(self, sector, Z, X) -> np.ndarray:
        F = self.space.sector_values(sector, Z, X)
        return np.hstack([mu(Z, X)[:, None] * F for mu in self.mus])

    def solve(self, sector, values, val_values=None):
        d = self.data[sector]
        sol = d["pinv"] @ values
        m = self.space.m
        parts = [sol[i * m:(i + 1) * m] for i in range(len(self.mus))]
        res = None
        if val_values is not None:
            ref = max(float(np.max(np.abs(val_values))), 1e-300)
            res = float(np.max(np.abs(d["Mv"] @ sol - val_values))) / ref
        return parts, res


@dataclass(eq=False)
class MultiPencil:
    space: VectorSectorSpace
    mus: list
    brackets: list
    splitter: MultiSplitter = field(repr=False)
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.space.dim

    def combination(self, weights) -> LieStructure:
        c = sum(w * b.c for w, b in zip(weights, self.brackets))
        return LieStructure(c, "combination")


def multi_structure_constants(space: VectorSectorSpace, mus, seed: int = 0,
                              margin_tol: float = 1e-6) -> MultiPencil:
    """All ``l+1`` brackets from commutators of basis pairs."""
    mus = list(mus)
    if len(mus) != space.l + 1:
        raise ValueError(f"need l+1 = {space.l + 1} sections, got {len(mus)}")
    margin = common_zero_margin(mus)
    if margin <= margin_tol:
        raise DecompositionError(f"sections have a common zero (margin {margin:.2e})")
    splitter = MultiSplitter(space, mus, seed=seed)
    n, k = space.n, space.k
    index = space.index
    cache = {}
    worst = [0.0]

    def vals(C):
        if C not in cache:
            d = splitter.data[C]
            cache[C] = (space.scalar_values(d["z"], d["x"]), space.scalar_values(d["zv"], d["xv"]))
        return cache[C]

    def decompose(A, i, B, j, C):
        a, b = index[(A, i)], index[(B, j)]
        pv, vv = vals(C)
        parts, res = splitter.solve(C, pv[:, a] * pv[:, b], vv[:, a] * vv[:, b])
        worst[0] = max(worst[0], res)
        return parts

    def sl_table(A, B):
        coeff, C = commutator_constants(n, k, A, B)
        return [] if C == (0, 0) else [(C, coeff)]

    sparse = assemble_brackets(space.labels, sl_table, decompose, len(mus))
    N = space.dim
    brackets = []
    for r, sp in enumerate(sparse):
        c = np.zeros((N, N, N), dtype=complex)
        for key, v in sp.items():
            c[key] = v
        brackets.append(LieStructure.from_tensor(c, f"[,]_{r + 1}"))
    diag = dict(common_zero_margin=margin, decomposition_residual=worst[0],
                max_condition=max(splitter.conditions.values()),
                asymmetry=max(b.asymmetry for b in brackets))
    return MultiPencil(space, mus, brackets, splitter, diag)


def build_multi_pencil(n: int, k: int, m: int, l: int, tau: complex, seed: int = 3, mus=None) -> MultiPencil:
    lattice = Lattice(tau)
    space = build_vector_space(n, k, m, l, lattice)
    if mus is None:
        mus = random_sections(m, l, lattice, seed)
    return multi_structure_constants(space, mus)


def verify_multi(p: MultiPencil, draws: int = 10, seed: int = 0) -> dict:
    """Jacobi for every bracket and random combination, compatibility for every pair."""
    rng = np.random.default_rng(seed)
    jac = [jacobiator(b) for b in p.brackets]
    comp = {(i, j): compatibility_residual(p.brackets[i], p.brackets[j])
            for i in range(len(p.brackets)) for j in range(i + 1, len(p.brackets))}
    combos = []
    for _ in range(draws):
        w = rng.normal(size=len(p.brackets)) + 1j * rng.normal(size=len(p.brackets))
        combos.append(jacobiator(p.combination(w)))
    return dict(jacobi=jac, compatibility=comp, combination_jacobi=max(combos),
                decomposition_residual=p.diagnostics["decomposition_residual"])


def reconstruction_residual(p: MultiPencil, pairs: int = 4, seed: int = 5) -> float:
    """``sum_i mu_i [f, g]_i`` against the pointwise commutator at held-out ``(z, x)``."""
    sp = p.space
    rng = np.random.default_rng(seed)
    z = collocation_points(sp.lattice, 6, seed=seed + 999)
    x = rng.normal(size=(z.size, sp.l)) + 1j * rng.normal(size=(z.size, sp.l))
    worst = 0.0
    for _ in range(pairs):
        f = rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)
        g = rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)
        F = np.einsum("plij,pl->pij", sp.evaluate_components(f, z), x)
        G = np.einsum("plij,pl->pij", sp.evaluate_components(g, z), x)
        lhs = F @ G - G @ F
        rhs = 0
        for mu, br in zip(p.mus, p.brackets):
            h = br.bracket(f, g)
            H = np.einsum("plij,pl->pij", sp.evaluate_components(h, z), x)
            rhs = rhs + mu(z, x)[:, None, None] * H
        worst = max(worst, float(np.abs(lhs - rhs).max() / np.abs(lhs).max()))
    return worst


def space_rank(space: VectorSectorSpace, seed: int = 0) -> int:
    """Numerical rank of the basis evaluated on random ``(z, x)`` samples (all n^2 entries)."""
    rng = np.random.default_rng(seed)
    z = collocation_points(space.lattice, 3 * space.m, seed=seed + 3)
    x = rng.normal(size=(z.size, space.l)) + 1j * rng.normal(size=(z.size, space.l))
    cols = []
    for a in range(space.dim):
        e = np.zeros(space.dim)
        e[a] = 1.0
        cols.append(np.einsum("plij,pl->pij", space.evaluate_components(e, z), x).ravel())
    M = np.array(cols).T
    M = M / np.linalg.norm(M, axis=0)
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > 1e-8 * s[0]))


def as_scalar_theta(mu: VectorTheta):
    """For l = 1 the recurrence is the scalar one, so the same seeds give the same function."""
    from .theta import ThetaFunction
    if mu.l != 1:
        raise ValueError("only l = 1 sections are scalar theta functions")
    return ThetaFunction.from_seeds(mu.m, mu.lattice, mu.seeds)


def compare_with_scalar(p: MultiPencil, elliptic) -> dict:
    """For l = 1: change of basis onto an elliptic pencil built from the same mu's.

    Returns the fit residual of the basis change, the relative difference of
    the transported brackets, and the spread between spectra of ``ad`` of
    random elements of random pencil members.
    """
    sp = p.space
    if sp.l != 1:
        raise ValueError("comparison needs l = 1")
    z = collocation_points(sp.lattice, 4 * sp.m, seed=77)
    N = sp.dim
    E = np.zeros((z.size * sp.n * sp.n, N), dtype=complex)
    V = np.zeros_like(E)
    for a in range(N):
        e = np.zeros(N)
        e[a] = 1.0
        V[:, a] = sp.evaluate_components(e, z)[:, 0].ravel()
        E[:, a] = elliptic.basis.evaluate(e, z).ravel()
    # vector basis element a = sum_i S[i, a] elliptic element i
    S, *_ = np.linalg.lstsq(E, V, rcond=None)
    fit = float(np.abs(E @ S - V).max() / np.abs(V).max())
    diffs = []
    spectra = []
    rng = np.random.default_rng(1)
    for ours, theirs in ((p.brackets[0], elliptic.c1), (p.brackets[1], elliptic.c2)):
        moved = theirs.change_basis(S)
        diffs.append(float(np.abs(moved.c - ours.c).max() / np.abs(ours.c).max()))
    for _ in range(3):
        u = complex(rng.normal(), rng.normal())
        x = rng.normal(size=N) + 1j * rng.normal(size=N)
        ours = p.brackets[0].c + u * p.brackets[1].c
        theirs = elliptic.c1.c + u * elliptic.c2.c
        ev1 = np.sort_complex(np.linalg.eigvals(np.einsum("i,ijk->kj", x, ours)))
        ev2 = np.sort_complex(np.linalg.eigvals(np.einsum("i,ijk->kj", S @ x, theirs)))
        spectra.append(float(np.abs(ev1 - ev2).max() / max(np.abs(ev1).max(), 1e-300)))
    return dict(fit=fit, bracket_difference=max(diffs), spectrum_difference=max(spectra))
