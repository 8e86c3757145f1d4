"""Compatible brackets on the space V_m of sl_n-valued theta functions.

``V_m`` consists of holomorphic ``f: C -> sl_n`` with
``f(z+1) = a f(z) a^-1`` and ``f(z+tau) = (-1)^m e^{-2 pi i m z} b f(z) b^-1``.
Writing ``f = sum f_{alpha,beta} t_{alpha,beta}``, each sector component is
``e^{-2 pi i k beta z/n} g(z - k alpha/(mn) - k beta tau/(mn))`` with ``g`` in
Theta_m, which gives the basis used here (``m`` functions per sector).

Given ``mu1, mu2`` in Theta_m without common zeros, every ``Z`` in V_{2m}
splits uniquely as ``mu1 P + mu2 Q``; applied to pointwise commutators this
defines the two brackets.  The split is computed by collocation per sector.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.stats import qmc

from .heisenberg import (SLBasis, Sector, build_pair, check_nk, commutator_constants,
                         dual_basis, sectors, sl_basis)
from .lie import LieStructure, jacobiator, compatibility_residual, killing_semisimple, pencil
from .pipeline import assemble_brackets
from .theta import (ANCHOR, Lattice, RootSet, ThetaError, ThetaFunction, build_theta_space,
                    find_roots, pencil_roots, test_grid, theta_generator)

TWO_PI_I = 2j * np.pi
COND_LIMIT = 1e8
POINT_SEPARATION = 1e-3


class DecompositionError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SectorFunction:
    """``e^{-2 pi i k beta z/n} g(z - shift)`` with ``shift = k(alpha + beta tau)/(m n)``."""

    sector: Sector
    g: ThetaFunction
    n: int
    k: int

    @property
    def shift(self) -> complex:
        a, b = self.sector
        m = self.g.order
        return self.k * (a + b * self.g.lattice.tau) / (m * self.n)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        beta = self.sector[1]
        return np.exp(-TWO_PI_I * self.k * beta * z / self.n) * self.g(z - self.shift)


@dataclass(frozen=True, eq=False)
class EquivariantBasis:
    n: int
    m: int
    k: int
    lattice: Lattice
    sl: SLBasis
    theta_basis: tuple
    labels: tuple  # ((sector, j), ...)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @cached_property
    def index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    @property
    def sectors(self) -> list[Sector]:
        return sectors(self.n)

    def scalar(self, sector: Sector, j: int) -> SectorFunction:
        return SectorFunction(sector, self.theta_basis[j], self.n, self.k)

    def sector_values(self, sector: Sector, pts) -> np.ndarray:
        """``(len(pts), m)`` values of the sector's scalar basis."""
        return np.stack([self.scalar(sector, j)(pts) for j in range(self.m)], axis=-1)

    def scalar_values(self, pts) -> np.ndarray:
        """``(len(pts), N)`` scalar parts of every basis element."""
        return np.stack([self.scalar(s, j)(pts) for s, j in self.labels], axis=-1)

    def evaluate(self, coords, z) -> np.ndarray:
        """Matrix values ``(len(z), n, n)`` of the element with given coordinates."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        vals = self.scalar_values(z) * np.asarray(coords)[None, :]
        out = np.zeros((z.size, self.n, self.n), dtype=complex)
        for a, (s, _) in enumerate(self.labels):
            out += vals[:, a, None, None] * self.sl.elements[s][None]
        return out

    def quasi_residual(self, coords, pts=None) -> tuple[float, float]:
        """Residuals of the two matrix quasi-periodicity identities."""
        if pts is None:
            pts = test_grid(self.lattice, 5)
        a, b = self.sl.pair.a, self.sl.pair.b
        tau = self.lattice.tau
        f0 = self.evaluate(coords, pts)
        f1 = self.evaluate(coords, pts + 1)
        ft = self.evaluate(coords, pts + tau)
        r1 = np.abs(f1 - a @ f0 @ np.linalg.inv(a)).max() / np.abs(f0).max()
        factor = ((-1) ** self.m * np.exp(-TWO_PI_I * self.m * pts))[:, None, None]
        r2 = np.abs(ft - factor * (b @ f0 @ np.linalg.inv(b))).max() / np.abs(ft).max()
        return float(r1), float(r2)


def build_vm_basis(n: int, m: int, k: int, lattice: Lattice, trunc_tol: float = 1e-17) -> EquivariantBasis:
    check_nk(n, k)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    pair = build_pair(n, k)
    sl = dual_basis(sl_basis(pair))
    tb = tuple(build_theta_space(m, lattice, trunc_tol))
    labels = tuple((s, j) for s in sectors(n) for j in range(m))
    return EquivariantBasis(n, m, k, lattice, sl, tb, labels)


def collocation_points(lattice: Lattice, count: int, avoid=(), seed: int = 0,
                       anchor: complex = ANCHOR, separation: float = POINT_SEPARATION) -> np.ndarray:
    """Scrambled Halton points in the parallelogram, kept away from ``avoid`` and each other."""
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    avoid = list(avoid)
    pts: list[complex] = []
    while len(pts) < count:
        st = sampler.random(4 * count)
        for s, t in st:
            z = anchor + 0.04 + 0.92 * s + (0.04 + 0.92 * t) * lattice.tau
            if all(lattice.distance(z, w) > separation for w in avoid + pts):
                pts.append(complex(z))
            if len(pts) == count:
                break
    return np.array(pts)


def common_zero_gap(mu1: ThetaFunction, mu2: ThetaFunction) -> float:
    """``min |mu2(x)|`` over roots x of mu1, relative to the sup of |mu2| on a grid."""
    rs = find_roots(mu1)
    grid = test_grid(mu1.lattice, 8)
    ref = float(np.max(np.abs(mu2(grid))))
    return float(np.min(np.abs(mu2(rs.roots)))) / ref


def random_mus(m: int, lattice: Lattice, seed: int = 7, gap_tol: float = 1e-3):
    """Seeded random pair in Theta_m with a no-common-zero certificate."""
    if m < 2:
        raise ThetaError("a pencil without common zeros needs m >= 2")
    rng = np.random.default_rng(seed)
    basis = build_theta_space(m, lattice)
    for _ in range(20):
        w = rng.normal(size=(2, m)) + 1j * rng.normal(size=(2, m))
        mu1 = ThetaFunction.from_seeds(m, lattice, w[0])
        mu2 = ThetaFunction.from_seeds(m, lattice, w[1])
        if common_zero_gap(mu1, mu2) > gap_tol:
            return mu1, mu2
    raise ThetaError("could not draw a pencil without common zeros")


class SplitSolver:
    """Per-sector collocation solver for ``Z = mu1 P + mu2 Q``."""

    def __init__(self, basis: EquivariantBasis, mus: tuple, seed: int = 0, oversample: int = 2):
        self.basis = basis
        self.mus = tuple(mus)
        lat = basis.lattice
        avoid = []
        for mu in self.mus:
            avoid.extend(find_roots(mu).roots)
        self._avoid = avoid
        nb = len(self.mus)
        m = basis.m
        self.sector_data = {}
        self.conditions = {}
        for si, s in enumerate(basis.sectors):
            for attempt in range(5):
                pts = collocation_points(lat, oversample * nb * m, avoid,
                                         seed=seed + 101 * si + 7919 * attempt)
                F = basis.sector_values(s, pts)
                M = np.hstack([mu(pts)[:, None] * F for mu in self.mus])
                M_s, col = _col_scale(M)
                cond = np.linalg.cond(M_s)
                if cond < COND_LIMIT:
                    break
            else:
                raise DecompositionError(f"collocation for sector {s} ill-conditioned (cond {cond:.2e})")
            val = collocation_points(lat, 2 * nb * m, avoid + list(pts),
                                     seed=seed + 50021 + 13 * si)
            Fv = basis.sector_values(s, val)
            Mv = np.hstack([mu(val)[:, None] * Fv for mu in self.mus])
            self.sector_data[s] = dict(pts=pts, pinv=np.linalg.pinv(M_s) / col[:, None],
                                       val=val, Mv=Mv)
            self.conditions[s] = float(cond)

    def solve(self, sector: Sector, values: np.ndarray, val_values: np.ndarray | None = None):
        """Coordinates (one length-m block per mu) and the held-out residual."""
        d = self.sector_data[sector]
        sol = d["pinv"] @ values
        m = self.basis.m
        parts = [sol[i * m:(i + 1) * m] for i in range(len(self.mus))]
        res = None
        if val_values is not None:
            ref = max(float(np.max(np.abs(val_values))), 1e-300)
            res = float(np.max(np.abs(d["Mv"] @ sol - val_values))) / ref
        return parts, res


def _col_scale(M):
    col = np.linalg.norm(M, axis=0)
    col[col == 0] = 1.0
    return M / col, col


@dataclass(eq=False)
class PencilData:
    mu1: ThetaFunction
    mu2: ThetaFunction
    basis: EquivariantBasis
    c1: LieStructure
    c2: LieStructure
    solver: SplitSolver = field(repr=False)
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def at(self, u: complex) -> LieStructure:
        return pencil(self.c1, self.c2, u)


def structure_constants(basis: EquivariantBasis, mu1: ThetaFunction, mu2: ThetaFunction,
                        seed: int = 0, gap_tol: float = 1e-6) -> PencilData:
    """Both brackets from commutators of basis pairs, split by collocation."""
    if mu1.order != basis.m or mu2.order != basis.m:
        raise ValueError("mu1, mu2 must have the order of the basis")
    gap = common_zero_gap(mu1, mu2)
    if gap <= gap_tol:
        raise DecompositionError(f"mu1 and mu2 share a zero (gap {gap:.2e})")
    solver = SplitSolver(basis, (mu1, mu2), seed=seed)
    n, k = basis.n, basis.k
    cache = {}

    def vals(C):
        if C not in cache:
            d = solver.sector_data[C]
            cache[C] = (basis.scalar_values(d["pts"]), basis.scalar_values(d["val"]))
        return cache[C]

    index = basis.index
    worst = [0.0]

    def decompose(A, i, B, j, C):
        a, b = index[(A, i)], index[(B, j)]
        pv, vv = vals(C)
        parts, res = solver.solve(C, pv[:, a] * pv[:, b], vv[:, a] * vv[:, b])
        worst[0] = max(worst[0], res)
        return parts

    def sl_table(A, B):
        coeff, C = commutator_constants(n, k, A, B)
        return [] if C == (0, 0) else [(C, coeff)]

    sparse = assemble_brackets(basis.labels, sl_table, decompose, 2)
    N = basis.dim
    tensors = []
    for sp in sparse:
        c = np.zeros((N, N, N), dtype=complex)
        for key, v in sp.items():
            c[key] = v
        tensors.append(c)
    c1 = LieStructure.from_tensor(tensors[0], "[,]_1")
    c2 = LieStructure.from_tensor(tensors[1], "[,]_2")
    diag = dict(common_zero_gap=gap, decomposition_residual=worst[0],
                max_condition=max(solver.conditions.values()),
                asymmetry=max(c1.asymmetry, c2.asymmetry))
    return PencilData(mu1, mu2, basis, c1, c2, solver, diag)


def build_pencil(n: int, m: int, k: int, tau: complex, seed: int = 7, mus=None) -> PencilData:
    """Convenience: basis, seeded random mu's (unless given) and both brackets."""
    lattice = Lattice(tau)
    basis = build_vm_basis(n, m, k, lattice)
    if mus is None:
        mus = random_mus(m, lattice, seed)
    return structure_constants(basis, *mus)


def check_pencil_identities(p: PencilData) -> dict:
    return dict(jacobi_c1=jacobiator(p.c1), jacobi_c2=jacobiator(p.c2),
                compatibility=compatibility_residual(p.c1, p.c2))


def split_matrix_function(Z, p: PencilData):
    """Split a matrix-valued ``Z`` in V_{2m} as ``mu1 P + mu2 Q``.

    ``Z`` maps an array of points to ``(len, n, n)`` matrices.  Returns the
    coordinate vectors of P and Q in the V_m basis and the worst held-out
    residual over sectors.
    """
    basis = p.basis
    N, m = basis.dim, basis.m
    P = np.zeros(N, dtype=complex)
    Q = np.zeros(N, dtype=complex)
    worst = 0.0
    for s in basis.sectors:
        d = p.solver.sector_data[s]
        zs = _project(basis, Z(d["pts"]), s)
        zv = _project(basis, Z(d["val"]), s)
        if np.max(np.abs(zv)) == 0 and np.max(np.abs(zs)) == 0:
            continue
        (ps, qs), res = p.solver.solve(s, zs, zv)
        worst = max(worst, res)
        for j in range(m):
            P[basis.index[(s, j)]] = ps[j]
            Q[basis.index[(s, j)]] = qs[j]
    return P, Q, worst


def _project(basis: EquivariantBasis, mats: np.ndarray, s: Sector) -> np.ndarray:
    return np.einsum("ij,pji->p", basis.sl.duals[s], mats) / basis.n


def combrack_residual(p: PencilData, x, y, pts=None) -> float:
    """Pointwise ``[f1, f2] - mu1 [f1,f2]_1 - mu2 [f1,f2]_2`` relative to ``[f1, f2]``."""
    if pts is None:
        pts = collocation_points(p.basis.lattice, 12, p.solver._avoid, seed=99991)
    b = p.basis
    f1, f2 = b.evaluate(x, pts), b.evaluate(y, pts)
    comm = f1 @ f2 - f2 @ f1
    r = (p.mu1(pts)[:, None, None] * b.evaluate(p.c1.bracket(x, y), pts)
         + p.mu2(pts)[:, None, None] * b.evaluate(p.c2.bracket(x, y), pts))
    return float(np.abs(comm - r).max() / np.abs(comm).max())


# ---------------------------------------------------------------------------
# splitting basis
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SplittingBasis:
    u: complex
    roots: np.ndarray
    rootset: RootSet
    labels: list                # [((alpha, beta), gamma)], gamma = 0..m-1
    coords: np.ndarray          # N x N, column per label
    prefactors: dict
    residual: float
    pencil: PencilData = field(repr=False)

    def function(self, alpha: int, beta: int, gamma: int):
        return _v_scalar(self.pencil, self.roots, alpha, beta, gamma)[0]


def _v_scalar(p: PencilData, roots: np.ndarray, alpha: int, beta: int, gamma: int):
    """Scalar part of v_{alpha,beta,gamma} for arbitrary integer alpha, beta."""
    b = p.basis
    n, k, tau = b.n, b.k, b.lattice.tau
    th = theta_generator(b.lattice)
    off = k * alpha / n + k * beta * tau / n
    xg = roots[gamma]
    others = [x for d, x in enumerate(roots) if d != gamma]
    den = th(-off) * np.prod([th(xg - x) for x in others]) if others else th(-off)
    pref = complex(p.mu1(xg) / den)

    def s(z):
        z = np.asarray(z, dtype=complex)
        out = np.exp(-TWO_PI_I * k * beta * z / n) * th(z - xg - off)
        for x in others:
            out = out * th(z - x)
        return pref * out

    return s, pref


def _fit_sector(p: PencilData, sector: Sector, fn):
    """Coordinates of a scalar function of F_sector in the basis, plus held-out residual."""
    d = p.solver.sector_data[sector]
    F = p.basis.sector_values(sector, d["pts"])
    coef, *_ = np.linalg.lstsq(F, fn(d["pts"]), rcond=None)
    Fv = p.basis.sector_values(sector, d["val"])
    ref = fn(d["val"])
    res = float(np.max(np.abs(Fv @ coef - ref)) / max(np.max(np.abs(ref)), 1e-300))
    return coef, res


def v_coordinates(p: PencilData, roots, alpha: int, beta: int, gamma: int):
    n = p.basis.n
    s_fn, pref = _v_scalar(p, roots, alpha, beta, gamma)
    sector = (alpha % n, beta % n)
    coef, res = _fit_sector(p, sector, s_fn)
    vec = np.zeros(p.dim, dtype=complex)
    for j in range(p.basis.m):
        vec[p.basis.index[(sector, j)]] = coef[j]
    return vec, pref, res


def splitting_basis(p: PencilData, u: complex) -> SplittingBasis:
    rs, regular = pencil_roots(p.mu1, p.mu2, u)
    if not regular:
        raise ThetaError(f"u = {u} is not a regular value")
    roots = rs.zero_sum_representatives()
    b = p.basis
    labels, cols, prefs = [], [], {}
    worst = 0.0
    for s in b.sectors:
        for g in range(b.m):
            vec, pref, res = v_coordinates(p, roots, s[0], s[1], g)
            labels.append((s, g))
            cols.append(vec)
            prefs[(s, g)] = pref
            worst = max(worst, res)
    return SplittingBasis(complex(u), roots, rs, labels, np.array(cols).T, prefs, worst, p)


def evaluation_condition(basis: EquivariantBasis, points) -> float:
    """Worst normalized condition number of the evaluation map at ``points``.

    The map ``f -> (f(x_1), ..., f(x_m))`` is block diagonal over sectors.
    """
    points = np.asarray(points, dtype=complex)
    worst = 0.0
    for s in basis.sectors:
        E = basis.sector_values(s, points)
        # row scaling is free: each row is one evaluation point
        E = E / np.linalg.norm(E, axis=1, keepdims=True)
        E, _ = _col_scale(E)
        worst = max(worst, float(np.linalg.cond(E)))
    return worst


def verify_splitting_relations(p: PencilData, u: complex, sb: SplittingBasis | None = None) -> dict:
    """Residuals of the commutator relations of the splitting basis at ``u``."""
    if p.basis.m < 2:
        return dict(skipped=True, reason="m = 1 admits no pencil without common zeros")
    if sb is None:
        sb = splitting_basis(p, u)
    cu = p.at(u)
    n, k = p.basis.n, p.basis.k
    V = sb.coords
    N = V.shape[1]
    br = np.einsum("ia,jb,ijk->abk", V, V, cu.c, optimize=True)
    scale = float(np.linalg.norm(br, axis=2).max())
    cross_block = 0.0
    in_block = 0.0
    coeff_rel = 0.0
    targets = {}
    for a, (s1, g1) in enumerate(sb.labels):
        for b_, (s2, g2) in enumerate(sb.labels):
            vec = br[a, b_]
            if g1 != g2:
                cross_block = max(cross_block, float(np.linalg.norm(vec)) / scale)
                continue
            coeff, tgt_sector = commutator_constants(n, k, s1, s2)
            if tgt_sector == (0, 0):
                in_block = max(in_block, float(np.linalg.norm(vec)) / scale)
                continue
            key = (s1[0] + s2[0], s1[1] + s2[1], g1)
            if key not in targets:
                targets[key] = v_coordinates(p, sb.roots, *key)[0]
            tgt = targets[key]
            in_block = max(in_block, float(np.linalg.norm(vec - coeff * tgt)) / scale)
            if abs(coeff) > 1e-12:
                fitted = np.vdot(tgt, vec) / np.vdot(tgt, tgt)
                coeff_rel = max(coeff_rel, float(abs(fitted - coeff) / abs(coeff)))
    kr = killing_semisimple(cu)
    return dict(skipped=False, u=complex(u), cross_block=cross_block, in_block=in_block,
                in_block_coefficient_rel=coeff_rel, expansion_residual=sb.residual,
                evaluation_condition=evaluation_condition(p.basis, sb.rootset.roots),
                semisimple=kr.semisimple, ideal_dims=kr.ideal_dims)


def random_regular_u(p: PencilData, count: int, seed: int = 11) -> list[complex]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        u = complex(rng.normal() + 1j * rng.normal())
        try:
            _, regular = pencil_roots(p.mu1, p.mu2, u)
        except ThetaError:
            continue
        if regular:
            out.append(u)
    return out
