"""Structure-constant tensors and the checks run on them.

A ``LieStructure`` stores ``c[i, j, k] = c^k_{ij}``, i.e.
``[e_i, e_j] = sum_k c[i, j, k] e_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .poly import PolyElement

RANK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LieStructure:
    c: np.ndarray = field(repr=False)
    label: str = ""
    asymmetry: float = 0.0

    @classmethod
    def from_tensor(cls, c, label: str = "") -> "LieStructure":
        """Antisymmetrize ``c`` in its first two indices, recording the defect."""
        c = np.asarray(c, dtype=complex)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise ValueError(f"structure constants must be an N x N x N tensor, got {c.shape}")
        scale = max(float(np.abs(c).max()), 1e-300)
        asym = float(np.abs(c + c.transpose(1, 0, 2)).max()) / scale
        return cls(0.5 * (c - c.transpose(1, 0, 2)), label, asym)

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def norm(self) -> float:
        return float(np.abs(self.c).max())

    def __add__(self, other: "LieStructure") -> "LieStructure":
        return LieStructure(self.c + other.c, f"{self.label}+{other.label}")

    def scaled(self, s: complex) -> "LieStructure":
        return LieStructure(complex(s) * self.c, self.label)

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.c)

    def ad(self, i: int) -> np.ndarray:
        """Matrix of ``ad e_i``: column k holds ``[e_i, e_k]``."""
        return self.c[i].T

    def change_basis(self, S: np.ndarray) -> "LieStructure":
        """Constants in the basis ``e'_a = sum_i S[i, a] e_i``."""
        S = np.asarray(S, dtype=complex)
        Sinv = np.linalg.inv(S)
        c = np.einsum("ia,jb,ijk,ck->abc", S, S, self.c, Sinv, optimize=True)
        return LieStructure(c, self.label)


def pencil(c1: LieStructure, c2: LieStructure, u: complex) -> LieStructure:
    """The member ``c1 + u c2``."""
    if c1.dim != c2.dim:
        raise ValueError("pencil ends must have equal dimension")
    return LieStructure(c1.c + complex(u) * c2.c, f"{c1.label}+u*{c2.label}")


def _jacobi_tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # sum_m a^m_{ij} b^l_{mk} + cyclic(i, j, k)
    t = np.einsum("ijm,mkl->ijkl", a, b, optimize=True)
    return t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)


def jacobiator(c: LieStructure) -> float:
    """Max Jacobi defect, normalized by the squared max-abs entry."""
    scale = c.norm()
    if scale == 0:
        return 0.0
    return float(np.abs(_jacobi_tensor(c.c, c.c)).max()) / scale**2


def compatibility_residual(c1: LieStructure, c2: LieStructure) -> float:
    """Max defect of the mixed (polarized) Jacobi identity."""
    if c1.dim != c2.dim:
        raise ValueError("pencil ends must have equal dimension")
    s = c1.norm() * c2.norm()
    if s == 0:
        return 0.0
    j = _jacobi_tensor(c1.c, c2.c) + _jacobi_tensor(c2.c, c1.c)
    return float(np.abs(j).max()) / s


# ---------------------------------------------------------------------------
# Lie-Poisson brackets on polynomials
# ---------------------------------------------------------------------------

def lie_poisson_bracket(f: PolyElement, g: PolyElement, c: LieStructure) -> PolyElement:
    """``{f, g} = sum_ij d_i f d_j g c^k_ij x_k``."""
    n = c.dim
    if f.num_vars != n or g.num_vars != n:
        raise ValueError("polynomial variables do not match the algebra dimension")
    df = {i: f.diff(i) for i in range(n) if np.any(f.exps[:, i] > 0)}
    dg = {j: g.diff(j) for j in range(n) if np.any(g.exps[:, j] > 0)}
    parts_e, parts_c = [], []
    for i, fi in df.items():
        for j, gj in dg.items():
            lin = c.c[i, j]
            if not np.any(lin):
                continue
            term = (fi * gj).times_linear(lin)
            parts_e.append(term.exps)
            parts_c.append(term.coeffs)
    if not parts_e:
        return PolyElement.zero(n)
    return PolyElement.make(n, np.vstack(parts_e), np.concatenate(parts_c))


def casimir_defect(f: PolyElement, c: LieStructure) -> list[PolyElement]:
    """``{f, x_j}`` for every generator, computed as ``sum_i d_i f * (c[i, j] . x)``."""
    n = c.dim
    df = [(i, f.diff(i)) for i in range(n) if np.any(f.exps[:, i] > 0)]
    out = []
    for j in range(n):
        es, cs = [], []
        for i, fi in df:
            t = fi.times_linear(c.c[i, j])
            es.append(t.exps)
            cs.append(t.coeffs)
        if es:
            out.append(PolyElement.make(n, np.vstack(es), np.concatenate(cs)))
        else:
            out.append(PolyElement.zero(n))
    return out


def is_casimir(f: PolyElement, c: LieStructure) -> float:
    """``max_j ||{f, x_j}|| / (||f|| ||c||)``; a Casimir gives roundoff-level values."""
    fn = f.norm()
    if fn == 0:
        return 0.0
    worst = max(d.norm() for d in casimir_defect(f, c))
    return worst / (fn * max(c.norm(), 1e-300))


def poisson_jacobi_at_points(f, g, h, c: LieStructure, points) -> float:
    """``{{f,g},h} + cyc`` evaluated pointwise, relative to the summands."""
    fg = lie_poisson_bracket(f, g, c)
    gh = lie_poisson_bracket(g, h, c)
    hf = lie_poisson_bracket(h, f, c)
    terms = [lie_poisson_bracket(fg, h, c), lie_poisson_bracket(gh, f, c),
             lie_poisson_bracket(hf, g, c)]
    vals = [t(points) for t in terms]
    scale = max(max(float(np.abs(v).max()) for v in vals), 1e-300)
    return float(np.abs(sum(vals)).max()) / scale


# ---------------------------------------------------------------------------
# center, Killing form, ideals
# ---------------------------------------------------------------------------

def _nullspace(mat: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel, relative SVD threshold."""
    # a tall matrix needs no full U; a wide one needs the full V
    _, s, vh = np.linalg.svd(mat, full_matrices=mat.shape[0] < mat.shape[1])
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return vh[rank:].conj().T


def center_basis(c: LieStructure, tol: float = RANK_TOL) -> list[PolyElement]:
    """Linear Casimirs: vectors v with ``sum_i v_i c^k_ij = 0`` for all j, k."""
    n = c.dim
    if c.norm() == 0:
        return [PolyElement.linear(v) for v in np.eye(n)]
    mat = c.c.reshape(n, n * n).T
    ker = _nullspace(mat, tol)
    return [PolyElement.linear(_tidy(v)) for v in ker.T]


def center_vectors(c: LieStructure, tol: float = RANK_TOL) -> np.ndarray:
    """Center as columns of a matrix."""
    n = c.dim
    if c.norm() == 0:
        return np.eye(n, dtype=complex)
    return _nullspace(c.c.reshape(n, n * n).T, tol)


def _tidy(v: np.ndarray) -> np.ndarray:
    # scale so the largest entry is 1
    k = int(np.argmax(np.abs(v)))
    return v / v[k]


def killing_form(c: LieStructure) -> np.ndarray:
    return np.einsum("ikl,jlk->ij", c.c, c.c)


@dataclass
class KillingReport:
    killing: np.ndarray
    semisimple: bool
    condition: float
    ideals: list = field(default_factory=list)

    @property
    def ideal_dims(self) -> list[int]:
        return sorted(int(b.shape[1]) for b in self.ideals)


def centroid(c: LieStructure, tol: float = RANK_TOL) -> np.ndarray:
    """Basis (N x N x d) of operators commuting with every ``ad e_i``."""
    n = c.dim
    eye = np.eye(n)
    rows = []
    for i in range(n):
        A = c.ad(i)
        # vec(T A - A T) with column-major vec
        rows.append(np.kron(A.T, eye) - np.kron(eye, A))
    ker = _nullspace(np.vstack(rows), tol)
    return ker.reshape(n, n, -1, order="F")


def killing_semisimple(c: LieStructure, tol: float = RANK_TOL, seed: int = 0) -> KillingReport:
    """Killing form, semisimplicity verdict and simple-ideal decomposition."""
    K = killing_form(c)
    s = np.linalg.svd(K, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    semisimple = bool(s[0] > 0 and s[-1] > tol * s[0])
    report = KillingReport(K, semisimple, cond)
    if not semisimple:
        return report
    cent = centroid(c, tol)
    rng = np.random.default_rng(seed)
    w = rng.normal(size=cent.shape[2]) + 1j * rng.normal(size=cent.shape[2])
    T = np.tensordot(cent, w, axes=([2], [0]))
    evals, evecs = np.linalg.eig(T)
    scale = max(float(np.abs(evals).max()), 1e-300)
    groups: list[list[int]] = []
    for i, ev in enumerate(evals):
        for g in groups:
            if abs(evals[g[0]] - ev) < 1e-6 * scale:
                g.append(i)
                break
        else:
            groups.append([i])
    report.ideals = [evecs[:, g] for g in groups]
    return report


def quotient_by(c: LieStructure, central: np.ndarray) -> tuple[LieStructure, np.ndarray]:
    """Quotient algebra by a central subspace (columns of ``central``).

    A complement is completed from the orthogonal complement; returns the
    quotient structure and the complement basis used.
    """
    z = np.asarray(central, dtype=complex)
    comp = _nullspace(z.conj().T)
    S = np.hstack([comp, z])
    cs = c.change_basis(S)
    r = comp.shape[1]
    return LieStructure(cs.c[:r, :r, :r], c.label + "/center"), comp


# ---------------------------------------------------------------------------
# R-operator
# ---------------------------------------------------------------------------

@dataclass
class ROperator:
    matrix: np.ndarray
    residual: float
    rank: int
    nullity: int


def coboundary_matrix(c1: LieStructure) -> np.ndarray:
    """Linear map R -> [R x, y] + [x, R y] - R[x, y] as an (N^3 x N^2) matrix.

    ``R[a, i]`` is the a-th component of ``R(e_i)``; unknowns are flattened row-major.
    """
    n = c1.dim
    eye = np.eye(n)
    c = c1.c
    M = (np.einsum("qi,pjk->ijkpq", eye, c)
         + np.einsum("qj,ipk->ijkpq", eye, c)
         - np.einsum("ijq,kp->ijkpq", c, eye))
    return M.reshape(n**3, n * n)


def recover_r_operator(c1: LieStructure, c2: LieStructure, tol: float = RANK_TOL) -> ROperator:
    """Minimum-norm R with ``[X,Y]_2 = [RX,Y]_1 + [X,RY]_1 - R[X,Y]_1``."""
    n = c1.dim
    M = coboundary_matrix(c1)
    rhs = c2.c.reshape(-1)
    sol, _, rank, sv = np.linalg.lstsq(M, rhs, rcond=tol)
    fit = M @ sol
    scale = np.linalg.norm(rhs)
    res = float(np.linalg.norm(fit - rhs) / scale) if scale > 0 else float(np.linalg.norm(fit))
    return ROperator(sol.reshape(n, n), res, int(rank), n * n - int(rank))
