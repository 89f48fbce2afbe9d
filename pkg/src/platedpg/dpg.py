"""Element-local DPG computations and global assembly.

Per element the enriched test space is P3 scalars (10 functions) times
symmetric P2 tensors (18 functions).  The local trial-to-test matrix B is
28 x 22 with trial columns in the fixed order

    u | M11 M12 M22 | uhat (3 per CCW vertex) | per edge (alpha, beta) |
    gamma (per CCW vertex)

The Gram matrix of the broken test norm is block diagonal; one dense
Cholesky factorization per element serves both the Schur condensation
``A_T = B^T G^{-1} B`` and the residual estimator
``eta_T^2 = r_T^T G^{-1} r_T``.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .linalg import dense_cholesky, sparse_from_triplets
from .mesh import Mesh
from .polyquad import ASSEMBLY_DEGREE, EDGE_POINTS, edge_rule, tri_rule
from .problems import cinv_apply
from .spaces import DofMap, ElementGeometry, uhat_pair_matrix

N_SCALAR = 10
N_TENSOR = 18
N_TEST = N_SCALAR + N_TENSOR
N_TRIAL = 22


@dataclass
class LocalSystem:
    """Trial-to-test matrix, test Gram matrix and load of one element."""
    B: np.ndarray          # (28, 22)
    G: np.ndarray          # (28, 28) SPD, block diagonal
    load: np.ndarray       # (28,)


class ElementContext:
    """Geometry, bases and quadrature data of one element."""

    def __init__(self, mesh: Mesh, t: int):
        self.geom = ElementGeometry(mesh, t)
        self.sbasis = self.geom.scalar_basis(3)
        self.tbasis = self.geom.tensor_basis(2)
        rule = tri_rule(ASSEMBLY_DEGREE)
        self.qpts, self.qw = rule.map_to(self.geom.P)
        self.scalar = self.sbasis.eval(self.qpts)
        self.tensor = self.tbasis.eval(self.qpts)


def element_context(mesh, t):
    return ElementContext(mesh, t)


def _local_gram(ctx):
    w = ctx.qw
    vals, _, hess = ctx.scalar
    tvals, _, divdiv = ctx.tensor
    G = np.zeros((N_TEST, N_TEST))
    Gz = (np.einsum("q,qi,qj->ij", w, vals, vals)
          + np.einsum("q,qiab,qjab->ij", w, hess, hess))
    Gt = (np.einsum("q,qiab,qjab->ij", w, tvals, tvals)
          + np.einsum("q,qi,qj->ij", w, divdiv, divdiv))
    G[:N_SCALAR, :N_SCALAR] = 0.5 * (Gz + Gz.T)
    G[N_SCALAR:, N_SCALAR:] = 0.5 * (Gt + Gt.T)
    return G


def _local_b(ctx, material):
    geom = ctx.geom
    w = ctx.qw
    _, _, hess = ctx.scalar
    tvals, _, divdiv = ctx.tensor
    B = np.zeros((N_TEST, N_TRIAL))

    # scalar test rows: moment columns (M_j, Hess z_i)_T
    hints = np.einsum("q,qiab->iab", w, hess)
    B[:N_SCALAR, 1] = hints[:, 0, 0]
    B[:N_SCALAR, 2] = 2.0 * hints[:, 0, 1]
    B[:N_SCALAR, 3] = hints[:, 1, 1]

    # scalar test rows: qhat columns through the skeleton duality
    rule = edge_rule(EDGE_POINTS)
    for k in range(3):
        pts = geom.edge_points(k, rule.points)
        vals_e, grads_e, _ = ctx.sbasis.eval(pts)
        s = geom.sign[k]
        B[:N_SCALAR, 13 + 2 * k] = s * (rule.weights @ vals_e)
        B[:N_SCALAR, 14 + 2 * k] = -s * (rule.weights
                                         @ (grads_e @ geom.nrm[k]))
    corner_vals, _, _ = ctx.sbasis.eval(geom.P)
    B[:N_SCALAR, 19:22] = -corner_vals.T

    # tensor test rows: u column (1, divdiv Theta_i)_T
    B[N_SCALAR:, 0] = w @ divdiv

    # tensor test rows: moment columns (M_j, C^{-1} Theta_i)_T
    ct = cinv_apply(material, tvals)
    cints = np.einsum("q,qiab->iab", w, ct)
    B[N_SCALAR:, 1] = cints[:, 0, 0]
    B[N_SCALAR:, 2] = 2.0 * cints[:, 0, 1]
    B[N_SCALAR:, 3] = cints[:, 1, 1]

    # tensor test rows: uhat columns, -<uhat, Theta>
    B[N_SCALAR:, 4:13] = -uhat_pair_matrix(geom, ctx.tbasis)
    return B


def _local_load(ctx, f):
    load = np.zeros(N_TEST)
    if f is not None:
        vals, _, _ = ctx.scalar
        fq = np.asarray(f(ctx.qpts), dtype=float)
        load[:N_SCALAR] = -np.einsum("q,q,qi->i", ctx.qw, fq, vals)
    return load


def local_b(mesh, t, material):
    return _local_b(ElementContext(mesh, t), material)


def local_gram(mesh, t):
    return _local_gram(ElementContext(mesh, t))


def local_load(mesh, t, f):
    return _local_load(ElementContext(mesh, t), f)


def local_system(mesh, t, material, f):
    ctx = ElementContext(mesh, t)
    return LocalSystem(B=_local_b(ctx, material), G=_local_gram(ctx),
                       load=_local_load(ctx, f))


def condense(local: LocalSystem):
    """Schur-condensed normal-equation contribution
    ``A_T = B^T G^{-1} B`` and ``b_T = B^T G^{-1} load``."""
    L = dense_cholesky(local.G)
    W = scipy.linalg.solve_triangular(L, local.B, lower=True)
    v = scipy.linalg.solve_triangular(L, local.load, lower=True)
    A_T = W.T @ W
    return 0.5 * (A_T + A_T.T), W.T @ v


@dataclass
class ElementSystems:
    """Local systems, their Gram Cholesky factors and scatter indices."""
    locals: List[LocalSystem]
    chol: List[np.ndarray]
    scatter: List[np.ndarray]


def build_element_systems(mesh, dofmap, material, f):
    locs, chols, scats = [], [], []
    for t in range(mesh.num_triangles):
        loc = local_system(mesh, t, material, f)
        locs.append(loc)
        chols.append(dense_cholesky(loc.G))
        scats.append(dofmap.element_scatter(t))
    return ElementSystems(locs, chols, scats)


@dataclass
class GlobalSystem:
    """Condensed normal equations on the free DOFs plus the affine shift
    data needed to recover full coefficient vectors.

    The free unknowns are diagonally equilibrated: the exposed system is
    ``(D A D) y = D rhs`` with ``D = diag(A)^{-1/2}``, which balances the
    vastly different natural scales of field, trace and moment unknowns
    (the raw diagonal spans many orders of magnitude already on moderate
    meshes).  ``recover_free`` undoes the scaling.
    """
    A: "scipy.sparse.csr_matrix"
    rhs: np.ndarray
    dofmap: DofMap
    systems: ElementSystems
    scale: np.ndarray

    def recover_free(self, y):
        return self.scale * y


def assemble(mesh, dofmap, problem, systems: Optional[ElementSystems] = None):
    """Assemble the condensed SPD system on the free DOFs; the right-hand
    side carries the essential-BC shift ``-A x_prescribed``."""
    if systems is None:
        systems = build_element_systems(mesh, dofmap, problem.material,
                                        problem.f)
    nT = mesh.num_triangles
    rows = np.empty(nT * N_TRIAL * N_TRIAL, dtype=np.int64)
    cols = np.empty_like(rows)
    vals = np.empty(rows.shape[0])
    b_full = np.zeros(dofmap.full_dim)
    for t in range(nT):
        loc = systems.locals[t]
        L = systems.chol[t]
        W = scipy.linalg.solve_triangular(L, loc.B, lower=True)
        v = scipy.linalg.solve_triangular(L, loc.load, lower=True)
        A_T = W.T @ W
        A_T = 0.5 * (A_T + A_T.T)
        idx = systems.scatter[t]
        sl = slice(t * N_TRIAL * N_TRIAL, (t + 1) * N_TRIAL * N_TRIAL)
        rows[sl] = np.repeat(idx, N_TRIAL)
        cols[sl] = np.tile(idx, N_TRIAL)
        vals[sl] = A_T.ravel()
        b_full[idx] += W.T @ v
    A_full = sparse_from_triplets(rows, cols, vals, dofmap.full_dim)
    R = dofmap.R
    A = (R.T @ A_full @ R).tocsr()
    rhs = np.asarray(R.T @ (b_full - A_full @ dofmap.x_prescribed)).ravel()
    diag = A.diagonal()
    scale = np.where(diag > 0.0, 1.0 / np.sqrt(np.maximum(diag, 1e-300)), 1.0)
    D = sp.diags(scale)
    A = (D @ A @ D).tocsr()
    A = 0.5 * (A + A.T)
    return GlobalSystem(A=A, rhs=scale * rhs, dofmap=dofmap,
                        systems=systems, scale=scale)


@dataclass
class Solution:
    """Full trial coefficient vector with block views."""
    mesh: Mesh
    dofmap: DofMap
    x_full: np.ndarray

    @property
    def u(self):
        d = self.dofmap
        return self.x_full[d.off_u:d.off_m]

    @property
    def M(self):
        d = self.dofmap
        return self.x_full[d.off_m:d.off_uhat].reshape(-1, 3)

    @property
    def uhat(self):
        d = self.dofmap
        return self.x_full[d.off_uhat:d.off_alpha].reshape(-1, 3)

    @property
    def qhat_alpha(self):
        d = self.dofmap
        return self.x_full[d.off_alpha:d.off_beta]

    @property
    def qhat_beta(self):
        d = self.dofmap
        return self.x_full[d.off_beta:d.off_gamma]

    @property
    def qhat_gamma(self):
        d = self.dofmap
        return self.x_full[d.off_gamma:].reshape(-1, 3)


@dataclass
class EstimatorField:
    """Per-element residual estimator contributions."""
    per_element: np.ndarray

    @property
    def total(self):
        return float(np.sqrt(np.sum(self.per_element ** 2)))


def element_residuals(systems: ElementSystems, x_full):
    """Local residual vectors ``r_T = load_T - B_T x_T``."""
    out = []
    for loc, idx in zip(systems.locals, systems.scatter):
        out.append(loc.load - loc.B @ x_full[idx])
    return out


def estimate(mesh, dofmap, problem, solution,
             systems: Optional[ElementSystems] = None):
    """DPG error estimator: per element the dual norm of the residual in
    the discrete test space, ``eta_T^2 = r_T^T G_T^{-1} r_T``."""
    if systems is None:
        systems = build_element_systems(mesh, dofmap, problem.material,
                                        problem.f)
    etas = np.empty(mesh.num_triangles)
    for t, r in enumerate(element_residuals(systems, solution.x_full)):
        y = scipy.linalg.solve_triangular(systems.chol[t], r, lower=True)
        etas[t] = np.linalg.norm(y)
    return EstimatorField(per_element=etas)
