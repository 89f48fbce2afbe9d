"""Material law, benchmark problems, exact solutions, L2 errors.

Both built-in benchmarks use the identity material law.  Moments follow
the sign convention ``M = -C Hessian(u)`` throughout, so the exact moment
reported for errors is the negative (scaled) Hessian of the exact
deflection.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError
from .mesh import Mesh, mesh_from_arrays, unit_square_mesh
from .polyquad import ASSEMBLY_DEGREE, ERROR_DEGREE, tri_rule
from .spaces import BCSpec, interpolate_uhat_bc, simply_supported_bc

# singular exponent and amplitude of the reentrant-corner solution; the
# exponent satisfies sin(alpha*omega) + alpha*sin(omega) = 0 for the
# interior opening omega = 5 pi / 4
SINGULAR_ALPHA = 0.673583432147380
SINGULAR_C = 1.234587795273723
ZSHAPE_OPENING = 5.0 * np.pi / 4.0


@dataclass(frozen=True)
class MaterialLaw:
    """Isotropic bending law C(kappa) = D [nu tr(kappa) I + (1-nu) kappa]."""
    D: float = 1.0
    nu: float = 0.0

    def __post_init__(self):
        if not self.D > 0.0:
            raise ConfigurationError("bending rigidity D must be positive")
        if not -1.0 < self.nu <= 0.5:
            raise ConfigurationError(
                f"Poisson ratio {self.nu} outside (-1, 1/2]")


def c_apply(material, kappa):
    """Apply the material operator to symmetric tensors (..., 2, 2)."""
    kappa = np.asarray(kappa, dtype=float)
    tr = kappa[..., 0, 0] + kappa[..., 1, 1]
    out = material.D * (1.0 - material.nu) * kappa
    out[..., 0, 0] += material.D * material.nu * tr
    out[..., 1, 1] += material.D * material.nu * tr
    return out


def cinv_apply(material, M):
    """Apply the inverse material operator:
    C^{-1} M = (M - nu/(1+nu) tr(M) I) / (D (1-nu))."""
    M = np.asarray(M, dtype=float)
    tr = M[..., 0, 0] + M[..., 1, 1]
    corr = material.nu / (1.0 + material.nu) * tr
    out = M.copy()
    out[..., 0, 0] -= corr
    out[..., 1, 1] -= corr
    out /= material.D * (1.0 - material.nu)
    return out


# ---------------------------------------------------------------------------
# exact solutions
# ---------------------------------------------------------------------------

def fourier_eval(x, y, n_max=15):
    """Simply supported square under unit load: truncated double sine
    series for the deflection, its gradient and the moment ``-Hessian``.

    The amplitude 16/pi^6 is forced by the biharmonic equation applied
    term-wise to the sine expansion of the constant load.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    xf = np.broadcast_to(x, shape).ravel()
    yf = np.broadcast_to(y, shape).ravel()

    k = np.pi * (2 * np.arange(n_max + 1) + 1.0)          # (n,)
    amp = 16.0 / np.pi ** 6 / np.multiply.outer(
        k / np.pi, k / np.pi)                             # 1/(ab)
    amp /= (np.add.outer((k / np.pi) ** 2, (k / np.pi) ** 2)) ** 2

    sx, cx = np.sin(np.outer(xf, k)), np.cos(np.outer(xf, k))
    sy, cy = np.sin(np.outer(yf, k)), np.cos(np.outer(yf, k))

    u = np.einsum("qa,qb,ab->q", sx, sy, amp)
    ux = np.einsum("qa,qb,ab->q", cx * k, sy, amp)
    uy = np.einsum("qa,qb,ab->q", sx, cy * k, amp)
    uxx = -np.einsum("qa,qb,ab->q", sx * k ** 2, sy, amp)
    uyy = -np.einsum("qa,qb,ab->q", sx, sy * k ** 2, amp)
    uxy = np.einsum("qa,qb,ab->q", cx * k, cy * k, amp)

    grad = np.stack([ux, uy], axis=-1)
    M = np.empty(xf.shape + (2, 2))
    M[..., 0, 0] = -uxx
    M[..., 0, 1] = -uxy
    M[..., 1, 0] = -uxy
    M[..., 1, 1] = -uyy
    return (u.reshape(shape), grad.reshape(shape + (2,)),
            M.reshape(shape + (2, 2)))


def singular_eval(x, y):
    """Reentrant-corner solution ``r^(1+alpha) (cos((alpha+1) psi) +
    C cos((alpha-1) psi))`` in the bisector frame ``psi = phi - 5 pi/8``,
    where ``phi`` in [0, 5 pi/4] measures the interior angle from the edge
    along the positive x-axis.

    Returns deflection, gradient and moment ``-Hessian``.  The deflection
    and gradient vanish at the corner and are returned exactly as zero
    there; the moment is singular at the corner and a zero placeholder is
    returned for that point.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    xf = np.broadcast_to(x, shape).ravel()
    yf = np.broadcast_to(y, shape).ravel()

    r = np.hypot(xf, yf)
    phi = np.arctan2(yf, xf)
    phi = np.where(phi < 0.0, phi + 2.0 * np.pi, phi)
    psi = phi - ZSHAPE_OPENING / 2.0

    a, C = SINGULAR_ALPHA, SINGULAR_C
    mu = 1.0 + a
    n1, n2 = 1.0 + a, a - 1.0
    g = np.cos(n1 * psi) + C * np.cos(n2 * psi)
    gp = -n1 * np.sin(n1 * psi) - C * n2 * np.sin(n2 * psi)
    gpp = -n1 ** 2 * np.cos(n1 * psi) - C * n2 ** 2 * np.cos(n2 * psi)

    interior = r > 0.0
    rs = np.where(interior, r, 1.0)
    cg, sg = np.cos(phi), np.sin(phi)

    u = np.where(interior, rs ** mu * g, 0.0)
    F1 = mu * cg * g - sg * gp
    F2 = mu * sg * g + cg * gp
    grad = np.where(interior[:, None],
                    rs[:, None] ** (mu - 1.0) * np.stack([F1, F2], axis=1),
                    0.0)

    dF1 = -mu * sg * g + (mu - 1.0) * cg * gp - sg * gpp
    dF2 = mu * cg * g + (mu - 1.0) * sg * gp + cg * gpp
    rfac = np.where(interior, rs ** (mu - 2.0), 0.0)
    uxx = rfac * ((mu - 1.0) * cg * F1 - sg * dF1)
    uxy = rfac * ((mu - 1.0) * sg * F1 + cg * dF1)
    uyy = rfac * ((mu - 1.0) * sg * F2 + cg * dF2)

    M = np.empty(xf.shape + (2, 2))
    M[..., 0, 0] = -uxx
    M[..., 0, 1] = -uxy
    M[..., 1, 0] = -uxy
    M[..., 1, 1] = -uyy
    return (u.reshape(shape), grad.reshape(shape + (2,)),
            M.reshape(shape + (2, 2)))


@dataclass(frozen=True)
class ExactSolution:
    """Point evaluators over (n, 2) point arrays; missing fields are None."""
    u: Optional[Callable] = None
    grad: Optional[Callable] = None
    M: Optional[Callable] = None


def _wrap_xy(eval_xy, component):
    def call(points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return eval_xy(points[:, 0], points[:, 1])[component]
    return call


def fourier_solution(n_max=15):
    ev = lambda x, y: fourier_eval(x, y, n_max)
    return ExactSolution(u=_wrap_xy(ev, 0), grad=_wrap_xy(ev, 1),
                         M=_wrap_xy(ev, 2))


def singular_solution():
    return ExactSolution(u=_wrap_xy(singular_eval, 0),
                         grad=_wrap_xy(singular_eval, 1),
                         M=_wrap_xy(singular_eval, 2))


# ---------------------------------------------------------------------------
# problem definitions
# ---------------------------------------------------------------------------

@dataclass
class ProblemSpec:
    name: str
    initial_mesh: Mesh
    material: MaterialLaw
    f: Optional[Callable]                    # load over (n, 2) points, or None
    bc_builder: Callable[[Mesh], BCSpec]
    exact: Optional[ExactSolution] = None
    singular_point: Optional[tuple] = None


def zshape_mesh():
    """Five right isosceles triangles fanned around the reentrant corner
    of the polygon (0,0), (1,0), (1,1), (-1,1), (-1,-1)."""
    coords = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0),
              (-1.0, 1.0), (-1.0, 0.0), (-1.0, -1.0)]
    tris = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 6)]
    return mesh_from_arrays(coords, tris)


def builtin_square_problem():
    """Simply supported unit square, constant load, identity material."""
    return ProblemSpec(
        name="square",
        initial_mesh=unit_square_mesh(),
        material=MaterialLaw(D=1.0, nu=0.0),
        f=lambda pts: np.ones(len(np.atleast_2d(pts))),
        bc_builder=simply_supported_bc,
        exact=fourier_solution())


def builtin_zshape_problem():
    """Clamped plate with a reentrant corner, zero load, boundary data
    interpolated from the singular solution."""
    exact = singular_solution()
    return ProblemSpec(
        name="zshape",
        initial_mesh=zshape_mesh(),
        material=MaterialLaw(D=1.0, nu=0.0),
        f=None,
        bc_builder=lambda mesh: interpolate_uhat_bc(exact.u, exact.grad, mesh),
        exact=exact,
        singular_point=(0.0, 0.0))


def builtin_problem(name):
    if name == "square":
        return builtin_square_problem()
    if name == "zshape":
        return builtin_zshape_problem()
    raise ConfigurationError(f"unknown problem {name!r}")


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

def project_fields(mesh, u_fn, M_fn, degree=ASSEMBLY_DEGREE):
    """Element means (the lowest-order L2 projections) of a deflection and
    a moment field; the moment is returned as (nT, 3) components."""
    rule = tri_rule(degree)
    pts = np.einsum("qc,tcd->tqd", rule.bary, mesh.coords[mesh.tri_vertices])
    flat = pts.reshape(-1, 2)
    w = rule.weights / 0.5                     # mean weights on any triangle
    u = np.asarray(u_fn(flat), dtype=float).reshape(pts.shape[:2])
    u_mean = u @ w
    M = np.asarray(M_fn(flat), dtype=float).reshape(pts.shape[:2] + (2, 2))
    M_mean = np.stack([M[..., 0, 0] @ w, M[..., 0, 1] @ w,
                       M[..., 1, 1] @ w], axis=1)
    return u_mean, M_mean


def _subdivide(tri_coords, levels):
    """Dyadic quadrisection of one triangle, ``levels`` deep."""
    tris = [np.asarray(tri_coords, dtype=float)]
    for _ in range(levels):
        nxt = []
        for p in tris:
            m01, m12, m02 = 0.5 * (p[0] + p[1]), 0.5 * (p[1] + p[2]), \
                0.5 * (p[0] + p[2])
            nxt += [np.array([p[0], m01, m02]), np.array([m01, p[1], m12]),
                    np.array([m02, m12, p[2]]), np.array([m01, m12, m02])]
        tris = nxt
    return tris


def l2_errors(mesh, solution, exact, singular_point=None,
              subdivision_levels=4):
    """L2 errors of the piecewise-constant fields against an exact
    solution, with dyadic subdivision of elements touching the singular
    corner."""
    rule = tri_rule(ERROR_DEGREE)
    u_field = np.asarray(solution.u, dtype=float)
    M_field = np.asarray(solution.M, dtype=float)

    singular_elems = set()
    if singular_point is not None:
        corner = np.asarray(singular_point, dtype=float)
        dist = np.linalg.norm(mesh.coords - corner, axis=1)
        for v in np.nonzero(dist < 1e-12)[0]:
            singular_elems.update(
                np.nonzero(np.any(mesh.tri_vertices == v, axis=1))[0])

    def batch_error(cells, u_c, M_c):
        """cells (m, 3, 2) with per-cell field values u_c (m,), M_c (m, 3)."""
        pts = np.einsum("qc,mcd->mqd", rule.bary, cells)
        d1 = cells[:, 1] - cells[:, 0]
        d2 = cells[:, 2] - cells[:, 0]
        area = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        w = np.outer(2.0 * area, rule.weights)              # (m, q)
        flat = pts.reshape(-1, 2)
        du = (np.asarray(exact.u(flat), dtype=float).reshape(w.shape)
              - u_c[:, None])
        dM = np.array(exact.M(flat), dtype=float).reshape(w.shape + (2, 2))
        dM[..., 0, 0] -= M_c[:, None, 0]
        dM[..., 0, 1] -= M_c[:, None, 1]
        dM[..., 1, 0] -= M_c[:, None, 1]
        dM[..., 1, 1] -= M_c[:, None, 2]
        frob = np.einsum("mqij,mqij->mq", dM, dM)
        return np.sum(w * du ** 2), np.sum(w * frob)

    regular = np.array(sorted(set(range(mesh.num_triangles))
                              - singular_elems), dtype=np.int64)
    eu2 = em2 = 0.0
    if regular.size:
        eu2, em2 = batch_error(mesh.coords[mesh.tri_vertices[regular]],
                               u_field[regular], M_field[regular])
    for t in sorted(singular_elems):
        cells = np.stack(_subdivide(mesh.coords[mesh.tri_vertices[t]],
                                    subdivision_levels))
        a, b = batch_error(cells,
                           np.full(len(cells), u_field[t]),
                           np.tile(M_field[t], (len(cells), 1)))
        eu2 += a
        em2 += b
    return float(np.sqrt(eu2)), float(np.sqrt(em2))
