"""2D P1 finite elements for the Robin-Dirichlet eigenproblem.

Star-shaped annular domains are meshed by blending the two boundary
parameterizations along rays through the domain center, so every node sits
exactly on a ray and boundary nodes sit exactly on the curves.  Assembly
produces exact per-triangle P1 stiffness, consistent mass and exact
two-point Robin edge mass; the inner (Dirichlet) ring is eliminated.  The
smallest eigenpair of the SPD pencil comes from shifted inverse power
iteration with an ILU-preconditioned conjugate gradient inner solver.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spilu

from .errors import GeometryError, RangeError, SolverError, StarShapeError
from .geometry import AnnularDomain

RAYLEIGH_RTOL = 1e-12
RESIDUAL_FACTOR = 1e-10
CG_RTOL = 1e-11


@dataclass(frozen=True)
class Mesh:
    """Conforming triangulation of an annular domain.

    boundary edges are stored per ring as (n, 2) index arrays; node ids on
    ring i of the structured grid are i * n_a + k.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    inner_edges: np.ndarray
    outer_edges: np.ndarray
    resolution: tuple

    def __post_init__(self):
        for name in ("nodes", "triangles", "inner_edges", "outer_edges"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def inner_nodes(self) -> np.ndarray:
        return np.unique(self.inner_edges)

    @property
    def outer_nodes(self) -> np.ndarray:
        return np.unique(self.outer_edges)

    @property
    def scale(self) -> float:
        return float(np.max(np.ptp(self.nodes, axis=0)))

    def triangle_areas(self) -> np.ndarray:
        p, t = self.nodes, self.triangles
        d1 = p[t[:, 1]] - p[t[:, 0]]
        d2 = p[t[:, 2]] - p[t[:, 0]]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def area(self) -> float:
        return float(np.sum(self.triangle_areas()))

    def max_edge_length(self) -> float:
        p, t = self.nodes, self.triangles
        h = 0.0
        for a, b in ((0, 1), (1, 2), (2, 0)):
            e = p[t[:, a]] - p[t[:, b]]
            h = max(h, float(np.max(np.hypot(e[:, 0], e[:, 1]))))
        return h


def _validate_mesh(mesh: Mesh, domain: AnnularDomain) -> None:
    areas = mesh.triangle_areas()
    if np.any(areas <= 1e-14 * mesh.scale**2):
        raise GeometryError("mesh contains degenerate or inverted triangles")
    # conformity: interior edges shared by exactly two triangles
    t = mesh.triangles
    edges = np.sort(
        np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1
    )
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    if np.any(counts > 2):
        raise GeometryError("mesh is not conforming")
    n_boundary = int(np.sum(counts == 1))
    if n_boundary != len(mesh.inner_edges) + len(mesh.outer_edges):
        raise GeometryError("boundary edge bookkeeping is inconsistent")
    tol = 1e-9 * mesh.scale
    if np.max(domain.inner.distance(mesh.nodes[mesh.inner_nodes])) > tol:
        raise GeometryError("inner boundary nodes are off the curve")
    if np.max(domain.outer.distance(mesh.nodes[mesh.outer_nodes])) > tol:
        raise GeometryError("outer boundary nodes are off the curve")


def mesh_annular(domain: AnnularDomain, n_r: int, n_a: int, validate: bool = True) -> Mesh:
    """Structured triangulation with n_r radial layers and n_a rays.

    Nodes interpolate linearly between the two boundary crossings of each
    ray; quads are split along their shorter diagonal.
    """
    if n_r < 2:
        raise RangeError("need at least 2 radial layers")
    if n_a < 8:
        raise RangeError("need at least 8 angular rays")
    center = domain.center
    theta = 2.0 * np.pi * np.arange(n_a) / n_a
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    try:
        t_in = np.array([domain.inner.ray_length(center, u) for u in dirs])
        t_out = np.array([domain.outer.ray_length(center, u) for u in dirs])
    except StarShapeError as err:
        raise StarShapeError(f"domain is not star shaped about its center: {err}") from err
    if np.any(t_out <= t_in):
        raise StarShapeError("boundary rays cross in the wrong order")
    p_in = center + t_in[:, None] * dirs
    p_out = center + t_out[:, None] * dirs

    frac = np.arange(n_r + 1)[:, None, None] / n_r
    nodes = (p_in[None, :, :] * (1.0 - frac) + p_out[None, :, :] * frac).reshape(-1, 2)

    def nid(i, k):
        return i * n_a + k % n_a

    triangles = []
    for i in range(n_r):
        for k in range(n_a):
            a = nid(i, k)
            b = nid(i, k + 1)
            c = nid(i + 1, k + 1)
            d = nid(i + 1, k)
            d_ac = np.hypot(*(nodes[a] - nodes[c]))
            d_bd = np.hypot(*(nodes[b] - nodes[d]))
            # near-ties split uniformly so symmetric domains get
            # rotationally symmetric triangulations
            if d_ac <= d_bd * (1.0 + 1e-9):
                triangles.extend([(a, b, c), (a, c, d)])
            else:
                triangles.extend([(a, b, d), (b, c, d)])
    triangles = np.asarray(triangles, dtype=np.int64)
    # enforce positive orientation
    p = nodes
    d1 = p[triangles[:, 1]] - p[triangles[:, 0]]
    d2 = p[triangles[:, 2]] - p[triangles[:, 0]]
    flip = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0.0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]

    ks = np.arange(n_a)
    inner_edges = np.column_stack([nid(0, ks), nid(0, ks + 1)])
    outer_edges = np.column_stack([nid(n_r, ks), nid(n_r, ks + 1)])
    mesh = Mesh(nodes, triangles, inner_edges, outer_edges, (n_r, n_a))
    if validate:
        _validate_mesh(mesh, domain)
    return mesh


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SparseSymmetric:
    """CSR matrix that is symmetric by construction."""

    mat: sparse.csr_matrix

    def __post_init__(self):
        m = self.mat
        if m.shape[0] != m.shape[1]:
            raise GeometryError("matrix must be square")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @staticmethod
    def from_triplets(rows, cols, vals, n) -> "SparseSymmetric":
        m = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        return SparseSymmetric(((m + m.T) * 0.5).tocsr())


def assemble_forms(mesh: Mesh):
    """Full (un-eliminated) stiffness K, mass M and outer edge mass B."""
    p, t = mesh.nodes, mesh.triangles
    n = len(p)
    v0, v1, v2 = p[t[:, 0]], p[t[:, 1]], p[t[:, 2]]
    area = 0.5 * (
        (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1])
        - (v1[:, 1] - v0[:, 1]) * (v2[:, 0] - v0[:, 0])
    )
    b = np.stack([v1[:, 1] - v2[:, 1], v2[:, 1] - v0[:, 1], v0[:, 1] - v1[:, 1]], axis=1)
    c = np.stack([v2[:, 0] - v1[:, 0], v0[:, 0] - v2[:, 0], v1[:, 0] - v0[:, 0]], axis=1)

    rows, cols, kv, mv = [], [], [], []
    for i in range(3):
        for j in range(3):
            rows.append(t[:, i])
            cols.append(t[:, j])
            kv.append((b[:, i] * b[:, j] + c[:, i] * c[:, j]) / (4.0 * area))
            mv.append(area / 12.0 * (2.0 if i == j else 1.0) * np.ones_like(area))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    stiffness = SparseSymmetric.from_triplets(rows, cols, np.concatenate(kv), n)
    mass = SparseSymmetric.from_triplets(rows, cols, np.concatenate(mv), n)

    e = mesh.outer_edges
    lengths = np.hypot(*(p[e[:, 1]] - p[e[:, 0]]).T)
    er, ec, ev = [], [], []
    for i in range(2):
        for j in range(2):
            er.append(e[:, i])
            ec.append(e[:, j])
            ev.append(lengths / (3.0 if i == j else 6.0))
    boundary = SparseSymmetric.from_triplets(
        np.concatenate(er), np.concatenate(ec), np.concatenate(ev), n
    )
    return stiffness, mass, boundary


def assemble(mesh: Mesh, beta: float, dirichlet_outer: bool = False):
    """Robin-Dirichlet system (A, M, free_map) with constrained rows removed.

    A = K + beta B on the free nodes; the inner ring is always eliminated
    and the outer ring too when dirichlet_outer is set (the beta = inf
    emulation).  free_map sends free indices back to mesh node ids.
    """
    if not dirichlet_outer and (beta < 0.0 or math.isinf(beta)):
        raise RangeError("beta must be finite and nonnegative (use dirichlet_outer for inf)")
    stiffness, mass, boundary = assemble_forms(mesh)
    fixed = set(mesh.inner_nodes.tolist())
    if dirichlet_outer:
        fixed |= set(mesh.outer_nodes.tolist())
        a_full = stiffness.mat
    else:
        a_full = (stiffness.mat + beta * boundary.mat).tocsr()
    free_map = np.array(sorted(set(range(len(mesh.nodes))) - fixed), dtype=np.int64)
    a_ff = a_full[free_map][:, free_map].tocsr()
    m_ff = mass.mat[free_map][:, free_map].tocsr()
    return SparseSymmetric(a_ff), SparseSymmetric(m_ff), free_map


# ---------------------------------------------------------------------------
# eigensolver
# ---------------------------------------------------------------------------


class _IndefiniteMatrix(Exception):
    pass


def _pcg(a_mat, b, precond, rtol, maxiter):
    """Preconditioned conjugate gradients; returns (x, iterations)."""
    x = np.zeros_like(b)
    r = b.copy()
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return x, 0
    z = precond(r)
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, maxiter + 1):
        ap = a_mat @ p
        pap = float(p @ ap)
        if pap <= 0.0:
            raise _IndefiniteMatrix
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        if np.linalg.norm(r) <= rtol * norm_b:
            return x, it
        z = precond(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(f"CG did not reach rtol={rtol:.1e} in {maxiter} iterations")


def smallest_eigenpair(
    a: SparseSymmetric,
    m: SparseSymmetric,
    rtol: float = RAYLEIGH_RTOL,
    max_outer: int = 200,
    cg_rtol: float = CG_RTOL,
    cg_maxiter: int = 5000,
):
    """Smallest eigenpair of the SPD pencil (A, M) by inverse iteration.

    Iterates y <- (A - sigma M)^{-1} M x with an ILU-preconditioned CG
    solver; once the Rayleigh quotient settles, the shift moves just below
    it to accelerate the tail.  Convergence requires both a relative
    Rayleigh increment below rtol and a generalized residual below
    RESIDUAL_FACTOR * ||u||.
    """
    a_mat, m_mat = a.mat, m.mat
    n = a.dim

    def make_solver(shift):
        shifted = (a_mat - shift * m_mat).tocsc() if shift else a_mat.tocsc()
        try:
            # symmetric-mode incomplete factorization keeps the
            # preconditioner (nearly) SPD, which CG requires
            ilu = spilu(
                shifted,
                drop_tol=1e-5,
                fill_factor=12,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as err:
            raise SolverError(f"ILU factorization failed: {err}") from err
        return shifted.tocsr(), ilu.solve

    shifted, precond = make_solver(0.0)
    shift = 0.0
    mass_diag = m_mat.diagonal()
    x = np.ones(n)
    x /= math.sqrt(float(x @ (m_mat @ x)))
    rho_prev = float(x @ (a_mat @ x))
    cg_total = 0
    refactor_budget = 12
    res = math.inf
    for outer in range(1, max_outer + 1):
        try:
            y, its = _pcg(shifted, m_mat @ x, precond, cg_rtol, cg_maxiter)
        except _IndefiniteMatrix:
            # the shift overtook the lowest eigenvalue; back off toward zero
            shift *= 0.5
            shifted, precond = make_solver(shift)
            continue
        cg_total += its
        y /= math.sqrt(float(y @ (m_mat @ y)))
        rho = float(y @ (a_mat @ y))
        r = a_mat @ y - rho * (m_mat @ y)
        res = float(np.linalg.norm(r))
        x = y
        delta = abs(rho - rho_prev) / abs(rho)
        rho_prev = rho
        if delta <= rtol and res <= 0.5 * RESIDUAL_FACTOR * float(np.linalg.norm(y)):
            if float(np.sum(y)) < 0.0:
                y = -y
            stats = {"outer_iterations": outer, "cg_iterations": cg_total, "residual": res}
            return rho, y, stats
        # certified eigenvalue-error bound |rho - lambda| <= ||r||_(M^-1),
        # overestimated through the lumped mass diagonal; refreshing the
        # shift to just below rho keeps pace with clustered spectra
        bound = 2.0 * math.sqrt(float(r @ (r / mass_diag)))
        if delta < 3e-2 and bound < 0.3 * (rho - shift) and refactor_budget > 0:
            shift = max(rho - 2.0 * bound, 0.0)
            shifted, precond = make_solver(shift)
            refactor_budget -= 1
    raise SolverError(f"inverse iteration stalled after {max_outer} steps (residual {res:.3e})")


@dataclass(frozen=True)
class FemEigenResult:
    """Discrete first eigenpair on an annular mesh.

    u is the full nodal vector with exact zeros on eliminated nodes, M-unit
    norm and nonnegative orientation.
    """

    lam: float
    u: np.ndarray
    mesh: Mesh
    beta: float
    free_map: np.ndarray
    stats: dict

    def __post_init__(self):
        self.u.setflags(write=False)

    def report(self) -> dict:
        n_r, n_a = self.mesh.resolution
        return {
            "lambda_h": self.lam,
            "beta": "inf" if math.isinf(self.beta) else self.beta,
            "resolution": f"{n_r}x{n_a}",
            "nodes": int(len(self.mesh.nodes)),
            "outer_iterations": self.stats["outer_iterations"],
            "cg_iterations": self.stats["cg_iterations"],
            "residual": self.stats["residual"],
        }


def solve_domain(domain: AnnularDomain, beta: float, n_r: int, n_a: int) -> FemEigenResult:
    """Mesh, assemble and extract the first Robin-Dirichlet eigenpair.

    beta = inf solves the Dirichlet-Dirichlet problem by eliminating both
    rings; beta = 0 is the Neumann closure on the outer ring.
    """
    mesh = mesh_annular(domain, n_r, n_a)
    return solve_on_mesh(mesh, beta)


def solve_on_mesh(mesh: Mesh, beta: float) -> FemEigenResult:
    dirichlet_outer = math.isinf(beta)
    a, m, free_map = assemble(mesh, 0.0 if dirichlet_outer else beta, dirichlet_outer)
    lam, u_free, stats = smallest_eigenpair(a, m)
    u = np.zeros(len(mesh.nodes))
    u[free_map] = u_free
    if float(np.min(u)) < -1e-10:
        raise SolverError(f"eigenvector lost positivity (min {float(np.min(u)):.3e})")
    res = float(np.linalg.norm(a.mat @ u_free - lam * (m.mat @ u_free)))
    if res > RESIDUAL_FACTOR * float(np.linalg.norm(u_free)):
        raise SolverError(f"generalized residual {res:.3e} above tolerance")
    return FemEigenResult(lam=float(lam), u=u, mesh=mesh, beta=beta, free_map=free_map, stats=stats)


def beta_form_value(result: FemEigenResult) -> float:
    """Discrete boundary-to-mass ratio (u' B u) / (u' M u).

    Equals the derivative of the discrete eigenvalue with respect to beta.
    """
    _, mass, boundary = assemble_forms(result.mesh)
    u = result.u
    return float(u @ (boundary.mat @ u)) / float(u @ (mass.mat @ u))


@dataclass(frozen=True)
class ConvergenceStudy:
    resolutions: list
    h: np.ndarray
    lam_h: np.ndarray
    lam_ref: float
    order: float


def convergence_study(
    domain: AnnularDomain, beta: float, resolutions, lam_ref: float = None
) -> ConvergenceStudy:
    """Eigenvalue convergence table and observed order on refined meshes.

    lam_ref defaults to Richardson extrapolation of the two finest levels
    assuming second order; pass the radial eigenvalue when the domain is a
    concentric shell.
    """
    if len(resolutions) < 3:
        raise RangeError("need at least 3 resolutions")
    hs, lams = [], []
    for n_r, n_a in resolutions:
        result = solve_domain(domain, beta, n_r, n_a)
        hs.append(result.mesh.max_edge_length())
        lams.append(result.lam)
    hs = np.asarray(hs)
    lams = np.asarray(lams)
    if lam_ref is None:
        ratio = (hs[-2] / hs[-1]) ** 2
        lam_ref = float((ratio * lams[-1] - lams[-2]) / (ratio - 1.0))
    err = np.abs(lams - lam_ref)
    keep = err > 0.0
    order = float(np.polyfit(np.log(hs[keep]), np.log(err[keep]), 1)[0])
    return ConvergenceStudy(list(resolutions), hs, lams, float(lam_ref), order)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def write_mesh(mesh: Mesh, path) -> None:
    """Text format: header then nodes, triangles and tagged boundary edges."""
    with open(path, "w") as fh:
        n_edges = len(mesh.inner_edges) + len(mesh.outer_edges)
        fh.write(f"nodes {len(mesh.nodes)} triangles {len(mesh.triangles)} edges {n_edges}\n")
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
        for i, j in mesh.outer_edges:
            fh.write(f"{i} {j} outer\n")
        for i, j in mesh.inner_edges:
            fh.write(f"{i} {j} inner\n")


def read_mesh(path) -> Mesh:
    with open(path) as fh:
        head = fh.readline().split()
        n, t, e = int(head[1]), int(head[3]), int(head[5])
        nodes = np.array([[float(v) for v in fh.readline().split()] for _ in range(n)])
        tris = np.array([[int(v) for v in fh.readline().split()] for _ in range(t)], dtype=np.int64)
        inner, outer = [], []
        for _ in range(e):
            parts = fh.readline().split()
            (outer if parts[2] == "outer" else inner).append((int(parts[0]), int(parts[1])))
    n_a = len(outer)
    n_r = (n // n_a) - 1 if n_a else 0
    return Mesh(nodes, tris, np.asarray(inner), np.asarray(outer), (n_r, n_a))


def write_eigenvector_csv(result: FemEigenResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "x", "y", "u"])
        for i, ((x, y), val) in enumerate(zip(result.mesh.nodes, result.u)):
            writer.writerow([i, f"{x:.17g}", f"{y:.17g}", f"{val:.17g}"])
