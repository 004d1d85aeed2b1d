"""Cross-cutting certificates: shape derivatives, spectral bounds, sweeps.

Everything here compares two independent routes to the same quantity: the
boundary-integral eigenvalue derivative against centered differences of
matched-mesh FEM solves, the Robin eigenvalue against its Dirichlet
ceiling and reciprocal-gap bounds, the FEM eigenvalue of each class-S
domain against the matched shell's radial eigenvalue, and the small- and
large-beta limits against the Neumann and Dirichlet closures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CurvatureUnavailableError, InfeasibleError, RangeError
from .fem import FemEigenResult, assemble_forms, mesh_annular, solve_domain, solve_on_mesh
from .geometry import (
    AnnularDomain,
    Circle,
    ConvexPolygon,
    Ellipse,
    PolygonCurve,
    ShellSpec,
    class_s_data,
    inradius,
    scale_hole_to_class_s,
)
from .radial import solve_shell


@dataclass(frozen=True)
class PerturbationField:
    """Boundary velocity field for domain perturbations.

    kind 'translation' moves the target curve rigidly by `vector`; kind
    'normal_fourier' displaces it along its outward normal with amplitude
    cos(mode * angle) where the angle is measured around the domain
    center (so perturbed curves stay aligned with the mesh rays).
    """

    kind: str
    target: str
    vector: tuple = None
    mode: int = 0
    amplitude: float = 0.0

    def __post_init__(self):
        if self.kind not in ("translation", "normal_fourier"):
            raise RangeError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "translation":
            if self.target not in ("outer", "inner", "both"):
                raise RangeError("translation target must be outer, inner or both")
            if self.vector is None:
                raise RangeError("translation needs a vector")
            object.__setattr__(self, "vector", tuple(map(float, self.vector)))
        else:
            if self.target not in ("outer", "inner"):
                raise RangeError("normal perturbation target must be outer or inner")
            if self.mode < 1:
                raise RangeError("Fourier mode must be >= 1")

    def applies_to(self, which: str) -> bool:
        return self.target == which or self.target == "both"

    def velocity_normal_component(self, domain: AnnularDomain, points, which: str) -> np.ndarray:
        """<V, nu> at boundary points of the named curve."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if not self.applies_to(which):
            return np.zeros(len(pts))
        curve = domain.outer if which == "outer" else domain.inner
        nu = curve.outward_normal(pts)
        if which == "inner":
            nu = -nu  # outward normal of the annulus points into the hole
        if self.kind == "translation":
            return nu @ np.asarray(self.vector)
        rel = pts - domain.center
        theta = np.arctan2(rel[:, 1], rel[:, 0])
        return self.amplitude * np.cos(self.mode * theta) * np.sum(nu * nu, axis=1)

    def perturbed(self, domain: AnnularDomain, t: float, n_poly: int) -> AnnularDomain:
        """Domain moved by t V, polygonized on the mesh rays when needed."""
        outer, inner = domain.outer, domain.inner
        if self.kind == "translation":
            shift = t * np.asarray(self.vector)
            if self.applies_to("outer"):
                outer = outer.translated(shift)
            if self.applies_to("inner"):
                inner = inner.translated(shift)
            center = domain.center + shift if self.applies_to("inner") else domain.center
            return AnnularDomain(outer, inner, center=center)
        curve = outer if self.target == "outer" else inner
        theta = 2.0 * np.pi * np.arange(n_poly) / n_poly
        dirs = np.column_stack([np.cos(theta), np.sin(theta)])
        base = np.array(
            [domain.center + curve.ray_length(domain.center, u) * u for u in dirs]
        )
        nu = curve.outward_normal(base)
        moved = base + t * self.amplitude * np.cos(self.mode * theta)[:, None] * nu
        poly = PolygonCurve(ConvexPolygon(moved))
        if self.target == "outer":
            return AnnularDomain(poly, inner, center=domain.center)
        return AnnularDomain(outer, poly, center=domain.center)


def _ring_arclength_weights(points: np.ndarray):
    """Trapezoid weights and neighbor spans on a closed polyline."""
    nxt = np.roll(points, -1, axis=0)
    ds = np.hypot(*(nxt - points).T)
    weights = 0.5 * (ds + np.roll(ds, 1))
    return weights, ds


def shape_derivative_formula(
    domain: AnnularDomain, beta: float, field: PerturbationField, fem: FemEigenResult
) -> float:
    """Boundary-integral first derivative of the eigenvalue along the field.

    On the Robin boundary the integrand is
    |grad u|^2 + beta kappa u^2 - (lambda + 2 beta^2) u^2 with the
    tangential derivative recovered along the ring and the normal one from
    the boundary condition.  On the Dirichlet boundary only the squared
    flux survives and it enters with a negative sign against <V, nu>; the
    flux is recovered variationally from the discrete residual, which is
    exact for the discrete eigenpair.
    """
    for curve in (domain.outer, domain.inner):
        if isinstance(curve, PolygonCurve):
            raise CurvatureUnavailableError("shape derivative needs smooth boundary curves")
    mesh = fem.mesh
    lam, u = fem.lam, fem.u
    n_r, n_a = mesh.resolution

    total = 0.0
    if field.applies_to("outer"):
        ring = np.arange(n_r * n_a, (n_r + 1) * n_a)
        pts = mesh.nodes[ring]
        ub = u[ring]
        weights, ds = _ring_arclength_weights(pts)
        du_t = (np.roll(ub, -1) - np.roll(ub, 1)) / (ds + np.roll(ds, 1))
        kappa = domain.outer.curvature_at(pts)
        vn = field.velocity_normal_component(domain, pts, "outer")
        grad2 = du_t**2 + (beta * ub) ** 2
        integrand = grad2 + beta * kappa * ub**2 - (lam + 2.0 * beta**2) * ub**2
        total += float(np.sum(weights * integrand * vn))

    if field.applies_to("inner"):
        stiffness, mass, boundary = assemble_forms(mesh)
        a_full = stiffness.mat + beta * boundary.mat
        residual = a_full @ u - lam * (mass.mat @ u)
        ring = np.arange(0, n_a)
        pts = mesh.nodes[ring]
        weights, _ = _ring_arclength_weights(pts)
        flux = residual[ring] / weights
        vn = field.velocity_normal_component(domain, pts, "inner")
        total -= float(np.sum(weights * flux**2 * vn))
    return total


def shape_derivative_fd(
    domain: AnnularDomain,
    beta: float,
    field: PerturbationField,
    t_step: float,
    resolution,
) -> float:
    """Centered difference of the eigenvalue over matched meshes."""
    n_r, n_a = resolution
    lam_plus = solve_domain(field.perturbed(domain, t_step, n_a), beta, n_r, n_a).lam
    lam_minus = solve_domain(field.perturbed(domain, -t_step, n_a), beta, n_r, n_a).lam
    return (lam_plus - lam_minus) / (2.0 * t_step)


def shape_derivative_fd_with_noise(
    domain: AnnularDomain,
    beta: float,
    field: PerturbationField,
    t_step: float,
    resolution,
):
    """(Richardson value, noise floor) from step halving."""
    coarse = shape_derivative_fd(domain, beta, field, t_step, resolution)
    fine = shape_derivative_fd(domain, beta, field, t_step / 2.0, resolution)
    value = (4.0 * fine - coarse) / 3.0
    lam_scale = solve_domain(domain, beta, *resolution).lam
    noise = max(abs(fine - coarse) / 3.0, 1e-11 * lam_scale / t_step)
    return value, noise


# ---------------------------------------------------------------------------
# inequality reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InequalityReport:
    """One checked inequality lhs <= rhs with margin = rhs - lhs."""

    name: str
    lhs: float
    rhs: float
    tolerance: float
    context: dict = None

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance

    def as_dict(self) -> dict:
        data = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.context:
            data["context"] = self.context
        return data


def _outer_inradius(domain: AnnularDomain) -> float:
    curve = domain.outer
    if isinstance(curve, Circle):
        return curve.radius
    if isinstance(curve, Ellipse):
        return min(curve.a, curve.b)
    return inradius(curve.polygon)


def _eigen_pair_for(target, beta: float, resolution):
    """(lambda_beta, lambda_dd, measures, context) on a shell or a domain."""
    if isinstance(target, ShellSpec):
        lam = solve_shell(target.dim, target.r_inner, target.r_outer, beta).lam
        lam_dd = solve_shell(target.dim, target.r_inner, target.r_outer, float("inf")).lam
        n = target.dim
        from .geometry import unit_ball_volume

        wn = unit_ball_volume(n)
        volume = wn * (target.r_outer**n - target.r_inner**n)
        perimeter = n * wn * target.r_outer ** (n - 1)
        rho = target.r_outer
        context = {"method": "radial", "dim": n}
        disc = 1e-9 * lam
    else:
        n_r, n_a = resolution
        lam = solve_domain(target, beta, n_r, n_a).lam
        lam_dd = solve_domain(target, float("inf"), n_r, n_a).lam
        lam_c = solve_domain(target, beta, max(2, n_r // 2), max(8, n_a // 2)).lam
        volume = target.area
        perimeter = target.outer.perimeter()
        rho = _outer_inradius(target)
        context = {"method": "fem", "resolution": f"{n_r}x{n_a}"}
        disc = abs(lam - lam_c)
    return lam, lam_dd, volume, perimeter, rho, context, disc


def kuttler_bounds(target, beta: float, resolution=(48, 192)) -> list:
    """Dirichlet ceiling and reciprocal-gap bounds at one beta.

    Checks lambda(beta) <= lambda_DD and the two upper bounds for
    1/lambda(beta) - 1/lambda_DD: |Omega| / (beta P(Omega0)) from the
    constant test function and its inradius relaxation.
    """
    lam, lam_dd, volume, perimeter, rho, context, disc = _eigen_pair_for(
        target, beta, resolution
    )
    tol = max(1e-8, 2.0 * disc)
    gap = 1.0 / lam - 1.0 / lam_dd
    reports = [
        InequalityReport("robin_below_dirichlet", lam, lam_dd, tol, context),
        InequalityReport(
            "reciprocal_gap_volume_bound", gap, volume / (beta * perimeter),
            tol / lam**2, context,
        ),
        InequalityReport(
            "reciprocal_gap_inradius_bound", gap, rho / beta, tol / lam**2, context
        ),
    ]
    return reports


def main_theorem_sweep(family, beta: float, resolution=(48, 192)) -> list:
    """Shell maximality check over a family of class-S domains.

    Each domain's FEM eigenvalue must not exceed the matched shell's
    radial eigenvalue beyond twice the discretization-error estimate,
    itself taken conservatively as the full coarse-to-fine difference.
    """
    n_r, n_a = resolution
    reports = []
    for idx, domain in enumerate(family):
        r1, r2, residual = class_s_data(domain)
        if abs(residual) > 1e-8 * domain.area:
            raise InfeasibleError(
                f"family member {idx} is not in class S "
                f"(relative residual {residual / domain.area:.3e})"
            )
        lam_fine = solve_domain(domain, beta, n_r, n_a).lam
        lam_coarse = solve_domain(domain, beta, max(2, n_r // 2), max(8, n_a // 2)).lam
        err_est = abs(lam_fine - lam_coarse)
        lam_shell = solve_shell(2, r1, r2, beta).lam
        reports.append(
            InequalityReport(
                f"shell_maximality[{idx}]",
                lam_fine,
                lam_shell,
                2.0 * err_est,
                {
                    "beta": beta,
                    "shell": (r1, r2),
                    "resolution": f"{n_r}x{n_a}",
                    "fem_error_estimate": err_est,
                },
            )
        )
    return reports


@dataclass(frozen=True)
class BetaLimitsReport:
    betas: np.ndarray
    lams: np.ndarray
    lam_nd: float
    lam_dd: float
    monotone: bool
    strictly_monotone: bool
    nd_gap_rel: float
    nd_gap_ok: bool
    dd_gap: float
    dd_gap_bound: float
    dd_gap_ok: bool
    method: str

    def as_dict(self) -> dict:
        return {
            "betas": self.betas.tolist(),
            "lambdas": self.lams.tolist(),
            "lambda_nd": self.lam_nd,
            "lambda_dd": self.lam_dd,
            "monotone": self.monotone,
            "strictly_monotone": self.strictly_monotone,
            "nd_gap_rel": self.nd_gap_rel,
            "nd_gap_ok": self.nd_gap_ok,
            "dd_gap": self.dd_gap,
            "dd_gap_bound": self.dd_gap_bound,
            "dd_gap_ok": self.dd_gap_ok,
            "method": self.method,
        }


def beta_limits_check(target, resolution=(48, 192), betas=None, nd_rel_tol=1e-3) -> BetaLimitsReport:
    """Eigenvalue table over a log grid of beta with endpoint limits.

    The table must be nondecreasing (strictly so for the radial route);
    the smallest beta is compared with the Neumann closure at nd_rel_tol
    relative and the largest with the Dirichlet closure through the
    constant-test-function gap bound.
    """
    if betas is None:
        betas = np.logspace(-3, 4, 8)
    betas = np.asarray(betas, dtype=float)
    if isinstance(target, ShellSpec):
        method = "radial"
        solve = lambda b: solve_shell(target.dim, target.r_inner, target.r_outer, b).lam
        volume = target.volume
        from .geometry import unit_ball_volume

        perimeter = target.dim * unit_ball_volume(target.dim) * target.r_outer ** (target.dim - 1)
    else:
        method = "fem"
        n_r, n_a = resolution
        mesh = mesh_annular(target, n_r, n_a)
        solve = lambda b: solve_on_mesh(mesh, b).lam
        volume = target.area
        perimeter = target.outer.perimeter()
    lams = np.array([solve(b) for b in betas])
    lam_nd = solve(0.0)
    lam_dd = solve(float("inf"))
    diffs = np.diff(lams)
    monotone = bool(np.all(diffs >= -1e-12 * lams[:-1]))
    strictly = bool(np.all(diffs > 0.0))
    nd_gap_rel = abs(lams[0] - lam_nd) / lam_nd
    dd_gap = 1.0 / lams[-1] - 1.0 / lam_dd
    dd_bound = volume / (betas[-1] * perimeter)
    return BetaLimitsReport(
        betas=betas,
        lams=lams,
        lam_nd=lam_nd,
        lam_dd=lam_dd,
        monotone=monotone,
        strictly_monotone=strictly,
        nd_gap_rel=float(nd_gap_rel),
        nd_gap_ok=bool(nd_gap_rel <= nd_rel_tol),
        dd_gap=float(dd_gap),
        dd_gap_bound=float(dd_bound),
        dd_gap_ok=bool(dd_gap <= dd_bound * (1.0 + 1e-9)),
        method=method,
    )


# ---------------------------------------------------------------------------
# the standard class-S verification family
# ---------------------------------------------------------------------------


def eccentric_family(r1=1.0, r2=2.0, gap=0.08, fractions=(0.1, 0.3, 0.5, 0.7, 0.9)):
    """Concentric shell plus eccentric annuli at scaled hole offsets."""
    domains = [AnnularDomain(Circle((0, 0), r2), Circle((0, 0), r1))]
    span = r2 - r1 - gap
    for f in fractions:
        offset = f * span
        domains.append(AnnularDomain(Circle((0, 0), r2), Circle((offset, 0), r1)))
    return domains


def ellipse_members():
    """Two class-S members with elliptic outer body and rectangular hole."""
    members = []
    for (a, b), (w, h) in (((2.0, 1.6), (1.5, 1.0)), ((2.0, 1.4), (1.2, 1.2))):
        outer = Ellipse((0, 0), a, b)
        hole = PolygonCurve(ConvexPolygon.rectangle(w, h))
        s = scale_hole_to_class_s(outer, hole)
        members.append(AnnularDomain(outer, hole.scaled(s)))
    return members


def standard_family(gap=0.08):
    return eccentric_family(gap=gap) + ellipse_members()


def write_reports_json(reports, path) -> None:
    with open(path, "w") as fh:
        json.dump([r.as_dict() for r in reports], fh, indent=2, sort_keys=True)
        fh.write("\n")
