"""Command line front end: solves, verification suites, sweeps, reports.

Subcommands: `shell` (radial solver), `fem` (2D solver), `verify`
(property suites with a JSON report bundle) and `sweep` (parameter sweeps
with CSV tables and SVG line plots).  A flat key=value config file can
seed any subcommand's options; explicit flags override it.  Exit codes:
0 success, 1 numerical or assertion failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, fem, geometry, radial, webfunc
from .errors import AnnulusError, UsageError

THREADS_ENV = "ANNULUS_SPECTRA_THREADS"


def _thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    """Map preserving order; threads only when the env cap allows them."""
    cap = _thread_cap()
    items = list(items)
    if cap <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(cap, len(items))) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# tiny SVG plotting (deterministic, no timestamps)
# ---------------------------------------------------------------------------

_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def write_svg_plot(path, xs, series, labels, title, logx=False, logy=False):
    """Minimal polyline plot of one or more series over common x values."""
    width, height, margin = 640, 440, 60
    xs = np.asarray(xs, dtype=float)
    if logx:
        xs = np.log10(xs)
    cooked = []
    for ys in series:
        ys = np.asarray(ys, dtype=float)
        cooked.append(np.log10(ys) if logy else ys)
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo = min(float(y.min()) for y in cooked)
    y_hi = max(float(y.max()) for y in cooked)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def px(x):
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
    ]
    for ys, label, color in zip(cooked, labels, _SVG_COLORS):
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        lines.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    for i, label in enumerate(labels):
        lines.append(
            f'<text x="{margin + 8}" y="{margin + 18 + 16 * i}" font-size="12" '
            f'fill="{_SVG_COLORS[i % len(_SVG_COLORS)]}">{label}</text>'
        )
    lines.append(
        f'<text x="{margin}" y="{height - margin + 28}" font-size="11">'
        f"x: {x_lo:.6g} .. {x_hi:.6g}{' (log10)' if logx else ''}</text>"
    )
    lines.append(
        f'<text x="{margin}" y="{height - margin + 44}" font-size="11">'
        f"y: {y_lo:.6g} .. {y_hi:.6g}{' (log10)' if logy else ''}</text>"
    )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _read_config_tokens(path: str, command: str) -> list:
    """Turn key=value lines into CLI tokens injected before user flags."""
    tokens = []
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise UsageError(f"cannot read config {path}: {err}") from err
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "command":
            if value != command:
                raise UsageError(f"{path}: config is for command {value!r}, not {command!r}")
            continue
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                tokens.append(flag)
        else:
            tokens.extend([flag, value])
    return tokens


def _parse_res(text: str):
    try:
        n_r, n_a = (int(p) for p in text.lower().split("x"))
    except ValueError as err:
        raise UsageError(f"resolution must look like 64x256, got {text!r}") from err
    return n_r, n_a


def _parse_beta(text: str) -> float:
    value = float(text)
    if value < 0.0:
        raise UsageError("beta must be nonnegative (use inf for Dirichlet)")
    return value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_shell(args) -> int:
    out = args.out and Path(args.out)
    if args.method == "closed3d":
        if args.n != 3:
            raise UsageError("--method closed3d requires --n 3")
        lam = radial.closed_form_3d(args.r1, args.r2, args.beta)
        report = {
            "lambda": lam,
            "method": "closed-form-3d",
            "resolution": "analytic",
        }
        print(f"lambda = {lam:.12g}  (closed-form-3d)")
    elif args.method == "fd":
        lam = radial.solve_shell_fd(args.n, args.r1, args.r2, args.beta, args.fd_points)
        report = {
            "lambda": lam,
            "method": "finite-difference",
            "resolution": f"{args.fd_points} points",
        }
        print(f"lambda = {lam:.12g}  (finite-difference, m={args.fd_points})")
    else:
        result = radial.solve_shell(args.n, args.r1, args.r2, args.beta, samples=args.grid)
        report = result.report()
        report["resolution"] = f"{args.grid} samples, ode rtol {radial.ODE_RTOL:g}"
        print(
            f"lambda = {result.lam:.12g}  r_bar = {result.r_bar:.12g}  "
            f"v_m = {result.v_m:.12g}  v_M = {result.v_M:.12g}"
        )
        if out:
            out.mkdir(parents=True, exist_ok=True)
            radial.write_profile_csv(result, out / "profile.csv")
    if out:
        out.mkdir(parents=True, exist_ok=True)
        _dump_json(report, out / "shell_report.json")
    return 0


def cmd_fem(args) -> int:
    outer = geometry.BoundaryCurve.parse(args.outer)
    inner = geometry.BoundaryCurve.parse(args.inner)
    domain = geometry.AnnularDomain(outer, inner)
    n_r, n_a = _parse_res(args.res)
    result = fem.solve_domain(domain, args.beta, n_r, n_a)
    print(f"lambda_h = {result.lam:.12g}  ({n_r}x{n_a} mesh, beta={args.beta})")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        fem.write_mesh(result.mesh, out / "mesh.txt")
        fem.write_eigenvector_csv(result, out / "eigenvector.csv")
        _dump_json(result.report(), out / "fem_report.json")
    return 0


def _dump_json(payload, path):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _print_check(name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f": {detail}" if detail else ""))
    return ok


# -- verification suites ----------------------------------------------------


def _suite_geometry(seed: int, quick: bool):
    rng = np.random.default_rng(seed)
    count = 30 if quick else 100
    checks = []
    worst_pmi, worst_af = math.inf, math.inf
    for _ in range(count):
        poly = geometry.random_convex_polygon(
            rng, int(rng.integers(3, 24)), scale=float(rng.uniform(0.5, 3.0))
        )
        rho = geometry.inradius(poly)
        ratio = poly.area / poly.perimeter
        worst_pmi = min(worst_pmi, ratio - rho / 2.0, rho - ratio)
        worst_af = min(worst_af, geometry.aleksandrov_fenchel_check(poly))
    checks.append(("pmi_bounds", worst_pmi >= -1e-12, f"worst margin {worst_pmi:.3e}"))
    checks.append(("aleksandrov_fenchel", worst_af >= -1e-9, f"worst margin {worst_af:.3e}"))
    # the margin of a regular n-gon decays like pi^2 / (6 n^2), so the
    # 4096-gon sits well below 1e-6 while 1024 straddles it
    disk = geometry.ConvexPolygon.regular(4096, 1.0)
    af_disk = geometry.aleksandrov_fenchel_check(disk)
    checks.append(("af_disk_equality", af_disk < 1e-6, f"4096-gon margin {af_disk:.3e}"))
    res = geometry.class_s_data(
        geometry.AnnularDomain(geometry.Circle((0, 0), 2.0), geometry.Circle((0.5, 0), 1.0))
    )[2]
    checks.append(("class_s_circle_pair", abs(res) < 1e-12, f"residual {res:.3e}"))
    payload = {
        "seed": seed,
        "polygons": count,
        "checks": [
            {"name": n, "pass": bool(ok), "detail": d} for n, ok, d in checks
        ],
    }
    return all(ok for _, ok, _ in checks), payload, checks


def _suite_radial(seed: int, quick: bool):
    rng = np.random.default_rng(seed)
    cases = 5 if quick else 12
    worst = 0.0
    worst3d = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 5))
        r1 = float(rng.uniform(0.4, 1.5))
        r2 = r1 + float(rng.uniform(0.4, 2.0))
        beta = float(10.0 ** rng.uniform(-1.5, 1.5))
        lam = radial.solve_shell(n, r1, r2, beta).lam
        lam_fd = radial.solve_shell_fd(n, r1, r2, beta, 20000)
        worst = max(worst, abs(lam - lam_fd) / lam)
        if n == 3:
            worst3d = max(worst3d, abs(lam - radial.closed_form_3d(r1, r2, beta)) / lam)
    mono = radial.radii_monotonicity(2, 1.0, 1.0, 2.0, 5 if quick else 9)
    base = radial.solve_shell(3, 1.0, 2.0, 2.0).lam
    scaled = radial.solve_shell(3, 2.0, 4.0, 1.0).lam
    scaling_err = abs(base - 4.0 * scaled) / base
    checks = [
        ("cross_method_agreement", worst <= 1e-6, f"worst rel diff {worst:.3e}"),
        ("closed_form_3d_agreement", worst3d <= 1e-9, f"worst rel diff {worst3d:.3e}"),
        ("radii_monotonicity", mono.violations == 0, f"{mono.violations} violations"),
        ("scaling_law", scaling_err <= 1e-9, f"rel err {scaling_err:.3e}"),
    ]
    payload = {
        "seed": seed,
        "cases": cases,
        "checks": [{"name": n, "pass": bool(ok), "detail": d} for n, ok, d in checks],
    }
    return all(ok for _, ok, _ in checks), payload, checks


def _suite_theorem(quick: bool, resolution):
    family = analysis.standard_family()
    betas = (1.0,) if quick else (0.1, 1.0, 10.0)
    res = (24, 96) if quick else resolution
    all_reports = []
    for beta in betas:
        all_reports.extend(analysis.main_theorem_sweep(family, beta, resolution=res))
    checks = [
        (rep.name + f"@beta={rep.context['beta']}", rep.passed, f"margin {rep.margin:+.3e}")
        for rep in all_reports
    ]
    payload = {"reports": [r.as_dict() for r in all_reports]}
    return all(r.passed for r in all_reports), payload, checks


def _suite_bounds(seed: int, quick: bool):
    reports = []
    for beta in (0.1, 1.0, 1e3):
        reports.extend(analysis.kuttler_bounds(geometry.ShellSpec(2, 1.0, 2.0), beta))
    reports.extend(analysis.kuttler_bounds(geometry.ShellSpec(3, 1.0, 2.0), 1.0))
    checks = [(rep.name, rep.passed, f"margin {rep.margin:+.3e}") for rep in reports]
    geo_ok, geo_payload, geo_checks = _suite_geometry(seed, quick)
    checks.extend(geo_checks)
    payload = {
        "kuttler": [r.as_dict() for r in reports],
        "polygon_suite": geo_payload,
    }
    return all(ok for _, ok, _ in checks), payload, checks


def _suite_shape_derivative(quick: bool, resolution):
    res = (32, 128) if quick else resolution
    dom = geometry.AnnularDomain(geometry.Circle((0, 0), 2.0), geometry.Circle((0.5, 0), 1.0))
    fem_res = fem.solve_domain(dom, 1.0, *res)
    field = analysis.PerturbationField(kind="translation", target="inner", vector=(1.0, 0.0))
    formula = analysis.shape_derivative_formula(dom, 1.0, field, fem_res)
    fd_val, noise = analysis.shape_derivative_fd_with_noise(dom, 1.0, field, 1e-3, res)
    rel = abs(formula - fd_val) / abs(fd_val)
    shell_dom = geometry.AnnularDomain(geometry.Circle((0, 0), 2.0), geometry.Circle((0, 0), 1.0))
    fem_shell = fem.solve_domain(shell_dom, 1.0, *res)
    mode2 = analysis.PerturbationField(kind="normal_fourier", target="outer", mode=2, amplitude=1.0)
    stat_formula = analysis.shape_derivative_formula(shell_dom, 1.0, mode2, fem_shell)
    _, stat_noise = analysis.shape_derivative_fd_with_noise(shell_dom, 1.0, mode2, 5e-3, res)
    checks = [
        ("translation_formula_vs_fd", rel <= 5e-2, f"rel diff {rel:.3%}"),
        (
            "shell_mode2_stationarity",
            abs(stat_formula) <= 10.0 * stat_noise,
            f"|formula| {abs(stat_formula):.3e} vs floor {stat_noise:.3e}",
        ),
    ]
    payload = {
        "translation": {"formula": formula, "fd": fd_val, "noise": noise, "rel": rel},
        "stationarity": {"formula": stat_formula, "noise_floor": stat_noise},
        "resolution": f"{res[0]}x{res[1]}",
        "method": "fem+fd",
    }
    return all(ok for _, ok, _ in checks), payload, checks


def _suite_web(quick: bool, resolution):
    res = (24, 96) if quick else resolution
    quad = 128 * 128 if quick else webfunc.DEFAULT_QUAD_LEVEL
    shell_dom = geometry.AnnularDomain(geometry.Circle((0, 0), 2.0), geometry.Circle((0, 0), 1.0))
    rad = radial.solve_shell(2, 1.0, 2.0, 1.0)
    web = webfunc.build_web(shell_dom, rad)
    _, value = webfunc.rayleigh_quotient(web, 1.0, quad_level=webfunc.DEFAULT_QUAD_LEVEL)
    identity_rel = abs(value - rad.lam) / rad.lam
    checks = [
        ("shell_identity", identity_rel <= 1e-6, f"rel err {identity_rel:.3e}"),
        ("shell_certified", web.certified, f"jump {web.interface_jump:.3e}"),
    ]
    members = analysis.standard_family()[1:] if not quick else analysis.standard_family()[1:3]
    reports = []
    for i, dom in enumerate(members):
        rep = webfunc.chain_certificate(dom, 1.0, n_r=res[0], n_a=res[1], quad_level=quad)
        reports.append(rep)
        checks.append(
            (
                f"chain[{i}]",
                rep["chain_ok"],
                f"fem {rep['lambda_fem']:.5f} <= R(w) {rep['rayleigh']:.5f} "
                f"<= 1.02 shell {rep['lambda_shell']:.5f}; "
                f"continuity_ok={rep['continuity_ok']}",
            )
        )
    payload = {"shell_identity_rel": identity_rel, "chains": reports}
    return all(ok for _, ok, _ in checks), payload, checks


def cmd_verify(args) -> int:
    resolution = _parse_res(args.res)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    suites = (
        ["geometry", "radial", "theorem", "bounds", "shape-derivative", "web"]
        if args.suite == "all"
        else [args.suite]
    )
    index = {}
    all_ok = True
    for suite in suites:
        print(f"-- suite {suite}")
        if suite == "geometry":
            ok, payload, checks = _suite_geometry(args.seed, args.quick)
        elif suite == "radial":
            ok, payload, checks = _suite_radial(args.seed, args.quick)
        elif suite == "theorem":
            ok, payload, checks = _suite_theorem(args.quick, resolution)
        elif suite == "bounds":
            ok, payload, checks = _suite_bounds(args.seed, args.quick)
        elif suite == "shape-derivative":
            ok, payload, checks = _suite_shape_derivative(args.quick, resolution)
        elif suite == "web":
            ok, payload, checks = _suite_web(args.quick, resolution)
        else:
            raise UsageError(f"unknown suite {suite!r}")
        for name, check_ok, detail in checks:
            _print_check(name, check_ok, detail)
        index[suite] = bool(ok)
        all_ok &= ok
        if out:
            _dump_json(payload, out / f"{suite.replace('-', '_')}_report.json")
    if out:
        _dump_json(index, out / "index.json")
    print("verify:", "PASS" if all_ok else "FAIL")
    return 0 if all_ok else 1


# -- sweeps -------------------------------------------------------------------


def cmd_sweep(args) -> int:
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "beta":
        if args.steps < 2:
            raise UsageError("need at least 2 sweep steps")
        betas = np.logspace(math.log10(args.beta_min), math.log10(args.beta_max), args.steps)
        lams = _map_ordered(
            lambda b: radial.solve_shell(args.n, args.r1, args.r2, b).lam, betas
        )
        rows = list(zip(betas, lams))
        _write_csv(out / "beta_sweep.csv", ["beta", "lambda"], rows)
        write_svg_plot(
            out / "beta_sweep.svg", betas, [lams], ["lambda(beta)"],
            f"shell n={args.n} ({args.r1},{args.r2})", logx=True,
        )
        ok = bool(np.all(np.diff(lams) > 0.0))
        _print_check("beta_sweep_monotone", ok)
        return 0 if ok else 1
    if args.kind == "offset":
        if args.steps < 2:
            raise UsageError("need at least 2 sweep steps")
        n_r, n_a = _parse_res(args.res)
        span = args.r2 - args.r1
        offsets = np.linspace(0.0, 0.9 * (span - args.gap), args.steps)
        lam_shell = radial.solve_shell(2, args.r1, args.r2, args.beta).lam

        def solve_offset(off):
            dom = geometry.AnnularDomain(
                geometry.Circle((0, 0), args.r2), geometry.Circle((off, 0), args.r1)
            )
            return fem.solve_domain(dom, args.beta, n_r, n_a).lam

        lams = _map_ordered(solve_offset, offsets)
        margins = [lam_shell - l for l in lams]
        rows = list(zip(offsets, lams, [lam_shell] * len(lams), margins))
        _write_csv(out / "offset_sweep.csv", ["offset", "lambda_fem", "lambda_shell", "margin"], rows)
        write_svg_plot(
            out / "offset_sweep.svg", offsets, [lams, [lam_shell] * len(lams)],
            ["lambda_fem", "lambda_shell"], f"offset sweep beta={args.beta}",
        )
        # the concentric point measures the discretization error directly
        tol = 2.0 * max(abs(margins[0]), 1e-9)
        ok = all(m >= -tol for m in margins)
        _print_check("offset_margins_nonnegative", ok, f"min margin {min(margins):+.3e}")
        return 0 if ok else 1
    if args.kind == "resolution":
        dom = geometry.AnnularDomain(
            geometry.Circle((0, 0), args.r2), geometry.Circle((0, 0), args.r1)
        )
        lam_ref = radial.solve_shell(2, args.r1, args.r2, args.beta).lam
        resolutions = [(8 * 2**k, 32 * 2**k) for k in range(args.steps)]
        study = fem.convergence_study(dom, args.beta, resolutions, lam_ref=lam_ref)
        rows = [
            (f"{r[0]}x{r[1]}", h, lam, abs(lam - lam_ref))
            for r, h, lam in zip(study.resolutions, study.h, study.lam_h)
        ]
        _write_csv(out / "resolution_sweep.csv", ["resolution", "h", "lambda", "error"], rows)
        write_svg_plot(
            out / "resolution_sweep.svg", study.h, [np.abs(study.lam_h - lam_ref)],
            ["|lambda_h - lambda|"], f"convergence, order ~ {study.order:.2f}",
            logx=True, logy=True,
        )
        ok = 1.5 <= study.order <= 2.5
        _print_check("convergence_order", ok, f"{study.order:.3f}")
        return 0 if ok else 1
    raise UsageError(f"unknown sweep kind {args.kind!r}")


def _write_csv(path, header, rows):
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [v if isinstance(v, str) else f"{v:.17g}" for v in row]
            )


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annulus-spectra",
        description="Robin-Dirichlet eigenvalues on annular domains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_shell = sub.add_parser("shell", help="radial solve on a concentric shell")
    p_shell.add_argument("--n", type=int, required=True, help="space dimension (>= 2)")
    p_shell.add_argument("--r1", type=float, required=True)
    p_shell.add_argument("--r2", type=float, required=True)
    p_shell.add_argument("--beta", type=_parse_beta, required=True, help="Robin parameter (inf ok)")
    p_shell.add_argument("--method", choices=("shooting", "fd", "closed3d"), default="shooting")
    p_shell.add_argument("--grid", type=int, default=radial.PROFILE_SAMPLES)
    p_shell.add_argument("--fd-points", type=int, default=20000)
    p_shell.add_argument("--out", default=None, help="directory for profile.csv and report JSON")
    p_shell.set_defaults(func=cmd_shell)

    p_fem = sub.add_parser("fem", help="2D P1 solve on an annular domain")
    p_fem.add_argument("--outer", required=True, help='e.g. "circle 0 0 2"')
    p_fem.add_argument("--inner", required=True, help='e.g. "circle 0.5 0 1"')
    p_fem.add_argument("--beta", type=_parse_beta, required=True)
    p_fem.add_argument("--res", default="64x256", help="n_r x n_a mesh resolution")
    p_fem.add_argument("--out", default=None)
    p_fem.set_defaults(func=cmd_fem)

    p_verify = sub.add_parser("verify", help="run verification suites")
    p_verify.add_argument(
        "--suite",
        choices=("geometry", "radial", "theorem", "bounds", "shape-derivative", "web", "all"),
        default="all",
    )
    p_verify.add_argument("--seed", type=int, default=7)
    p_verify.add_argument("--res", default="48x192")
    p_verify.add_argument("--quick", action="store_true", help="smaller suites for smoke tests")
    p_verify.add_argument("--out", default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="parameter sweeps with CSV + SVG output")
    p_sweep.add_argument("--kind", choices=("beta", "offset", "resolution"), required=True)
    p_sweep.add_argument("--n", type=int, default=2)
    p_sweep.add_argument("--r1", type=float, default=1.0)
    p_sweep.add_argument("--r2", type=float, default=2.0)
    p_sweep.add_argument("--beta", type=_parse_beta, default=1.0)
    p_sweep.add_argument("--beta-min", type=float, default=1e-3)
    p_sweep.add_argument("--beta-max", type=float, default=1e4)
    p_sweep.add_argument("--gap", type=float, default=0.08)
    p_sweep.add_argument("--steps", type=int, default=8)
    p_sweep.add_argument("--res", default="32x128")
    p_sweep.add_argument("--out", default=".")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # config seeds defaults; explicit flags override because they come later
    if "--config" in argv:
        idx = argv.index("--config")
        if idx + 1 >= len(argv):
            print("error: --config needs a path", file=sys.stderr)
            return 2
        if idx == 0:
            print("error: --config must follow a subcommand", file=sys.stderr)
            return 2
        path = argv[idx + 1]
        command = argv[0]
        rest = argv[:idx] + argv[idx + 2 :]
        try:
            injected = _read_config_tokens(path, command)
        except UsageError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
        argv = [command] + injected + rest[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except AnnulusError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
