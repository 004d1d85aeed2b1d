import math

import numpy as np
import pytest

from annulus_spectra.errors import BracketError, RangeError
from annulus_spectra.radial import (
    closed_form_3d,
    distance_profiles,
    level_radii,
    radii_monotonicity,
    shoot,
    solve_shell,
    solve_shell_fd,
    write_profile_csv,
)


class TestShoot:
    def test_zero_trial_gives_positive_residual(self):
        # at lambda = 0 the profile is the increasing harmonic one, so the
        # boundary residual anchors the bracketing from above zero
        for n in (2, 3, 4):
            assert shoot(n, 1.0, 2.0, 1.0, 0.0) > 0.0

    def test_residual_vanishes_at_closed_form_3d(self):
        lam = closed_form_3d(1.0, 2.0, 1.0)
        assert abs(shoot(3, 1.0, 2.0, 1.0, lam)) <= 1e-9

    def test_sign_change_straddles_fd_eigenvalue(self):
        lam_fd = solve_shell_fd(2, 1.0, 2.0, 1.0, 20000)
        lo = shoot(2, 1.0, 2.0, 1.0, lam_fd - 1e-4)
        hi = shoot(2, 1.0, 2.0, 1.0, lam_fd + 1e-4)
        assert lo > 0.0 > hi

    def test_negative_trial_rejected(self):
        with pytest.raises(RangeError):
            shoot(2, 1.0, 2.0, 1.0, -1.0)


class TestClosedForm3d:
    def test_dirichlet_limit(self):
        assert closed_form_3d(1.0, 2.0, float("inf")) == pytest.approx(math.pi**2, rel=1e-15)

    def test_coefficient_cancellation(self):
        # beta = 1/R2 kills the sine coefficient, so cos(k d) = 0
        lam = closed_form_3d(1.0, 2.0, 0.5)
        assert math.sqrt(lam) == pytest.approx(math.pi / 2.0, rel=1e-13)

    def test_transcendental_root_location(self):
        k = math.sqrt(closed_form_3d(1.0, 2.0, 1.0))
        assert math.pi / 2.0 < k < math.pi
        assert math.tan(k) + 2.0 * k == pytest.approx(0.0, abs=1e-12)


class TestSolveShell:
    def test_dirichlet_anchor_n3(self):
        res = solve_shell(3, 1.0, 2.0, float("inf"))
        assert res.lam == pytest.approx(math.pi**2, rel=1e-9)

    def test_matches_closed_form(self):
        res = solve_shell(3, 1.0, 2.0, 1.0)
        assert res.lam == pytest.approx(closed_form_3d(1.0, 2.0, 1.0), rel=1e-9)

    def test_matches_fd_oracle_n2(self):
        res = solve_shell(2, 1.0, 2.0, 0.5)
        assert res.lam == pytest.approx(solve_shell_fd(2, 1.0, 2.0, 0.5, 20000), rel=1e-7)

    def test_profile_structure(self):
        res = solve_shell(2, 1.0, 2.0, 1.0)
        assert res.phi[0] == 0.0
        assert np.all(res.phi[1:] > 0.0)
        assert 1.0 < res.r_bar < 2.0
        assert 0.0 < res.v_m < res.v_M
        # exactly one sign change of the slope on the grid
        signs = np.sign(res.dphi)
        changes = np.sum(signs[:-1] != signs[1:])
        assert changes == 1
        assert res.slope(res.r_bar) == pytest.approx(0.0, abs=1e-10)
        assert abs(res.residual) <= 1e-8 * max(abs(res.dphi[-1]), res.beta * res.v_m)

    def test_neumann_closure(self):
        res = solve_shell(2, 1.0, 2.0, 0.0)
        assert res.r_bar == 2.0
        assert res.v_m == res.v_M
        assert np.all(res.dphi[:-1] > 0.0)

    def test_beta_monotone_and_sandwich(self):
        lam_nd = solve_shell(2, 1.0, 2.0, 0.0).lam
        lam_dd = solve_shell(2, 1.0, 2.0, float("inf")).lam
        betas = [0.01, 0.1, 1.0, 10.0, 100.0]
        lams = [solve_shell(2, 1.0, 2.0, b).lam for b in betas]
        assert np.all(np.diff(lams) > 0.0)
        assert all(lam_nd < L < lam_dd for L in lams)

    def test_scaling_law(self):
        # dilating the shell by s divides the eigenvalue by s^2 and the
        # Robin parameter by s: lambda(beta, A) = s^2 lambda(beta/s, s A)
        base = solve_shell(3, 1.0, 2.0, 2.0).lam
        for s in (0.5, 2.0, 3.7):
            scaled = solve_shell(3, 1.0 * s, 2.0 * s, 2.0 / s).lam
            assert base == pytest.approx(s * s * scaled, rel=1e-9)

    def test_bracket_failure(self):
        with pytest.raises(BracketError):
            solve_shell(2, 1.0, 2.0, 1.0, lam_max=0.5)

    def test_cross_method_random_grid(self, rng):
        for _ in range(6):
            n = int(rng.integers(2, 5))
            r1 = float(rng.uniform(0.4, 1.5))
            r2 = r1 + float(rng.uniform(0.4, 2.0))
            beta = float(10.0 ** rng.uniform(-1.5, 1.5))
            lam = solve_shell(n, r1, r2, beta).lam
            lam_fd = solve_shell_fd(n, r1, r2, beta, 20000)
            assert abs(lam - lam_fd) / lam <= 1e-6
            if n == 3:
                assert abs(lam - closed_form_3d(r1, r2, beta)) / lam <= 1e-9


class TestFiniteDifference:
    def test_matches_closed_form(self):
        lam = solve_shell_fd(3, 1.0, 2.0, 1.0, 10000)
        assert lam == pytest.approx(closed_form_3d(1.0, 2.0, 1.0), rel=1e-6)

    def test_richardson_order(self):
        lam_ref = closed_form_3d(1.0, 2.0, 1.0)
        e1 = abs(solve_shell_fd(3, 1.0, 2.0, 1.0, 400) - lam_ref)
        e2 = abs(solve_shell_fd(3, 1.0, 2.0, 1.0, 800) - lam_ref)
        order = math.log2(e1 / e2)
        assert 1.9 <= order <= 2.1

    def test_neumann_closure_matches_shooting(self):
        lam = solve_shell_fd(2, 1.0, 2.0, 0.0, 20000)
        assert lam == pytest.approx(solve_shell(2, 1.0, 2.0, 0.0).lam, rel=1e-6)

    def test_grid_floor(self):
        with pytest.raises(RangeError):
            solve_shell_fd(2, 1.0, 2.0, 1.0, 50)


class TestLevelRadii:
    def setup_method(self):
        self.res = solve_shell(2, 1.0, 2.0, 1.0)

    def test_zero_level(self):
        r_i, r_o = level_radii(self.res, 0.0)
        assert r_i == 1.0
        assert r_o is None

    def test_max_level(self):
        r_i, r_o = level_radii(self.res, self.res.v_M)
        assert r_i == pytest.approx(self.res.r_bar, abs=1e-10)
        assert r_o == pytest.approx(self.res.r_bar, abs=1e-10)

    def test_boundary_level(self):
        r_i, r_o = level_radii(self.res, self.res.v_m)
        assert r_o == pytest.approx(2.0, abs=1e-12)
        assert 1.0 < r_i < self.res.r_bar

    def test_interior_level_consistency(self):
        t = 0.5 * (self.res.v_m + self.res.v_M)
        r_i, r_o = level_radii(self.res, t)
        assert self.res.value(r_i) == pytest.approx(t, rel=1e-10)
        assert self.res.value(r_o) == pytest.approx(t, rel=1e-10)
        assert r_i < self.res.r_bar < r_o

    def test_above_max_rejected(self):
        with pytest.raises(RangeError):
            level_radii(self.res, 1.5 * self.res.v_M)


class TestDistanceProfiles:
    def setup_method(self):
        self.res = solve_shell(2, 1.0, 2.0, 1.0)
        self.prof = distance_profiles(self.res)

    def test_endpoint_values(self):
        assert self.prof.inner_value(0.0) == pytest.approx(0.0, abs=1e-14)
        assert self.prof.outer_value(0.0) == pytest.approx(self.res.v_m, rel=1e-12)
        assert self.prof.inner_value(self.res.r_bar - 1.0) == pytest.approx(self.res.v_M, rel=1e-12)
        assert self.prof.outer_value(2.0 - self.res.r_bar) == pytest.approx(self.res.v_M, rel=1e-12)

    def test_inverse_composition(self):
        t = 0.7 * self.res.v_M
        assert self.prof.inner_value(self.prof.inner_value_inverse(t)) == pytest.approx(t, rel=1e-10)

    def test_level_integral_recovers_outer_width(self):
        # integral of 1 / outer_slope over levels equals R2 - r_bar; the
        # square-root substitution tau = v_M - u^2 removes the endpoint
        # singularity where the slope vanishes
        v_m, v_M = self.res.v_m, self.res.v_M
        nodes, weights = np.polynomial.legendre.leggauss(80)
        u_hi = math.sqrt(v_M - v_m)
        u = 0.5 * u_hi * (nodes + 1.0)
        w = 0.5 * u_hi * weights
        vals = np.array([2.0 * ui / self.prof.outer_slope(v_M - ui * ui) for ui in u])
        integral = float(np.sum(w * vals))
        assert integral == pytest.approx(2.0 - self.res.r_bar, rel=1e-6)

    def test_slope_vanishes_at_top(self):
        assert self.prof.inner_slope(self.res.v_M * (1 - 1e-10)) == pytest.approx(0.0, abs=1e-4)

    def test_range_errors(self):
        with pytest.raises(RangeError):
            self.prof.outer_value(5.0)
        with pytest.raises(RangeError):
            self.prof.outer_slope(0.5 * self.res.v_m)


class TestRadiiMonotonicity:
    def test_standard_sweep(self):
        report = radii_monotonicity(2, 1.0, 1.0, 2.0, 9)
        assert report.violations == 0

    def test_high_beta_3d(self):
        report = radii_monotonicity(3, 5.0, 1.0, 2.0, 5)
        assert report.violations == 0

    def test_minimal_sweep(self):
        report = radii_monotonicity(2, 1.0, 1.0, 2.0, 3)
        assert report.violations == 0
        with pytest.raises(RangeError):
            radii_monotonicity(2, 1.0, 1.0, 2.0, 2)


def test_profile_csv_roundtrip(tmp_path):
    res = solve_shell(2, 1.0, 2.0, 1.0, samples=33)
    path = tmp_path / "profile.csv"
    write_profile_csv(res, path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (33, 3)
    assert np.allclose(data[:, 1], res.phi)
