import json
import math

import pytest

from annulus_spectra.cli import main, write_svg_plot


class TestShellCommand:
    def test_dirichlet_anchor(self, capsys):
        code = main(["shell", "--n", "3", "--r1", "1", "--r2", "2", "--beta", "inf"])
        out = capsys.readouterr().out
        assert code == 0
        lam = float(out.split("lambda =")[1].split()[0])
        assert lam == pytest.approx(math.pi**2, rel=1e-9)

    def test_neumann_closure_matches_fd(self, capsys):
        assert main(["shell", "--n", "2", "--r1", "1", "--r2", "2", "--beta", "0"]) == 0
        lam = float(capsys.readouterr().out.split("lambda =")[1].split()[0])
        assert main(
            ["shell", "--n", "2", "--r1", "1", "--r2", "2", "--beta", "0", "--method", "fd"]
        ) == 0
        lam_fd = float(capsys.readouterr().out.split("lambda =")[1].split()[0])
        assert lam == pytest.approx(lam_fd, rel=1e-6)

    def test_missing_argument_usage_error(self):
        assert main(["shell", "--n", "3", "--r1", "1", "--beta", "1"]) == 2

    def test_writes_profile_and_report(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(
            ["shell", "--n", "2", "--r1", "1", "--r2", "2", "--beta", "1", "--out", str(out)]
        )
        assert code == 0
        assert (out / "profile.csv").exists()
        report = json.loads((out / "shell_report.json").read_text())
        assert report["method"] == "shooting"
        assert "resolution" in report


class TestFemCommand:
    def test_solve_and_outputs(self, tmp_path, capsys):
        out = tmp_path / "fem"
        code = main(
            [
                "fem",
                "--outer", "circle 0 0 2",
                "--inner", "circle 0.5 0 1",
                "--beta", "1",
                "--res", "16x64",
                "--out", str(out),
            ]
        )
        assert code == 0
        for name in ("mesh.txt", "eigenvector.csv", "fem_report.json"):
            assert (out / name).exists()
        report = json.loads((out / "fem_report.json").read_text())
        assert report["resolution"] == "16x64"

    def test_bad_curve_spec(self, capsys):
        code = main(
            ["fem", "--outer", "blob 1 2", "--inner", "circle 0 0 1", "--beta", "1"]
        )
        assert code == 1  # parse failure surfaces as a package error

    def test_determinism_rerun(self, tmp_path, capsys):
        args = [
            "fem",
            "--outer", "circle 0 0 2",
            "--inner", "circle 0.3 0 1",
            "--beta", "1",
            "--res", "12x48",
        ]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        vec_a = (tmp_path / "a" / "eigenvector.csv").read_bytes()
        vec_b = (tmp_path / "b" / "eigenvector.csv").read_bytes()
        assert vec_a == vec_b


class TestVerifyCommand:
    def test_geometry_suite_reproducible(self, tmp_path, capsys):
        code = main(
            ["verify", "--suite", "geometry", "--seed", "7", "--out", str(tmp_path / "a")]
        )
        assert code == 0
        assert main(
            ["verify", "--suite", "geometry", "--seed", "7", "--out", str(tmp_path / "b")]
        ) == 0
        rep_a = (tmp_path / "a" / "geometry_report.json").read_bytes()
        rep_b = (tmp_path / "b" / "geometry_report.json").read_bytes()
        assert rep_a == rep_b

    def test_quick_radial_suite(self, capsys):
        assert main(["verify", "--suite", "radial", "--quick"]) == 0
        out = capsys.readouterr().out
        assert "[PASS] cross_method_agreement" in out

    def test_index_written_for_selected_suite(self, tmp_path, capsys):
        assert main(
            ["verify", "--suite", "geometry", "--out", str(tmp_path), "--quick"]
        ) == 0
        index = json.loads((tmp_path / "index.json").read_text())
        assert index == {"geometry": True}


class TestSweepCommand:
    def test_beta_sweep_monotone(self, tmp_path, capsys):
        code = main(
            ["sweep", "--kind", "beta", "--steps", "6", "--out", str(tmp_path)]
        )
        assert code == 0
        rows = (tmp_path / "beta_sweep.csv").read_text().splitlines()
        assert rows[0] == "beta,lambda"
        lams = [float(r.split(",")[1]) for r in rows[1:]]
        assert lams == sorted(lams)
        assert (tmp_path / "beta_sweep.svg").exists()

    def test_empty_grid_usage_error(self, tmp_path):
        assert main(
            ["sweep", "--kind", "beta", "--steps", "1", "--out", str(tmp_path)]
        ) == 2

    def test_offset_sweep_margins(self, tmp_path, capsys):
        code = main(
            [
                "sweep", "--kind", "offset", "--steps", "3",
                "--res", "16x64", "--out", str(tmp_path),
            ]
        )
        assert code == 0
        rows = (tmp_path / "offset_sweep.csv").read_text().splitlines()
        assert rows[0] == "offset,lambda_fem,lambda_shell,margin"
        margins = [float(r.split(",")[3]) for r in rows[1:]]
        # eccentric members sit strictly below the shell; the concentric
        # one only by discretization error
        assert all(m >= -2.0 * abs(margins[0]) for m in margins)
        assert margins[1:] == sorted(margins[1:])

    def test_byte_identical_outputs(self, tmp_path):
        for sub in ("a", "b"):
            main(["sweep", "--kind", "beta", "--steps", "4", "--out", str(tmp_path / sub)])
        assert (tmp_path / "a" / "beta_sweep.csv").read_bytes() == (
            tmp_path / "b" / "beta_sweep.csv"
        ).read_bytes()
        assert (tmp_path / "a" / "beta_sweep.svg").read_bytes() == (
            tmp_path / "b" / "beta_sweep.svg"
        ).read_bytes()

    def test_byte_identical_across_thread_counts(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ANNULUS_SPECTRA_THREADS", "1")
        main(["sweep", "--kind", "beta", "--steps", "5", "--out", str(tmp_path / "serial")])
        monkeypatch.setenv("ANNULUS_SPECTRA_THREADS", "4")
        main(["sweep", "--kind", "beta", "--steps", "5", "--out", str(tmp_path / "threads")])
        assert (tmp_path / "serial" / "beta_sweep.csv").read_bytes() == (
            tmp_path / "threads" / "beta_sweep.csv"
        ).read_bytes()


class TestConfigFile:
    def test_config_seeds_defaults(self, tmp_path, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("command=shell\nn=3\nr1=1\nr2=2\nbeta=inf\n")
        assert main(["shell", "--config", str(conf)]) == 0
        lam = float(capsys.readouterr().out.split("lambda =")[1].split()[0])
        assert lam == pytest.approx(math.pi**2, rel=1e-9)

    def test_flags_override_config(self, tmp_path, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("command=shell\nn=3\nr1=1\nr2=2\nbeta=inf\n")
        assert main(["shell", "--config", str(conf), "--beta", "1"]) == 0
        lam = float(capsys.readouterr().out.split("lambda =")[1].split()[0])
        assert lam == pytest.approx(3.373089286626214, rel=1e-9)

    def test_unknown_keys_rejected(self, tmp_path, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("command=shell\nbogus=1\n")
        code = main(
            ["shell", "--config", str(conf), "--n", "2", "--r1", "1", "--r2", "2", "--beta", "1"]
        )
        assert code == 2

    def test_wrong_command_rejected(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("command=fem\n")
        assert main(["shell", "--config", str(conf), "--n", "2", "--r1", "1",
                     "--r2", "2", "--beta", "1"]) == 2


def test_svg_plot_writer(tmp_path):
    path = tmp_path / "plot.svg"
    write_svg_plot(path, [1.0, 2.0, 3.0], [[1.0, 4.0, 9.0]], ["y"], "squares")
    text = path.read_text()
    assert text.startswith("<svg")
    assert "polyline" in text
    assert "timestamp" not in text
