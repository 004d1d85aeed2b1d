import math

import numpy as np
import pytest

from annulus_spectra.errors import RangeError
from annulus_spectra.fem import (
    Mesh,
    assemble,
    assemble_forms,
    beta_form_value,
    convergence_study,
    mesh_annular,
    read_mesh,
    solve_domain,
    solve_on_mesh,
    write_eigenvector_csv,
    write_mesh,
)
from annulus_spectra.geometry import AnnularDomain, Circle, ConvexPolygon, PolygonCurve
from annulus_spectra.radial import solve_shell

CONCENTRIC = AnnularDomain(Circle((0, 0), 2.0), Circle((0, 0), 1.0))
ECCENTRIC = AnnularDomain(Circle((0, 0), 2.0), Circle((0.5, 0), 1.0))


class TestMeshAnnular:
    def test_structured_counts(self):
        mesh = mesh_annular(CONCENTRIC, 2, 8)
        assert len(mesh.nodes) == 24
        assert len(mesh.triangles) == 32
        # the mesh covers the inscribed polygons exactly, and their area
        # deficit is the O(1/n_a^2) sine factor
        inscribed = 0.5 * 8 * math.sin(2.0 * math.pi / 8) * (4.0 - 1.0)
        assert mesh.area == pytest.approx(inscribed, rel=1e-13)
        assert mesh.area == pytest.approx(3.0 * math.pi, rel=(2.0 * math.pi / 8) ** 2 / 6 * 1.1)

    def test_eccentric_area(self):
        mesh = mesh_annular(ECCENTRIC, 32, 128)
        assert mesh.area == pytest.approx(ECCENTRIC.area, rel=5e-3)

    def test_coarse_mesh_still_conforming(self):
        mesh = mesh_annular(CONCENTRIC, 2, 8)  # validation runs in the mesher
        assert mesh.resolution == (2, 8)

    def test_boundary_nodes_on_curves(self):
        mesh = mesh_annular(ECCENTRIC, 4, 16)
        assert np.max(ECCENTRIC.inner.distance(mesh.nodes[mesh.inner_nodes])) < 1e-12
        assert np.max(ECCENTRIC.outer.distance(mesh.nodes[mesh.outer_nodes])) < 1e-12

    def test_positive_orientation(self):
        mesh = mesh_annular(ECCENTRIC, 8, 32)
        assert np.all(mesh.triangle_areas() > 0.0)

    def test_non_star_shaped_rejected(self):
        # center far from the hole makes inner-boundary rays miss
        dom = AnnularDomain(
            Circle((0, 0), 4.0), Circle((1.5, 0), 0.4), center=(1.5, 0.0)
        )
        shifted = AnnularDomain(Circle((0, 0), 4.0), Circle((1.5, 0), 0.4), center=(1.45, 0.0))
        mesh_annular(shifted, 4, 16)  # fine while the center stays inside
        with pytest.raises(Exception):
            bad = AnnularDomain.__new__(AnnularDomain)
            object.__setattr__(bad, "outer", dom.outer)
            object.__setattr__(bad, "inner", dom.inner)
            object.__setattr__(bad, "center", np.array([3.0, 0.0]))
            mesh_annular(bad, 4, 16)

    def test_resolution_floor(self):
        with pytest.raises(RangeError):
            mesh_annular(CONCENTRIC, 1, 16)
        with pytest.raises(RangeError):
            mesh_annular(CONCENTRIC, 4, 4)


class TestAssembly:
    def test_reference_triangle_stiffness(self):
        nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        tris = np.array([[0, 1, 2]])
        empty = np.empty((0, 2), dtype=np.int64)
        mesh = Mesh(nodes, tris, empty, empty, (1, 1))
        stiffness, mass, _ = assemble_forms(mesh)
        expected = 0.5 * np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
        assert np.allclose(stiffness.mat.toarray(), expected, atol=1e-15)
        assert np.allclose(mass.mat.toarray().sum(), 0.5, atol=1e-15)

    def test_mass_partition_of_unity(self):
        mesh = mesh_annular(CONCENTRIC, 8, 32)
        _, mass, _ = assemble_forms(mesh)
        assert mass.mat.sum() == pytest.approx(mesh.area, rel=1e-13)

    def test_boundary_mass_partition_of_unity(self):
        mesh = mesh_annular(CONCENTRIC, 8, 32)
        _, _, boundary = assemble_forms(mesh)
        p = mesh.nodes
        e = mesh.outer_edges
        perim = float(np.sum(np.hypot(*(p[e[:, 1]] - p[e[:, 0]]).T)))
        assert boundary.mat.sum() == pytest.approx(perim, rel=1e-13)

    def test_elimination_bookkeeping(self):
        mesh = mesh_annular(CONCENTRIC, 4, 16)
        a, m, free = assemble(mesh, 1.0)
        assert a.dim == m.dim == len(free) == len(mesh.nodes) - len(mesh.inner_nodes)
        assert not set(free.tolist()) & set(mesh.inner_nodes.tolist())
        a2, _, free2 = assemble(mesh, 0.0, dirichlet_outer=True)
        assert a2.dim == len(mesh.nodes) - len(mesh.inner_nodes) - len(mesh.outer_nodes)

    def test_symmetry_exact(self):
        mesh = mesh_annular(ECCENTRIC, 8, 32)
        a, m, _ = assemble(mesh, 2.5)
        assert (a.mat - a.mat.T).nnz == 0
        assert (m.mat - m.mat.T).nnz == 0

    def test_infinite_beta_rejected_without_flag(self):
        mesh = mesh_annular(CONCENTRIC, 4, 16)
        with pytest.raises(RangeError):
            assemble(mesh, float("inf"))


class TestSmallestEigenpair:
    def test_thin_ring_tracks_radial(self):
        # near-degenerate angular modes; the adaptive shift must keep up
        dom = AnnularDomain(Circle((0, 0), 1.05), Circle((0, 0), 1.0))
        res = solve_domain(dom, 1.0, 8, 512)
        rad = solve_shell(2, 1.0, 1.05, 1.0)
        assert res.lam == pytest.approx(rad.lam, rel=5e-3)

    def test_concentric_matches_radial(self):
        res = solve_domain(CONCENTRIC, 1.0, 64, 256)
        rad = solve_shell(2, 1.0, 2.0, 1.0)
        assert res.lam == pytest.approx(rad.lam, rel=2e-3)

    def test_neumann_closure_matches_radial(self):
        res = solve_domain(CONCENTRIC, 0.0, 64, 256)
        rad = solve_shell(2, 1.0, 2.0, 0.0)
        assert res.lam == pytest.approx(rad.lam, rel=2e-3)

    def test_eigenvector_structure(self):
        res = solve_domain(CONCENTRIC, 1.0, 32, 128)
        assert np.all(res.u[res.mesh.inner_nodes] == 0.0)
        assert float(np.min(res.u)) >= -1e-10
        _, mass, _ = assemble_forms(res.mesh)
        assert float(res.u @ (mass.mat @ res.u)) == pytest.approx(1.0, rel=1e-12)


class TestSolveDomain:
    def test_eccentric_below_concentric(self):
        lam_con = solve_domain(CONCENTRIC, 1.0, 48, 192).lam
        lam_ecc = solve_domain(ECCENTRIC, 1.0, 48, 192).lam
        assert lam_ecc < lam_con

    def test_large_beta_against_dirichlet_emulation(self):
        # the reciprocal gap is bounded by |Omega| / (beta P(Omega0))
        lam_b = solve_domain(CONCENTRIC, 1e3, 48, 192).lam
        lam_dd = solve_domain(CONCENTRIC, float("inf"), 48, 192).lam
        gap = 1.0 / lam_b - 1.0 / lam_dd
        bound = CONCENTRIC.area / (1e3 * CONCENTRIC.outer.perimeter())
        assert 0.0 <= gap <= bound

    def test_argmax_at_critical_radius(self):
        res = solve_domain(CONCENTRIC, 1.0, 48, 192)
        rad = solve_shell(2, 1.0, 2.0, 1.0)
        radius = float(np.hypot(*res.mesh.nodes[int(np.argmax(res.u))]))
        assert abs(radius - rad.r_bar) <= 2.0 * (1.0 / 48)

    def test_discrete_beta_monotonicity(self):
        mesh = mesh_annular(ECCENTRIC, 24, 96)
        lams = [solve_on_mesh(mesh, b).lam for b in (0.1, 0.5, 1.0, 5.0)]
        for lo, hi in zip(lams, lams[1:]):
            assert lo <= hi + 1e-12 * abs(hi)

    def test_beta_derivative_identity(self):
        res = solve_domain(ECCENTRIC, 1.0, 32, 128)
        formula = beta_form_value(res)
        db = 1e-4
        mesh = res.mesh
        fd = (solve_on_mesh(mesh, 1.0 + db).lam - solve_on_mesh(mesh, 1.0 - db).lam) / (2 * db)
        assert formula == pytest.approx(fd, rel=1e-4)


class TestConvergence:
    def test_order_band_concentric(self):
        rad = solve_shell(2, 1.0, 2.0, 1.0)
        study = convergence_study(
            CONCENTRIC, 1.0, [(16, 64), (32, 128), (64, 256)], lam_ref=rad.lam
        )
        assert 1.8 <= study.order <= 2.2

    def test_order_band_eccentric_richardson(self):
        study = convergence_study(ECCENTRIC, 1.0, [(12, 48), (24, 96), (48, 192)])
        assert 1.7 <= study.order <= 2.2

    def test_determinism(self):
        a = solve_domain(ECCENTRIC, 1.0, 16, 64)
        b = solve_domain(ECCENTRIC, 1.0, 16, 64)
        assert a.lam == b.lam
        assert np.array_equal(a.u, b.u)

    def test_too_few_resolutions(self):
        with pytest.raises(RangeError):
            convergence_study(CONCENTRIC, 1.0, [(8, 32), (16, 64)])


class TestMeshIO:
    def test_mesh_roundtrip(self, tmp_path):
        mesh = mesh_annular(ECCENTRIC, 4, 16)
        path = tmp_path / "mesh.txt"
        write_mesh(mesh, path)
        again = read_mesh(path)
        assert np.allclose(again.nodes, mesh.nodes)
        assert np.array_equal(again.triangles, mesh.triangles)
        assert np.array_equal(np.sort(again.outer_edges, axis=None), np.sort(mesh.outer_edges, axis=None))
        head = path.read_text().splitlines()[0].split()
        assert head[0] == "nodes" and head[2] == "triangles" and head[4] == "edges"

    def test_eigenvector_csv(self, tmp_path):
        res = solve_domain(CONCENTRIC, 1.0, 4, 16)
        path = tmp_path / "vec.csv"
        write_eigenvector_csv(res, path)
        rows = path.read_text().splitlines()
        assert rows[0] == "node,x,y,u"
        assert len(rows) == len(res.mesh.nodes) + 1


class TestPolygonHoleDomain:
    def test_rectangle_hole_solvable(self):
        hole = PolygonCurve(ConvexPolygon.rectangle(1.0, 0.6))
        dom = AnnularDomain(Circle((0, 0), 1.8), hole)
        res = solve_domain(dom, 1.0, 24, 96)
        assert res.lam > 0.0
        assert float(np.min(res.u)) >= -1e-10
