import numpy as np
import pytest

from hyperfem.fem import (Assembler, AssemblyError, BoundaryConditions,
                          collect_dirichlet, dirichlet_from_tag)
from hyperfem.materials import make_neo_hookean, make_stvk
from hyperfem.mesh import generate_beam_hex, hex_to_tet
from hyperfem.verify import build_family_mesh

from conftest import max_rel_err


@pytest.fixture(scope="module")
def small_setup(lame3k):
    mesh = hex_to_tet(generate_beam_hex(2, 1, 1))
    asm = Assembler(mesh)
    bc = BoundaryConditions(
        dirichlet=dirichlet_from_tag(mesh, "clamp"),
        neumann=[("load", (0.0, -10.0, 0.0))],
        body_force=(0.0, 0.0, -0.5))
    return asm, bc, make_stvk(lame3k).bind()


class TestResidual:
    def test_zero_displacement_no_loads(self, small_setup):
        asm, _, stvk = small_setup
        bc0 = BoundaryConditions()
        R = asm.residual(stvk, np.zeros(asm.dofmap.n_dofs), bc0)
        assert np.abs(R).max() == 0.0

    def test_rigid_translation_zero_internal(self, small_setup):
        asm, _, stvk = small_setup
        u = np.tile([0.3, 0.3, 0.3], asm.mesh.n_vertices)
        R = asm.internal_forces(stvk, u)
        assert np.abs(R).max() < 1e-10

    def test_residual_is_energy_gradient(self, small_setup):
        asm, bc, stvk = small_setup
        rng = np.random.default_rng(17)
        u = 0.02 * rng.standard_normal(asm.dofmap.n_dofs)
        R = asm.residual(stvk, u, bc)
        h = 1e-6
        for d in rng.choice(asm.dofmap.n_dofs, size=12, replace=False):
            up, dn = u.copy(), u.copy()
            up[d] += h
            dn[d] -= h
            fd = (asm.total_energy(stvk, up, bc) - asm.total_energy(stvk, dn, bc)) / (2 * h)
            assert R[d] == pytest.approx(fd, rel=1e-6, abs=1e-7)

    def test_neumann_resultant_equals_traction_times_area(self, small_setup):
        asm, _, _ = small_setup
        bc = BoundaryConditions(neumann=[("load", (0.0, -10.0, 0.0))])
        F = asm.external_forces(bc)
        resultant = F.reshape(-1, 3).sum(axis=0)
        assert np.allclose(resultant, [0.0, -10.0 * 225.0, 0.0], rtol=1e-12)

    def test_body_force_resultant(self, small_setup):
        asm, _, _ = small_setup
        bc = BoundaryConditions(body_force=(0.0, 0.0, -2.0))
        F = asm.external_forces(bc)
        assert np.allclose(F.reshape(-1, 3).sum(axis=0),
                           [0.0, 0.0, -2.0 * 18000.0], rtol=1e-12)


class TestJacobian:
    def test_columns_match_residual_fd(self, small_setup):
        asm, bc, stvk = small_setup
        rng = np.random.default_rng(23)
        u = 0.02 * rng.standard_normal(asm.dofmap.n_dofs)
        K = asm.jacobian(stvk, u).toarray()
        h = 1e-6
        for d in rng.choice(asm.dofmap.n_dofs, size=8, replace=False):
            up, dn = u.copy(), u.copy()
            up[d] += h
            dn[d] -= h
            fd = (asm.residual(stvk, up, bc) - asm.residual(stvk, dn, bc)) / (2 * h)
            assert max_rel_err(K[:, d], fd) < 1e-5

    def test_symmetry_at_deformed_state(self, small_setup, lame3k):
        asm, _, _ = small_setup
        nh = make_neo_hookean(lame3k).bind()
        rng = np.random.default_rng(29)
        u = 0.05 * rng.standard_normal(asm.dofmap.n_dofs)
        K = asm.jacobian(nh, u)
        assert K.max_abs_asymmetry() / np.abs(K.data).max() < 1e-12

    def test_linear_elasticity_oracle_at_zero(self, lame3k):
        """StVK tangent at u = 0 equals the small-strain stiffness,
        assembled here independently in Voigt form."""
        mesh = hex_to_tet(generate_beam_hex(1, 1, 1))
        asm = Assembler(mesh)
        stvk = make_stvk(lame3k).bind()
        K = asm.jacobian(stvk, np.zeros(asm.dofmap.n_dofs)).toarray()

        lam, mu = lame3k.lam, lame3k.mu
        D = np.array([
            [lam + 2 * mu, lam, lam, 0, 0, 0],
            [lam, lam + 2 * mu, lam, 0, 0, 0],
            [lam, lam, lam + 2 * mu, 0, 0, 0],
            [0, 0, 0, mu, 0, 0],
            [0, 0, 0, 0, mu, 0],
            [0, 0, 0, 0, 0, mu]])
        n = asm.dofmap.n_dofs
        K_lin = np.zeros((n, n))
        from hyperfem.elements import element, geometric_map, quadrature
        el = element("p1tet")
        rule = quadrature(el, 1)
        for cell in mesh.cells:
            coords = mesh.vertices[cell]
            _, detj, g = geometric_map(el, coords, rule.points[0])
            w = detj * rule.weights[0]
            B = np.zeros((6, 12))
            for a in range(4):
                gx, gy, gz = g[a]
                B[:, 3 * a: 3 * a + 3] = [
                    [gx, 0, 0], [0, gy, 0], [0, 0, gz],
                    [gy, gx, 0], [0, gz, gy], [gz, 0, gx]]
            Ke = w * B.T @ D @ B
            dofs = np.concatenate([[3 * v, 3 * v + 1, 3 * v + 2] for v in cell])
            K_lin[np.ix_(dofs, dofs)] += Ke
        assert max_rel_err(K, K_lin, floor=np.abs(K_lin).max()) < 1e-10


class TestObjectivity:
    def test_energy_invariant_under_rigid_rotation(self, small_setup, lame3k):
        from scipy.spatial.transform import Rotation
        asm, _, stvk = small_setup
        rng = np.random.default_rng(31)
        u = 0.05 * rng.standard_normal(asm.dofmap.n_dofs)
        bc0 = BoundaryConditions()
        e0 = asm.total_energy(stvk, u, bc0)
        R = Rotation.from_rotvec([0.4, -0.2, 0.9]).as_matrix()
        x = asm.mesh.vertices
        x_def = x + u.reshape(-1, 3)
        u_rot = (x_def @ R.T - x).ravel()
        e1 = asm.total_energy(stvk, u_rot, bc0)
        assert e1 == pytest.approx(e0, rel=1e-9)


class TestDeterminism:
    def test_bitwise_repeatable_assembly(self, small_setup):
        asm, bc, stvk = small_setup
        rng = np.random.default_rng(37)
        u = 0.05 * rng.standard_normal(asm.dofmap.n_dofs)
        R1 = asm.residual(stvk, u, bc)
        K1 = asm.jacobian(stvk, u)
        R2 = asm.residual(stvk, u, bc)
        K2 = asm.jacobian(stvk, u)
        assert np.array_equal(R1, R2)
        assert np.array_equal(K1.data, K2.data)


class TestDirichletCollection:
    def test_nonexistent_node(self, small_setup):
        asm, _, _ = small_setup
        bc = BoundaryConditions(dirichlet=[(10 ** 6, 0, 0.0)])
        with pytest.raises(AssemblyError, match="nonexistent node"):
            collect_dirichlet(bc, asm.mesh.n_vertices)

    def test_conflicting_values(self):
        bc = BoundaryConditions(dirichlet=[(0, 0, 0.0), (0, 0, 1.0)])
        with pytest.raises(AssemblyError, match="conflicting"):
            collect_dirichlet(bc, 4)

    def test_duplicates_deduplicated(self):
        bc = BoundaryConditions(dirichlet=[(0, 0, 1.0), (0, 0, 1.0)])
        dofs, vals = collect_dirichlet(bc, 4)
        assert dofs.tolist() == [0] and vals.tolist() == [1.0]


class TestQuadratureChoice:
    def test_override_degree(self, lame3k):
        mesh = build_family_mesh("q1", 2, 1, 1)
        a_default = Assembler(mesh)
        a_higher = Assembler(mesh, quad_degree=4)
        assert a_higher.rule.n_points > a_default.rule.n_points
        stvk = make_stvk(lame3k).bind()
        u = np.zeros(a_default.dofmap.n_dofs)
        K1 = a_default.jacobian(stvk, u).toarray()
        K2 = a_higher.jacobian(stvk, u).toarray()
        # affine elements: the linearized stiffness is integrated exactly
        # already at the default degree
        assert max_rel_err(K1, K2, floor=np.abs(K2).max()) < 1e-12


def _tiny_assembler(family):
    return Assembler(build_family_mesh(family, 1, 1, 1, dims=(2.0, 1.5, 1.2)))


def _material_zoo(lame):
    from hyperfem.materials import (make_holzapfel_ogden, make_mooney_rivlin,
                                    make_neo_hookean)
    return {
        "stvk": make_stvk(lame).bind(),
        "nh": make_neo_hookean(lame).bind(),
        "mr": make_mooney_rivlin(2000, 100, 1000).bind(),
        "ho": make_holzapfel_ogden(a=59.0, b=8.023, a_f=1000.0, b_f=8.0,
                                   a_s=500.0, b_s=6.0, a_fs=100.0, b_fs=5.0,
                                   kappa=1e4).bind(),
    }


class TestGradientConsistencyAllFamiliesAllMaterials:
    """The residual is the exact gradient of the energy and the tangent the
    exact derivative of the residual, for every material on every element
    family (single-cell meshes, FD probes on random DOFs)."""

    @pytest.mark.parametrize("family", ["p1", "p2", "q1", "q2"])
    @pytest.mark.parametrize("mat", ["stvk", "nh", "mr", "ho"])
    def test_residual_and_tangent_fd(self, family, mat, lame3k):
        asm = _tiny_assembler(family)
        bound = _material_zoo(lame3k)[mat]
        rng = np.random.default_rng(hash((family, mat)) % 2 ** 31)
        u = 0.01 * rng.standard_normal(asm.dofmap.n_dofs)
        bc = BoundaryConditions(body_force=(0.0, 0.0, -1.0))
        R = asm.residual(bound, u, bc)
        K = asm.jacobian(bound, u).toarray()
        h = 1e-6
        scale = max(1.0, np.abs(R).max())
        for d in rng.choice(asm.dofmap.n_dofs, size=6, replace=False):
            up, dn = u.copy(), u.copy()
            up[d] += h
            dn[d] -= h
            fd_grad = (asm.total_energy(bound, up, bc)
                       - asm.total_energy(bound, dn, bc)) / (2 * h)
            assert abs(R[d] - fd_grad) / scale < 1e-6
            fd_col = (asm.residual(bound, up, bc) - asm.residual(bound, dn, bc)) / (2 * h)
            assert max_rel_err(K[:, d], fd_col, floor=np.abs(K).max()) < 1e-5
