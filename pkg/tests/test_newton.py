import numpy as np
import pytest

from hyperfem.fem import (Assembler, BoundaryConditions, NewtonConfig,
                          NewtonError, dirichlet_from_tag, newton_solve)
from hyperfem.materials import make_neo_hookean, make_stvk
from hyperfem.mesh import generate_beam_hex, hex_to_tet
from hyperfem.verify import quadratic_contraction


@pytest.fixture(scope="module")
def beam_setup(lame3k):
    mesh = generate_beam_hex(6, 2, 2)
    asm = Assembler(mesh)
    bc = BoundaryConditions(
        dirichlet=dirichlet_from_tag(mesh, "clamp"),
        neumann=[("load", (0.0, -10.0, 0.0))])
    return asm, bc


class TestConvergence:
    def test_zero_load_converges_first_iteration(self, beam_setup, lame3k):
        asm, _ = beam_setup
        bc = BoundaryConditions(dirichlet=dirichlet_from_tag(asm.mesh, "clamp"))
        u, rep = newton_solve(asm, make_stvk(lame3k).bind(), bc)
        assert rep.converged
        assert rep.iterations == 1
        assert np.abs(u).max() == 0.0
        assert len(rep.residual_history) == rep.iterations
        assert len(rep.increment_history) == rep.iterations

    def test_beam_within_budget(self, beam_setup, lame3k):
        asm, bc = beam_setup
        u, rep = newton_solve(asm, make_stvk(lame3k).bind(), bc)
        assert rep.converged
        assert rep.iterations <= 25
        # y-deflection downward under the -y traction
        assert u.reshape(-1, 3)[:, 1].min() < -1.0

    def test_histories_match_iterations(self, beam_setup, lame3k):
        asm, bc = beam_setup
        _, rep = newton_solve(asm, make_neo_hookean(lame3k).bind(), bc)
        assert len(rep.residual_history) == rep.iterations
        assert len(rep.increment_history) == rep.iterations
        assert rep.mean_iteration_ms > 0.0

    def test_clamp_exact(self, beam_setup, lame3k):
        asm, bc = beam_setup
        u, _ = newton_solve(asm, make_stvk(lame3k).bind(), bc)
        clamped = np.unique(asm.mesh.facets_with_tag("clamp"))
        assert np.abs(u.reshape(-1, 3)[clamped]).max() == 0.0

    def test_warm_start_fewer_iterations(self, beam_setup, lame3k):
        asm, bc = beam_setup
        mat = make_stvk(lame3k).bind()
        u, rep_cold = newton_solve(asm, mat, bc)
        _, rep_warm = newton_solve(asm, mat, bc, u0=u)
        assert rep_warm.iterations < rep_cold.iterations

    def test_nonzero_dirichlet_enforced(self, lame3k):
        mesh = hex_to_tet(generate_beam_hex(2, 1, 1))
        asm = Assembler(mesh)
        pulled = dirichlet_from_tag(mesh, "load", (0.5, 0.0, 0.0))
        bc = BoundaryConditions(
            dirichlet=dirichlet_from_tag(mesh, "clamp") + pulled)
        u, rep = newton_solve(asm, make_stvk(lame3k).bind(), bc)
        assert rep.converged
        loaded = np.unique(mesh.facets_with_tag("load"))
        assert np.allclose(u.reshape(-1, 3)[loaded, 0], 0.5, atol=1e-14)


class TestFailureModes:
    def test_nonconvergence_carries_report(self, beam_setup, lame3k):
        asm, _ = beam_setup
        bc = BoundaryConditions(
            dirichlet=dirichlet_from_tag(asm.mesh, "clamp"),
            neumann=[("load", (0.0, -10.0, 0.0))])
        cfg = NewtonConfig(max_iterations=2, max_bisections=0)
        with pytest.raises(NewtonError) as err:
            newton_solve(asm, make_stvk(lame3k).bind(), bc, cfg)
        assert err.value.report.iterations >= 2
        assert not err.value.report.converged

    def test_bisection_rescues_large_step(self, lame3k):
        # a load this large inverts elements when applied in one step
        mesh = generate_beam_hex(4, 2, 2)
        asm = Assembler(mesh)
        bc = BoundaryConditions(
            dirichlet=dirichlet_from_tag(mesh, "clamp"),
            neumann=[("load", (0.0, -120.0, 0.0))])
        nh = make_neo_hookean(lame3k).bind()
        u, rep = newton_solve(asm, nh, bc, NewtonConfig(max_bisections=4))
        assert rep.converged
        assert rep.bisections >= 1 or rep.load_steps_used >= 1

    def test_free_floating_mesh_fails(self, lame3k):
        mesh = generate_beam_hex(2, 1, 1)
        asm = Assembler(mesh)
        bc = BoundaryConditions(neumann=[("load", (0.0, -1.0, 0.0))])
        with pytest.raises(NewtonError):
            newton_solve(asm, make_stvk(lame3k).bind(), bc,
                         NewtonConfig(max_bisections=0))


class TestQuadraticContractionHelper:
    def test_accepts_quadratic_tail(self):
        assert quadratic_contraction([1e4, 1e2, 1.0, 1e-4, 1e-12, 1e-13])

    def test_rejects_linear_rate(self):
        assert not quadratic_contraction([1e4 * 0.5 ** k for k in range(40)])

    def test_accepts_floor_plunge(self):
        assert quadratic_contraction([1e5, 1e3, 1e-1, 1e-7, 5e-10])

    def test_zero_history(self):
        assert quadratic_contraction([0.0])


class TestSmallStrainConsistency:
    def test_stvk_and_nh_agree_at_vanishing_load(self, lame3k):
        """Both models linearize to the same elasticity; at 0.1 Pa the
        fields must differ by under 2% relatively."""
        from hyperfem.verify import rel_l2_error
        mesh = generate_beam_hex(6, 2, 2)
        asm = Assembler(mesh)
        bc = BoundaryConditions(
            dirichlet=dirichlet_from_tag(mesh, "clamp"),
            neumann=[("load", (0.0, -0.1, 0.0))])
        u_stvk, _ = newton_solve(asm, make_stvk(lame3k).bind(), bc)
        u_nh, _ = newton_solve(asm, make_neo_hookean(lame3k).bind(), bc)
        assert rel_l2_error(u_stvk, u_nh) < 0.02


class TestSerialDeterminism:
    def test_bitwise_identical_solutions(self, beam_setup, lame3k):
        asm, bc = beam_setup
        mat = make_stvk(lame3k).bind()
        u1, _ = newton_solve(asm, mat, bc)
        u2, _ = newton_solve(asm, mat, bc)
        assert np.array_equal(u1, u2)
