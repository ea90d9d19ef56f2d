import numpy as np
import pytest

from hyperfem.materials import make_stvk
from hyperfem.symbolic import constant, exp, variable
from hyperfem.symbolic.tensor import vector
from hyperfem.verify import (mms_build, paper_mms_displacement, rel_l2_error,
                             run_mms_convergence)


class TestRelL2:
    def test_identical(self):
        v = np.array([1.0, 2.0, 3.0])
        assert rel_l2_error(v, v) == 0.0

    def test_double(self):
        v = np.array([1.0, 2.0])
        assert rel_l2_error(2 * v, v) == 1.0

    def test_zero_candidate(self):
        v = np.array([3.0, 4.0])
        assert rel_l2_error(np.zeros(2), v) == 1.0

    def test_zero_reference_rejected(self):
        with pytest.raises(ValueError, match="zero norm"):
            rel_l2_error(np.ones(2), np.zeros(2))

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            rel_l2_error(np.ones(3), np.ones(4))


class TestBodyForceDerivation:
    def test_zero_displacement_zero_force(self, lame3k):
        case = mms_build(make_stvk(lame3k),
                         vector([constant(0.0)] * 3))
        pts = np.random.default_rng(0).random((10, 3))
        assert np.abs(case.body_force_at(pts)).max() == 0.0

    def test_affine_displacement_divergence_free(self, lame3k):
        # homogeneous F means constant P, so f = -Div P = 0
        x, y, z = (variable("x", i) for i in range(3))
        u = vector([constant(0.03) * x + constant(0.01) * y,
                    constant(-0.02) * z,
                    constant(0.015) * x])
        case = mms_build(make_stvk(lame3k), u)
        pts = np.random.default_rng(1).random((10, 3))
        assert np.abs(case.body_force_at(pts)).max() < 1e-12

    def test_paper_field_matches_fd_divergence(self, lame3k):
        case = mms_build(make_stvk(lame3k), paper_mms_displacement())
        pts = np.random.default_rng(2).random((20, 3))
        assert case.fd_divergence_check(pts) < 1e-6

    def test_exact_field_values(self, lame3k):
        case = mms_build(make_stvk(lame3k), paper_mms_displacement())
        got = case.u_at(np.array([[0.0, 0.0, 1.0]]))[0]
        e = np.e
        assert got == pytest.approx([0.01, 0.01, 0.01 * e], rel=1e-14)


class TestConvergenceMachinery:
    def test_needs_three_levels(self, lame3k):
        case = mms_build(make_stvk(lame3k), paper_mms_displacement())
        with pytest.raises(ValueError, match="3 refinement"):
            run_mms_convergence(case, "p1", [2, 4])

    def test_small_p1_study_monotone(self, lame3k):
        case = mms_build(make_stvk(lame3k), paper_mms_displacement())
        table = run_mms_convergence(case, "p1", [2, 3, 4])
        errs = table.errors
        assert errs[0] > errs[1] > errs[2]
        assert table.rows[0][0] == 0.5
        d = table.as_dict()
        assert len(d["rows"]) == 3 and d["rows"][2]["order"] is not None

    def test_q1_also_supported(self, lame3k):
        case = mms_build(make_stvk(lame3k), paper_mms_displacement())
        table = run_mms_convergence(case, "q1", [2, 3, 4])
        assert table.errors[-1] < table.errors[0]


class TestInterpolantResidualConsistency:
    def test_residual_of_interpolated_exact_solution_vanishes(self, lame3k):
        """Interpolating the exact field and assembling with the derived
        body force leaves a residual that decays under refinement."""
        from hyperfem.fem import Assembler, BoundaryConditions
        from hyperfem.verify import build_family_mesh
        case = mms_build(make_stvk(lame3k), paper_mms_displacement())
        bound = case.material.bind()
        norms = []
        for n in (2, 4, 8):
            mesh = build_family_mesh("p1", n, n, n, dims=(1.0, 1.0, 1.0))
            asm = Assembler(mesh)
            bc = BoundaryConditions(body_force=lambda x: case.body_force_at(x))
            u_I = case.u_at(mesh.vertices).ravel()
            R = asm.residual(bound, u_I, bc)
            interior = np.setdiff1d(np.arange(asm.dofmap.n_dofs),
                                    np.unique(3 * np.unique(mesh.facets)[:, None]
                                              + np.arange(3)))
            Fext = asm.external_forces(bc)
            norms.append(np.linalg.norm(R[interior]) / np.linalg.norm(Fext))
        assert norms[0] > norms[1] > norms[2]
        assert norms[2] < norms[0] / 4
