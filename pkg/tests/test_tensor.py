import numpy as np
import pytest

from hyperfem.materials import deformation_gradient
from hyperfem.symbolic import (TensorShapeError, compile_tape, constant, det3,
                               eval_expr, identity, inv3, matrix, trace,
                               transpose, variable)


def _fvars():
    return [variable("F", i) for i in range(9)]


class TestAlgebra:
    def test_trace_identity(self):
        t = trace(identity(3)).as_scalar()
        assert t.op == "const" and t.data == 3.0

    def test_det_of_constant_diag(self):
        d = det3(matrix([[2, 0, 0], [0, 3, 0], [0, 0, 4]])).as_scalar()
        assert d.op == "const" and d.data == 24.0

    def test_ftf_at_identity(self):
        F = deformation_gradient()
        C = transpose(F) @ F
        vals = {variable("F", i): float(np.eye(3).ravel()[i]) for i in range(9)}
        got = np.array([eval_expr(e, vals) for e in C.entries]).reshape(3, 3)
        assert np.array_equal(got, np.eye(3))

    def test_transpose_involution(self):
        F = deformation_gradient()
        again = transpose(transpose(F))
        assert all(a is b for a, b in zip(F.entries, again.entries))

    def test_shape_mismatch_reports_both_shapes(self):
        with pytest.raises(TensorShapeError, match=r"\(3, 3\).*\(2, 2\)"):
            deformation_gradient() @ matrix([[1, 0], [0, 1]])

    def test_det_requires_3x3(self):
        with pytest.raises(TensorShapeError, match="3x3"):
            det3(matrix([[1, 0], [0, 1]]))
        with pytest.raises(TensorShapeError, match="3x3"):
            inv3(matrix([[1, 0], [0, 1]]))

    def test_scalar_ops(self):
        s = trace(identity(3)) * constant(2.0) - constant(1.0)
        assert s.as_scalar().data == 5.0


class TestInverse:
    def test_inv3_matches_numpy(self):
        F = deformation_gradient()
        kern = compile_tape([e for e in inv3(F).entries], _fvars())
        rng = np.random.default_rng(4)
        for _ in range(20):
            A = np.eye(3) + 0.4 * rng.standard_normal((3, 3))
            if abs(np.linalg.det(A)) < 0.2:
                continue
            got = kern.evaluate(A.ravel()).reshape(3, 3)
            assert np.abs(got - np.linalg.inv(A)).max() < 1e-12

    def test_inv3_has_one_division_per_entry(self):
        F = deformation_gradient()
        for e in inv3(F).entries:
            assert e.op == "div"

    def test_det_gradient_is_cofactor_at_identity(self):
        # FD oracle: d(det F)/dF at F = I equals the identity matrix
        F = deformation_gradient()
        J = det3(F).as_scalar()
        kern = compile_tape([J], _fvars())
        h = 1e-6
        fd = np.empty(9)
        base = np.eye(3).ravel()
        for k in range(9):
            up, dn = base.copy(), base.copy()
            up[k] += h
            dn[k] -= h
            fd[k] = (kern.evaluate(up)[0] - kern.evaluate(dn)[0]) / (2 * h)
        assert np.abs(fd - np.eye(3).ravel()).max() < 1e-9
