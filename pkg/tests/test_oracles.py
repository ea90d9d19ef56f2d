import numpy as np
import pytest

from hyperfem.materials import make_neo_hookean, make_stvk
from hyperfem.verify import ClosedFormNeoHookean, ClosedFormStVK

from conftest import fd_stress_tangent, max_rel_err, random_deformation_gradients


@pytest.fixture(scope="module")
def fbatch():
    rng = np.random.default_rng(51)
    return random_deformation_gradients(40, rng, det_range=(0.7, 1.5))


class TestOracleSelfValidation:
    """The closed-form kernels are validated before being used as a
    reference: their P and A must match finite differences of their own
    psi and P."""

    def test_stvk_fd(self, lame3k, fbatch):
        cf = ClosedFormStVK(lame3k.mu, lame3k.lam)
        _, P, A = cf.eval_batch(fbatch)
        P_fd, A_fd = fd_stress_tangent(cf.eval_batch, fbatch)
        assert max_rel_err(P, P_fd) < 1e-6
        assert max_rel_err(A, A_fd) < 1e-5

    def test_nh_fd(self, lame3k, fbatch):
        cf = ClosedFormNeoHookean(lame3k.mu, lame3k.lam)
        _, P, A = cf.eval_batch(fbatch)
        P_fd, A_fd = fd_stress_tangent(cf.eval_batch, fbatch)
        assert max_rel_err(P, P_fd) < 1e-6
        assert max_rel_err(A, A_fd) < 1e-5


class TestOracleVsDerivedKernels:
    def test_stvk_pointwise(self, lame3k, fbatch):
        cf = ClosedFormStVK(lame3k.mu, lame3k.lam)
        tape = make_stvk(lame3k).bind()
        a = cf.eval_batch(fbatch)
        b = tape.eval_batch(fbatch)
        for x, y in zip(a, b):
            assert max_rel_err(x, y, floor=np.abs(y).max()) < 1e-13

    def test_nh_pointwise(self, lame3k, fbatch):
        cf = ClosedFormNeoHookean(lame3k.mu, lame3k.lam)
        tape = make_neo_hookean(lame3k).bind()
        a = cf.eval_batch(fbatch)
        b = tape.eval_batch(fbatch)
        for x, y in zip(a, b):
            assert max_rel_err(x, y, floor=np.abs(y).max()) < 1e-13

    def test_nh_rejects_inverted(self, lame3k):
        from hyperfem._accel import KernelDomainError
        cf = ClosedFormNeoHookean(lame3k.mu, lame3k.lam)
        with pytest.raises(KernelDomainError):
            cf.eval_batch(np.diag([-1.0, 1.0, 1.0]).reshape(1, 9))
