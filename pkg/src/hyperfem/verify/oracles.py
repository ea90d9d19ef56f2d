"""Hand-coded closed-form stress/tangent kernels used as cross-checks.

These are the independent route against the tape-derived kernels: the
stress and tangent below are written from the analytic formulas

  StVK:        S = lambda tr(E) I + 2 mu E,            P = F S
  Neo-Hookean: P = mu F + (lambda ln J - mu) F^-T

with their exact derivatives, assembled with numpy only.  They plug into
the Assembler through the same (psi, P, A) batch interface as compiled
materials and are themselves finite-difference validated in the tests.
"""

from __future__ import annotations

import numpy as np

from .._accel import KernelDomainError

__all__ = ["ClosedFormStVK", "ClosedFormNeoHookean"]

_I3 = np.eye(3)
_II = np.einsum("ik,jl->ijkl", _I3, _I3)  # identity on second-order tensors


class _ClosedFormKernel:
    def new_scratch(self, n_points):
        return None

    def eval(self, F):
        F = np.asarray(F, dtype=np.float64).reshape(9)
        psi, P, A = self.eval_batch(F[None, :])
        return float(psi[0]), P[0].reshape(3, 3), A[0].reshape(3, 3, 3, 3)


class ClosedFormStVK(_ClosedFormKernel):
    """Saint Venant-Kirchhoff via the second Piola-Kirchhoff route."""

    requires_positive_det = False

    def __init__(self, mu: float, lam: float):
        self.mu = float(mu)
        self.lam = float(lam)

    def eval_batch(self, F_flat, scratch=None):
        mu, lam = self.mu, self.lam
        F = np.asarray(F_flat, dtype=np.float64).reshape(-1, 3, 3)
        C = np.einsum("nki,nkj->nij", F, F)
        E = 0.5 * (C - _I3)
        trE = np.trace(E, axis1=1, axis2=2)
        psi = 0.5 * lam * trE ** 2 + mu * np.einsum("nij,nij->n", E, E)
        S = lam * trE[:, None, None] * _I3 + 2.0 * mu * E
        P = np.einsum("nim,nmj->nij", F, S)
        # A_ijkl = d_ik S_jl + lam F_ij F_kl + mu F_il F_kj + mu (F F^T)_ik d_jl
        B = np.einsum("nim,nkm->nik", F, F)
        A = np.einsum("ik,njl->nijkl", _I3, S) \
            + lam * np.einsum("nij,nkl->nijkl", F, F) \
            + mu * np.einsum("nil,nkj->nijkl", F, F) \
            + mu * np.einsum("nik,jl->nijkl", B, _I3)
        n = len(F)
        return psi, P.reshape(n, 9), A.reshape(n, 81)


class ClosedFormNeoHookean(_ClosedFormKernel):
    """Compressible Neo-Hookean in the inverse-transpose form."""

    requires_positive_det = True

    def __init__(self, mu: float, lam: float):
        self.mu = float(mu)
        self.lam = float(lam)

    def eval_batch(self, F_flat, scratch=None):
        mu, lam = self.mu, self.lam
        F = np.asarray(F_flat, dtype=np.float64).reshape(-1, 3, 3)
        J = np.linalg.det(F)
        if np.any(J <= 0.0):
            raise KernelDomainError(
                "non-invertible deformation state (det F <= 0)")
        G = np.transpose(np.linalg.inv(F), (0, 2, 1))  # F^-T
        lnJ = np.log(J)
        Ic = np.einsum("nij,nij->n", F, F)
        psi = 0.5 * mu * (Ic - 3.0) - mu * lnJ + 0.5 * lam * lnJ ** 2
        coef = (lam * lnJ - mu)[:, None, None]
        P = mu * F + coef * G
        # A_ijkl = mu d_ik d_jl + lam G_ij G_kl + (mu - lam lnJ) G_il G_kj
        A = mu * _II[None] \
            + lam * np.einsum("nij,nkl->nijkl", G, G) \
            - coef[..., None, None] * np.einsum("nil,nkj->nijkl", G, G)
        n = len(F)
        return psi, P.reshape(n, 9), A.reshape(n, 81)
