import numpy as np
import pytest

from hyperfem.materials import lame_from_young_poisson


@pytest.fixture(scope="session")
def lame3k():
    """The benchmark parameter set: E = 3 kPa, nu = 0.3."""
    return lame_from_young_poisson(3000.0, 0.3)


def random_deformation_gradients(n, rng, det_range=(0.5, 2.0), spread=0.25):
    """Random F batch with det inside ``det_range`` (rejection sampled)."""
    out = []
    while len(out) < n:
        F = np.eye(3) + spread * rng.standard_normal((3, 3))
        d = np.linalg.det(F)
        if det_range[0] <= d <= det_range[1]:
            out.append(F.ravel())
    return np.asarray(out)


def fd_stress_tangent(eval_batch, F_flat, h=1e-6):
    """Central finite differences of (psi -> P) and (P -> A) for a batch.

    Step per component is h * max(1, |F_k|), matching the checked contract.
    Returns (P_fd (N,9), A_fd (N,81)).
    """
    F_flat = np.asarray(F_flat, dtype=np.float64)
    n = len(F_flat)
    P_fd = np.empty((n, 9))
    A_fd = np.empty((n, 9, 9))
    for k in range(9):
        step = h * np.maximum(1.0, np.abs(F_flat[:, k]))
        Fp = F_flat.copy()
        Fm = F_flat.copy()
        Fp[:, k] += step
        Fm[:, k] -= step
        psi_p, P_p, _ = eval_batch(Fp)
        psi_m, P_m, _ = eval_batch(Fm)
        P_fd[:, k] = (psi_p - psi_m) / (2 * step)
        A_fd[:, :, k] = (P_p - P_m) / (2 * step[:, None])
    return P_fd, A_fd.reshape(n, 81)


def max_rel_err(got, ref, floor=1.0):
    """Max |got - ref| normalized by max(floor, max|ref|)."""
    got = np.asarray(got)
    ref = np.asarray(ref)
    scale = max(floor, float(np.abs(ref).max()))
    return float(np.abs(got - ref).max()) / scale
