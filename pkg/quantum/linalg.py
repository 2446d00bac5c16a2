# Small dense complex linear algebra for 2x2, 3x3 and 4x4 matrices and stacks of them

from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidArgumentError, NotPSDError, NumericalFailureError

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
OFF_DIAGONAL_TOL = 1e-14
MAX_SWEEPS = 100

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


class HermitianEigenResult(NamedTuple):
    eigenvalues: np.ndarray   # real, descending along the last axis
    eigenvectors: np.ndarray  # columns, same order


def as_matrix(a, dims: Sequence[int] = (2, 4), stack: bool = False) -> np.ndarray:
    """Return `a` as a complex square array, checking its size and finiteness.

    With stack=True any number of leading axes is allowed.
    """
    m = np.asarray(a, dtype=complex)
    shape_ok = m.ndim >= 2 if stack else m.ndim == 2
    if not shape_ok or m.shape[-1] != m.shape[-2] or m.shape[-1] not in dims:
        raise InvalidArgumentError(f'Expected a square matrix of size {tuple(dims)}, got shape {m.shape}')
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError('Matrix has non-finite entries')
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


# Kronecker product of single-qubit operators, broadcast over leading axes
def kron(a, b) -> np.ndarray:
    a = as_matrix(a, dims=(2,), stack=True)
    b = as_matrix(b, dims=(2,), stack=True)
    out = np.einsum('...ij,...kl->...ikjl', a, b)
    return out.reshape(out.shape[:-4] + (4, 4))


# Hilbert-Schmidt norm sqrt(tr A^dagger A)
def hs_norm(a) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(a)) ** 2)))


def hs_norms(a: np.ndarray) -> np.ndarray:
    """hs_norm of every matrix in a stack."""
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def _off_diagonal_norms(a: np.ndarray) -> np.ndarray:
    off = ~np.eye(a.shape[-1], dtype=bool)
    return np.sqrt(np.sum(np.abs(a[..., off]) ** 2, axis=-1))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int, active: np.ndarray) -> None:
    """Zero a[..., p, q] in place with one complex Jacobi rotation per active matrix and accumulate it into v."""
    apq = a[..., p, q]
    mask = active & (apq != 0)
    if not np.any(mask):
        return
    beta = np.where(mask, np.abs(apq), 1.0)
    phase = np.where(mask, np.conj(apq / beta), 1.0)
    theta = (a[..., q, q].real - a[..., p, p].real) / (2.0 * beta)
    t = 1.0 / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(theta < 0.0, -t, t)
    c = np.where(mask, 1.0 / np.hypot(t, 1.0), 1.0)
    s = np.where(mask, t * c, 0.0)

    # columns: [x_p, x_q] -> [x_p, x_q] @ [[c, s], [-s phase, c phase]]
    g_qp, g_qq = (-s * phase)[..., None], (c * phase)[..., None]
    cc, ss = c[..., None], s[..., None]
    for m in (a, v):
        xp, xq = m[..., :, p].copy(), m[..., :, q]
        m[..., :, p] = cc * xp + g_qp * xq
        m[..., :, q] = ss * xp + g_qq * xq
    # rows: the adjoint rotation from the left
    rp, rq = a[..., p, :].copy(), a[..., q, :]
    a[..., p, :] = cc * rp - (s * np.conj(phase))[..., None] * rq
    a[..., q, :] = ss * rp + (c * np.conj(phase))[..., None] * rq

    a[..., p, q] = np.where(mask, 0.0, a[..., p, q])
    a[..., q, p] = np.where(mask, 0.0, a[..., q, p])
    a[..., p, p] = a[..., p, p].real
    a[..., q, q] = a[..., q, q].real


# Cyclic Jacobi eigensolver for complex Hermitian matrices
def hermitian_eig(h, max_sweeps: int = MAX_SWEEPS) -> HermitianEigenResult:
    """Eigen-decompose a Hermitian matrix of size 2, 3 or 4, or a stack of them.

    The input is symmetrized as (H + H^dagger)/2 first. Pairs whose off-diagonal entry
    is exactly zero are skipped, so block structure (X states) is kept intact. A matrix
    stops rotating once its off-diagonal Frobenius norm falls to 1e-14 of ||H||, so its
    result does not depend on the rest of the stack.
    """
    h = as_matrix(h, dims=(2, 3, 4), stack=True)
    asym = np.max(hs_norms(h - dagger(h)))
    if asym > HERMITIAN_TOL:
        raise InvalidArgumentError(f'Matrix is not Hermitian: ||H - H^dagger|| = {asym:.3e}')

    a = (h + dagger(h)) / 2.0
    n = a.shape[-1]
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    target = OFF_DIAGONAL_TOL * hs_norms(a)
    pairs = list(combinations(range(n), 2))

    sweep = 0
    while True:
        active = _off_diagonal_norms(a) > target
        if not np.any(active):
            break
        if sweep == max_sweeps:
            raise NumericalFailureError(f'Jacobi eigensolver did not converge after {max_sweeps} sweeps')
        for p, q in pairs:
            _rotate(a, v, p, q, active)
        sweep += 1

    eigenvalues = np.diagonal(a, axis1=-2, axis2=-1).real.copy()
    order = np.argsort(-eigenvalues, axis=-1, kind='stable')
    return HermitianEigenResult(
        np.take_along_axis(eigenvalues, order, axis=-1),
        np.take_along_axis(v, order[..., None, :], axis=-1),
    )


def _clamped_spectrum(h) -> HermitianEigenResult:
    res = hermitian_eig(h)
    lowest = np.min(res.eigenvalues)
    if lowest < -PSD_TOL:
        raise NotPSDError(f'Matrix is not positive semidefinite: eigenvalue {lowest:.3e}')
    return HermitianEigenResult(np.clip(res.eigenvalues, 0.0, None), res.eigenvectors)


# Square roots of the eigenvalues of a PSD matrix, descending
def sqrt_spectrum(h) -> np.ndarray:
    return np.sqrt(_clamped_spectrum(h).eigenvalues)


# Principal square root of a PSD matrix
def psd_sqrt(h) -> np.ndarray:
    lam, vecs = _clamped_spectrum(h)
    root = (vecs * np.sqrt(lam)[..., None, :]) @ dagger(vecs)
    return (root + dagger(root)) / 2.0
