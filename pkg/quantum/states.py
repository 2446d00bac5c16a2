# Builds the initial two-qubit states and converts between density matrices and Pauli form

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NotAStateError, NumericalFailureError
from .linalg import HERMITIAN_TOL, I2, PAULIS, PSD_TOL, as_matrix, dagger, hermitian_eig, hs_norms, kron

# Basis order |00>, |01>, |10>, |11>
DensityMatrix = np.ndarray

TRACE_TOL = 1e-12
NORM_TOL = 1e-9
IMAG_TOL = 1e-10

_S = 1.0 / np.sqrt(2.0)
BELL_STATES = {
    'phi_plus':  np.array([_S, 0, 0, _S], dtype=complex),
    'phi_minus': np.array([_S, 0, 0, -_S], dtype=complex),
    'psi_plus':  np.array([0, _S, _S, 0], dtype=complex),
    'psi_minus': np.array([0, _S, -_S, 0], dtype=complex),
}


@dataclass(frozen=True)
class PureStateSpec:
    """|psi> = alpha|00> + beta|11>"""
    alpha: complex
    beta: complex


@dataclass(frozen=True)
class WernerSpec:
    p: float
    bell_index: str = 'phi_plus'


@dataclass(frozen=True)
class PauliDecomposition:
    r: np.ndarray  # first-qubit Bloch vector
    s: np.ndarray  # second-qubit Bloch vector
    T: np.ndarray  # correlation matrix t_ij


def _first_bad(bad: np.ndarray, values: np.ndarray, time):
    i = np.unravel_index(np.argmax(bad), bad.shape) if bad.ndim else ()
    at = None if time is None else float(np.broadcast_to(time, bad.shape)[i])
    return values[i], at


def check_state(rho, time=None) -> DensityMatrix:
    """Raise NotAStateError unless `rho` has unit trace, is Hermitian and is PSD.

    Also takes a stack of states; `time` may then be an array of the same leading
    shape and the error carries the time of the first bad state.
    """
    rho = as_matrix(rho, dims=(4,), stack=True)
    tr = np.trace(rho, axis1=-2, axis2=-1)
    bad = np.abs(tr - 1.0) > TRACE_TOL
    if np.any(bad):
        tr, at = _first_bad(bad, tr, time)
        raise NotAStateError(f'Trace is {tr.real:.15g}{tr.imag:+.3e}j, expected 1', time=at)
    asym = hs_norms(rho - dagger(rho))
    bad = asym > HERMITIAN_TOL
    if np.any(bad):
        asym, at = _first_bad(bad, asym, time)
        raise NotAStateError(f'State is not Hermitian: ||rho - rho^dagger|| = {asym:.3e}', time=at)
    lowest = hermitian_eig(rho).eigenvalues[..., -1]
    bad = lowest < -PSD_TOL
    if np.any(bad):
        lowest, at = _first_bad(bad, lowest, time)
        raise NotAStateError(f'State is not positive: eigenvalue {lowest:.3e}', time=at)
    return rho


def bell_state(bell_index: str) -> DensityMatrix:
    if bell_index not in BELL_STATES:
        raise InvalidArgumentError(f"Unknown Bell state '{bell_index}', expected one of {list(BELL_STATES)}")
    ket = BELL_STATES[bell_index]
    return np.outer(ket, np.conj(ket))


# Pure state alpha|00> + beta|11>
def make_pure(spec: PureStateSpec) -> DensityMatrix:
    norm = abs(spec.alpha) ** 2 + abs(spec.beta) ** 2
    if abs(norm - 1.0) > NORM_TOL:
        raise InvalidArgumentError(f'Pure state is not normalized: |alpha|^2 + |beta|^2 = {norm:.12g}')
    ket = np.array([spec.alpha, 0, 0, spec.beta], dtype=complex)
    return np.outer(ket, np.conj(ket))


# Werner state (1-p)/4 I + p|B><B|
def make_werner(spec: WernerSpec) -> DensityMatrix:
    if not 0.0 <= spec.p <= 1.0:
        raise InvalidArgumentError(f'Werner weight p must lie in [0, 1], got {spec.p}')
    return (1.0 - spec.p) / 4.0 * np.eye(4, dtype=complex) + spec.p * bell_state(spec.bell_index)


_SIGMA = np.array(PAULIS)
LOCAL_A = kron(_SIGMA, I2)
LOCAL_B = kron(I2, _SIGMA)
CORRELATORS = kron(_SIGMA[:, None], _SIGMA[None, :])


def _real_traces(ops: np.ndarray, rho: np.ndarray, label: str) -> np.ndarray:
    # Tr[op rho] for a stack of operators and a stack of states
    flat = ops.reshape(-1, 4, 4)
    values = np.einsum('mij,...ji->...m', flat, rho).reshape(rho.shape[:-2] + ops.shape[:-2])
    worst = np.max(np.abs(values.imag))
    if worst >= IMAG_TOL:
        raise NumericalFailureError(f'{label} has imaginary part {worst:.3e}; state is corrupted')
    return values.real


def pauli_decompose(rho: DensityMatrix) -> PauliDecomposition:
    """r_i = Tr[(sigma_i x I) rho], s_i = Tr[(I x sigma_i) rho], t_ij = Tr[(sigma_i x sigma_j) rho].

    A stack of states gives stacked r, s and T.
    """
    rho = as_matrix(rho, dims=(4,), stack=True)
    return PauliDecomposition(
        r=_real_traces(LOCAL_A, rho, 'Bloch vector r'),
        s=_real_traces(LOCAL_B, rho, 'Bloch vector s'),
        T=_real_traces(CORRELATORS, rho, 'Correlation matrix T'),
    )


def pauli_reconstruct(d: PauliDecomposition) -> DensityMatrix:
    rho = (np.eye(4, dtype=complex)
           + np.einsum('i,ijk->jk', np.asarray(d.r, dtype=float), LOCAL_A)
           + np.einsum('i,ijk->jk', np.asarray(d.s, dtype=float), LOCAL_B)
           + np.einsum('ij,ijkl->kl', np.asarray(d.T, dtype=float), CORRELATORS))
    return check_state(rho / 4.0)
