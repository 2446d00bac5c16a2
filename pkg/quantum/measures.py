# Correlation measures of a two-qubit state and the quantum speed limit bound

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .channels import (
    ChannelFamily,
    NOISE_SIDES,
    evolve,
    kraus_at,
    kraus_derivative_at,
    kraus_finite_difference,
)
from .errors import DerivativeSingularityError, InvalidArgumentError
from .linalg import I2, PAULI_Y, as_matrix, dagger, hermitian_eig, hs_norm, hs_norms, kron, psd_sqrt, sqrt_spectrum
from .states import DensityMatrix, pauli_decompose

logger = logging.getLogger(__name__)

STEERING_MODES = ('singular_values', 'eigenvalues')
QSL_GENERATORS = ('literal', 'symmetrized')
QSL_DENOMINATORS = ('instantaneous', 'time_averaged')

SYMMETRY_TOL = 1e-10
DEGENERATE_TOL = 1e-15
AVERAGING_POINTS = 64

YY = kron(PAULI_Y, PAULI_Y)


@dataclass(frozen=True)
class Thresholds:
    f_classical: float = 2.0 / 3.0
    f_lhv: float = 0.87
    bell_classical: float = 2.0
    steering_zero: float = 0.0
    concurrence_zero: float = 0.0
    margin: float = 1e-12  # a measure is alive when value > threshold + margin


@dataclass(frozen=True)
class MeasureVector:
    fidelity: float
    n_value: float
    bell: float
    s2: float
    s3: float
    concurrence: float
    tau_qsl: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class QslBound:
    tau: float
    theta: float
    denominator: float
    degenerate: bool


# Singular values of the correlation matrix, descending
def correlation_singular_values(T) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    lam = hermitian_eig(np.swapaxes(T, -1, -2) @ T).eigenvalues
    return np.sqrt(np.clip(lam, 0.0, None))


def _steering_coefficients(T, mode: str) -> np.ndarray:
    """|c_i| in descending order."""
    if mode not in STEERING_MODES:
        raise InvalidArgumentError(f"steering mode must be one of {STEERING_MODES}, got '{mode}'")
    if mode == 'singular_values':
        return correlation_singular_values(T)
    T = np.asarray(T, dtype=float)
    if np.max(np.abs(T - np.swapaxes(T, -1, -2))) > SYMMETRY_TOL:
        raise InvalidArgumentError('steering_eigen_mode=eigenvalues needs a symmetric correlation matrix')
    return np.sort(np.abs(hermitian_eig(T).eigenvalues), axis=-1)[..., ::-1]


def _pair_norm(u: np.ndarray) -> np.ndarray:
    # sqrt(c^2 - c_min^2), shared by Bell-CHSH and two-setting steering
    return np.sqrt(u[..., 0] ** 2 + u[..., 1] ** 2)


def _fidelity_from(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n_value = np.sum(u, axis=-1)
    return (1.0 + n_value / 3.0) / 2.0, n_value


def _steering_from(c: np.ndarray, n: int) -> np.ndarray:
    lam = _pair_norm(c) if n == 2 else np.sqrt(np.sum(c ** 2, axis=-1))
    return np.maximum(0.0, (lam - 1.0) / (np.sqrt(n) - 1.0))


# Calculate teleportation fidelity F = (1 + N/3)/2
def teleportation_fidelity(rho: DensityMatrix) -> Tuple[float, float]:
    fidelity, n_value = _fidelity_from(correlation_singular_values(pauli_decompose(rho).T))
    return float(fidelity), float(n_value)


# Calculate Bell-CHSH value
def bell_chsh(rho: DensityMatrix) -> float:
    return float(2.0 * _pair_norm(correlation_singular_values(pauli_decompose(rho).T)))


# Calculate two- or three-setting steering
def steering(rho: DensityMatrix, n: int, mode: str = 'singular_values') -> float:
    if n not in (2, 3):
        raise InvalidArgumentError(f'Steering is defined for n = 2 or 3, got {n}')
    return float(_steering_from(_steering_coefficients(pauli_decompose(rho).T, mode), n))


def concurrences(rho) -> np.ndarray:
    """Wootters concurrence through the Hermitian matrix sqrt(rho) rho~ sqrt(rho).

    Its eigenvalues are the eigenvalues of rho rho~, so the square roots come out of a
    Hermitian eigenproblem. Eigenvalues that should vanish carry absolute noise near
    machine epsilon and enter through a square root, so on rank-deficient states
    (pure states, p = 1 Werner states) the result is good to about 1e-8; on full-rank
    states it agrees with a direct eigen-decomposition of rho rho~ to about 1e-9.
    Takes one state or a stack.
    """
    rho = as_matrix(rho, dims=(4,), stack=True)
    root = psd_sqrt(rho)
    flipped = YY @ np.conj(rho) @ YY
    m = root @ flipped @ root
    roots = sqrt_spectrum((m + dagger(m)) / 2.0)
    return np.maximum(0.0, roots[..., 0] - roots[..., 1:].sum(axis=-1))


# Calculate concurrence
def concurrence(rho: DensityMatrix) -> float:
    return float(concurrences(as_matrix(rho, dims=(4,))))


def measure_columns(rho, steering_mode: str = 'singular_values',
                    with_concurrence: bool = True) -> Dict[str, np.ndarray]:
    """Every correlation measure of a state, or of a stack of states, from one Pauli decomposition.

    Returns arrays keyed by the MeasureVector fields (tau_qsl excluded).
    """
    T = pauli_decompose(rho).T
    u = correlation_singular_values(T)
    c = u if steering_mode == 'singular_values' else _steering_coefficients(T, steering_mode)
    fidelity, n_value = _fidelity_from(u)
    return {
        'fidelity': fidelity,
        'n_value': n_value,
        'bell': 2.0 * _pair_norm(u),
        's2': _steering_from(c, 2),
        's3': _steering_from(c, 3),
        'concurrence': concurrences(rho) if with_concurrence else np.full(u.shape[:-1], np.nan),
    }


def evaluate_measures(rho: DensityMatrix, steering_mode: str = 'singular_values',
                      with_concurrence: bool = True) -> MeasureVector:
    """All correlation measures of one state."""
    columns = measure_columns(as_matrix(rho, dims=(4,)), steering_mode, with_concurrence)
    return MeasureVector(**{name: float(value) for name, value in columns.items()})


# ─────────────────────────────
# QUANTUM SPEED LIMIT
# ─────────────────────────────

def _kraus_with_derivatives(family: ChannelFamily, t: float, noise_sides: str) -> Tuple[np.ndarray, np.ndarray]:
    ops = kraus_at(family, t).stacked()
    try:
        dots = np.array(kraus_derivative_at(family, t))
    except DerivativeSingularityError as e:
        logger.debug(f'{e}; using one-sided finite difference')
        dots = np.array(kraus_finite_difference(family, t, scheme='forward'))

    if noise_sides == 'one':
        return kron(ops, I2), kron(dots, I2)
    # d/dt (E_i x E_j) = E_i' x E_j + E_i x E_j'
    big = kron(ops[:, None], ops[None, :]).reshape(-1, 4, 4)
    big_dots = (kron(dots[:, None], ops[None, :]) + kron(ops[:, None], dots[None, :])).reshape(-1, 4, 4)
    return big, big_dots


def qsl_denominator(family: ChannelFamily, rho0: DensityMatrix, t: float,
                    generator: str = 'literal', noise_sides: str = 'one') -> float:
    """sum_a ||K_a rho0 K_a'^dagger||, or ||sum_a (K_a' rho0 K_a^dagger + h.c.)|| when symmetrized."""
    ops, dots = _kraus_with_derivatives(family, t, noise_sides)
    if generator == 'literal':
        return float(np.sum(hs_norms(ops @ rho0 @ dagger(dots))))
    velocity = (dots @ rho0 @ dagger(ops)).sum(axis=0)
    return hs_norm(velocity + dagger(velocity))


def qsl_bound(family: ChannelFamily, rho0: DensityMatrix, t: float, generator: str = 'literal',
              denominator_mode: str = 'instantaneous', noise_sides: str = 'one',
              rho_t: Optional[DensityMatrix] = None) -> QslBound:
    """Speed-limit time of the evolution rho0 -> rho_t over [0, t].

    Pass `rho_t` when the evolved state is already known to skip evolving again.
    """
    if generator not in QSL_GENERATORS:
        raise InvalidArgumentError(f"qsl_generator must be one of {QSL_GENERATORS}, got '{generator}'")
    if denominator_mode not in QSL_DENOMINATORS:
        raise InvalidArgumentError(f"qsl_denominator must be one of {QSL_DENOMINATORS}, got '{denominator_mode}'")
    if noise_sides not in NOISE_SIDES:
        raise InvalidArgumentError(f"noise_sides must be one of {NOISE_SIDES}, got '{noise_sides}'")

    if rho_t is None:
        rho_t = evolve(family, rho0, t, noise_sides)
    if t == 0:
        return QslBound(tau=0.0, theta=0.0, denominator=0.0, degenerate=True)

    purity = float(np.trace(rho0 @ rho0).real)
    overlap = float(np.trace(rho0 @ rho_t).real)
    theta = float(np.arccos(np.clip(overlap / purity, -1.0, 1.0)))

    if denominator_mode == 'instantaneous':
        denominator = qsl_denominator(family, rho0, t, generator, noise_sides)
    else:
        grid = np.linspace(0.0, t, AVERAGING_POINTS)
        samples = [qsl_denominator(family, rho0, s, generator, noise_sides) for s in grid]
        denominator = float(trapezoid(samples, grid) / t)

    if denominator < DEGENERATE_TOL:
        logger.debug(f'Degenerate QSL denominator {denominator:.3e} at t={t:.10g}')
        return QslBound(tau=0.0, theta=theta, denominator=denominator, degenerate=True)

    tau = 2.0 * theta ** 2 / np.pi ** 2 * np.sqrt(purity) / denominator
    return QslBound(tau=float(tau), theta=theta, denominator=denominator, degenerate=False)


def qsl_time(family: ChannelFamily, rho0: DensityMatrix, t: float, **options) -> float:
    return qsl_bound(family, rho0, t, **options).tau
