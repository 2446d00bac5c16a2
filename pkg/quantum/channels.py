# Time-dependent Kraus families for the four noise models and their action on two-qubit states

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    CompletePositivityViolationError,
    DerivativeSingularityError,
    InvalidArgumentError,
    NumericalFailureError,
)
from .linalg import I2, PAULI_X, PAULI_Y, PAULI_Z, dagger, hs_norm, kron
from .states import DensityMatrix, check_state

logger = logging.getLogger(__name__)

KINDS = ('amplitude_damping', 'phase_damping', 'depolarizing', 'rtn')
REGIMES = ('markovian', 'non_markovian')
DP_PREFACTORS = ('per_axis', 'global')
NOISE_SIDES = ('one', 'both')
FD_SCHEMES = ('forward', 'central', 'richardson')

COMPLETENESS_TOL = 1e-10
KERNEL_TOL = 1e-12
CP_TOL = 1e-9
FD_STEP = 1e-6

# Rows give (P1, P2, P3, P4) from (1, Omega_1, Omega_2, Omega_3)
DP_MIX = 0.25 * np.array([
    [1,  1, -1, -1],
    [1, -1,  1, -1],
    [1, -1, -1,  1],
    [1,  1,  1,  1],
], dtype=float)


@dataclass(frozen=True)
class ChannelParams:
    gamma: Optional[float] = None
    Gamma: Optional[float] = None
    a: Optional[float] = None
    gamma_vec: Optional[Tuple[float, float, float]] = None
    Gamma_vec: Optional[Tuple[float, float, float]] = None


@dataclass(frozen=True)
class ChannelFamily:
    kind: str
    regime: str
    params: ChannelParams
    dp_prefactor: str = 'per_axis'
    literal_pd_kraus: bool = False  # debug only: E0 = diag(1, sqrt(p)), not trace preserving

    def __post_init__(self):
        _validate_family(self)

    @property
    def label(self) -> str:
        return f'{self.kind}/{self.regime}'

    @property
    def rate(self) -> float:
        """Characteristic inverse time of the family."""
        prm = self.params
        if self.kind == 'depolarizing':
            return max(prm.Gamma_vec) if self.regime == 'non_markovian' else prm.Gamma
        return prm.gamma


@dataclass(frozen=True)
class KrausSet:
    operators: Tuple[np.ndarray, ...]
    time: float

    def stacked(self) -> np.ndarray:
        return np.array(self.operators)

    def completeness_residual(self) -> float:
        total = sum(dagger(e) @ e for e in self.operators)
        return hs_norm(total - I2)


def _require(family: ChannelFamily, names: Sequence[str]) -> None:
    for name in names:
        value = getattr(family.params, name)
        if value is None:
            raise InvalidArgumentError(f'{family.label} channel needs parameter {name}')
        values = np.atleast_1d(np.asarray(value, dtype=float))
        if name.endswith('_vec') and values.shape != (3,):
            raise InvalidArgumentError(f'{name} must have three components, got {values.shape[0]}')
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InvalidArgumentError(f'{name} must be positive, got {value}')


def _validate_family(family: ChannelFamily) -> None:
    if family.kind not in KINDS:
        raise InvalidArgumentError(f"Unknown channel kind '{family.kind}', expected one of {KINDS}")
    if family.regime not in REGIMES:
        raise InvalidArgumentError(f"Unknown regime '{family.regime}', expected one of {REGIMES}")
    if family.dp_prefactor not in DP_PREFACTORS:
        raise InvalidArgumentError(f"Unknown dp_prefactor '{family.dp_prefactor}', expected one of {DP_PREFACTORS}")

    prm = family.params
    nm = family.regime == 'non_markovian'
    if family.kind == 'amplitude_damping':
        _require(family, ['gamma', 'Gamma'] if nm else ['gamma'])
        if nm and 2 * prm.gamma * prm.Gamma - prm.Gamma ** 2 <= 0:
            raise InvalidArgumentError(
                f'Non-Markovian amplitude damping needs 2*gamma*Gamma - Gamma^2 > 0 '
                f'(gamma={prm.gamma}, Gamma={prm.Gamma})'
            )
    elif family.kind == 'phase_damping':
        _require(family, ['gamma', 'Gamma'] if nm else ['gamma'])
    elif family.kind == 'depolarizing':
        if not nm:
            _require(family, ['gamma_vec', 'Gamma'])
        elif family.dp_prefactor == 'global':
            _require(family, ['gamma_vec', 'Gamma_vec', 'Gamma'])
        else:
            _require(family, ['gamma_vec', 'Gamma_vec'])
    else:
        _require(family, ['gamma', 'a'])
        ratio = prm.a / prm.gamma
        if nm and ratio <= 0.5:
            raise InvalidArgumentError(f'Non-Markovian RTN needs a/gamma > 0.5, got {ratio:.6g}')
        if not nm and ratio >= 0.5:
            raise InvalidArgumentError(f'Markovian RTN needs a/gamma < 0.5, got {ratio:.6g}')


def _check_time(t: float) -> float:
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise InvalidArgumentError(f'Time must be finite and non-negative, got {t}')
    return t


# ─────────────────────────────
# MEMORY KERNELS
# ─────────────────────────────

def damped_cosine(x: float, w2: float) -> Tuple[float, float]:
    """f(x) = e^-x [cos(wx) + sin(wx)/w] with w^2 = w2, and df/dx.

    w2 < 0 continues to cosh/sinh, w2 = 0 gives e^-x (1 + x). w2 > -1 always holds for
    the channels here, so the hyperbolic branch never grows.
    """
    if w2 > 0:
        w = np.sqrt(w2)
        damp = np.exp(-x)
        cos_part = damp * np.cos(w * x)
        sin_part = damp * np.sin(w * x) / w
    elif w2 < 0:
        k = np.sqrt(-w2)
        slow, fast = np.exp(-(1.0 - k) * x), np.exp(-(1.0 + k) * x)
        cos_part = 0.5 * (slow + fast)
        sin_part = 0.5 * (slow - fast) / k
    else:
        damp = np.exp(-x)
        cos_part = damp
        sin_part = damp * x
    return float(cos_part + sin_part), float(-(1.0 + w2) * sin_part)


def _ad_markovian(family: ChannelFamily, t: float):
    g = family.params.gamma
    p = np.exp(-g * t)
    return np.array([p]), np.array([-g * p])


def _ad_non_markovian(family: ChannelFamily, t: float):
    g, G = family.params.gamma, family.params.Gamma
    f, df = damped_cosine(G * t / 2.0, 2.0 * g / G - 1.0)
    return np.array([f * f]), np.array([f * df * G])


def _pd_markovian(family: ChannelFamily, t: float):
    g = family.params.gamma
    p = np.exp(-g * t / 2.0)
    return np.array([p]), np.array([-g / 2.0 * p])


def _pd_non_markovian(family: ChannelFamily, t: float):
    g, G = family.params.gamma, family.params.Gamma
    decay = np.exp(-G * t)
    p = np.exp(-g / 2.0 * (t + (decay - 1.0) / G))
    return np.array([p]), np.array([-g / 2.0 * (1.0 - decay) * p])


def _dp_markovian(family: ChannelFamily, t: float):
    g2 = np.asarray(family.params.gamma_vec, dtype=float) ** 2
    effective = 4.0 / family.params.Gamma * (g2.sum() - g2)
    omega = np.exp(-effective * t / 2.0)
    return omega, -effective / 2.0 * omega


def _dp_non_markovian(family: ChannelFamily, t: float):
    g = np.asarray(family.params.gamma_vec, dtype=float)
    G = np.asarray(family.params.Gamma_vec, dtype=float)
    ratio2 = (g / G) ** 2
    d2 = 16.0 * (ratio2.sum() - ratio2) - 1.0

    omega, rate = np.empty(3), np.empty(3)
    for i in range(3):
        f, df = damped_cosine(G[i] * t / 2.0, d2[i])
        omega[i], rate[i] = f, df * G[i] / 2.0
        if family.dp_prefactor == 'global':
            # swap the per-axis e^{-Gamma_i t/2} for e^{-Gamma t/2}
            shift = (G[i] - family.params.Gamma) / 2.0
            scale = np.exp(shift * t)
            omega[i], rate[i] = scale * f, scale * (shift * f + rate[i])
    return omega, rate


def _rtn(family: ChannelFamily, t: float):
    g, a = family.params.gamma, family.params.a
    f, df = damped_cosine(g * t, (2.0 * a / g) ** 2 - 1.0)
    return np.array([f]), np.array([df * g])


KERNEL_MAP = {
    ('amplitude_damping', 'markovian'): _ad_markovian,
    ('amplitude_damping', 'non_markovian'): _ad_non_markovian,
    ('phase_damping', 'markovian'): _pd_markovian,
    ('phase_damping', 'non_markovian'): _pd_non_markovian,
    ('depolarizing', 'markovian'): _dp_markovian,
    ('depolarizing', 'non_markovian'): _dp_non_markovian,
    ('rtn', 'markovian'): _rtn,
    ('rtn', 'non_markovian'): _rtn,
}


def _kernel(family: ChannelFamily, t: float) -> Tuple[np.ndarray, np.ndarray]:
    t = _check_time(t)
    values, rates = KERNEL_MAP[(family.kind, family.regime)](family, t)
    worst = np.max(np.abs(values))
    if worst > 1.0 + KERNEL_TOL:
        raise NumericalFailureError(f'{family.label} kernel left [-1, 1]: {values}', time=t)
    return values, rates


def memory_kernel(family: ChannelFamily, t: float) -> np.ndarray:
    """[p] for AD/PD, [Omega_1, Omega_2, Omega_3] for DP, [Lambda] for RTN."""
    return _kernel(family, t)[0]


def memory_kernel_rate(family: ChannelFamily, t: float) -> np.ndarray:
    """Analytic time-derivative of memory_kernel."""
    return _kernel(family, t)[1]


# ─────────────────────────────
# KRAUS OPERATORS
# ─────────────────────────────

def _dp_weights(family: ChannelFamily, omega: np.ndarray, t: float) -> np.ndarray:
    """(P1, P2, P3, P4) with small negative noise clamped to zero."""
    weights = DP_MIX @ np.concatenate(([1.0], omega))
    lowest = weights.min()
    if lowest < -CP_TOL:
        raise CompletePositivityViolationError(
            f'Depolarizing weight P = {lowest:.3e} < 0; parameters break complete positivity', time=t
        )
    if lowest < 0:
        logger.debug(f'Clamping depolarizing weight {lowest:.3e} to 0 at t={t:.10g}')
    return np.clip(weights, 0.0, None)


def _ad_operators(family, values, t):
    p = values[0]
    return (
        np.array([[1, 0], [0, np.sqrt(max(p, 0.0))]], dtype=complex),
        np.array([[0, np.sqrt(max(1.0 - p, 0.0))], [0, 0]], dtype=complex),
    )


def _pd_operators(family, values, t):
    p = values[0]
    e0 = np.sqrt(max(p, 0.0)) if family.literal_pd_kraus else p
    return (
        np.array([[1, 0], [0, e0]], dtype=complex),
        np.array([[0, 0], [0, np.sqrt(max(1.0 - p * p, 0.0))]], dtype=complex),
    )


def _dp_operators(family, values, t):
    w = np.sqrt(_dp_weights(family, values, t))
    return (w[3] * I2, w[0] * PAULI_X, w[1] * PAULI_Y, w[2] * PAULI_Z)


def _rtn_operators(family, values, t):
    lam = values[0]
    return (
        np.sqrt(max((1.0 + lam) / 2.0, 0.0)) * I2,
        np.sqrt(max((1.0 - lam) / 2.0, 0.0)) * PAULI_Z,
    )


OPERATOR_MAP = {
    'amplitude_damping': _ad_operators,
    'phase_damping': _pd_operators,
    'depolarizing': _dp_operators,
    'rtn': _rtn_operators,
}


def kraus_at(family: ChannelFamily, t: float) -> KrausSet:
    values, _ = _kernel(family, t)
    ks = KrausSet(operators=tuple(OPERATOR_MAP[family.kind](family, values, t)), time=float(t))
    residual = ks.completeness_residual()
    if residual > COMPLETENESS_TOL:
        raise NumericalFailureError(
            f'{family.label} Kraus set violates completeness: ||sum E^dagger E - I|| = {residual:.3e}', time=t
        )
    return ks


def _singular(family: ChannelFamily, what: str, t: float):
    return DerivativeSingularityError(f'{family.label} Kraus derivative singular: {what}', time=t)


def kraus_derivative_at(family: ChannelFamily, t: float) -> List[np.ndarray]:
    """Time-derivatives of the Kraus operators, in the order kraus_at returns them.

    Raises DerivativeSingularityError when a kernel sits on a square-root branch point
    (always the case at t = 0); callers fall back to kraus_finite_difference there.
    """
    values, rates = _kernel(family, t)

    if family.kind == 'amplitude_damping':
        p, dp = values[0], rates[0]
        if p <= 0.0 or p >= 1.0:
            raise _singular(family, f'p = {p:.17g}', t)
        return [
            np.array([[0, 0], [0, dp / (2.0 * np.sqrt(p))]], dtype=complex),
            np.array([[0, -dp / (2.0 * np.sqrt(1.0 - p))], [0, 0]], dtype=complex),
        ]

    if family.kind == 'phase_damping':
        p, dp = values[0], rates[0]
        if p * p >= 1.0 or (family.literal_pd_kraus and p <= 0.0):
            raise _singular(family, f'p = {p:.17g}', t)
        d0 = dp / (2.0 * np.sqrt(p)) if family.literal_pd_kraus else dp
        return [
            np.array([[0, 0], [0, d0]], dtype=complex),
            np.array([[0, 0], [0, -p * dp / np.sqrt(1.0 - p * p)]], dtype=complex),
        ]

    if family.kind == 'depolarizing':
        weights = _dp_weights(family, values, t)
        if weights.min() <= 0.0:
            raise _singular(family, f'weights {weights}', t)
        d = DP_MIX[:, 1:] @ rates / (2.0 * np.sqrt(weights))
        return [d[3] * I2, d[0] * PAULI_X, d[1] * PAULI_Y, d[2] * PAULI_Z]

    lam, dlam = values[0], rates[0]
    if abs(lam) >= 1.0:
        raise _singular(family, f'Lambda = {lam:.17g}', t)
    return [
        dlam / (4.0 * np.sqrt((1.0 + lam) / 2.0)) * I2,
        -dlam / (4.0 * np.sqrt((1.0 - lam) / 2.0)) * PAULI_Z,
    ]


def kraus_finite_difference(family: ChannelFamily, t: float, scheme: str = 'central',
                            step: Optional[float] = None) -> List[np.ndarray]:
    """Finite-difference Kraus derivatives; forward whenever t < step.

    `richardson` combines central differences at h and h/2 to cancel the h^2 term.
    """
    if scheme not in FD_SCHEMES:
        raise InvalidArgumentError(f"scheme must be one of {FD_SCHEMES}, got '{scheme}'")
    h = step if step is not None else FD_STEP / family.rate
    if scheme == 'richardson' and t >= h:
        coarse = kraus_finite_difference(family, t, 'central', h)
        fine = kraus_finite_difference(family, t, 'central', h / 2.0)
        return [(4.0 * f - c) / 3.0 for f, c in zip(fine, coarse)]
    ahead = kraus_at(family, t + h).operators
    if scheme == 'central' and t >= h:
        behind = kraus_at(family, t - h).operators
        return [(a - b) / (2.0 * h) for a, b in zip(ahead, behind)]
    here = kraus_at(family, t).operators
    return [(a - b) / h for a, b in zip(ahead, here)]


# ─────────────────────────────
# CHANNEL APPLICATION
# ─────────────────────────────

def _dilate(ops: np.ndarray, noise_sides: str) -> np.ndarray:
    """Two-qubit operators from single-qubit ones of shape (..., K, 2, 2).

    E_i x I for one-sided noise, every E_i x E_j when both qubits see it.
    """
    if noise_sides == 'one':
        return kron(ops, I2)
    pairs = kron(ops[..., :, None, :, :], ops[..., None, :, :, :])
    return pairs.reshape(ops.shape[:-3] + (-1, 4, 4))


def _conjugate_sum(big: np.ndarray, rho: np.ndarray, time) -> DensityMatrix:
    # sum_k K rho K^dagger over the operator axis
    out = (big @ rho[..., None, :, :] @ dagger(big)).sum(axis=-3)
    return check_state(out, time=time)


def apply_one_sided(k: KrausSet, rho: DensityMatrix) -> DensityMatrix:
    """rho -> sum_i (E_i x I) rho (E_i x I)^dagger; the second qubit is untouched."""
    return _conjugate_sum(_dilate(k.stacked(), 'one'), np.asarray(rho, dtype=complex), k.time)


def apply_two_sided(k1: KrausSet, k2: KrausSet, rho: DensityMatrix) -> DensityMatrix:
    big = kron(k1.stacked()[:, None], k2.stacked()[None, :]).reshape(-1, 4, 4)
    return _conjugate_sum(big, np.asarray(rho, dtype=complex), k1.time)


def evolve_stack(ops: np.ndarray, rho: DensityMatrix, noise_sides: str = 'one', times=None) -> DensityMatrix:
    """Apply Kraus sets of shape (n, K, 2, 2) to one state, giving n states.

    `times` labels the rows for error reporting.
    """
    if noise_sides not in NOISE_SIDES:
        raise InvalidArgumentError(f"noise_sides must be one of {NOISE_SIDES}, got '{noise_sides}'")
    return _conjugate_sum(_dilate(np.asarray(ops, dtype=complex), noise_sides),
                          np.asarray(rho, dtype=complex), times)


def evolve(family: ChannelFamily, rho: DensityMatrix, t: float, noise_sides: str = 'one') -> DensityMatrix:
    if noise_sides not in NOISE_SIDES:
        raise InvalidArgumentError(f"noise_sides must be one of {NOISE_SIDES}, got '{noise_sides}'")
    k = kraus_at(family, t)
    if noise_sides == 'both':
        return apply_two_sided(k, k, rho)
    return apply_one_sided(k, rho)
