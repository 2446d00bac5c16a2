import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FAMILIES, random_density, random_unitary
from quantum.errors import InvalidArgumentError
from quantum.linalg import PAULI_Y
from quantum.measures import (
    Thresholds,
    bell_chsh,
    concurrence,
    correlation_singular_values,
    evaluate_measures,
    qsl_bound,
    qsl_time,
    steering,
    teleportation_fidelity,
)
from quantum.states import PauliDecomposition, PureStateSpec, WernerSpec, bell_state, make_pure, make_werner, pauli_reconstruct

SQRT2 = np.sqrt(2.0)


def brute_force_concurrence(rho):
    yy = np.kron(PAULI_Y, PAULI_Y)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(r).real)[::-1], 0, None))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def test_phi_plus_measures():
    mv = evaluate_measures(bell_state('phi_plus'))
    assert mv.fidelity == pytest.approx(1.0)
    assert mv.n_value == pytest.approx(3.0)
    assert mv.bell == pytest.approx(2 * SQRT2)
    assert mv.s2 == pytest.approx(1.0)
    assert mv.s3 == pytest.approx(1.0)
    assert mv.concurrence == pytest.approx(1.0, abs=1e-8)


def test_product_state_measures():
    rho = make_pure(PureStateSpec(alpha=1.0, beta=0.0))
    fidelity, n_value = teleportation_fidelity(rho)
    assert n_value == pytest.approx(1.0)
    assert fidelity == pytest.approx(2 / 3)
    assert bell_chsh(rho) == pytest.approx(2.0)
    assert steering(rho, 2) == 0.0
    assert steering(rho, 3) == 0.0
    assert concurrence(rho) == pytest.approx(0.0, abs=1e-8)


@given(st.floats(min_value=0.0, max_value=np.pi / 2), st.floats(min_value=0.0, max_value=2 * np.pi))
@settings(max_examples=50, deadline=None)
def test_pure_state_concurrence(theta, phase):
    alpha, beta = np.cos(theta), np.sin(theta) * np.exp(1j * phase)
    rho = make_pure(PureStateSpec(alpha=alpha, beta=beta))
    assert concurrence(rho) == pytest.approx(2 * abs(alpha * beta), abs=1e-8)


@given(st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=50, deadline=None)
def test_werner_closed_forms(p):
    mv = evaluate_measures(make_werner(WernerSpec(p=p)))
    assert mv.concurrence == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-8)
    assert mv.bell == pytest.approx(2 * SQRT2 * p, abs=1e-12)
    assert mv.fidelity == pytest.approx((1 + p) / 2, abs=1e-12)
    assert mv.s3 == pytest.approx(max(0.0, (np.sqrt(3) * p - 1) / (np.sqrt(3) - 1)), abs=1e-12)


def test_werner_p_09():
    mv = evaluate_measures(make_werner(WernerSpec(p=0.9)))
    assert mv.concurrence == pytest.approx(0.85, abs=1e-9)
    assert mv.bell == pytest.approx(2.5456, abs=1e-4)
    assert mv.fidelity == pytest.approx(0.95)


def test_concurrence_matches_brute_force(rng):
    for _ in range(100):
        rho = random_density(rng)
        assert concurrence(rho) == pytest.approx(brute_force_concurrence(rho), abs=1e-9)


def test_entangled_random_states_are_found(rng):
    # mix Phi+ into random states so the oracle comparison also covers C > 0
    for _ in range(50):
        rho = 0.3 * random_density(rng) + 0.7 * bell_state('phi_plus')
        c = concurrence(rho)
        assert c > 0
        assert c == pytest.approx(brute_force_concurrence(rho), abs=1e-9)


def test_local_unitary_invariance(rng):
    for _ in range(50):
        rho = random_density(rng)
        u = np.kron(random_unitary(rng), random_unitary(rng))
        before = evaluate_measures(rho).as_dict()
        after = evaluate_measures(u @ rho @ u.conj().T).as_dict()
        for key, value in before.items():
            if value is not None:
                assert after[key] == pytest.approx(value, abs=1e-10), key


@given(st.integers(min_value=0, max_value=2**32 - 1), st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=100, deadline=None)
def test_pointwise_hierarchy(seed, weight):
    rng = np.random.default_rng(seed)
    rho = weight * bell_state('phi_plus') + (1 - weight) * random_density(rng)
    mv = evaluate_measures(rho)
    th = Thresholds()
    tol = 1e-9
    if mv.fidelity > th.f_lhv + tol:
        assert mv.bell > th.bell_classical
    if mv.bell > th.bell_classical + tol:
        assert mv.s2 > 0
    if mv.s2 > tol:
        assert mv.s3 > 0
    if mv.s3 > tol:
        assert mv.fidelity > th.f_classical
    if mv.fidelity > th.f_classical + tol:
        assert mv.concurrence > 0


def test_bell_and_two_setting_steering_share_threshold(rng):
    for _ in range(50):
        rho = random_density(rng)
        mv = evaluate_measures(0.5 * rho + 0.5 * bell_state('psi_minus'))
        assert (mv.bell > 2) == (mv.s2 > 0)


def test_singular_values_descending():
    u = correlation_singular_values(np.array([[0.1, 0.0, 0.0], [0.0, -0.7, 0.0], [0.0, 0.0, 0.3]]))
    np.testing.assert_allclose(u, [0.7, 0.3, 0.1])


def test_steering_modes():
    rho = bell_state('phi_plus')
    assert steering(rho, 3, 'eigenvalues') == pytest.approx(steering(rho, 3))
    with pytest.raises(InvalidArgumentError):
        steering(rho, 4)
    with pytest.raises(InvalidArgumentError):
        steering(rho, 2, 'trace')


def test_eigenvalue_steering_needs_symmetric_t():
    T = np.array([[0.2, 0.1, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    rho = pauli_reconstruct(PauliDecomposition(r=np.zeros(3), s=np.zeros(3), T=T))
    with pytest.raises(InvalidArgumentError):
        steering(rho, 2, 'eigenvalues')
    evaluate_measures(rho)


# ─────────────────────────────
# QUANTUM SPEED LIMIT
# ─────────────────────────────

def test_qsl_degenerate_at_zero():
    bound = qsl_bound(FAMILIES['ad_nm'], bell_state('phi_plus'), 0.0)
    assert bound.degenerate
    assert bound.tau == 0.0


@pytest.mark.parametrize('name', ['ad_m', 'pd_m'])
def test_qsl_monotone_for_markovian_damping(name):
    rho0 = bell_state('phi_plus')
    tau = np.array([qsl_time(FAMILIES[name], rho0, t) for t in np.linspace(0.0, 15.0, 301)[1:]])
    assert np.all(np.diff(tau) >= -1e-10)
    assert np.all(tau > 0)


@pytest.mark.parametrize('options', [
    {'generator': 'symmetrized'},
    {'denominator_mode': 'time_averaged'},
    {'noise_sides': 'both'},
])
def test_qsl_variants_are_finite(options):
    bound = qsl_bound(FAMILIES['ad_nm'], bell_state('phi_plus'), 3.0, **options)
    assert not bound.degenerate
    assert 0 < bound.tau < np.inf
    assert 0 < bound.theta <= np.pi / 2


@pytest.mark.parametrize('options', [
    {'generator': 'lindblad'},
    {'denominator_mode': 'average'},
    {'noise_sides': 'three'},
])
def test_qsl_bad_options(options):
    with pytest.raises(InvalidArgumentError):
        qsl_bound(FAMILIES['ad_m'], bell_state('phi_plus'), 1.0, **options)
