import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from quantum.errors import InvalidArgumentError, NotAStateError
from quantum.states import (
    BELL_STATES,
    PauliDecomposition,
    PureStateSpec,
    WernerSpec,
    bell_state,
    check_state,
    make_pure,
    make_werner,
    pauli_decompose,
    pauli_reconstruct,
)


def test_phi_plus_decomposition():
    d = pauli_decompose(bell_state('phi_plus'))
    np.testing.assert_allclose(d.r, 0, atol=1e-15)
    np.testing.assert_allclose(d.s, 0, atol=1e-15)
    np.testing.assert_allclose(d.T, np.diag([1.0, -1.0, 1.0]), atol=1e-15)


@pytest.mark.parametrize('name', sorted(BELL_STATES))
def test_bell_states_are_pure_states(name):
    rho = check_state(bell_state(name))
    assert np.trace(rho @ rho).real == pytest.approx(1.0)


def test_unknown_bell_state():
    with pytest.raises(InvalidArgumentError):
        bell_state('phi_zero')


def test_make_pure_rejects_unnormalized():
    with pytest.raises(InvalidArgumentError):
        make_pure(PureStateSpec(alpha=1.0, beta=1.0))


def test_make_pure_accepts_complex_amplitudes():
    rho = make_pure(PureStateSpec(alpha=0.6, beta=0.8j))
    assert rho[0, 3] == pytest.approx(0.6 * -0.8j)
    check_state(rho)


@pytest.mark.parametrize('p', [-0.1, 1.1])
def test_werner_weight_out_of_range(p):
    with pytest.raises(InvalidArgumentError):
        make_werner(WernerSpec(p=p))


def test_werner_endpoints():
    np.testing.assert_allclose(make_werner(WernerSpec(p=0.0)), np.eye(4) / 4)
    np.testing.assert_allclose(make_werner(WernerSpec(p=1.0, bell_index='psi_minus')), bell_state('psi_minus'))


@given(st.floats(min_value=0.0, max_value=1.0), st.sampled_from(sorted(BELL_STATES)))
@settings(max_examples=40, deadline=None)
def test_werner_correlations_scale_with_p(p, name):
    d = pauli_decompose(make_werner(WernerSpec(p=p, bell_index=name)))
    full = pauli_decompose(bell_state(name))
    np.testing.assert_allclose(d.T, p * full.T, atol=1e-14)
    np.testing.assert_allclose(d.r, 0, atol=1e-14)


def test_pauli_round_trip(rng):
    for _ in range(20):
        rho = random_density(rng)
        np.testing.assert_allclose(pauli_reconstruct(pauli_decompose(rho)), rho, atol=1e-14)


def test_reconstruct_rejects_unphysical_vectors():
    with pytest.raises(NotAStateError):
        pauli_reconstruct(PauliDecomposition(r=np.zeros(3), s=np.zeros(3), T=np.diag([1.0, 1.0, 1.0])))


def test_check_state_reports_time():
    with pytest.raises(NotAStateError) as info:
        check_state(2 * bell_state('phi_plus'), time=1.5)
    assert info.value.time == 1.5
    assert 't=1.5' in str(info.value)


def test_check_state_rejects_negative_eigenvalue():
    rho = np.diag([0.6, 0.5, 0.0, -0.1]).astype(complex)
    with pytest.raises(NotAStateError):
        check_state(rho)


def test_check_state_on_a_stack_names_the_bad_time():
    good = make_werner(WernerSpec(p=0.5))
    bad = np.diag([0.6, 0.5, 0.0, -0.1]).astype(complex)
    with pytest.raises(NotAStateError) as info:
        check_state(np.array([good, good, bad, bad]), time=np.array([0.0, 0.1, 0.2, 0.3]))
    assert info.value.time == 0.2
    assert check_state(np.array([good, good])).shape == (2, 4, 4)


def test_stacked_decomposition_matches_single_states(rng):
    rhos = np.array([random_density(rng) for _ in range(5)])
    stacked = pauli_decompose(rhos)
    assert stacked.T.shape == (5, 3, 3)
    for i, rho in enumerate(rhos):
        single = pauli_decompose(rho)
        np.testing.assert_allclose(stacked.T[i], single.T, atol=1e-15)
        np.testing.assert_allclose(stacked.r[i], single.r, atol=1e-15)
