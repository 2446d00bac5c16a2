"""
Shared fixtures: seeded generators, random states and unitaries, shipped channel families.
"""

from pathlib import Path

import numpy as np
import pytest

from app.models import RunConfig
from quantum.channels import ChannelFamily, ChannelParams

CONFIG_DIR = Path(__file__).resolve().parent.parent / 'configs'

FAMILIES = {
    'ad_m': ChannelFamily('amplitude_damping', 'markovian', ChannelParams(gamma=1.0)),
    'ad_nm': ChannelFamily('amplitude_damping', 'non_markovian', ChannelParams(gamma=1.0, Gamma=0.1)),
    'pd_m': ChannelFamily('phase_damping', 'markovian', ChannelParams(gamma=1.0)),
    'pd_nm': ChannelFamily('phase_damping', 'non_markovian', ChannelParams(gamma=1.0, Gamma=0.1)),
    'dp_m': ChannelFamily('depolarizing', 'markovian', ChannelParams(gamma_vec=(0.2, 0.2, 0.2), Gamma=1.0)),
    'dp_nm': ChannelFamily('depolarizing', 'non_markovian',
                           ChannelParams(gamma_vec=(0.2, 0.2, 5.0), Gamma_vec=(1.0, 1.0, 1.0))),
    'rtn_m': ChannelFamily('rtn', 'markovian', ChannelParams(gamma=1.0, a=0.25)),
    'rtn_nm': ChannelFamily('rtn', 'non_markovian', ChannelParams(gamma=1.0, a=40.0)),
}


def random_density(rng: np.random.Generator) -> np.ndarray:
    """Full-rank state from a complex Ginibre matrix."""
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, n: int = 2) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def load_config(name: str, **update) -> RunConfig:
    config = RunConfig.from_file(CONFIG_DIR / f'{name}.json')
    if update:
        config = RunConfig.model_validate({**config.model_dump(), **update})
    return config


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=sorted(FAMILIES))
def family(request):
    return FAMILIES[request.param]


@pytest.fixture
def config_dir():
    return CONFIG_DIR
