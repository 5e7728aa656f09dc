import numpy as np
import pytest

from anlab.acceptance import FIG2_HS, FIG2_LAMBDA, FIG2_MU_B, FIG2_MU_E, FIG2_RATE, random_link
from anlab.analytics import SecrecyScenario
from anlab.beamformer import build_basis
from anlab.channel import fixed_main_channel
from anlab.correlation import from_spectrum


@pytest.fixture(scope="session")
def fig2():
    corr = from_spectrum(FIG2_LAMBDA)
    h = fixed_main_channel(np.array(FIG2_HS), corr).h
    return corr, h, build_basis(h, corr)


@pytest.fixture
def fig2_scenario(fig2):
    corr, h, _ = fig2

    def make(alpha=0.5, mu_e=FIG2_MU_E, rate=FIG2_RATE, mu_b=FIG2_MU_B):
        return SecrecyScenario(corr, rate, mu_b, mu_e, h=h, alpha=alpha)

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def link(rng):
    def make(n):
        return random_link(rng, n)
    return make
