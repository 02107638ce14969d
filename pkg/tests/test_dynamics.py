import numpy as np
import pytest

from gqms.core import GaussianState, evolve_state, is_valid_covariance, stationary_covariance
from gqms.entanglement import partial_trace, ppt_check
from gqms.models.single_noise import SingleNoiseParams, single_noise_system
from gqms.models.two_noise import TwoNoiseParams, two_noise_system

POINT = SingleNoiseParams(0.5, 0.1, 1.05)


def _verdict(state):
    return ppt_check(partial_trace(state.cov, (1, 2)))


@pytest.fixture(scope="module")
def system():
    dd = single_noise_system(POINT)
    return dd, stationary_covariance(dd).S


def test_vacuum_start_is_separable():
    assert _verdict(GaussianState.vacuum(3)).separable


def test_convergence_needs_long_times(system):
    # slowest decay rate here is about 7e-4, so t = 2e4 is ~14 e-folds
    dd, S = system
    state = evolve_state(GaussianState.vacuum(3), dd, 2e4)
    assert np.abs(state.cov.S - S).max() < 1e-6
    errors = [np.abs(evolve_state(GaussianState.vacuum(3), dd, t).cov.S - S).max()
              for t in (200, 1000, 5000, 10000)]
    assert errors == sorted(errors, reverse=True)


def test_entanglement_is_born_and_persists(system):
    dd, _ = system
    ts = np.concatenate([np.linspace(0.0, 5.0, 51), np.geomspace(5.0, 2e4, 60)])
    flags = [_verdict(evolve_state(GaussianState.vacuum(3), dd, t)).entangled for t in ts]
    assert not flags[0]
    t0 = ts[flags.index(True)]
    assert 0 < t0 <= 1.0
    assert all(flags[flags.index(True):])


def test_trajectory_stays_physical(system):
    dd, _ = system
    for t in np.geomspace(0.01, 1e4, 25):
        assert is_valid_covariance(evolve_state(GaussianState.vacuum(3), dd, t).cov)


def test_mean_decays_without_linear_drive():
    dd = two_noise_system(TwoNoiseParams(1.0, 1.0, 1.2, 1.5))
    s0 = GaussianState(np.arange(8.0), np.eye(8))
    assert np.abs(evolve_state(s0, dd, 200.0).mean).max() < 1e-12


def test_kappa_zero_relaxes_to_thermal():
    dd = single_noise_system(SingleNoiseParams(0.0, 1.0, 1.7))
    out = evolve_state(GaussianState.vacuum(3), dd, 400.0)
    np.testing.assert_allclose(out.cov.S, 1.7 * np.eye(6), atol=1e-8)
    assert _verdict(out).separable
