import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gqms.core import CovarianceMatrix, is_valid_covariance, stationary_covariance, symplectic_form
from gqms.entanglement import (
    PartitionSpec,
    det4,
    det_indicates_entanglement,
    det_witness,
    log_negativity,
    partial_trace,
    partial_transpose,
    ppt_check,
    s_tilde,
    s_tilde_partitioned,
    symplectic_eigenvalues,
)
from gqms.models.single_noise import SingleNoiseParams, single_noise_system
from gqms.models.two_noise import TwoNoiseParams, two_noise_k0_det, two_noise_system
from helpers import random_valid_covariance

seeds = st.integers(0, 2**32 - 1)

# [p1, p2, q1, q2] covariance of a two-mode squeezed vacuum with squeezing r
def tmsv(r):
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    return np.array([[c, -s, 0, 0], [-s, c, 0, 0], [0, 0, c, s], [0, 0, s, c]])


def local_rotation(rng):
    """Independent phase rotations of the two modes, as a [p|q] block matrix."""
    a, b = rng.uniform(0, 2 * np.pi, size=2)
    c, s = np.diag([np.cos(a), np.cos(b)]), np.diag([np.sin(a), np.sin(b)])
    return np.block([[c, -s], [s, c]])


def random_two_mode(seed):
    S = random_valid_covariance(np.random.default_rng(seed), 2)
    return 0.5 * (S + S.T)


class TestPartialTrace:
    def test_keep_all_is_identity(self):
        S = random_two_mode(1)
        np.testing.assert_array_equal(partial_trace(S, (0, 1)).S, S)

    def test_selects_rows_and_columns(self):
        S = np.arange(64, dtype=float).reshape(8, 8)
        S = S + S.T
        R = partial_trace(S, (1, 2)).S
        np.testing.assert_array_equal(R, S[np.ix_([1, 2, 5, 6], [1, 2, 5, 6])])

    def test_errors(self):
        with pytest.raises(IndexError):
            partial_trace(np.eye(6), (0, 3))
        with pytest.raises(ValueError):
            partial_trace(np.eye(6), (1, 1))
        with pytest.raises(ValueError):
            partial_trace(np.eye(6), PartitionSpec.two_modes(4, 0, 1))

    @given(seeds)
    def test_reduced_state_is_valid(self, seed):
        S = random_valid_covariance(np.random.default_rng(seed), 3)
        assert is_valid_covariance(partial_trace(0.5 * (S + S.T), (2, 0)))


class TestPartitionSpec:
    def test_two_modes(self):
        spec = PartitionSpec.two_modes(3, 1, 2)
        assert (spec.keep, spec.party_a, spec.party_b) == ((1, 2), (1,), (2,))

    def test_validation(self):
        with pytest.raises(IndexError):
            PartitionSpec(2, (0, 2), (0,), (2,))
        with pytest.raises(ValueError):
            PartitionSpec(3, (0, 1), (0,), (0,))
        with pytest.raises(ValueError):
            PartitionSpec(3, (0, 1, 1), (0,), (1,))


class TestWitnesses:
    def test_vacuum_is_boundary_separable(self):
        v = ppt_check(np.eye(4))
        assert v.separable and v.valid_input
        assert v.min_eig_tilde == pytest.approx(0.0, abs=1e-14)
        assert v.det_tilde == pytest.approx(0.0, abs=1e-14)
        assert v.log_negativity == 0.0

    @pytest.mark.parametrize("b", [1.0, 1.5, 3.0])
    def test_thermal(self, b):
        v = ppt_check(b * np.eye(4))
        assert v.separable
        assert v.min_eig_tilde == pytest.approx(b - 1)
        assert v.det_tilde == pytest.approx((b * b - 1) ** 2)
        assert det_witness(b * np.eye(4)) == pytest.approx((b * b - 1) ** 2)

    @pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
    def test_two_mode_squeezed_vacuum(self, r):
        S = tmsv(r)
        v = ppt_check(S)
        assert v.entangled
        assert v.log_negativity == pytest.approx(2 * r, rel=1e-10)
        assert v.min_eig_tilde == pytest.approx(math.exp(-2 * r) - 1, abs=1e-12)
        assert det_indicates_entanglement(v.det_tilde, S)

    def test_single_noise_point(self):
        # mpmath at 40 digits from the printed reduced covariance
        S = partial_trace(stationary_covariance(single_noise_system(
            SingleNoiseParams(0.5, 0.1, 1.05))), (1, 2))
        v = ppt_check(S)
        assert v.entangled
        assert v.det_tilde == pytest.approx(-1.6917876350060002667, rel=1e-9)
        assert v.log_negativity == pytest.approx(0.21283043549483951555, rel=1e-9)
        nu = symplectic_eigenvalues(partial_transpose(S))
        np.testing.assert_allclose(nu, [0.80829318343074628942, 2.4249165985641343146], rtol=1e-9)

    def test_two_noise_kappa_zero_det(self):
        S = partial_trace(stationary_covariance(two_noise_system(
            TwoNoiseParams(0.0, 0.8, 1.3, 2.1))), (1, 2))
        assert det_witness(S) == pytest.approx(two_noise_k0_det(0.8, 1.3, 2.1), rel=1e-9)
        assert ppt_check(S).separable

    def test_invalid_input_is_flagged(self):
        v = ppt_check(0.5 * np.eye(4))
        assert not v.valid_input and v.entangled

    def test_errors(self):
        with pytest.raises(ValueError):
            ppt_check(np.eye(6))
        with pytest.raises(ValueError):
            ppt_check(np.eye(4), dead_band=-1.0)
        with pytest.raises(ValueError):
            det4(np.eye(3))

    def test_dead_band_flips_a_marginal_state(self):
        S = tmsv(1e-8)
        assert ppt_check(S, dead_band=0.0).entangled
        assert ppt_check(S, dead_band=1e-6).separable


class TestProperties:
    @given(seeds)
    def test_det4_matches_lapack(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert det4(M) == pytest.approx(np.linalg.det(M), rel=1e-10, abs=1e-12)

    @given(seeds)
    def test_partitioned_form_has_same_spectrum(self, seed):
        S = random_two_mode(seed)
        a = np.linalg.eigvalsh(s_tilde(S))
        b = np.linalg.eigvalsh(s_tilde_partitioned(S, PartitionSpec.two_modes(2, 0, 1)))
        np.testing.assert_allclose(a, b, atol=1e-10 * max(1, np.abs(a).max()))

    @given(seeds)
    def test_local_rotations_leave_witnesses_unchanged(self, seed):
        S = random_two_mode(seed)
        R = local_rotation(np.random.default_rng(seed + 1))
        T = R.T @ S @ R
        v, w = ppt_check(S), ppt_check(0.5 * (T + T.T))
        scale = max(1.0, np.abs(S).max()) ** 4
        assert v.separable == w.separable
        assert v.det_tilde == pytest.approx(w.det_tilde, abs=1e-9 * scale)
        assert v.log_negativity == pytest.approx(w.log_negativity, abs=1e-9)

    @given(seeds)
    def test_witnesses_agree_away_from_boundary(self, seed):
        S = random_two_mode(seed)
        v = ppt_check(S)
        if abs(v.min_eig_tilde) < 1e-6:
            return
        assert (v.min_eig_tilde < 0) == (v.det_tilde < 0) == (v.log_negativity > 0)

    @given(seeds)
    def test_product_states_are_separable(self, seed):
        rng = np.random.default_rng(seed)
        A, B = (random_valid_covariance(rng, 1) for _ in range(2))
        S = np.zeros((4, 4))
        S[np.ix_([0, 2], [0, 2])] = A
        S[np.ix_([1, 3], [1, 3])] = B
        v = ppt_check(0.5 * (S + S.T))
        assert v.separable and v.log_negativity == 0.0

    @given(seeds)
    def test_symplectic_spectrum_of_valid_state(self, seed):
        S = random_two_mode(seed)
        nu = symplectic_eigenvalues(S)
        assert np.all(nu >= 1 - 1e-9)
        # product of symplectic eigenvalues squared is det S
        assert np.prod(nu) ** 2 == pytest.approx(np.linalg.det(S), rel=1e-8)


def test_symplectic_form_convention():
    # S~ adds i diag(-J_A, J_B) in party layout
    spec = PartitionSpec.two_modes(2, 0, 1)
    Jt = s_tilde_partitioned(np.zeros((4, 4)), spec).imag
    J1 = symplectic_form(1)
    np.testing.assert_array_equal(Jt[:2, :2], -J1)
    np.testing.assert_array_equal(Jt[2:, 2:], J1)
    assert CovarianceMatrix(np.eye(4)).d == 2
