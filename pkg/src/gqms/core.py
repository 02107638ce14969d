"""
Gaussian GKLS generators, their drift/diffusion pair, and Gaussian states.

Conventions used throughout the package:

* A complex vector ``z = x + i y`` in ``C^d`` is the real vector ``[x, y]``
  in ``R^{2d}``; ``Re<z, w>`` is then the Euclidean product.
* Covariance matrices are stored in ``[p_1 .. p_d | q_1 .. q_d]`` block
  order with ``S[j, j] = 2 <p_j^2>`` and ``S[j+d, j+d] = 2 <q_j^2>``, so the
  vacuum is the identity.
* The adjoint ``Z#`` with respect to ``Re<., .>`` is the plain transpose of
  the real ``2d x 2d`` drift matrix.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import numkit
from .validation import check_hermitian, check_symmetric, check_square_real

__all__ = [
    "NoStationaryState",
    "GklsGenerator",
    "DriftDiffusion",
    "CovarianceMatrix",
    "GaussianState",
    "StabilityReport",
    "ValidityReport",
    "symplectic_form",
    "beta_tilde_from_beta",
    "beta_from_beta_tilde",
    "thermal_noise_rates",
    "build_drift_diffusion",
    "real_linear_to_matrix",
    "matrix_to_real_linear",
    "complex_to_real",
    "real_to_complex",
    "stability_check",
    "is_valid_covariance",
    "stationary_covariance",
    "evolve_state",
    "weyl_evolution_factor",
    "weyl_ccr_phase",
    "covariance_from_moments",
    "moments_from_covariance",
]

# stable means max Re(lambda) < -STABILITY_ATOL * max(1, ||Z||)
STABILITY_ATOL = 1e-12


class NoStationaryState(ValueError):
    """The drift matrix is not stable, so no unique invariant state exists."""

    def __init__(self, eigenvalues, message=None):
        self.eigenvalues = np.asarray(eigenvalues)
        worst = self.eigenvalues[np.argmax(self.eigenvalues.real)]
        super().__init__(message or f"drift is not stable: eigenvalue {worst:.6g}")


def symplectic_form(d):
    """``J = [[0, 1_d], [-1_d, 0]]``, the real form of multiplication by -i."""
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = np.eye(d)
    J[d:, :d] = -np.eye(d)
    return J


def beta_tilde_from_beta(beta):
    """``coth(beta / 2)`` for inverse temperature ``beta > 0``."""
    if beta <= 0:
        raise ValueError(f"inverse temperature must be positive, got {beta}")
    return 1.0 / math.tanh(beta / 2.0)


def beta_from_beta_tilde(beta_tilde):
    if beta_tilde <= 1:
        raise ValueError(f"beta_tilde must exceed 1, got {beta_tilde}")
    return 2.0 * math.atanh(1.0 / beta_tilde)


def thermal_noise_rates(beta_tilde):
    """Square-root rates ``(sqrt(e^b/(e^b-1)), sqrt(1/(e^b-1)))`` of a bath.

    Written in terms of ``beta_tilde = coth(b/2)``: the squares are
    ``(beta_tilde + 1)/2`` and ``(beta_tilde - 1)/2``, which also covers the
    zero-temperature limit ``beta_tilde = 1``.
    """
    if beta_tilde < 1:
        raise ValueError(f"beta_tilde must be >= 1, got {beta_tilde}")
    return math.sqrt((beta_tilde + 1) / 2), math.sqrt((beta_tilde - 1) / 2)


@dataclass(frozen=True)
class GklsGenerator:
    """Matrices of a quadratic GKLS generator on ``d`` modes.

    The Hamiltonian is ``sum Omega_jk a_j^+ a_k + K_jk/2 a_j^+ a_k^+ + h.c.``
    plus a linear part from ``zeta``; noise operator ``l`` is
    ``L_l = sum_k conj(V_lk) a_k + U_lk a_k^+``.
    """

    Omega: np.ndarray
    Kappa: np.ndarray
    U: np.ndarray
    V: np.ndarray
    zeta: np.ndarray = None

    def __post_init__(self):
        Om = check_hermitian(self.Omega, "Omega", atol=1e-12)
        d = Om.shape[0]
        K = np.array(self.Kappa, dtype=complex)
        if K.shape != (d, d):
            raise ValueError(f"Kappa must be {d}x{d}, got {K.shape}")
        if np.linalg.norm(K - K.T) > 1e-12:
            raise ValueError("Kappa must be symmetric")
        U = np.atleast_2d(np.array(self.U, dtype=complex))
        V = np.atleast_2d(np.array(self.V, dtype=complex))
        if U.shape != V.shape or U.shape[1] != d:
            raise ValueError(f"U {U.shape} and V {V.shape} must both be m x {d}")
        if not 1 <= U.shape[0] <= 2 * d:
            raise ValueError(f"noise count m = {U.shape[0]} outside [1, {2 * d}]")
        zeta = np.zeros(d, complex) if self.zeta is None else np.array(self.zeta, complex)
        if zeta.shape != (d,):
            raise ValueError(f"zeta must have length {d}")
        for name, value in (("Omega", Om), ("Kappa", K), ("U", U), ("V", V), ("zeta", zeta)):
            if not np.all(np.isfinite(value)):
                raise ValueError(f"{name} has non-finite entries")
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def d(self):
        return self.Omega.shape[0]

    @property
    def m(self):
        return self.U.shape[0]


@dataclass(frozen=True)
class DriftDiffusion:
    """Real drift ``Z`` and diffusion ``C`` (both ``2d x 2d``)."""

    Z: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        Z = check_square_real(self.Z, "Z")
        C = check_symmetric(self.C, "C", atol=1e-10)
        if Z.shape != C.shape or Z.shape[0] % 2:
            raise ValueError(f"Z {Z.shape} and C {C.shape} must be equal and even-sized")
        Z.setflags(write=False)
        C.setflags(write=False)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "C", C)

    @property
    def d(self):
        return self.Z.shape[0] // 2


@dataclass(frozen=True)
class CovarianceMatrix:
    """A symmetric ``2d x 2d`` covariance in ``[p | q]`` block order.

    Validity (``S - iJ >= 0``) is not enforced here; ask
    :func:`is_valid_covariance`.
    """

    S: np.ndarray

    def __post_init__(self):
        S = check_symmetric(self.S, "S", atol=1e-12, rtol=1e-12)
        if S.shape[0] % 2:
            raise ValueError(f"covariance must be even-sized, got {S.shape}")
        S.setflags(write=False)
        object.__setattr__(self, "S", S)

    @property
    def d(self):
        return self.S.shape[0] // 2

    def __array__(self, dtype=None, copy=None):
        return np.array(self.S, dtype=dtype)


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: CovarianceMatrix

    def __post_init__(self):
        cov = self.cov if isinstance(self.cov, CovarianceMatrix) else CovarianceMatrix(self.cov)
        mean = np.asarray(self.mean, dtype=float).copy()
        if mean.shape != (2 * cov.d,):
            raise ValueError(f"mean must have length {2 * cov.d}")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def vacuum(cls, d):
        return cls(np.zeros(2 * d), CovarianceMatrix(np.eye(2 * d)))


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def max_real_part(self):
        return float(self.eigenvalues.real.max())


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    min_eigenvalue: float

    def __bool__(self):
        return self.valid


def real_linear_to_matrix(S1, S2):
    """Real ``2d x 2d`` matrix of ``z -> S1 z + S2 conj(z)``."""
    S1 = np.asarray(S1, dtype=complex)
    S2 = np.asarray(S2, dtype=complex)
    if S1.ndim != 2 or S1.shape != S2.shape or S1.shape[0] != S1.shape[1]:
        raise ValueError(f"S1 {S1.shape} and S2 {S2.shape} must be equal square")
    return np.block([
        [S1.real + S2.real, S2.imag - S1.imag],
        [S1.imag + S2.imag, S1.real - S2.real],
    ])


def matrix_to_real_linear(M):
    """Inverse of :func:`real_linear_to_matrix`; returns ``(S1, S2)``."""
    M = check_square_real(M, "M")
    if M.shape[0] % 2:
        raise ValueError(f"need an even dimension, got {M.shape[0]}")
    d = M.shape[0] // 2
    S11, S12, S21, S22 = M[:d, :d], M[:d, d:], M[d:, :d], M[d:, d:]
    S1 = (S11 + S22) / 2 + 1j * (S21 - S12) / 2
    S2 = (S11 - S22) / 2 + 1j * (S12 + S21) / 2
    return S1, S2


def complex_to_real(z):
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag])


def real_to_complex(v):
    v = np.asarray(v, dtype=float)
    d = v.shape[0] // 2
    return v[:d] + 1j * v[d:]


def build_drift_diffusion(gen):
    """Drift and diffusion matrices of a GKLS generator.

    With ``A = U - conj(V)`` and ``B = U + conj(V)``::

        Z = 1/2 [[Re A*B, Im A*A], [-Im B*B, Re B*A]]
            + [[-Im(Om + K), Re(K - Om)], [Re(Om + K), Im(K - Om)]]
        C = [[Re B*B, Im B*A], [-Im A*B, Re A*A]]
    """
    if not isinstance(gen, GklsGenerator):
        raise TypeError("expected a GklsGenerator")
    A = gen.U - gen.V.conj()
    B = gen.U + gen.V.conj()
    AhB = A.conj().T @ B
    AhA = A.conj().T @ A
    BhB = B.conj().T @ B
    BhA = B.conj().T @ A
    Om, K = gen.Omega, gen.Kappa
    Z = 0.5 * np.block([[AhB.real, AhA.imag], [-BhB.imag, BhA.real]])
    Z = Z + np.block([
        [-(Om + K).imag, (K - Om).real],
        [(Om + K).real, (K - Om).imag],
    ])
    C = np.block([[BhB.real, BhA.imag], [-AhB.imag, AhA.real]])
    return DriftDiffusion(Z, 0.5 * (C + C.T))


def stability_check(Z, atol=STABILITY_ATOL):
    """Eigenvalue test for ``max Re(lambda) < -atol * max(1, ||Z||)``."""
    Z = np.asarray(Z.Z if isinstance(Z, DriftDiffusion) else Z, dtype=float)
    spec = numkit.eigenvalues_general(Z)
    bound = -atol * max(1.0, float(np.linalg.norm(Z)))
    return StabilityReport(stable=spec.max_real_part < bound, eigenvalues=spec.eigenvalues)


def _cov_array(S):
    if isinstance(S, CovarianceMatrix):
        return S.S
    return check_symmetric(S, "S", atol=1e-12, rtol=1e-12)


def is_valid_covariance(S):
    """Uncertainty-principle check ``S - iJ >= 0`` with the PSD dead band."""
    S = _cov_array(S)
    H = S - 1j * symplectic_form(S.shape[0] // 2)
    lam = numkit.hermitian_min_eigenvalue(H)
    tol = numkit.PSD_RTOL * max(1.0, float(np.linalg.norm(S)))
    return ValidityReport(valid=lam >= -tol, min_eigenvalue=lam)


def stationary_covariance(dd):
    """Covariance of the unique invariant Gaussian state.

    Raises
    ------
    NoStationaryState
        if the drift is not stable; carries the eigenvalues.
    gqms.numkit.LinAlgFailure
        if the Lyapunov solve fails its residual check.
    """
    report = stability_check(dd.Z)
    if not report.stable:
        raise NoStationaryState(report.eigenvalues)
    return CovarianceMatrix(numkit.solve_lyapunov(dd.Z, dd.C))


def evolve_state(state, dd, t, zeta=None):
    """Gaussian state after time ``t`` under the semigroup.

    ``mu_t = e^{tZ^T} mu - int_0^t e^{sZ^T} zeta ds`` and
    ``S_t = e^{tZ^T} S e^{tZ} + int_0^t e^{sZ^T} C e^{sZ} ds``.
    ``zeta`` is the real ``2d`` form of the linear Hamiltonian part.
    """
    if t < 0:
        raise ValueError(f"negative time {t}")
    if t == 0:
        return state
    n = dd.Z.shape[0]
    if state.mean.shape != (n,):
        raise ValueError("state and generator have different mode counts")
    G, E = numkit.gramian_integral(dd.Z, dd.C, t)
    S_t = E.T @ state.cov.S @ E + G
    mu_t = E.T @ state.mean
    if zeta is not None and np.any(zeta):
        drift_int, _ = numkit.exp_integral(dd.Z.T, t)
        mu_t = mu_t - drift_int @ np.asarray(zeta, dtype=float)
    return GaussianState(mu_t, CovarianceMatrix(0.5 * (S_t + S_t.T)))


def weyl_evolution_factor(z, t, dd, zeta=None):
    """Exponent of ``T_t(W(z)) = exp(a + i b) W(e^{tZ} z)``.

    Returns ``(a, b, e^{tZ} z)`` with
    ``a = -1/2 int_0^t Re<e^{sZ}z, C e^{sZ}z> ds <= 0`` and
    ``b = int_0^t Re<zeta, e^{sZ}z> ds``. ``z`` and ``zeta`` are complex
    ``d``-vectors.
    """
    if t < 0:
        raise ValueError(f"negative time {t}")
    zr = complex_to_real(z)
    if zr.shape[0] != dd.Z.shape[0]:
        raise ValueError("z has the wrong length")
    G, E = numkit.gramian_integral(dd.Z, dd.C, t)
    log_amplitude = -0.5 * float(zr @ G @ zr)
    phase = 0.0
    if zeta is not None and np.any(zeta):
        I_, _ = numkit.exp_integral(dd.Z, t)
        phase = float(complex_to_real(zeta) @ I_ @ zr)
    return log_amplitude, phase, real_to_complex(E @ zr)


def weyl_ccr_phase(z, w):
    """Phase ``-Im<z, w>`` in ``W(z) W(w) = e^{-i Im<z,w>} W(z + w)``."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if z.shape != w.shape:
        raise ValueError(f"length mismatch {z.shape} vs {w.shape}")
    return -float(np.vdot(z, w).imag)


def covariance_from_moments(pp, qq, pq):
    """Covariance from second moments of a zero-mean state.

    ``pp[j, k] = <p_j p_k>``, ``qq[j, k] = <q_j q_k>`` and
    ``pq[j, k] = <{p_j, q_k}>`` (anticommutator).
    """
    pp, qq, pq = (np.asarray(a, dtype=float) for a in (pp, qq, pq))
    return CovarianceMatrix(np.block([[2 * pp, -pq], [-pq.T, 2 * qq]]))


def moments_from_covariance(S):
    """Inverse of :func:`covariance_from_moments`."""
    S = _cov_array(S)
    d = S.shape[0] // 2
    return S[:d, :d] / 2, S[d:, d:] / 2, -S[:d, d:]

