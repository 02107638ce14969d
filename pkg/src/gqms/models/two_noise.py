"""
Two coupled modes (1, 2), each attached to its own thermal mode (0 and 3).

Mode order is ``(0, 1, 2, 3)``; the covariance is in
``[p0, p1, p2, p3, q0, q1, q2, q3]`` order and the bipartite system is
modes 1 and 2. The baths have temperatures ``beta0_tilde`` and
``beta3_tilde``; with both equal to ``b`` and ``kappa = 1`` the
entanglement region is known in closed form.
"""

from dataclasses import dataclass
import math

import numpy as np

from .. import numkit
from ..core import (
    CovarianceMatrix,
    DriftDiffusion,
    GklsGenerator,
    build_drift_diffusion,
    thermal_noise_rates,
)
from ..validation import check_nonzero, check_scalar
from .common import (
    ModelInconsistency,
    _entrywise_mismatch,
    analyse_system,
    check_beta_tilde,
    hurwitz_quartic_stable,
)

__all__ = [
    "TwoNoiseParams",
    "KEEP",
    "B_LOW",
    "B_HIGH",
    "two_noise_generator",
    "two_noise_system",
    "two_noise_quartic",
    "two_noise_stability",
    "two_noise_stability_hurwitz",
    "two_noise_k0_closed_form",
    "two_noise_k0_char_poly",
    "two_noise_k0_det",
    "two_noise_k1_closed_form",
    "two_noise_k1_char_poly",
    "two_noise_k1_det_limit",
    "big_g_condition",
    "equal_temp_det",
    "equal_temp_det_factors",
    "equal_temp_b_bound",
    "equal_temp_g2_bounds",
    "two_noise_equal_temp_region",
    "appendix_a_decomposition",
    "two_noise_point",
    "equal_temp_point",
]

KEEP = (1, 2)

# edges of the equal-temperature regimes at kappa = 1
B_LOW = (1 + math.sqrt(3)) / 2
B_HIGH = 1 + math.sqrt(2)


@dataclass(frozen=True)
class TwoNoiseParams:
    kappa: float
    g: float
    beta0_tilde: float
    beta3_tilde: float

    def __post_init__(self):
        object.__setattr__(self, "kappa", check_scalar(self.kappa, "kappa"))
        object.__setattr__(self, "g", check_nonzero(self.g, "g"))
        for name in ("beta0_tilde", "beta3_tilde"):
            v = check_beta_tilde(check_scalar(getattr(self, name), name), name)
            object.__setattr__(self, name, v)


def two_noise_generator(p):
    """GKLS data: baths on modes 0 and 3, couplings 0-1 and 2-3 of strength g/2.

    Squeezing entries of ``Kappa`` are ``kappa/2`` on modes 1 and 2 (see
    :func:`gqms.models.single_noise.single_noise_generator`).
    """
    d0, u0 = thermal_noise_rates(p.beta0_tilde)
    d3, u3 = thermal_noise_rates(p.beta3_tilde)
    Omega = np.zeros((4, 4))
    Omega[0, 1] = Omega[1, 0] = p.g / 2
    Omega[1, 2] = Omega[2, 1] = 0.5
    Omega[2, 3] = Omega[3, 2] = p.g / 2
    Kappa = np.diag([0.0, p.kappa / 2, p.kappa / 2, 0.0])
    V = np.zeros((4, 4))
    U = np.zeros((4, 4))
    V[0, 0], U[1, 0] = d0, u0
    V[2, 3], U[3, 3] = d3, u3
    return GklsGenerator(Omega=Omega, Kappa=Kappa, U=U, V=V)


def _drift(kappa, g):
    k = kappa
    return 0.5 * np.array([
        [-1, 0, 0, 0, 0, -g, 0, 0],
        [0, 0, 0, 0, -g, k, -1, 0],
        [0, 0, 0, 0, 0, -1, k, -g],
        [0, 0, 0, -1, 0, 0, -g, 0],
        [0, g, 0, 0, -1, 0, 0, 0],
        [g, k, 1, 0, 0, 0, 0, 0],
        [0, 1, k, g, 0, 0, 0, 0],
        [0, 0, g, 0, 0, 0, 0, -1],
    ], dtype=float)


def _diffusion(b0, b3):
    return np.diag([b0, 0, 0, b3, b0, 0, 0, b3]).astype(float)


def two_noise_system(p, cross_check=True):
    """The 8x8 drift and diffusion, cross-checked against the generator."""
    Z = _drift(p.kappa, p.g)
    C = _diffusion(p.beta0_tilde, p.beta3_tilde)
    if cross_check:
        ref = build_drift_diffusion(two_noise_generator(p))
        bad = _entrywise_mismatch(Z, ref.Z) + _entrywise_mismatch(C, ref.C)
        if bad:
            raise ModelInconsistency(f"two-noise matrices disagree at {bad}")
    return DriftDiffusion(Z, C)


def two_noise_quartic(kappa, g):
    """Quartic whose square is ``det(lambda - Z)``: ``(1, a3, a2, a1, a0)``."""
    k2, g2 = kappa**2, g * g
    return np.array([1.0, 1.0, (2 * (1 + g2) - k2) / 4, (1 - k2 + g2) / 4,
                     (1 - k2 + g2 * g2) / 16])


def two_noise_stability(kappa, g):
    """Stable iff ``kappa^2 < min(1 + g^4, 2)``."""
    kappa = check_scalar(kappa, "kappa")
    g = check_nonzero(g, "g")
    return kappa**2 < min(1 + g**4, 2.0)


def two_noise_stability_hurwitz(kappa, g):
    """Routh-Hurwitz conditions applied to :func:`two_noise_quartic`."""
    check_nonzero(g, "g")
    return hurwitz_quartic_stable(two_noise_quartic(kappa, g))


def _k0_pattern(g):
    g2 = g * g
    return np.array([
        [-(1 - g2), 0, 0, -(1 + g2)],
        [0, 1 - g2, 1 + g2, 0],
        [0, 1 + g2, -(1 - g2), 0],
        [-(1 + g2), 0, 0, 1 - g2],
    ])


def two_noise_k0_closed_form(g, beta0_tilde, beta3_tilde):
    """Reduced covariance of modes 1, 2 at ``kappa = 0``.

    Mean temperature times the identity, plus a correction proportional to
    the temperature difference.
    """
    g = check_nonzero(g, "g")
    s, dlt = beta0_tilde + beta3_tilde, beta0_tilde - beta3_tilde
    M = s / 2 * np.eye(4) + dlt * g * g / (4 * (1 + g**4)) * _k0_pattern(g)
    return CovarianceMatrix(M)


def two_noise_k0_det(g, beta0_tilde, beta3_tilde):
    """Closed-form ``det(S~_red)`` at ``kappa = 0``."""
    s, dlt, g4 = beta0_tilde + beta3_tilde, beta0_tilde - beta3_tilde, g**4
    return ((s * s / 4 - 1) ** 2
            + dlt**2 * g4 / (16 * (1 + g4))
            * ((g4 * dlt**2 + 32 * g * g) / (4 * (1 + g4)) - s * s))


def two_noise_k0_char_poly(g, beta0_tilde, beta3_tilde):
    """Closed-form characteristic polynomial of ``S~_red`` at ``kappa = 0``."""
    s, dlt, g4 = beta0_tilde + beta3_tilde, beta0_tilde - beta3_tilde, g**4
    r = dlt**2 * g4 / (4 * (1 + g4))
    return np.array([
        1.0,
        -2 * s,
        1.5 * s * s - 2 - r,
        s * (r - s * s / 2 + 2),
        two_noise_k0_det(g, beta0_tilde, beta3_tilde),
    ])


def two_noise_k1_closed_form(p):
    """Reduced covariance of modes 1, 2 at ``kappa = 1``, with ``gh = (1+g^2)/g^4``."""
    if p.kappa != 1:
        raise ValueError(f"closed form needs kappa = 1, got {p.kappa}")
    g2 = p.g**2
    gh = (1 + g2) / (g2 * g2)
    b0, b3 = p.beta0_tilde, p.beta3_tilde
    s, dlt = b0 + b3, b0 - b3
    diag_a = (2 + gh) * s + dlt  # -(b3 - b0)
    diag_b = (2 + gh) * s - dlt
    o = (1 + gh) * s
    M = np.array([
        [diag_a, o, 2 * g2 * gh * b0, -g2 * gh * dlt],
        [o, diag_b, g2 * gh * dlt, 2 * g2 * gh * b3],
        [2 * g2 * gh * b0, g2 * gh * dlt, diag_a, -o],
        [-g2 * gh * dlt, 2 * g2 * gh * b3, -o, diag_b],
    ])
    return CovarianceMatrix(M / 2)


def two_noise_k1_char_poly(g, beta0_tilde, beta3_tilde):
    """Closed-form characteristic polynomial of ``S~_red`` at ``kappa = 1``."""
    g2 = g * g
    g4, g8 = g2 * g2, g2**4
    s, pr = beta0_tilde + beta3_tilde, beta0_tilde * beta3_tilde
    w = 1 + g2 + 2 * g4
    c3 = -2 * s * w / g4
    c2 = ((7 * g8 + 4 * g4 * g2 + 9 * g4 + 4 * g2 + 2) * s * s / (2 * g8)
          + 2 * pr * (3 * g4 + 4 * g2 + 2) / g4 - 2)
    c1 = -w / (2 * g8) * (s**3 * (1 + g4) + 4 * g4 * (pr - 1) * s)
    c0 = (s**4 * (1 + g4) ** 2 / (16 * g8)
          - (2 + 4 * g2 + 5 * g4 + 3 * g8) * s * s / (2 * g8)
          + pr * s * s * (1 + g4) / (2 * g4)
          - 2 * pr * (2 + 4 * g2 + g4) / g4
          + 1 + pr * pr)
    return np.array([1.0, c3, c2, c1, c0])


def two_noise_k1_det_limit(beta0_tilde, beta3_tilde):
    """Limit of ``det(S~_red)`` as ``g^2 -> infinity`` at ``kappa = 1``."""
    s, pr = beta0_tilde + beta3_tilde, beta0_tilde * beta3_tilde
    return (s * s / 4 + pr - 1) ** 2 - s * s


def big_g_condition(beta0_tilde, beta3_tilde):
    """``2(b0 + b3 - 1)^2 - (b0 - b3)^2 < 6``: large ``g`` entangles at ``kappa = 1``."""
    return 2 * (beta0_tilde + beta3_tilde - 1) ** 2 - (beta0_tilde - beta3_tilde) ** 2 < 6


def equal_temp_det(b, g):
    """``det(S~_red)`` at ``kappa = 1`` and ``beta0_tilde = beta3_tilde = b``."""
    g2 = g * g
    g4, g8 = g2 * g2, g2**4
    return (b**4 * (2 * g4 + 1) ** 2
            - 2 * b * b * (4 * g8 + 4 * g4 * g2 + 7 * g4 + 4 * g2 + 2) + g8) / g8


def equal_temp_det_factors(b, g):
    """The two quadratic-in-``g^2`` factors whose product is ``g^8 * equal_temp_det``.

    The first is positive for ``b >= 1``; the sign of the second decides.
    """
    g2 = g * g
    g4 = g2 * g2
    return ((2 * b * b + 2 * b - 1) * g4 + 2 * b * g2 + b * b + 2 * b,
            (2 * b * b - 2 * b - 1) * g4 - 2 * b * g2 + b * b - 2 * b)


def equal_temp_b_bound(g):
    """Largest ``b`` for which coupling ``g`` gives an entangled state."""
    g2 = g * g
    g4 = g2 * g2
    a = 1 + g2 + g4
    return (a + math.sqrt(a * a + g4 * (1 + 2 * g4))) / (1 + 2 * g4)


def equal_temp_g2_bounds(b):
    """Roots in ``g^2`` of the deciding factor, ``(lower, upper)``.

    Only meaningful for ``(1+sqrt3)/2 < b < 1+sqrt2``; raises otherwise.
    """
    den = 2 * b * b - 2 * b - 1
    disc = 2 * b * (b - 1) * (-b * b + 2 * b + 1)
    if not (den > 0 and disc >= 0):
        raise ValueError(f"b = {b} is outside ((1+sqrt3)/2, 1+sqrt2)")
    r = math.sqrt(disc)
    return (b - r) / den, (b + r) / den


def two_noise_equal_temp_region(b, g):
    """Entanglement at ``kappa = 1`` with equal bath temperatures ``b``."""
    b = check_scalar(b, "b", low=1.0)
    g = check_nonzero(g, "g")
    g2 = g * g
    if b <= B_LOW:
        return True
    if b >= B_HIGH:
        return False
    lo, hi = equal_temp_g2_bounds(b)
    if b <= 2:
        return g2 < hi
    return lo < g2 < hi


def appendix_a_decomposition(kappa, g):
    """Covariances ``S1`` and ``S_delta`` with unit and opposite bath temperatures.

    ``S = (b0 + b3)/2 * S1 + (b0 - b3)/2 * S_delta`` for any temperatures,
    by linearity of the Lyapunov equation in ``C``.
    """
    if not two_noise_stability(kappa, g):
        raise ValueError(f"unstable parameters kappa={kappa}, g={g}")
    Z = _drift(kappa, g)
    S1 = numkit.solve_lyapunov(Z, _diffusion(1.0, 1.0))
    Sd = numkit.solve_lyapunov(Z, _diffusion(1.0, -1.0))
    return S1, Sd


def two_noise_point(kappa, g, beta0_tilde, beta3_tilde, dead_band=numkit.PSD_RTOL):
    """Numerical pipeline at one point; analytic verdict where a closed form exists."""
    p = TwoNoiseParams(kappa, g, beta0_tilde, beta3_tilde)
    analytic = None
    if p.kappa == 0:
        analytic = False
    elif p.kappa == 1 and p.beta0_tilde == p.beta3_tilde and p.beta0_tilde > 1:
        analytic = two_noise_equal_temp_region(p.beta0_tilde, p.g)
    return analyse_system(two_noise_system(p), keep=KEEP, analytic=analytic,
                          dead_band=dead_band)


def equal_temp_point(g, b, dead_band=numkit.PSD_RTOL):
    """Pipeline at ``kappa = 1`` and equal temperatures ``b``."""
    return two_noise_point(1.0, g, b, b, dead_band=dead_band)
