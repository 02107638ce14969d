"""
Two coupled modes (1, 2) with one of them (1) coupled to a thermal mode 0.

Mode order is ``(0, 1, 2)``, so the covariance is in
``[p0, p1, p2, q0, q1, q2]`` order and the bipartite system is kept by
dropping rows/columns 0 and 3. The mode frequency is normalised to 1.

Parameters are the squeezing strength ``kappa``, the system-bath coupling
``g`` and the bath temperature through ``beta_tilde = coth(beta / 2)``.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.optimize

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
)

__all__ = [
    "SingleNoiseParams",
    "KEEP",
    "KAPPA_CROSSOVER",
    "CLOSED_FORM_ERRATA",
    "single_noise_generator",
    "single_noise_system",
    "single_noise_char_poly_factors",
    "single_noise_stability",
    "single_noise_stability_margin",
    "closed_form_matrix",
    "single_noise_closed_form",
    "single_noise_reduced_closed_form",
    "reduced_s_tilde_char_poly",
    "reduced_det_closed_form",
    "stability_bound_g2",
    "determinant_bound_g2",
    "bound_crossover_kappa",
    "beta_star",
    "beta_tilde_threshold",
    "single_noise_entangled_region",
    "single_noise_entangled",
    "heuristic_beta_tilde",
    "appendix_b_values",
    "appendix_b_inequalities",
    "single_noise_point",
]

KEEP = (1, 2)

# |kappa| at which the stability bound and the determinant bound on g^2 cross
KAPPA_CROSSOVER = math.sqrt((5 - math.sqrt(13)) / 2)


@dataclass(frozen=True)
class SingleNoiseParams:
    kappa: float
    g: float
    beta_tilde: float

    def __post_init__(self):
        object.__setattr__(self, "kappa", check_scalar(self.kappa, "kappa"))
        object.__setattr__(self, "g", check_nonzero(self.g, "g"))
        object.__setattr__(self, "beta_tilde", check_beta_tilde(
            check_scalar(self.beta_tilde, "beta_tilde")))

    @property
    def zero_temperature(self):
        return self.beta_tilde == 1.0

    @property
    def delta(self):
        return 1.0 - self.kappa**2


def single_noise_generator(p):
    """GKLS data of the model.

    ``L1 = sqrt((bt+1)/2) a0``, ``L2 = sqrt((bt-1)/2) a0^+``; the Hamiltonian
    couples 0-1 with strength ``g/2`` and 1-2 with ``1/2``. The squeezing
    entries of ``Kappa`` are ``kappa/2`` on modes 1 and 2, the normalisation
    under which :func:`build_drift_diffusion` reproduces the drift of
    :func:`single_noise_system`.
    """
    down, up = thermal_noise_rates(p.beta_tilde)
    Omega = np.zeros((3, 3))
    Omega[0, 1] = Omega[1, 0] = p.g / 2
    Omega[1, 2] = Omega[2, 1] = 0.5
    Kappa = np.diag([0.0, p.kappa / 2, p.kappa / 2])
    V = np.zeros((2, 3))
    U = np.zeros((2, 3))
    V[0, 0] = down
    U[1, 0] = up
    return GklsGenerator(Omega=Omega, Kappa=Kappa, U=U, V=V)


def _drift(kappa, g):
    k = kappa
    return 0.5 * np.array([
        [-1, 0, 0, 0, -g, 0],
        [0, 0, 0, -g, k, -1],
        [0, 0, 0, 0, -1, k],
        [0, g, 0, -1, 0, 0],
        [g, k, 1, 0, 0, 0],
        [0, 1, k, 0, 0, 0],
    ], dtype=float)


def single_noise_system(p, cross_check=True):
    """The 6x6 drift and diffusion of the model.

    The hard-coded matrices are compared entrywise with the ones derived
    from :func:`single_noise_generator`; any disagreement raises
    :class:`ModelInconsistency` listing the offending entries.
    """
    Z = _drift(p.kappa, p.g)
    C = np.diag([p.beta_tilde, 0, 0, p.beta_tilde, 0, 0])
    if cross_check:
        ref = build_drift_diffusion(single_noise_generator(p))
        bad = _entrywise_mismatch(Z, ref.Z) + _entrywise_mismatch(C, ref.C)
        if bad:
            raise ModelInconsistency(f"single-noise matrices disagree at {bad}")
    return DriftDiffusion(Z, C)


def single_noise_char_poly_factors(kappa, g):
    """The two cubic factors of ``det(lambda - Z)`` (highest power first)."""
    a = (1 - kappa**2 + g**2) / 4
    return (
        np.array([1.0, 0.5, a, (1 - kappa**2 - g**2 * kappa) / 8]),
        np.array([1.0, 0.5, a, (1 - kappa**2 + g**2 * kappa) / 8]),
    )


def single_noise_stability(kappa, g):
    """Stable iff ``kappa = 0`` or ``0 < |kappa| < 1`` and ``g^2 |kappa| < 1 - kappa^2``."""
    kappa = check_scalar(kappa, "kappa")
    g = check_nonzero(g, "g")
    if kappa == 0:
        return True
    return abs(kappa) < 1 and g * g * abs(kappa) < 1 - kappa**2


def single_noise_stability_margin(kappa, g):
    """Distance of ``(kappa, g^2)`` from the stability boundary.

    Minimum of ``1 - |kappa|`` and ``|g^2 - (1 - kappa^2)/|kappa||``; used to
    keep grid checks away from the boundary.
    """
    if kappa == 0:
        return math.inf
    return min(abs(1 - abs(kappa)), abs(g * g - (1 - kappa**2) / abs(kappa)))


# (row, col): (as printed, as confirmed by the Lyapunov solve)
CLOSED_FORM_ERRATA = {
    (4, 0): ("g k^2 (d - g^2)", "g k^2 (d - g^2 k^2)"),
    (1, 4): ("k (d - g^2 k^2 (g^2 + k^2))", "k (d - g^2 k^2 (1 + g^2))"),
    (4, 1): ("k (d - g^2 k^2 (k^2 + g^2))", "k (d - g^2 k^2 (1 + g^2))"),
}


def closed_form_matrix(kappa, g, printed=False):
    """Bracketed 6x6 matrix of the closed-form stationary covariance.

    With ``printed=True`` the three entries listed in
    :data:`CLOSED_FORM_ERRATA` keep their typeset form, which is neither
    symmetric nor a solution of the Lyapunov equation.
    """
    k, d = kappa, 1 - kappa**2
    g2, k2 = g * g, kappa * kappa
    a = d - g2  # recurring factors
    b = d - g2 * k2
    M = np.array([
        [d**3 + g2 * k2 * a, g * k**3 * a, g * k2 * a, -g2 * k**3 * a, g * k2 * b, -g * k * b],
        [g * k**3 * a, d - g2 * k2 * (g2 + k2), k * b, -g * k2 * b, k * (d - g2 * k2 * (1 + g2)), -k2 * a],
        [g * k2 * a, k * b, b, -g * k * b, k2 * (1 - k2 - g2), -k * (1 - k2 - g2)],
        [-g2 * k**3 * a, -g * k2 * b, -g * k * b, d**3 + g2 * k2 * a, -g * k**3 * a, g * k2 * a],
        [g * k2 * b, k * (d - g2 * k2 * (1 + g2)), k2 * a, -g * k**3 * a, d - g2 * k2 * (g2 + k2), -k * b],
        [-g * k * b, -k2 * a, -k * a, g * k2 * a, -k * b, b],
    ])
    if printed:
        M[4, 0] = g * k2 * a
        M[1, 4] = M[4, 1] = k * (d - g2 * k2 * (g2 + k2))
    return M


def _require_stable(kappa, g):
    if not single_noise_stability(kappa, g):
        raise ValueError(f"unstable parameters kappa={kappa}, g={g}")


def single_noise_closed_form(p, printed=False):
    """Closed-form 6x6 stationary covariance (requires stability)."""
    _require_stable(p.kappa, p.g)
    d = p.delta
    pref = p.beta_tilde / (d**3 - p.kappa**2 * d * p.g**4)
    M = pref * closed_form_matrix(p.kappa, p.g, printed=printed)
    if printed:
        return M
    return CovarianceMatrix(M)


def single_noise_reduced_closed_form(p):
    """Closed-form 4x4 covariance of modes 1 and 2 (requires stability)."""
    _require_stable(p.kappa, p.g)
    k, g2 = p.kappa, p.g**2
    k2 = k * k
    d = 1 - k2
    diag_p = d - g2 * k2 * (g2 + k2)
    diag_q = d - g2 * k2
    a = k * (d - g2 * k2)
    b = k * d - g2 * k**3 * (1 + g2)
    c = k2 * (d - g2)
    e = k * (d - g2)
    f = k * (1 - k2 * (1 + g2))
    M = np.array([
        [diag_p, a, b, -c],
        [a, diag_q, c, -e],
        [b, c, diag_p, -f],
        [-c, -e, -f, diag_q],
    ])
    return CovarianceMatrix(p.beta_tilde / (d * (d * d - g2 * g2 * k2)) * M)


def reduced_s_tilde_char_poly(p):
    """Closed-form characteristic polynomial of ``S~_red`` (highest first)."""
    k2, g2, bt = p.kappa**2, p.g**2, p.beta_tilde
    g4 = g2 * g2
    d = 1 - k2
    e = d * d - g4 * k2  # (1-k^2)^2 - g^4 k^2 == 1 - (2+g^4)k^2 + k^4
    c3 = -2 * bt * (2 * d - g2 * k2 * (1 + k2 + g2)) / (d * e)
    c2 = (bt**2 * (6 - (2 + g2) ** 2 * k2 + (g4 - 2) * k2 * k2)
          - 2 * d * d * e) / (d * d * e)
    c1 = -bt * (2 * bt**2 * (2 - g2 * k2)
                + 2 * d * (g2 * k2 * k2 + (g4 + g2 + 2) * k2 - 2)) / (d * d * e)
    c0 = reduced_det_closed_form(p)
    return np.array([1.0, c3, c2, c1, c0])


def reduced_det_closed_form(p):
    """Closed-form ``det(S~_red)``; a quadratic in ``beta_tilde^2``."""
    k2, g4, bt2 = p.kappa**2, p.g**4, p.beta_tilde**2
    d = 1 - k2
    e = d * d - g4 * k2
    return (bt2 * bt2 - d * (2 + 2 * k2 - g4 * k2) * bt2 + d * d * e) / (d * d * e)


def stability_bound_g2(kappa):
    """``(1 - kappa^2) / |kappa|``."""
    return (1 - kappa**2) / abs(kappa)


def determinant_bound_g2(kappa):
    """``sqrt(max(4(1-k^2)^2 - k^6, 0)) / (|k| sqrt(1-k^2))``.

    Below it, ``det(S~_red)`` is negative at ``beta_tilde = 1``.
    """
    d = 1 - kappa**2
    return math.sqrt(max(4 * d * d - kappa**6, 0.0)) / (abs(kappa) * math.sqrt(d))


def bound_crossover_kappa():
    """Root in ``(0.5, 0.839)`` of ``stability_bound_g2 - determinant_bound_g2``.

    Found numerically; agrees with :data:`KAPPA_CROSSOVER`.
    """
    return scipy.optimize.brentq(
        lambda k: stability_bound_g2(k) - determinant_bound_g2(k),
        0.5, 0.839, xtol=1e-15, rtol=1e-15,
    )


def single_noise_entangled_region(kappa, g):
    """Whether some temperature gives an entangled stationary state.

    True iff ``g != 0``, ``0 < |kappa| < 1`` and ``g^2`` is below both
    :func:`stability_bound_g2` and :func:`determinant_bound_g2`.
    """
    kappa = check_scalar(kappa, "kappa")
    g = check_nonzero(g, "g")
    if not 0 < abs(kappa) < 1:
        return False
    g2 = g * g
    return g2 < stability_bound_g2(kappa) and g2 < determinant_bound_g2(kappa)


def beta_star(kappa, g):
    """``(1-k^2)(1 + k^2 + |k| sqrt(16 - g^4 k^2 (4 - g^4)) / 2 - g^4 k^2 / 2)``.

    This is the larger root, in the variable ``beta_tilde**2``, of the
    numerator of :func:`reduced_det_closed_form`; the entanglement threshold
    on ``beta_tilde`` itself is its square root (:func:`beta_tilde_threshold`).
    """
    if not single_noise_entangled_region(kappa, g):
        raise ValueError(f"(kappa={kappa}, g={g}) admits no entangled stationary state")
    return _beta_star_expr(kappa, g)


def _beta_star_expr(kappa, g):
    k2, g4 = kappa**2, g**4
    return (1 - k2) * (1 + k2 + 0.5 * abs(kappa) * math.sqrt(16 - g4 * k2 * (4 - g4)) - g4 * k2 / 2)


def beta_tilde_threshold(kappa, g):
    """Entangled iff ``1 <= beta_tilde < beta_tilde_threshold(kappa, g)``."""
    return math.sqrt(beta_star(kappa, g))


def single_noise_entangled(kappa, g, beta_tilde):
    """Analytic entanglement predicate for one parameter point."""
    if not single_noise_entangled_region(kappa, g):
        return False
    return beta_tilde * beta_tilde < _beta_star_expr(kappa, g)


def heuristic_beta_tilde(kappa):
    """A temperature choice ``1 + |k|(1 - |k|)/4`` below the threshold at small g."""
    return 1 + abs(kappa) * (1 - abs(kappa)) / 4


def appendix_b_values(kappa, g, beta_tilde):
    """Left-hand sides of the three coefficient inequalities.

    In order: the ``beta_tilde^2`` part of the ``lambda^2`` coefficient, the
    polynomial ``4 + (2-g^2)^2 k^2 - (3g^4+14) k^4 + 2(g^4+4) k^6 - 2 k^8``,
    and the bracket of the ``lambda`` coefficient.
    """
    k2, g2 = kappa**2, g * g
    g4 = g2 * g2
    first = 6 - (2 + g2) ** 2 * k2 + (g4 - 2) * k2 * k2
    second = 4 + (2 - g2) ** 2 * k2 - (3 * g4 + 14) * k2**2 + 2 * (g4 + 4) * k2**3 - 2 * k2**4
    third = (2 * beta_tilde**2 * (2 - g2 * k2)
             + 2 * (1 - k2) * (g2 * k2 * k2 + (g4 + g2 + 2) * k2 - 2))
    return first, second, third


def appendix_b_inequalities(kappa, g, beta_tilde):
    """Positivity flags of :func:`appendix_b_values`.

    Only defined for ``|kappa| < 1``, ``beta_tilde > 1`` and
    ``0 < g^2 < (1 - kappa^2)/|kappa|``.
    """
    if not abs(kappa) < 1 or not beta_tilde > 1 or g == 0:
        raise ValueError("parameters outside |kappa| < 1, beta_tilde > 1, g != 0")
    if kappa != 0 and not g * g < stability_bound_g2(kappa):
        raise ValueError("g^2 must be below (1 - kappa^2)/|kappa|")
    return tuple(v > 0 for v in appendix_b_values(kappa, g, beta_tilde))


def single_noise_point(kappa, g, beta_tilde, dead_band=numkit.PSD_RTOL):
    """Full numerical pipeline plus the analytic predicate at one point."""
    p = SingleNoiseParams(kappa, g, beta_tilde)
    analytic = single_noise_entangled(p.kappa, p.g, p.beta_tilde)
    return analyse_system(single_noise_system(p), keep=KEEP, analytic=analytic,
                          dead_band=dead_band)
