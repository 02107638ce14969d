"""Pieces shared by the single- and two-noise models."""

from dataclasses import dataclass
import warnings

import numpy as np

from .. import numkit
from ..core import NoStationaryState, stability_check, stationary_covariance
from ..entanglement import EntanglementVerdict, partial_trace, ppt_check

__all__ = [
    "ModelInconsistency",
    "RegionVerdict",
    "hurwitz_cubic_stable",
    "hurwitz_quartic_stable",
    "analyse_system",
    "check_beta_tilde",
]

# entries of the hard-coded and generator-derived matrices must agree this closely
CROSS_CHECK_ATOL = 1e-12


class ModelInconsistency(RuntimeError):
    """Two construction paths of the same model disagree."""


@dataclass(frozen=True)
class RegionVerdict:
    """Outcome of the numerical pipeline at one parameter point.

    ``entangled`` and ``witnesses`` are None unless the point is stable and
    the Lyapunov solve succeeded. ``status`` is ``ok``, ``unstable`` or
    ``solver_failed``.
    """

    stable: bool
    entangled: bool = None
    witnesses: EntanglementVerdict = None
    analytic_entangled: bool = None
    status: str = "ok"
    max_real_eig: float = float("nan")

    def __post_init__(self):
        if self.entangled is not None and not self.stable:
            raise ValueError("an unstable point cannot carry an entanglement verdict")


def hurwitz_cubic_stable(c):
    """Routh-Hurwitz for ``c0 x^3 + c1 x^2 + c2 x + c3`` with ``c0 > 0``."""
    c0, c1, c2, c3 = (float(v) for v in c)
    return c0 > 0 and c1 > 0 and c3 > 0 and c1 * c2 - c0 * c3 > 0


def hurwitz_quartic_stable(a):
    """Routh-Hurwitz for the monic ``x^4 + a3 x^3 + a2 x^2 + a1 x + a0``.

    ``a`` is ``(1, a3, a2, a1, a0)``.
    """
    one, a3, a2, a1, a0 = (float(v) for v in a)
    if one != 1:
        a3, a2, a1, a0 = a3 / one, a2 / one, a1 / one, a0 / one
    return (
        min(a3, a2, a1, a0) > 0
        and a3 * a2 > a1
        and a3 * a2 * a1 > a3 * a3 * a0 + a1 * a1
    )


def check_beta_tilde(value, name="beta_tilde"):
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    if value == 1:
        warnings.warn(f"{name} = 1 is the zero-temperature limit", stacklevel=3)
    return float(value)


def analyse_system(dd, keep=(1, 2), analytic=None, dead_band=numkit.PSD_RTOL):
    """Stability, stationary covariance, reduction and PPT verdict."""
    report = stability_check(dd.Z)
    max_re = report.max_real_part
    if not report.stable:
        return RegionVerdict(stable=False, analytic_entangled=analytic,
                             status="unstable", max_real_eig=max_re)
    try:
        S = stationary_covariance(dd)
    except (numkit.LinAlgFailure, NoStationaryState):
        return RegionVerdict(stable=True, analytic_entangled=analytic,
                             status="solver_failed", max_real_eig=max_re)
    verdict = ppt_check(partial_trace(S, keep), dead_band=dead_band)
    return RegionVerdict(
        stable=True,
        entangled=verdict.entangled,
        witnesses=verdict,
        analytic_entangled=analytic,
        status="ok",
        max_real_eig=max_re,
    )


def _entrywise_mismatch(A, B, atol=CROSS_CHECK_ATOL):
    diff = np.abs(np.asarray(A) - np.asarray(B))
    return [(int(i), int(j), float(diff[i, j])) for i, j in zip(*np.nonzero(diff > atol))]
