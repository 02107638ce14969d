"""
Reduction of covariance matrices and two-mode separability.

For two modes the positive-partial-transpose test is necessary and
sufficient: the state with reduced covariance ``S`` (order
``[p_1, p_2, q_1, q_2]``) is separable iff::

    S~ = S + [[ 0, 0,  i,  0],
              [ 0, 0,  0, -i],
              [-i, 0,  0,  0],
              [ 0, i,  0,  0]]

is positive semidefinite. ``det(S~)`` and the logarithmic negativity are
reported alongside as witnesses.
"""

from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np

from . import numkit
from .core import CovarianceMatrix, is_valid_covariance, symplectic_form

__all__ = [
    "PartitionSpec",
    "EntanglementVerdict",
    "S_TILDE_SKEW",
    "partial_trace",
    "s_tilde",
    "s_tilde_partitioned",
    "det4",
    "det_witness",
    "det_indicates_entanglement",
    "det_tolerance",
    "ppt_check",
    "partial_transpose",
    "symplectic_eigenvalues",
    "log_negativity",
]

S_TILDE_SKEW = np.array([
    [0, 0, 1j, 0],
    [0, 0, 0, -1j],
    [-1j, 0, 0, 0],
    [0, 1j, 0, 0],
])
S_TILDE_SKEW.setflags(write=False)

DET_RTOL = 1e-9


@dataclass(frozen=True)
class PartitionSpec:
    """Which modes to keep and how they split into parties A and B.

    ``keep`` fixes the order of the reduced covariance; ``party_a`` and
    ``party_b`` must partition it.
    """

    d_total: int
    keep: tuple
    party_a: tuple
    party_b: tuple

    def __post_init__(self):
        keep = tuple(int(k) for k in self.keep)
        a = tuple(int(k) for k in self.party_a)
        b = tuple(int(k) for k in self.party_b)
        if self.d_total < 1:
            raise ValueError("d_total must be positive")
        if len(set(keep)) != len(keep):
            raise ValueError(f"duplicate indices in keep {keep}")
        bad = [k for k in keep if not 0 <= k < self.d_total]
        if bad:
            raise IndexError(f"mode indices {bad} out of range for d = {self.d_total}")
        if set(a) & set(b) or set(a) | set(b) != set(keep) or len(a) + len(b) != len(keep):
            raise ValueError("party_a and party_b must partition keep")
        object.__setattr__(self, "keep", keep)
        object.__setattr__(self, "party_a", a)
        object.__setattr__(self, "party_b", b)

    @classmethod
    def two_modes(cls, d_total, mode_a, mode_b):
        return cls(d_total, (mode_a, mode_b), (mode_a,), (mode_b,))


@dataclass(frozen=True)
class EntanglementVerdict:
    separable: bool
    min_eig_tilde: float
    det_tilde: float
    log_negativity: float
    valid_input: bool = True

    @property
    def entangled(self):
        return not self.separable


def _array(S):
    return S.S if isinstance(S, CovarianceMatrix) else np.asarray(S, dtype=float)


def partial_trace(S, keep):
    """Covariance of the modes in ``keep`` (a sequence or a PartitionSpec).

    Keeps rows and columns ``j`` and ``j + d`` for each kept ``j``, in the
    listed order, so the result is again in ``[p | q]`` block order.
    """
    S = _array(S)
    d = S.shape[0] // 2
    if isinstance(keep, PartitionSpec):
        if keep.d_total != d:
            raise ValueError(f"partition is for {keep.d_total} modes, covariance has {d}")
        keep = keep.keep
    keep = [int(k) for k in keep]
    bad = [k for k in keep if not 0 <= k < d]
    if bad:
        raise IndexError(f"mode indices {bad} out of range for d = {d}")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate indices in {keep}")
    idx = keep + [k + d for k in keep]
    return CovarianceMatrix(S[np.ix_(idx, idx)])


def _check_two_mode(S):
    S = _array(S)
    if S.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-mode covariance, got {S.shape}")
    return S


def s_tilde(S_red):
    """``S_red`` plus the fixed imaginary skew block (see module docstring)."""
    return _check_two_mode(S_red) + S_TILDE_SKEW


def s_tilde_partitioned(S, spec):
    """``S + i J~`` with ``J~ = diag(-J_A, J_B)`` in party-block layout.

    ``S`` is the covariance of the kept modes, ordered as ``spec.keep``. It
    is permuted to ``[p_A, q_A, p_B, q_B]`` before the skew part is added.
    For one mode per party this has the same spectrum as :func:`s_tilde`
    (the two differ by complex conjugation and a permutation).
    """
    S = _array(S)
    n = len(spec.keep)
    if S.shape != (2 * n, 2 * n):
        raise ValueError(f"covariance is {S.shape}, partition keeps {n} modes")
    pos = {m: i for i, m in enumerate(spec.keep)}
    order = []
    for party in (spec.party_a, spec.party_b):
        order += [pos[m] for m in party] + [pos[m] + n for m in party]
    P = S[np.ix_(order, order)]
    dA, dB = len(spec.party_a), len(spec.party_b)
    Jt = np.zeros((2 * n, 2 * n))
    Jt[:2 * dA, :2 * dA] = -symplectic_form(dA)
    Jt[2 * dA:, 2 * dA:] = symplectic_form(dB)
    return P + 1j * Jt


def det4(M):
    """Determinant of a 4x4 matrix by Laplace expansion along rows 0 and 1."""
    M = np.asarray(M)
    if M.shape != (4, 4):
        raise ValueError(f"expected 4x4, got {M.shape}")
    total = 0
    for j, k in combinations(range(4), 2):
        rest = [c for c in range(4) if c not in (j, k)]
        top = M[0, j] * M[1, k] - M[0, k] * M[1, j]
        bottom = M[2, rest[0]] * M[3, rest[1]] - M[2, rest[1]] * M[3, rest[0]]
        total += (-1) ** (1 + j + k) * top * bottom
    return total


def det_witness(S_red):
    """``det(S~)``; real because ``S~`` is Hermitian."""
    return float(np.real(det4(s_tilde(S_red))))


def det_tolerance(S_red):
    """Dead band ``DET_RTOL * max(1, ||S||_F)^3`` for the sign of ``det(S~)``.

    A determinant with one eigenvalue of order ``DET_RTOL`` and the others of
    order ``||S||`` sits at this scale; the cubic (rather than quartic) power
    keeps the band below genuinely negative values when ``||S||`` is large,
    while staying far above the rounding error ``~ eps * ||S||^4``.
    """
    return DET_RTOL * max(1.0, float(np.linalg.norm(_array(S_red)))) ** 3


def det_indicates_entanglement(det, S_red):
    """Strict negativity of ``det(S~)`` beyond its dead band."""
    return det < -det_tolerance(S_red)


def partial_transpose(S, party_b=(1,)):
    """Flip the sign of the momenta of the modes in ``party_b``."""
    S = _array(S)
    flip = np.ones(S.shape[0])
    flip[list(party_b)] = -1.0
    return S * np.outer(flip, flip)


def symplectic_eigenvalues(S):
    """Symplectic spectrum (ascending, one per mode) from ``|eig(J^-1 S)|``."""
    S = _array(S)
    d = S.shape[0] // 2
    J = symplectic_form(d)
    # J^-1 = -J
    w = np.sort(np.abs(numkit.eigenvalues_general(-J @ S).eigenvalues))
    return w[::2]


def log_negativity(S_red, party_b=(1,)):
    """Natural-log negativity ``sum max(0, -ln nu~)`` of the partial transpose."""
    S = _check_two_mode(S_red)
    nu = symplectic_eigenvalues(partial_transpose(S, party_b))
    return float(sum(max(0.0, -math.log(v)) for v in nu))


def ppt_check(S_red, dead_band=numkit.PSD_RTOL):
    """Separability verdict of a two-mode Gaussian state.

    ``S~`` counts as PSD when its smallest eigenvalue is at least
    ``-dead_band * max(1, ||S~||_F)``. Invalid covariances are still
    classified, but ``valid_input`` is False.
    """
    if not dead_band >= 0:
        raise ValueError(f"dead_band must be non-negative, got {dead_band}")
    S = _check_two_mode(S_red)
    St = S + S_TILDE_SKEW
    lam = numkit.hermitian_min_eigenvalue(St)
    separable = lam >= -dead_band * max(1.0, float(np.linalg.norm(St)))
    return EntanglementVerdict(
        separable=bool(separable),
        min_eig_tilde=lam,
        det_tilde=float(np.real(det4(St))),
        log_negativity=log_negativity(S),
        valid_input=is_valid_covariance(S).valid,
    )
