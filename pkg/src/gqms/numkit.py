"""
Dense linear algebra for the small matrices met in Gaussian open systems.

Everything here works on plain ``numpy`` arrays of dimension at most 16.
Real matrices are ``float64`` arrays and complex ones ``complex128``; no
wrapper types are introduced. The routines fall in three groups:

* spectra: :func:`eigenvalues_general`, :func:`hermitian_min_eigenvalue`,
  :func:`polynomial_roots_real_coeffs`, :func:`characteristic_polynomial`;
* exponentials and integrals: :func:`expm`, :func:`gramian_integral`,
  :func:`exp_integral`, :func:`stationary_integral_oracle`;
* the Lyapunov solve :func:`solve_lyapunov`.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg

__all__ = [
    "LinAlgFailure",
    "HorizonExceeded",
    "Spectrum",
    "PSD_RTOL",
    "psd_tolerance",
    "eigenvalues_general",
    "characteristic_polynomial",
    "expm",
    "solve_lyapunov",
    "lyapunov_residual",
    "stationary_integral_oracle",
    "gramian_integral",
    "exp_integral",
    "real_embedding",
    "hermitian_min_eigenvalue",
    "is_psd",
    "pivoted_cholesky_psd",
    "polynomial_roots_real_coeffs",
]

MAX_DIM = 16

# relative dead band below zero inside which a Hermitian matrix still counts as PSD
PSD_RTOL = 1e-9


class LinAlgFailure(ArithmeticError):
    """A numerical routine could not produce a result it can vouch for."""


class HorizonExceeded(LinAlgFailure):
    """Quadrature horizon grew past its cap before the tail bound was met."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a general real matrix.

    ``eigenvalues`` are sorted by real part, then imaginary part. ``converged``
    is False when complex eigenvalues could not be paired with their
    conjugates within the requested tolerance.
    """

    eigenvalues: np.ndarray
    converged: bool

    @property
    def max_real_part(self):
        return float(self.eigenvalues.real.max())


def _square(M, name="matrix", dtype=float):
    A = np.asarray(M, dtype=dtype)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def psd_tolerance(H):
    """Absolute dead band ``PSD_RTOL * max(1, ||H||_F)``."""
    return PSD_RTOL * max(1.0, float(np.linalg.norm(H)))


def eigenvalues_general(M, tol=1e-10):
    """All eigenvalues of a real square matrix, with multiplicity.

    LAPACK ``geev`` (Hessenberg reduction followed by shifted QR) does the
    work. Afterwards each eigenvalue with a non-negligible imaginary part is
    matched against a conjugate partner; an unmatched one marks the result
    as not converged.

    Raises
    ------
    LinAlgFailure
        if the QR iteration itself fails to converge.
    """
    A = _square(M)
    if A.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {A.shape[0]} exceeds {MAX_DIM}")
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise LinAlgFailure(f"QR iteration did not converge: {exc}") from exc
    w = np.asarray(w, dtype=complex)
    w = w[np.lexsort((w.imag, w.real))]
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    unpaired = [
        lam for lam in w
        if abs(lam.imag) > tol * scale
        and np.abs(w - np.conj(lam)).min() > tol * scale
    ]
    return Spectrum(eigenvalues=w, converged=not unpaired)


def characteristic_polynomial(M):
    """Coefficients of ``det(lambda I - M)``, highest degree first.

    Faddeev-LeVerrier recursion; independent of any eigenvalue routine.
    """
    A = _square(M, dtype=complex if np.iscomplexobj(M) else float)
    n = A.shape[0]
    coeffs = [1.0]
    Mk = np.zeros_like(A)
    I = np.eye(n, dtype=A.dtype)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[-1] * I
        coeffs.append(-np.trace(A @ Mk) / k)
    return np.array(coeffs)


def expm(M):
    """Matrix exponential (scaling and squaring with a Pade approximant)."""
    return scipy.linalg.expm(_square(M, dtype=np.result_type(np.asarray(M), float)))


def lyapunov_residual(Z, S, C):
    """Frobenius norm of ``Z^T S + S Z + C``."""
    return float(np.linalg.norm(Z.T @ S + S @ Z + C))


def solve_lyapunov(Z, C):
    """Solve ``Z^T S + S Z + C = 0`` for symmetric ``S``.

    The equation is vectorised into a ``n^2 x n^2`` linear system (at most
    64 x 64 for the models here) and solved directly.

    Raises
    ------
    LinAlgFailure
        if the vectorised system is singular, or the returned solution
        misses the residual bound ``1e-10 * max(1, ||C||_F)``.
    """
    Z = _square(Z, "Z")
    C = _square(C, "C")
    n = Z.shape[0]
    if C.shape != Z.shape:
        raise ValueError(f"Z is {Z.shape} but C is {C.shape}")
    I = np.eye(n)
    # row-major vec: vec(A X B) = (A kron B^T) vec(X)
    A = np.kron(Z.T, I) + np.kron(I, Z.T)
    try:
        x = np.linalg.solve(A, -C.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise LinAlgFailure(f"Lyapunov system is singular: {exc}") from exc
    S = x.reshape(n, n)
    S = 0.5 * (S + S.T)
    res = lyapunov_residual(Z, S, C)
    bound = 1e-10 * max(1.0, float(np.linalg.norm(C)))
    if not np.isfinite(res) or res > bound:
        raise LinAlgFailure(
            f"Lyapunov residual {res:.3e} exceeds {bound:.3e}; Z is likely "
            "not stable or nearly singular"
        )
    return S


def stationary_integral_oracle(Z, C, tol=1e-10, step=1.0 / 64, max_horizon=4096.0):
    """Approximate ``int_0^inf exp(sZ^T) C exp(sZ) ds`` by quadrature.

    Composite Simpson with fixed ``step`` on ``[0, T]``. ``T`` starts at 1
    and doubles, each doubling only integrating the new segment, until the
    tail estimate ``||e^{TZ}||^2 ||C|| / (2 |max Re lambda|)`` drops below
    ``tol``. This is meant as an independent check on :func:`solve_lyapunov`,
    not as a production solver.

    Raises
    ------
    LinAlgFailure
        if ``Z`` is not stable.
    HorizonExceeded
        if ``T`` passes ``max_horizon``.
    """
    Z = _square(Z, "Z")
    C = _square(C, "C")
    alpha = eigenvalues_general(Z).max_real_part
    if alpha >= 0:
        raise LinAlgFailure(f"Z is not stable (max Re lambda = {alpha:.3e})")
    n = Z.shape[0]
    E = expm(step * Z)
    normC = float(np.linalg.norm(C, 2))
    P = np.eye(n)
    total = np.zeros((n, n))
    T = 0.0
    while True:
        T_new = max(1.0, 2.0 * T)
        nsteps = int(round((T_new - T) / step))
        if nsteps % 2:
            nsteps += 1
        seg = P.T @ C @ P
        for j in range(1, nsteps + 1):
            P = P @ E
            w = 1.0 if j == nsteps else (4.0 if j % 2 else 2.0)
            seg += w * (P.T @ C @ P)
        total += (step / 3.0) * seg
        T = T + nsteps * step
        tail = float(np.linalg.norm(P, 2)) ** 2 * normC / (2.0 * abs(alpha))
        if tail < tol:
            break
        if T >= max_horizon:
            raise HorizonExceeded(
                f"tail bound {tail:.3e} still above {tol:.1e} at horizon {T:g}"
            )
    return 0.5 * (total + total.T)


def _doublings(t, max_step=0.5):
    return max(0, math.ceil(math.log2(t / max_step))) if t > max_step else 0


def gramian_integral(Z, C, t):
    """Finite-horizon Gramian ``int_0^t exp(sZ^T) C exp(sZ) ds``.

    Returns ``(G, exp(tZ))``. Van Loan's block exponential on a short step
    ``tau <= 1/2``, then repeated doubling ``G(2 tau) = G(tau) +
    e^{tau Z^T} G(tau) e^{tau Z}``, so long horizons never exponentiate the
    anti-stable block over a long interval. ``Z`` need not be stable.
    """
    Z = _square(Z, "Z")
    C = _square(C, "C")
    if t < 0:
        raise ValueError(f"negative time {t}")
    n = Z.shape[0]
    if t == 0:
        return np.zeros((n, n)), np.eye(n)
    k = _doublings(t)
    tau = t / 2**k
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = -Z.T
    M[:n, n:] = C
    M[n:, n:] = Z
    F = expm(tau * M)
    E = F[n:, n:]
    G = E.T @ F[:n, n:]
    for _ in range(k):
        G = G + E.T @ G @ E
        E = E @ E
    return 0.5 * (G + G.T), E


def exp_integral(Z, t):
    """``int_0^t exp(sZ) ds`` and ``exp(tZ)``, by the same doubling scheme."""
    Z = _square(Z, "Z")
    if t < 0:
        raise ValueError(f"negative time {t}")
    n = Z.shape[0]
    if t == 0:
        return np.zeros((n, n)), np.eye(n)
    k = _doublings(t)
    tau = t / 2**k
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = Z
    M[:n, n:] = np.eye(n)
    F = expm(tau * M)
    E = F[:n, :n]
    I_ = F[:n, n:]
    for _ in range(k):
        I_ = I_ + E @ I_
        E = E @ E
    return I_, E


def real_embedding(H):
    """Real symmetric ``[[A, -B], [B, A]]`` for Hermitian ``H = A + iB``.

    Every eigenvalue of ``H`` shows up twice in the embedding.
    """
    H = np.asarray(H, dtype=complex)
    A, B = H.real, H.imag
    return np.block([[A, -B], [B, A]])


def _hermitian(H, herm_tol):
    H = _square(H, "H", dtype=complex)
    gap = float(np.linalg.norm(H - H.conj().T))
    if gap > herm_tol * max(1.0, float(np.linalg.norm(H))):
        raise ValueError(f"matrix is not Hermitian (||H - H^*|| = {gap:.3e})")
    return 0.5 * (H + H.conj().T)


def hermitian_min_eigenvalue(H, herm_tol=1e-12):
    """Smallest eigenvalue of a Hermitian matrix via its real embedding."""
    R = real_embedding(_hermitian(H, herm_tol))
    return float(np.linalg.eigvalsh(R)[0])


def is_psd(H, herm_tol=1e-12):
    """True when the smallest eigenvalue is above ``-psd_tolerance(H)``."""
    return hermitian_min_eigenvalue(H, herm_tol) >= -psd_tolerance(H)


def pivoted_cholesky_psd(H, herm_tol=1e-12):
    """PSD test by diagonally pivoted Cholesky on the real embedding.

    Elimination proceeds on the largest remaining diagonal entry. A pivot
    below ``-tol`` means indefinite; once every remaining pivot is within
    ``tol`` of zero the leftover Schur complement must vanish to ``tol``.
    ``tol`` is :func:`psd_tolerance` of ``H``. Used as a consistency check
    on :func:`is_psd`.
    """
    Hh = _hermitian(H, herm_tol)
    tol = psd_tolerance(Hh)
    A = real_embedding(Hh).copy()
    n = A.shape[0]
    for k in range(n):
        p = k + int(np.argmax(np.diag(A)[k:]))
        piv = A[p, p]
        if piv < -tol:
            return False
        if piv <= tol:
            return bool(np.abs(A[k:, k:]).max() <= tol)
        if p != k:
            A[[k, p], :] = A[[p, k], :]
            A[:, [k, p]] = A[:, [p, k]]
        col = A[k + 1:, k] / A[k, k]
        A[k + 1:, k + 1:] -= np.outer(col, A[k, k + 1:])
    return True


def polynomial_roots_real_coeffs(coeffs):
    """Roots of a real polynomial of degree at most 4.

    ``coeffs`` run from the highest power down. Degrees 1 and 2 use closed
    forms (the quadratic in its cancellation-free variant); degrees 3 and 4
    take the eigenvalues of the companion matrix. Roots come back sorted by
    real, then imaginary part.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("need a non-empty 1-d coefficient list")
    if c.size > 5:
        raise ValueError(f"degree {c.size - 1} exceeds 4")
    if c[0] == 0:
        raise ValueError("leading coefficient is zero")
    c = c / c[0]
    deg = c.size - 1
    if deg == 0:
        roots = np.array([], dtype=complex)
    elif deg == 1:
        roots = np.array([-c[1]], dtype=complex)
    elif deg == 2:
        b, cc = c[1], c[2]
        disc = b * b - 4 * cc
        if disc >= 0:
            q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
            roots = np.array([q, cc / q] if q != 0 else [0.0, 0.0], dtype=complex)
        else:
            s = math.sqrt(-disc)
            roots = np.array([complex(-b / 2, s / 2), complex(-b / 2, -s / 2)])
    else:
        companion = np.zeros((deg, deg))
        companion[0, :] = -c[1:]
        companion[1:, :-1] = np.eye(deg - 1)
        roots = eigenvalues_general(companion).eigenvalues
    return roots[np.lexsort((roots.imag, roots.real))]
