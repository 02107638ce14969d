import numpy as np

from gqms.core import GklsGenerator, symplectic_form
from gqms.numkit import expm


def random_symplectic(rng, d, scale=0.5):
    """exp(J H) with H symmetric is symplectic."""
    H = rng.normal(size=(2 * d, 2 * d)) * scale
    H = H + H.T
    return expm(symplectic_form(d) @ H)


def random_valid_covariance(rng, d, max_nu=3.0):
    """M^T diag(nu, nu) M with nu >= 1 and M symplectic (Williamson form)."""
    M = random_symplectic(rng, d)
    nu = rng.uniform(1.0, max_nu, size=d)
    return M.T @ np.diag(np.concatenate([nu, nu])) @ M


def random_generator(rng, d, m=None):
    m = m or d
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Omega = (A + A.conj().T) / 2
    B = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Kappa = (B + B.T) / 4
    U = (rng.normal(size=(m, d)) + 1j * rng.normal(size=(m, d))) * 0.5
    V = (rng.normal(size=(m, d)) + 1j * rng.normal(size=(m, d)))
    return GklsGenerator(Omega, Kappa, U, V)


def random_stable_pair(rng, n, min_decay=0.05):
    """Random stable Z (spectral abscissa <= -min_decay) and PSD C."""
    Z = rng.normal(size=(n, n))
    shift = np.linalg.eigvals(Z).real.max() + min_decay + rng.uniform(0, 1)
    Z = Z - shift * np.eye(n)
    G = rng.normal(size=(n, n))
    return Z, G @ G.T
