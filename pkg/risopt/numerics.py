"""Dense complex-matrix kernels shared by every other module.

All functions are pure and operate in double precision on numpy arrays.
"""

import logging

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .errors import NoConvergence, NotHermitian, NotPositiveDefinite

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

HERMITIAN_RTOL = 1e-10
POWER_ITERATION_CAP = 10_000


def herm(a: np.ndarray) -> np.ndarray:
    """Conjugate (Hermitian) transpose."""
    return a.conj().T


def _symmetrized(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"Expected a square matrix, got shape {a.shape}")
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - herm(a)) > HERMITIAN_RTOL * max(scale, np.finfo(float).tiny):
        raise NotHermitian("Matrix is not Hermitian within relative tolerance 1e-10")
    return 0.5 * (a + herm(a))


def _cholesky(a: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.cholesky(a, lower=True)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {e}") from e


def logdet_hpd(a: ComplexMatrix) -> float:
    """ln det(A) of a Hermitian positive-definite matrix via Cholesky."""
    chol = _cholesky(_symmetrized(a))
    return float(2.0 * np.sum(np.log(chol.diagonal().real)))


def hpd_inverse(a: ComplexMatrix) -> ComplexMatrix:
    chol = _cholesky(_symmetrized(a))
    eye = np.eye(chol.shape[0], dtype=np.complex128)
    inv = scipy.linalg.cho_solve((chol, True), eye)
    return 0.5 * (inv + herm(inv))


def logdet_and_inverse(a: ComplexMatrix) -> tuple[float, ComplexMatrix]:
    """Both ln det(A) and A^{-1} from a single factorization."""
    chol = _cholesky(_symmetrized(a))
    eye = np.eye(chol.shape[0], dtype=np.complex128)
    inv = scipy.linalg.cho_solve((chol, True), eye)
    return float(2.0 * np.sum(np.log(chol.diagonal().real))), 0.5 * (inv + herm(inv))


def spectral_norm(a: ComplexMatrix, tol: float = 1e-10, fallback_svd: bool = True) -> float:
    """Largest singular value by power iteration on the smaller Gram matrix.

    The start vector is all-ones so results are reproducible. Iteration stops
    once the eigen-residual ``||G v - mu v||`` is at most ``tol * mu``, which
    bounds the error of ``mu`` by ``tol * mu`` even when the top two singular
    values nearly coincide. When the cap is hit, or the iteration settles on
    a non-dominant eigenvector (the start vector is orthogonal to the dominant
    subspace), the dense SVD is used if ``fallback_svd`` is set; otherwise
    NoConvergence is raised.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        raise ValueError("spectral_norm needs a non-empty matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.any(a):
        return 0.0

    gram = herm(a) @ a if a.shape[1] <= a.shape[0] else a @ herm(a)
    # every diagonal entry is a Rayleigh quotient, so lambda_max is at least this
    floor = float(np.max(gram.diagonal().real))
    v = np.ones(gram.shape[0], dtype=np.complex128)
    v /= np.linalg.norm(v)
    for _ in range(POWER_ITERATION_CAP):
        w = gram @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            break
        mu = float(np.real(np.vdot(v, w)))
        if np.linalg.norm(w - mu * v) <= tol * mu:
            if mu < floor * (1.0 - 2.0 * tol):
                break
            return float(np.sqrt(mu))
        v = w / norm_w

    if not fallback_svd:
        raise NoConvergence(f"Power iteration did not reach tol={tol} in {POWER_ITERATION_CAP} steps")
    logger.warning("Power iteration stalled, falling back to dense SVD")
    return float(np.linalg.svd(a, compute_uv=False)[0])
