"""
Deterministic numerical kernels shared by the closed-form analysis and the
training harness.

Matrices are ``numpy.ndarray`` of float64 in row-major layout. Random streams
come from numpy's PCG64 bit generator, which is specified bit-for-bit and
therefore reproducible across runs and platforms for a fixed seed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import DomainError

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

RNG_ALGORITHM = "PCG64"

EIGEN_METHODS = ("lapack", "jacobi")


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a symmetric matrix, eigenvalues descending."""

    eigenvalues: FloatArray
    eigenvectors: FloatArray

    def reconstruct(self) -> FloatArray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def as_matrix(a: ArrayLike, name: str = "matrix") -> FloatArray:
    """Validate a finite 2-D float matrix."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def as_vector(v: ArrayLike, size: int | None = None, name: str = "vector") -> FloatArray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be 1-D, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise DomainError(f"{name} must have length {size}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def _canonicalize(eigenvalues: FloatArray, eigenvectors: FloatArray) -> EigenDecomposition:
    """Sort descending and make the first nonzero component of each eigenvector positive."""
    order = np.argsort(-eigenvalues, kind="stable")
    w = eigenvalues[order]
    v = eigenvectors[:, order].copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max()))
        if nz.size and col[nz[0]] < 0:
            v[:, j] = -col
    return EigenDecomposition(w, v)


def _jacobi_eigh(a: FloatArray, tol: float, max_sweeps: int) -> tuple[FloatArray, FloatArray]:
    """Cyclic Jacobi rotations until the off-diagonal mass is negligible."""
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for sweep in range(max_sweeps):
        off = math.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            logger.debug("Jacobi converged after %d sweeps (off=%.3e)", sweep, off)
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        logger.warning("Jacobi eigen-solver hit max_sweeps=%d before converging", max_sweeps)
    return np.diag(a).copy(), v


def sym_eig(a: ArrayLike, method: str = "lapack", tol: float = 1e-14, max_sweeps: int = 64) -> EigenDecomposition:
    """Eigen-decomposition of a symmetric matrix.

    Args:
        a: Square symmetric matrix (asymmetry above 1e-10 relative is rejected).
        method: ``"lapack"`` (``numpy.linalg.eigh``) or ``"jacobi"`` (cyclic
            Jacobi rotations). Both return the same ordering and sign
            convention.

    Returns:
        Eigenvalues in descending order and orthonormal eigenvectors whose first
        nonzero component is positive.
    """
    arr = as_matrix(a, "a")
    if arr.shape[0] != arr.shape[1]:
        raise DomainError(f"sym_eig needs a square matrix, got {arr.shape}")
    if np.max(np.abs(arr - arr.T)) > 1e-10 * max(1.0, np.max(np.abs(arr))):
        raise DomainError("sym_eig needs a symmetric matrix")
    arr = 0.5 * (arr + arr.T)
    if method == "lapack":
        w, v = np.linalg.eigh(arr)
    elif method == "jacobi":
        w, v = _jacobi_eigh(arr, tol, max_sweeps)
    else:
        raise DomainError(f"Unknown eigen method '{method}'. Valid: {', '.join(EIGEN_METHODS)}")
    return _canonicalize(w, v)


def sample_covariance(x: ArrayLike, center: ArrayLike) -> FloatArray:
    """(1/N)·Σᵢ (xᵢ − c)(xᵢ − c)ᵀ with divisor N."""
    arr = as_matrix(x, "x")
    c = as_vector(center, arr.shape[1], "center")
    dev = arr - c
    s = dev.T @ dev / arr.shape[0]
    return 0.5 * (s + s.T)


def gaussian_raw_moment(mean: ArrayLike, var: ArrayLike, order: int):
    """E[Y^p] for Y ~ Normal(mean, var), p ∈ {1, 2, 3, 4}; vectorized."""
    m = np.asarray(mean, dtype=np.float64)
    v = np.asarray(var, dtype=np.float64)
    if np.any(v < 0):
        raise DomainError("variance must be nonnegative")
    if order == 1:
        out = m + 0.0 * v
    elif order == 2:
        out = m * m + v
    elif order == 3:
        out = m ** 3 + 3.0 * m * v
    elif order == 4:
        out = m ** 4 + 6.0 * m * m * v + 3.0 * v * v
    else:
        raise DomainError(f"raw moments are available for orders 1..4, got {order}")
    return float(out) if out.ndim == 0 else out


def make_rng(seed: int) -> np.random.Generator:
    """A PCG64 generator seeded with a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent child streams of ``seed`` for parallel or per-purpose use."""
    children = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF).spawn(count)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def random_rotation(kappa: int, rng: np.random.Generator) -> FloatArray:
    """A random orthogonal κ×κ matrix with determinant +1."""
    q, r = np.linalg.qr(rng.standard_normal((kappa, kappa)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
