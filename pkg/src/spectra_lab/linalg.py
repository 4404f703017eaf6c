"""Matrix operators: clipping family, Newton-Schulz inverse square root, soft
spectral clipping, orthogonalization, subspace distances and Stiefel sampling.

Matrices are plain ``float64`` numpy arrays. One-dimensional arrays are
treated as column vectors whose spectral norm is their Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DivergedIteration,
    NonFiniteInput,
    NotPositiveDefinite,
    RankDeficient,
)

__all__ = [
    "SvdFactors",
    "StiefelSample",
    "as_matrix",
    "check_threshold",
    "scalar_clip",
    "scalar_soft_clip",
    "svd_compact",
    "factored_svd",
    "spectral_norm",
    "spectral_clip_exact",
    "global_clip",
    "coordinate_clip",
    "orthogonalize",
    "matrix_inverse_sqrt",
    "gershgorin_sq_bound",
    "soft_spectral_clip",
    "subspace_distance",
    "sample_stiefel",
    "sample_stiefel_batch",
]

DIVERGENCE_NORM = 1e8


class SvdFactors(NamedTuple):
    """Compact SVD ``x = u @ diag(s) @ v.T`` with ``q = min(m, n)`` columns."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s[..., None, :]) @ np.swapaxes(self.v, -1, -2)


@dataclass(frozen=True)
class StiefelSample:
    """A d x r matrix with orthonormal columns.

    ``anisotropy_kappa`` is the documented bound kappa in
    ``E[U U^T] <= (kappa r / d) I``; it equals 1 for the uniform sampler.
    """

    matrix: np.ndarray
    anisotropy_kappa: float = 1.0

    @property
    def shape(self):
        return self.matrix.shape


def as_matrix(x, name: str = "x") -> np.ndarray:
    """Return ``x`` as a finite float64 array with ndim 1 or 2."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (1, 2) or arr.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty vector or matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contains NaN or Inf")
    return arr


def check_threshold(c: float) -> float:
    c = float(c)
    if not c > 0 or not np.isfinite(c):
        raise ValueError(f"clipping threshold must be a positive finite number, got {c}")
    return c


def _is_vector(x: np.ndarray) -> bool:
    return x.ndim == 1 or 1 in x.shape


def scalar_clip(x, c: float):
    """``sign(x) * min(|x|, c)``; works elementwise on arrays."""
    c = check_threshold(c)
    return np.clip(x, -c, c) if isinstance(x, np.ndarray) else float(np.clip(x, -c, c))


def scalar_soft_clip(x, c: float):
    """Smooth clip ``x / sqrt(1 + x^2 / c^2)``; odd, increasing and bounded by ``c``."""
    c = check_threshold(c)
    xa = np.asarray(x, dtype=np.float64)
    r = np.abs(xa) / c
    big = r > 1.0
    # for |x| > c use c / sqrt(1 + c^2/x^2) so that x^2 never overflows
    inv = np.divide(1.0, r, out=np.zeros_like(r), where=big)
    small = np.where(big, 0.0, r)
    out = np.where(big, np.sign(xa) * c / np.sqrt(1.0 + inv * inv), xa / np.sqrt(1.0 + small * small))
    return out if isinstance(x, np.ndarray) else float(out)


def svd_compact(x) -> SvdFactors:
    """Compact SVD of ``x`` (LAPACK divide-and-conquer).

    Raises ConvergenceFailure when LAPACK reports non-convergence.
    """
    x = as_matrix(x)
    if x.ndim == 1:
        x = x[:, None]
    try:
        u, s, vt = np.linalg.svd(x, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SvdFactors(u, s, vt.T)


def factored_svd(left: np.ndarray, right: np.ndarray) -> SvdFactors:
    """SVD of ``left @ right.T`` without forming the product.

    ``left`` is (..., m, k) and ``right`` is (..., n, k) with small k, so
    the cost is two thin QR factorizations and a k x k SVD per matrix.
    Leading batch dimensions are supported.
    """
    ql, rl = np.linalg.qr(left)
    qr, rr = np.linalg.qr(right)
    try:
        a, s, bt = np.linalg.svd(rl @ np.swapaxes(rr, -1, -2))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SvdFactors(ql @ a, s, qr @ np.swapaxes(bt, -1, -2))


def spectral_norm(x) -> float:
    x = as_matrix(x)
    if _is_vector(x):
        return float(np.linalg.norm(x))
    return float(np.linalg.norm(x, 2))


def spectral_clip_exact(x, c: float) -> np.ndarray:
    """Clip every singular value of ``x`` at ``c``, keeping singular vectors."""
    c = check_threshold(c)
    x = as_matrix(x)
    if _is_vector(x):
        return global_clip(x, c)
    u, s, v = svd_compact(x)
    if s[0] <= c:
        return x.copy()
    return (u * np.minimum(s, c)) @ v.T


def global_clip(x, c: float) -> np.ndarray:
    """Rescale ``x`` so its Frobenius norm is at most ``c``."""
    c = check_threshold(c)
    x = as_matrix(x)
    norm = np.linalg.norm(x)
    if norm <= c:
        return x.copy()
    return x * (c / norm)


def coordinate_clip(x, c: float) -> np.ndarray:
    c = check_threshold(c)
    return np.clip(as_matrix(x), -c, c)


def orthogonalize(x) -> np.ndarray:
    """Polar factor ``U V^T``: every singular value set to one."""
    u, s, v = svd_compact(x)
    if s[0] == 0.0 or s[-1] <= 1e-12 * s[0]:
        raise RankDeficient(f"smallest singular value {s[-1]:.3e} vs largest {s[0]:.3e}")
    return u @ v.T


def gershgorin_sq_bound(gram) -> float:
    """Cheap upper bound on the top eigenvalue of a PSD Gram matrix.

    Minimum of the Frobenius norm and the largest absolute row sum.
    """
    gram = as_matrix(gram, "gram")
    if gram.ndim == 1:
        gram = gram.reshape(1, -1)
    return float(min(np.linalg.norm(gram), np.abs(gram).sum(axis=1).max()))


def matrix_inverse_sqrt(x, alpha: float, iters: int) -> np.ndarray:
    """Coupled Newton-Schulz iteration for ``x^{-1/2}``.

    ``x`` must be symmetric positive definite and ``alpha`` an upper bound
    on its largest eigenvalue. The iterate pair starts at ``(x/alpha, I)``
    and is updated with ``T = (3I - Z Y) / 2``, ``Y <- Y T``, ``Z <- T Z``;
    the result is ``Z_K / sqrt(alpha)``.

    Convergence is linear (factor about 9/4 per step) until ``Z Y`` is
    close to the identity and quadratic afterwards, so the iteration count
    needed grows like ``log(alpha / lambda_min)``.
    """
    x = as_matrix(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {x.shape}")
    alpha = float(alpha)
    if not alpha > 0 or not np.isfinite(alpha):
        raise ValueError(f"alpha must be positive, got {alpha}")
    if int(iters) < 1:
        raise ValueError("iters must be >= 1")
    if np.any(np.diag(x) <= 0):
        raise NotPositiveDefinite("non-positive diagonal entry")
    n = x.shape[0]
    eye = np.eye(n)
    y = x / alpha
    z = eye.copy()
    for _ in range(int(iters)):
        t = 0.5 * (3.0 * eye - z @ y)
        y = y @ t
        z = t @ z
        if not np.all(np.isfinite(z)) or not np.all(np.isfinite(y)):
            raise NotPositiveDefinite("Newton-Schulz iterate became non-finite")
        if np.linalg.norm(z) > DIVERGENCE_NORM:
            raise DivergedIteration("Newton-Schulz iterate norm exceeded 1e8")
    z = 0.5 * (z + z.T)
    return z / np.sqrt(alpha)


def soft_spectral_clip(x, c: float, iters: int = 10) -> np.ndarray:
    """Apply ``h_c(s) = s / sqrt(1 + s^2/c^2)`` to the singular values of ``x``.

    Computed as ``(I + X X^T / c^2)^{-1/2} X`` with the Gram matrix formed on
    the smaller side. When the Gershgorin bound on the top singular value is
    already ``<= c`` the input is returned unchanged, which makes the
    operator discontinuous at that threshold.
    """
    c = check_threshold(c)
    x = as_matrix(x)
    if _is_vector(x):
        norm = float(np.linalg.norm(x))
        if norm <= c:
            return x.copy()
        return x * (scalar_soft_clip(norm, c) / norm)
    m, n = x.shape
    wide = m <= n
    gram = x @ x.T if wide else x.T @ x
    s_max_sq = gershgorin_sq_bound(gram)
    if np.sqrt(s_max_sq) <= c:
        return x.copy()
    alpha = 1.0 + s_max_sq / c**2
    inv_root = matrix_inverse_sqrt(np.eye(gram.shape[0]) + gram / c**2, alpha, iters)
    return inv_root @ x if wide else x @ inv_root


def _frame(u) -> np.ndarray:
    return u.matrix if isinstance(u, StiefelSample) else np.asarray(u, dtype=np.float64)


def subspace_distance(u1, u2) -> tuple[float, float]:
    """Spectral and chordal distance between the column spans of two frames.

    With ``A = U1^T U2`` and ``B = I - A A^T``: ``d_spec = sqrt(lambda_max(B))``
    (largest principal-angle sine) and ``d_chord = sqrt(trace(B) / r)``.
    """
    a, b = _frame(u1), _frame(u2)
    if a.ndim != 2 or a.shape != b.shape:
        raise DimensionMismatch(f"frames must share shape, got {a.shape} and {b.shape}")
    r = a.shape[1]
    cross = a.T @ b
    gap = np.eye(r) - cross @ cross.T
    lam = np.linalg.eigvalsh(0.5 * (gap + gap.T))
    d_spec = float(np.sqrt(np.clip(lam[-1], 0.0, 1.0)))
    d_chord = float(np.sqrt(np.clip(np.trace(gap) / r, 0.0, 1.0)))
    return d_spec, d_chord


def _polar_inverse_root(gram: np.ndarray) -> np.ndarray:
    alpha = gershgorin_sq_bound(gram)
    if alpha > 0:
        try:
            root = matrix_inverse_sqrt(gram, alpha, 40)
            if np.linalg.norm(root @ gram @ root - np.eye(len(gram))) <= 1e-12:
                return root
        except (NotPositiveDefinite, DivergedIteration):
            pass
    # ill-conditioned Gram: fall back to the eigendecomposition
    lam, vec = np.linalg.eigh(gram)
    if lam[0] <= 0:
        raise RankDeficient("Gaussian draw is rank deficient")
    return (vec / np.sqrt(lam)) @ vec.T


def sample_stiefel(d: int, r: int, rng: np.random.Generator) -> StiefelSample:
    """Uniform draw from the Stiefel manifold via ``A (A^T A)^{-1/2}``, A Gaussian."""
    if not 1 <= r <= d:
        raise DimensionMismatch(f"need 1 <= r <= d, got d={d}, r={r}")
    a = rng.standard_normal((d, r))
    if r == 1:
        return StiefelSample(a / np.linalg.norm(a), 1.0)
    return StiefelSample(a @ _polar_inverse_root(a.T @ a), 1.0)


def sample_stiefel_batch(d: int, r: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent Stiefel draws stacked as a (size, d, r) array."""
    if not 1 <= r <= d:
        raise DimensionMismatch(f"need 1 <= r <= d, got d={d}, r={r}")
    a = rng.standard_normal((size, d, r))
    if r == 1:
        return a / np.linalg.norm(a, axis=1, keepdims=True)
    lam, vec = np.linalg.eigh(np.swapaxes(a, 1, 2) @ a)
    root = (vec / np.sqrt(lam)[:, None, :]) @ np.swapaxes(vec, 1, 2)
    return a @ root
