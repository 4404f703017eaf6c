"""Reference implementations used only by the tests.

Kept deliberately naive and independent of ``spectra_lab``'s code paths.
"""

import math

import numpy as np


def jacobi_singular_values(a, sweeps=60, tol=1e-15):
    """One-sided Jacobi SVD; returns singular values in descending order."""
    a = np.array(a, dtype=np.float64)
    if a.shape[0] < a.shape[1]:
        a = a.T
    n = a.shape[1]
    for _ in range(sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = a[:, i] @ a[:, i]
                beta = a[:, j] @ a[:, j]
                gamma = a[:, i] @ a[:, j]
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / math.sqrt(1.0 + t * t)
                sn = cs * t
                ai = a[:, i].copy()
                a[:, i] = cs * ai - sn * a[:, j]
                a[:, j] = sn * ai + cs * a[:, j]
        if not rotated:
            break
    return np.sort(np.linalg.norm(a, axis=0))[::-1]


def h(x, c):
    """Soft clip written straight from its definition."""
    return x / math.sqrt(1.0 + (x / c) ** 2)


def clip(x, c):
    return max(-c, min(c, x))


def matrix_with_spectrum(rng, m, n, s):
    """Random m x n matrix whose singular values are exactly ``s`` (up to rounding)."""
    q = min(m, n)
    u, _ = np.linalg.qr(rng.standard_normal((m, q)))
    v, _ = np.linalg.qr(rng.standard_normal((n, q)))
    return (u * np.asarray(s)) @ v.T


def pgd_min(grad_fn, obj_fn, project, x0, step, iters=10_000):
    """Plain projected gradient descent; returns the best objective value seen."""
    x = x0.copy()
    best = obj_fn(x)
    for _ in range(iters):
        x = project(x - step * grad_fn(x))
        best = min(best, obj_fn(x))
    return best


def scalar_grid_min(fn, hi, points=200_001):
    """Minimum of a scalar function over a uniform grid of [0, hi]."""
    t = np.linspace(0.0, hi, points)
    return float(np.min(fn(t)))


def finite_diff_grad(f, x, eps=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[idx] = eps
        g[idx] = (f(x + e) - f(x - e)) / (2.0 * eps)
    return g


def random_ball_points(rng, shape, radius, count, extreme_fraction=0.5):
    """Batch of points with spectral norm <= radius; a fraction on the boundary vertices."""
    m, n = shape
    a = rng.standard_normal((count, m, n))
    u, _, vt = np.linalg.svd(a, full_matrices=False)
    q = min(m, n)
    s = radius * rng.uniform(0.0, 1.0, (count, q))
    n_ext = int(extreme_fraction * count)
    s[:n_ext] = radius
    return (u * s[:, None, :]) @ vt
