"""Composite Frank-Wolfe over a spectral-norm ball.

The iteration is

    V_{k+1} = argmin_{||X||_2 <= D2} <M_k, X> + psi(X)
    X_{k+1} = (1 - gamma_k) X_k + gamma_k V_{k+1},   gamma_k = 2 / (k + 2)
    M_{k+1} = (1 - beta_k) M_k + beta_k g(X_{k+1})

For ``psi = (b/2)||X||_F^2`` this is the same sequence as momentum SGD with
spectral clipping and decoupled weight decay under ``c = b D2``,
``alpha = lam / b``, ``lam * eta_k = gamma_k``; ``equivalence_check`` runs
both forms side by side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg
from .errors import ShapeMismatch, ZeroGradient

REGULARIZER_KINDS = ("frobenius_sq", "nuclear", "schatten_p", "matrix_entropy", "linf_sq", "none")
BETA_SCHEDULES = ("one", "k_pow_two_thirds")

GradOracle = Callable[[np.ndarray, Optional[np.random.Generator]], np.ndarray]


@dataclass(frozen=True)
class SpectralBall:
    radius_d2: float

    def __post_init__(self):
        if not self.radius_d2 > 0:
            raise ValueError("radius must be positive")

    def project(self, x) -> np.ndarray:
        return linalg.spectral_clip_exact(x, self.radius_d2)

    def contains(self, x, tol: float = 1e-8) -> bool:
        return linalg.spectral_norm(x) <= self.radius_d2 + tol


@dataclass(frozen=True)
class RegularizerSpec:
    """Spectral regularizer psi.

    frobenius_sq: (b/2)||X||_F^2     nuclear: b * sum(sigma)
    schatten_p:   (b/p) sum(sigma^p) matrix_entropy: b * sum(sigma log sigma - sigma)
    linf_sq:      (b/2) max|X_ij|^2  none: 0
    """

    kind: str = "frobenius_sq"
    b: float = 1.0
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in REGULARIZER_KINDS:
            raise ValueError(f"unknown regularizer {self.kind!r}")
        if self.kind != "none" and not self.b > 0:
            raise ValueError("b must be positive")
        if self.kind == "schatten_p" and not self.p > 1:
            raise ValueError("Schatten exponent must exceed 1")

    def value(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "none":
            return 0.0
        if self.kind == "frobenius_sq":
            return 0.5 * self.b * float(np.sum(x * x))
        if self.kind == "linf_sq":
            return 0.5 * self.b * float(np.max(np.abs(x))) ** 2
        s = np.linalg.svd(np.atleast_2d(x), compute_uv=False)
        if self.kind == "nuclear":
            return self.b * float(s.sum())
        if self.kind == "schatten_p":
            return self.b / self.p * float(np.sum(s**self.p))
        with np.errstate(divide="ignore", invalid="ignore"):
            xlogx = np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)), 0.0)
        return self.b * float(np.sum(xlogx - s))

    def scalar_value(self, t) -> np.ndarray:
        """Per-singular-value penalty psi_i(t) for the separable spectral kinds."""
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "none":
            return np.zeros_like(t)
        if self.kind == "frobenius_sq":
            return 0.5 * self.b * t * t
        if self.kind == "nuclear":
            return self.b * t
        if self.kind == "schatten_p":
            return self.b / self.p * t**self.p
        if self.kind == "matrix_entropy":
            with np.errstate(divide="ignore", invalid="ignore"):
                return self.b * (np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0) - t)
        raise ValueError("linf_sq is not separable in the singular values")


@dataclass(frozen=True)
class FwParams:
    """Parameters of the clipped-momentum form matching a (D2, b) problem.

    ``c = b D2``, ``alpha = lam / b``; ``gamma_k = lam * eta_k = 2/(k+2)``.
    """

    c_fixed: float
    alpha: float
    lam: float
    beta_schedule: str = "one"

    def gamma(self, k: int) -> float:
        return 2.0 / (k + 2.0)

    def eta(self, k: int) -> float:
        return self.gamma(k) / self.lam

    def beta(self, k: int) -> float:
        return beta_at(self.beta_schedule, k)

    @property
    def radius(self) -> float:
        return self.alpha * self.c_fixed / self.lam

    @property
    def b(self) -> float:
        return self.lam / self.alpha


def fw_params_from_problem(
    ball: SpectralBall, b: float, lam: float, beta_schedule: str = "one"
) -> FwParams:
    if not (b > 0 and lam > 0):
        raise ValueError("b and lam must be positive")
    if beta_schedule not in BETA_SCHEDULES:
        raise ValueError(f"unknown beta schedule {beta_schedule!r}")
    return FwParams(c_fixed=b * ball.radius_d2, alpha=lam / b, lam=lam, beta_schedule=beta_schedule)


def beta_at(schedule: str, k: int) -> float:
    if schedule == "one":
        return 1.0
    if schedule == "k_pow_two_thirds":
        return 1.0 / (k + 1.0) ** (2.0 / 3.0)
    raise ValueError(f"unknown beta schedule {schedule!r}")


# -- linear minimization oracles --------------------------------------------


def _rotate(g: np.ndarray, sigma_star) -> np.ndarray:
    u, s, v = linalg.svd_compact(g)
    return -(u * sigma_star(s)) @ v.T


def lmo_frobenius(m, b: float, ball: SpectralBall) -> np.ndarray:
    """argmin over the ball of ``<m, X> + (b/2)||X||_F^2``: the projection of ``-m/b``."""
    if not b > 0:
        raise ValueError("b must be positive")
    return linalg.spectral_clip_exact(-linalg.as_matrix(m) / b, ball.radius_d2)


def lmo_linear(g, ball: SpectralBall) -> np.ndarray:
    """Unregularized LMO ``-D2 * U_G V_G^T`` (the orthogonalized step)."""
    d2 = ball.radius_d2
    return _rotate(linalg.as_matrix(g), lambda s: np.full_like(s, d2))


def lmo_nuclear(g, b: float, ball: SpectralBall) -> np.ndarray:
    d2 = ball.radius_d2
    return _rotate(linalg.as_matrix(g), lambda s: np.where(s > b, d2, 0.0))


def lmo_schatten_p(g, b: float, p: float, ball: SpectralBall) -> np.ndarray:
    if not p > 1:
        raise ValueError("p must exceed 1")
    d2 = ball.radius_d2
    return _rotate(linalg.as_matrix(g), lambda s: np.minimum((s / b) ** (1.0 / (p - 1.0)), d2))


def lmo_entropy(g, b: float, ball: SpectralBall) -> np.ndarray:
    d2 = ball.radius_d2
    cap = math.log(2.0 * d2)
    return _rotate(linalg.as_matrix(g), lambda s: np.minimum(np.exp(np.minimum(s / b, cap)), d2))


def lmo_linf_approx(g, b: float, ball: SpectralBall) -> tuple[np.ndarray, bool]:
    """Projection of the unconstrained l_inf^2 minimizer onto the ball.

    Returns ``(U, exact)`` where ``exact`` certifies that the projection was
    inactive, in which case ``U`` is the true constrained minimizer.
    """
    g = linalg.as_matrix(g)
    l1 = float(np.abs(g).sum())
    if l1 == 0.0:
        raise ZeroGradient("l_inf LMO needs a non-zero gradient")
    t = b * ball.radius_d2 / l1
    sgn = np.sign(g)
    exact = linalg.spectral_norm(sgn) <= t
    return -(l1 / b) * linalg.spectral_clip_exact(sgn, t), exact


def lmo(reg: RegularizerSpec, g, ball: SpectralBall) -> np.ndarray:
    kind = reg.kind
    if kind == "frobenius_sq":
        return lmo_frobenius(g, reg.b, ball)
    if kind == "nuclear":
        return lmo_nuclear(g, reg.b, ball)
    if kind == "schatten_p":
        return lmo_schatten_p(g, reg.b, reg.p, ball)
    if kind == "matrix_entropy":
        return lmo_entropy(g, reg.b, ball)
    if kind == "linf_sq":
        return lmo_linf_approx(g, reg.b, ball)[0]
    return lmo_linear(g, ball)


def momentum_update(m_prev, g_new, beta_k: float) -> np.ndarray:
    if not 0 < beta_k <= 1:
        raise ValueError("beta_k must lie in (0, 1]")
    m_prev = np.asarray(m_prev, dtype=np.float64)
    g_new = np.asarray(g_new, dtype=np.float64)
    if m_prev.shape != g_new.shape:
        raise ShapeMismatch(f"{m_prev.shape} vs {g_new.shape}")
    if beta_k == 1.0:
        return g_new.copy()
    return (1.0 - beta_k) * m_prev + beta_k * g_new


# -- runs -------------------------------------------------------------------


@dataclass
class Trajectory:
    iterates: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    spectral_norms: list = field(default_factory=list)

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]


def _record(traj: Trajectory, x, objective, keep_iterates: bool):
    if keep_iterates or not traj.iterates:
        traj.iterates.append(x)
    else:
        traj.iterates[-1] = x
    traj.spectral_norms.append(linalg.spectral_norm(x))
    if objective is not None:
        traj.objective.append(objective(x))


def cfw_run(
    grad_oracle: GradOracle,
    x0,
    reg: RegularizerSpec,
    ball: SpectralBall,
    steps: int,
    beta_schedule: str = "one",
    rng: Optional[np.random.Generator] = None,
    objective: Optional[Callable[[np.ndarray], float]] = None,
    keep_iterates: bool = True,
) -> Trajectory:
    """Stochastic composite Frank-Wolfe with momentum, ``M_0 = g(X_0)``.

    ``objective`` (typically ``F = f + psi``) is evaluated at every iterate.
    """
    x = linalg.as_matrix(x0).copy()
    if not ball.contains(x):
        raise ValueError("x0 must lie inside the spectral ball")
    traj = Trajectory()
    _record(traj, x, objective, keep_iterates)
    m = grad_oracle(x, rng)
    for k in range(steps):
        v = lmo(reg, m, ball)
        gamma = 2.0 / (k + 2.0)
        x = (1.0 - gamma) * x + gamma * v
        _record(traj, x, objective, keep_iterates)
        if k + 1 < steps:
            m = momentum_update(m, grad_oracle(x, rng), beta_at(beta_schedule, k))
    return traj


def clipped_sgdm_run(
    grad_oracle: GradOracle,
    x0,
    params: FwParams,
    steps: int,
    rng: Optional[np.random.Generator] = None,
    c: Optional[float] = None,
    objective: Optional[Callable[[np.ndarray], float]] = None,
    keep_iterates: bool = True,
) -> Trajectory:
    """Momentum SGD with exact spectral clipping and decoupled weight decay.

    ``X_{k+1} = (1 - lam eta_k) X_k - alpha eta_k clipSp_c(M_k)``. ``c``
    defaults to ``params.c_fixed``; overriding it breaks the Frank-Wolfe
    correspondence.
    """
    c = params.c_fixed if c is None else c
    x = linalg.as_matrix(x0).copy()
    traj = Trajectory()
    _record(traj, x, objective, keep_iterates)
    m = grad_oracle(x, rng)
    for k in range(steps):
        eta = params.eta(k)
        x = (1.0 - params.lam * eta) * x - params.alpha * eta * linalg.spectral_clip_exact(m, c)
        _record(traj, x, objective, keep_iterates)
        if k + 1 < steps:
            m = momentum_update(m, grad_oracle(x, rng), params.beta(k))
    return traj


def make_oracle(problem, batch_size: Optional[int] = None) -> GradOracle:
    """Full-batch gradient, or a fresh minibatch drawn from ``rng`` per call."""
    if batch_size is None:
        return lambda x, rng=None: problem.grad(x)

    def oracle(x, rng):
        idx = rng.choice(problem.n, size=batch_size, replace=False)
        return problem.grad(x, idx)

    return oracle


def equivalence_check(
    problem,
    steps: int,
    params: FwParams,
    seed: int,
    batch_size: Optional[int] = None,
    c_override: Optional[float] = None,
) -> float:
    """Max Frobenius gap between the clipped-momentum and Frank-Wolfe iterates.

    Both runs start at zero and draw minibatches from identically seeded
    generators. ``c_override`` perturbs the clipping threshold of the
    momentum run only (negative control).
    """
    oracle = make_oracle(problem, batch_size)
    x0 = np.zeros(problem.shape)
    ball = SpectralBall(params.radius)
    reg = RegularizerSpec("frobenius_sq", params.b)
    sgdm = clipped_sgdm_run(oracle, x0, params, steps, np.random.default_rng(seed), c=c_override)
    fw = cfw_run(oracle, x0, reg, ball, steps, params.beta_schedule, np.random.default_rng(seed))
    return max(float(np.linalg.norm(a - b)) for a, b in zip(sgdm.iterates, fw.iterates))


def momentum_coefficient_audit(K: int) -> tuple[float, float]:
    """Max of ``S_k k^{1/3}`` and ``B_k k^{2/3}`` over ``1 <= k <= K``.

    ``S_k = (1 - beta_{k-1}) S_{k-1} + gamma_{k-1}`` and
    ``B_k = (1 - beta_{k-1})^2 B_{k-1} + beta_{k-1}^2`` with
    ``gamma_k = 2/(k+2)``, ``beta_k = (k+1)^{-2/3}`` and ``S_1 = B_1 = 1``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    s = bk = 1.0
    best_s = best_b = 1.0
    for k in range(2, K + 1):
        beta = k ** (-2.0 / 3.0)
        s = (1.0 - beta) * s + 2.0 / (k + 1.0)
        bk = (1.0 - beta) ** 2 * bk + beta * beta
        ks = s * k ** (1.0 / 3.0)
        kb = bk * k ** (2.0 / 3.0)
        if ks > best_s:
            best_s = ks
        if kb > best_b:
            best_b = kb
    return best_s, best_b


# -- optimality certificates --------------------------------------------------


def composite_value(problem, reg: RegularizerSpec, x) -> float:
    return problem.loss(x) + reg.value(x)


def frank_wolfe_gap(problem, reg: RegularizerSpec, ball: SpectralBall, x) -> float:
    """``max_V <grad f(X), X - V> + psi(X) - psi(V)``; bounds ``F(X) - F*`` for convex f."""
    g = problem.grad(x)
    v = lmo(reg, g, ball)
    return float(np.sum(g * (x - v)) + reg.value(x) - reg.value(v))


@dataclass
class CompositeSolution:
    x: np.ndarray
    value: float
    gap: float
    iterations: int
    method: str


def solve_composite(
    problem,
    reg: RegularizerSpec,
    ball: SpectralBall,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    check_every: int = 25,
) -> CompositeSolution:
    """High-accuracy minimizer of ``f + psi`` over the ball.

    Smooth regularizers (``none``, ``frobenius_sq``) use accelerated projected
    gradient with adaptive restart; the others fall back to deterministic
    Frank-Wolfe. Stops once the Frank-Wolfe gap is below ``tol``.
    """
    shape = problem.shape
    if reg.kind in ("none", "frobenius_sq"):
        b = reg.b if reg.kind == "frobenius_sq" else 0.0
        step = 1.0 / (problem.lipschitz + b)
        x = np.zeros(shape)
        y = x.copy()
        t = 1.0
        best_x, best_val, gap = x, composite_value(problem, reg, x), math.inf
        for it in range(1, max_iter + 1):
            x_new = ball.project(y - step * (problem.grad(y) + b * y))
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            if np.sum((y - x_new) * (x_new - x)) > 0:
                t_new, y = 1.0, x_new  # restart momentum
            else:
                y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            x, t = x_new, t_new
            if it % check_every == 0:
                val = composite_value(problem, reg, x)
                if val < best_val:
                    best_x, best_val = x, val
                gap = frank_wolfe_gap(problem, reg, ball, x)
                if gap <= tol:
                    break
        return CompositeSolution(best_x, best_val, max(gap, 0.0), it, "accelerated projected gradient")

    x = np.zeros(shape)
    best_x, best_val, gap = x, composite_value(problem, reg, x), math.inf
    for k in range(max_iter):
        g = problem.grad(x)
        v = lmo(reg, g, ball)
        gap = float(np.sum(g * (x - v)) + reg.value(x) - reg.value(v))
        if gap <= tol:
            break
        gamma = 2.0 / (k + 2.0)
        x = (1.0 - gamma) * x + gamma * v
        val = composite_value(problem, reg, x)
        if val < best_val:
            best_x, best_val = x, val
    return CompositeSolution(best_x, best_val, max(gap, 0.0), k + 1, "frank-wolfe")


def estimate_curvature(
    problem, ball: SpectralBall, samples: int = 1000, rng: Optional[np.random.Generator] = None
) -> float:
    """Sampled lower estimate of the Frank-Wolfe curvature constant ``C_f``.

    Maximizes ``2/gamma^2 (f(Y) - f(X) - <grad f(X), Y - X>)`` over random
    ``X, S`` in the ball (half of them extreme points) and ``gamma`` in
    ``[0.01, 1]``.
    """
    rng = np.random.default_rng() if rng is None else rng
    shape = problem.shape
    d2 = ball.radius_d2

    def point(extreme: bool):
        u, _, v = linalg.svd_compact(rng.standard_normal(shape))
        s = np.full(u.shape[1], d2) if extreme else d2 * rng.uniform(0, 1, u.shape[1])
        return (u * s) @ v.T

    best = 0.0
    for i in range(samples):
        x, s = point(i % 2 == 0), point(i % 2 == 0)
        gamma = rng.uniform(0.01, 1.0)
        y = x + gamma * (s - x)
        gap = problem.loss(y) - problem.loss(x) - float(np.sum(problem.grad(x) * (y - x)))
        best = max(best, 2.0 * gap / gamma**2)
    return best
