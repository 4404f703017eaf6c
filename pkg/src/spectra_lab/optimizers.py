"""Base optimizer updates and the spectrally clipped SPECTRA step.

A parameter update has the decoupled-weight-decay form

    X_{k+1} = (1 - lam * eta_k) X_k - alpha * eta_k * SSC_{c_k}(U_k)

where ``U_k`` comes from one of the base rules below. Momentum for
``sgdm``/``signum`` uses ``M <- (1 - beta1) M + beta1 g``, so ``beta1`` is the
weight on the *new* gradient (``beta1 = 1`` means no memory). For ``adamw``
and ``ademamix`` ``beta1`` is the usual EMA decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import linalg
from .errors import ShapeMismatch
from .schedules import ClipScheduleSpec, ScheduleSpec, clip_at, lr_at

OPTIMIZER_KINDS = ("sgdm", "signum", "adamw", "ademamix")

# beta1 defaults per kind; 0.1 for the momentum methods is a standard 0.9 EMA
_DEFAULT_BETA1 = {"sgdm": 0.1, "signum": 0.1, "adamw": 0.9, "ademamix": 0.9}


def alpha_for_shape(m: int, n: int) -> float:
    """Scaling ``max(sqrt(m/n), 1)`` aligning the spectral ball with the RMS->RMS norm."""
    if m < 1 or n < 1:
        raise ValueError("shape dimensions must be positive")
    return max(math.sqrt(m / n), 1.0)


@dataclass
class BaseOptimizerSpec:
    kind: str = "adamw"
    beta1: Optional[float] = None
    beta2: float = 0.999
    beta3: float = 0.999
    mix_alpha: float = 8.0
    epsilon: float = 1e-8
    nesterov: bool = False

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.beta1 is None:
            self.beta1 = _DEFAULT_BETA1[self.kind]
        lo_ok = 0 < self.beta1 <= 1 if self.kind in ("sgdm", "signum") else 0 <= self.beta1 < 1
        if not lo_ok:
            raise ValueError(f"beta1={self.beta1} out of range for {self.kind}")
        for name in ("beta2", "beta3"):
            if not 0 <= getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.mix_alpha <= 0 or self.epsilon <= 0:
            raise ValueError("mix_alpha and epsilon must be positive")


@dataclass
class OptimizerState:
    step: int
    m1: np.ndarray
    m2: Optional[np.ndarray] = None
    m_slow: Optional[np.ndarray] = None
    last_direction: Optional[np.ndarray] = None

    @classmethod
    def zeros_like(cls, param: np.ndarray, kind: str = "adamw") -> "OptimizerState":
        z = np.zeros_like(np.asarray(param, dtype=np.float64))
        return cls(
            step=0,
            m1=z.copy(),
            m2=z.copy() if kind in ("adamw", "ademamix") else None,
            m_slow=z.copy() if kind == "ademamix" else None,
        )


def _check_shapes(state: OptimizerState, grad: np.ndarray):
    for name in ("m1", "m2", "m_slow"):
        buf = getattr(state, name)
        if buf is not None and buf.shape != grad.shape:
            raise ShapeMismatch(f"state.{name} has shape {buf.shape}, gradient has {grad.shape}")


def base_update(spec: BaseOptimizerSpec, state: OptimizerState, grad) -> np.ndarray:
    """Advance ``state`` with ``grad`` and return the update matrix ``U_k``."""
    g = linalg.as_matrix(grad, "grad")
    _check_shapes(state, g)
    b1 = spec.beta1
    if spec.kind in ("sgdm", "signum"):
        state.m1 = (1.0 - b1) * state.m1 + b1 * g
        u = (1.0 - b1) * state.m1 + b1 * g if spec.nesterov else state.m1
        if spec.kind == "signum":
            u = np.sign(u)  # sign(0) = 0 keeps zero-gradient fixed points
        else:
            u = u.copy()
        state.step += 1
        return u

    if state.m2 is None or (spec.kind == "ademamix" and state.m_slow is None):
        raise ShapeMismatch(f"state is missing buffers required by {spec.kind}")
    t = state.step + 1
    state.m1 = b1 * state.m1 + (1.0 - b1) * g
    state.m2 = spec.beta2 * state.m2 + (1.0 - spec.beta2) * g * g
    m_hat = state.m1 / (1.0 - b1**t)
    denom = np.sqrt(state.m2 / (1.0 - spec.beta2**t)) + spec.epsilon
    if spec.kind == "ademamix":
        state.m_slow = spec.beta3 * state.m_slow + (1.0 - spec.beta3) * g
        u = (m_hat + spec.mix_alpha * state.m_slow) / denom
    else:
        u = m_hat / denom
    state.step += 1
    return u


@dataclass
class SpectraConfig:
    """Every input of the SPECTRA wrapper.

    ``alpha_rule`` is either ``"shape_scaled"`` or a fixed positive number.
    ``clip_method`` selects Newton-Schulz soft clipping (``"soft"``, the
    default) or the SVD-based exact operator (``"exact"``).
    """

    post_clip_c: float = 10.0
    pre_clip_enabled: bool = False
    pre_clip_c: float = 10.0
    weight_decay_lambda: float = 0.1
    alpha_rule: Union[str, float] = "shape_scaled"
    ns_iters: int = 10
    lr_schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    clip_schedule: Optional[ClipScheduleSpec] = None
    clip_method: str = "soft"

    def __post_init__(self):
        if not self.post_clip_c > 0 or not self.pre_clip_c > 0:
            raise ValueError("clipping thresholds must be positive")
        if self.ns_iters < 1:
            raise ValueError("ns_iters must be >= 1")
        if self.weight_decay_lambda < 0:
            raise ValueError("weight_decay_lambda must be non-negative")
        if self.clip_method not in ("soft", "exact"):
            raise ValueError(f"unknown clip_method {self.clip_method!r}")
        if isinstance(self.alpha_rule, str):
            if self.alpha_rule != "shape_scaled":
                raise ValueError(f"unknown alpha rule {self.alpha_rule!r}")
        elif not self.alpha_rule > 0:
            raise ValueError("fixed alpha must be positive")
        if self.clip_schedule is None:
            self.clip_schedule = ClipScheduleSpec("standard", self.post_clip_c)
        elif self.clip_schedule.base_c != self.post_clip_c:
            raise ValueError("clip_schedule.base_c must equal post_clip_c")

    @classmethod
    def recommended(cls, lr_schedule: ScheduleSpec, **overrides) -> "SpectraConfig":
        """lambda = 0.1, c = 10, N_s = 10 with shape-scaled alpha."""
        params = dict(post_clip_c=10.0, weight_decay_lambda=0.1, ns_iters=10, alpha_rule="shape_scaled")
        params.update(overrides)
        return cls(lr_schedule=lr_schedule, **params)

    def alpha_for(self, shape) -> float:
        if not isinstance(self.alpha_rule, str):
            return float(self.alpha_rule)
        if len(shape) == 1:
            return 1.0
        return alpha_for_shape(*shape)

    def lr(self, k: int) -> float:
        return lr_at(self.lr_schedule, k)

    def clip_threshold(self, k: int, eta_k: float) -> float:
        s = self.lr_schedule
        return clip_at(self.clip_schedule, k, eta_k, s.base_lr, s.warmup_steps, s.end_stable, s.total_steps)

    def clip(self, x: np.ndarray, c: float) -> np.ndarray:
        if c <= 0:
            return np.zeros_like(x)
        if self.clip_method == "exact":
            return linalg.spectral_clip_exact(x, c)
        return linalg.soft_spectral_clip(x, c, self.ns_iters)


def spectra_step(
    param,
    grad,
    state: OptimizerState,
    base: BaseOptimizerSpec,
    cfg: SpectraConfig,
    k: int,
) -> np.ndarray:
    """One SPECTRA update; returns the new parameter and mutates ``state``.

    The (optionally pre-clipped) gradient feeds every moment of the base
    optimizer. The clipped direction is stored in ``state.last_direction``.
    """
    x = linalg.as_matrix(param, "param")
    g = linalg.as_matrix(grad, "grad")
    if x.shape != g.shape:
        raise ShapeMismatch(f"param shape {x.shape} != grad shape {g.shape}")
    if k != state.step:
        raise ValueError(f"step index {k} does not match state.step {state.step}")
    if cfg.pre_clip_enabled:
        g = cfg.clip(g, cfg.pre_clip_c)
    eta = cfg.lr(k)
    c_k = cfg.clip_threshold(k, eta)
    u = base_update(base, state, g)
    direction = cfg.clip(u, c_k)
    state.last_direction = direction
    alpha = cfg.alpha_for(x.shape)
    return (1.0 - cfg.weight_decay_lambda * eta) * x - alpha * eta * direction


def clip_grad_norm(grads: Sequence[np.ndarray], max_norm: float) -> list[np.ndarray]:
    """Joint Frobenius clipping of a list of gradients (one scale for all)."""
    if not max_norm > 0:
        raise ValueError("max_norm must be positive")
    total = math.sqrt(sum(float(np.sum(np.square(g))) for g in grads))
    scale = min(1.0, max_norm / total) if total > 0 else 1.0
    return [np.asarray(g, dtype=np.float64) * scale for g in grads]


@dataclass
class CeilingReport:
    sigma_max: np.ndarray
    sigma_min: np.ndarray
    condition: np.ndarray
    ceilings: Optional[np.ndarray]
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def update_norm_ceiling_audit(
    updates: Sequence[np.ndarray],
    alpha: float = 1.0,
    c_series: Optional[Sequence[float]] = None,
    tol: float = 1e-6,
) -> CeilingReport:
    """Spectral statistics of a history of applied update directions.

    ``updates`` are the directions multiplying ``eta_k`` (``alpha * SSC(U_k)``
    for clipped runs, raw ``U_k`` otherwise). When ``c_series`` is given, each
    update is checked against the ceiling ``alpha * c_k + tol``.
    """
    if len(updates) == 0:
        raise ValueError("update history is empty")
    smax, smin = [], []
    for u in updates:
        s = np.linalg.svd(np.atleast_2d(u), compute_uv=False)
        smax.append(s[0])
        smin.append(s[-1])
    smax, smin = np.array(smax), np.array(smin)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(smin > 0, smax / np.where(smin > 0, smin, 1.0), np.inf)
    ceilings = None
    violations = 0
    if c_series is not None:
        if len(c_series) != len(updates):
            raise ValueError("c_series and updates differ in length")
        ceilings = alpha * np.asarray(c_series, dtype=np.float64)
        violations = int(np.sum(smax > ceilings + tol))
    return CeilingReport(smax, smin, cond, ceilings, violations)
