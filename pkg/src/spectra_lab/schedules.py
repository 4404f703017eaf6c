"""Learning-rate and clipping-threshold schedules.

Step indices may be floats; the formulas are continuous across phase
boundaries, which is what the continuity tests exercise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OutOfRange

LR_KINDS = ("constant", "cosine", "wsd", "fw_harmonic", "inv_sqrt")
CLIP_KINDS = ("standard", "wsd_sqrt", "constant")


@dataclass(frozen=True)
class ScheduleSpec:
    """Learning-rate schedule.

    ``fw_harmonic`` ignores ``base_lr`` and returns ``2 / (fw_lambda (k + 2))``
    so that ``lambda * eta_k = 2 / (k + 2)``. ``inv_sqrt`` returns
    ``base_lr / sqrt(k + 1)``.
    """

    kind: str = "constant"
    base_lr: float = 1e-3
    warmup_steps: int = 0
    total_steps: int = 1000
    final_lr_fraction: float = 0.0
    stable_fraction: float = 0.8
    fw_lambda: float = 1.0

    def __post_init__(self):
        if self.kind not in LR_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.base_lr <= 0:
            raise ValueError("base_lr must be positive")
        if self.total_steps < 1 or not 0 <= self.warmup_steps < self.total_steps:
            raise ValueError("need 0 <= warmup_steps < total_steps")
        if self.final_lr_fraction < 0:
            raise ValueError("final_lr_fraction must be non-negative")
        if not 0 < self.stable_fraction <= 1:
            raise ValueError("stable_fraction must lie in (0, 1]")
        if self.fw_lambda <= 0:
            raise ValueError("fw_lambda must be positive")

    @property
    def end_stable(self) -> float:
        return max(self.stable_fraction * self.total_steps, float(self.warmup_steps))


@dataclass(frozen=True)
class ClipScheduleSpec:
    kind: str = "standard"
    base_c: float = 10.0

    def __post_init__(self):
        if self.kind not in CLIP_KINDS:
            raise ValueError(f"unknown clip schedule kind {self.kind!r}")
        if not self.base_c > 0:
            raise ValueError("base_c must be positive")


def _warmup(spec: ScheduleSpec, k: float) -> float:
    # reaches base_lr exactly at k = warmup_steps and is positive at k = 0
    return spec.base_lr * (k + 1.0) / (spec.warmup_steps + 1.0)


def lr_at(spec: ScheduleSpec, k: float) -> float:
    """Learning rate at step ``k`` (``0 <= k < total_steps``)."""
    if not 0 <= k < spec.total_steps:
        raise OutOfRange(f"step {k} outside [0, {spec.total_steps})")
    if spec.kind == "fw_harmonic":
        return 2.0 / (spec.fw_lambda * (k + 2.0))
    if spec.kind == "inv_sqrt":
        return spec.base_lr / math.sqrt(k + 1.0)
    w = spec.warmup_steps
    if w > 0 and k <= w:
        return _warmup(spec, k)
    if spec.kind == "constant":
        return spec.base_lr
    if spec.kind == "cosine":
        progress = (k - w) / (spec.total_steps - w)
        floor = spec.final_lr_fraction * spec.base_lr
        return floor + (spec.base_lr - floor) * 0.5 * (1.0 + math.cos(math.pi * progress))
    # wsd: constant until end_stable, then square-root decay to zero at total_steps
    end = spec.end_stable
    if k <= end:
        return spec.base_lr
    return spec.base_lr * (1.0 - math.sqrt((k - end) / (spec.total_steps - end)))


def clip_at(
    spec: ClipScheduleSpec,
    k: float,
    eta_k: float,
    eta_base: float,
    warmup: int,
    end_stable: float,
    total: int,
) -> float:
    """Clipping threshold ``c_k``.

    During warmup ``c * eta / eta_k`` keeps ``c_k * eta_k`` constant; the
    ``wsd_sqrt`` kind additionally decays ``c_k`` to zero over the final
    phase.
    """
    c = spec.base_c
    if spec.kind == "constant":
        return c
    if not eta_k > 0:
        raise ValueError("eta_k must be positive")
    if k <= warmup:
        return c * eta_base / eta_k
    if spec.kind == "standard" or k <= end_stable:
        return c
    if total <= end_stable:
        return c
    frac = min((k - end_stable) / (total - end_stable), 1.0)
    return max(c * (1.0 - math.sqrt(frac)), 0.0)
