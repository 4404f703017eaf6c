"""Metric records, CSV/JSON emission and the CSV schema validator."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

FLOAT_COLUMNS = (
    "train_loss",
    "test_loss",
    "composite_residual",
    "spectral_norm",
    "frobenius_norm",
    "linf_norm",
)
HEADER = ("run_id", "step") + FLOAT_COLUMNS + ("diverged", "extra")
HEADER_WITH_TIME = ("run_id", "step", "wall_time_s") + FLOAT_COLUMNS + ("diverged", "extra")


@dataclass
class MetricRecord:
    run_id: str
    step: int
    wall_time_s: float = 0.0
    train_loss: Optional[float] = None
    test_loss: Optional[float] = None
    composite_residual: Optional[float] = None
    spectral_norm: Optional[float] = None
    frobenius_norm: Optional[float] = None
    linf_norm: Optional[float] = None
    diverged: bool = False
    extra: dict = field(default_factory=dict)

    @classmethod
    def for_iterate(cls, run_id: str, step: int, x: np.ndarray, **kwargs) -> "MetricRecord":
        return cls(
            run_id,
            step,
            spectral_norm=float(np.linalg.norm(x, 2)),
            frobenius_norm=float(np.linalg.norm(x)),
            linf_norm=float(np.max(np.abs(x))),
            **kwargs,
        )


@dataclass
class ExperimentResult:
    """Metric stream plus named pass/fail checks and a JSON-able summary."""

    experiment: str
    records: list
    checks: dict
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def fmt_float(value) -> str:
    if value is None:
        return ""
    return "%.17g" % value


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        # JSON has no inf/nan; store them as strings
        return obj if math.isfinite(obj) else repr(obj)
    return obj


def emit_metrics(
    records: Iterable[MetricRecord],
    path,
    config: Optional[dict] = None,
    summary: Optional[dict] = None,
    wall_time: bool = False,
) -> Path:
    """Write ``records`` to ``path`` (CSV) and a ``.json`` sidecar next to it.

    Floats use 17 significant digits. Wall time is only written when asked
    for, so that identical runs give byte-identical files.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = HEADER_WITH_TIME if wall_time else HEADER
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in records:
            row = [rec.run_id, str(rec.step)]
            if wall_time:
                row.append(fmt_float(rec.wall_time_s))
            row += [fmt_float(getattr(rec, name)) for name in FLOAT_COLUMNS]
            row.append("1" if rec.diverged else "0")
            row.append(json.dumps(_jsonable(rec.extra), sort_keys=True) if rec.extra else "")
            writer.writerow(row)
    if config is not None or summary is not None:
        sidecar = {"config": _jsonable(config or {}), "summary": _jsonable(summary or {})}
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path


def validate_metrics_csv(path) -> list[str]:
    """Return a list of schema problems; empty means the file is valid.

    Checks the header, numeric columns, non-decreasing steps within each
    run, and that non-finite values only appear on diverged rows.
    """
    problems = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            return ["empty file"]
        if header not in (HEADER, HEADER_WITH_TIME):
            return [f"unexpected header {header}"]
        last_step: dict = {}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                problems.append(f"line {lineno}: {len(row)} fields, expected {len(header)}")
                continue
            rec = dict(zip(header, row))
            try:
                step = int(rec["step"])
            except ValueError:
                problems.append(f"line {lineno}: step {rec['step']!r} is not an integer")
                continue
            if step < last_step.get(rec["run_id"], step):
                problems.append(f"line {lineno}: step decreases in run {rec['run_id']}")
            last_step[rec["run_id"]] = step
            if rec["diverged"] not in ("0", "1"):
                problems.append(f"line {lineno}: diverged flag {rec['diverged']!r}")
            numeric = FLOAT_COLUMNS + (("wall_time_s",) if "wall_time_s" in rec else ())
            for name in numeric:
                if rec[name] == "":
                    continue
                try:
                    value = float(rec[name])
                except ValueError:
                    problems.append(f"line {lineno}: {name}={rec[name]!r} is not a number")
                    continue
                if not math.isfinite(value) and rec["diverged"] != "1":
                    problems.append(f"line {lineno}: non-finite {name} without diverged flag")
            if rec["extra"]:
                try:
                    json.loads(rec["extra"])
                except json.JSONDecodeError:
                    problems.append(f"line {lineno}: extra is not valid JSON")
    return problems
