"""Experiment suites and the reference-optimum oracle.

Every suite returns an ``ExperimentResult``: a metric stream, named
pass/fail checks and a summary. Independent (cell, seed) runs go through
``_map`` so they can be spread over a process pool; results are collected
in task order, which keeps the output independent of the worker count.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .. import frank_wolfe as fw
from .. import linalg
from ..errors import ConfigError, HypothesisViolated
from ..synthetic import (
    LogisticProblem,
    SpikeNoiseSpec,
    gen_weight_reg_dataset,
    signal_noise_decompose,
    spike_noise,
)
from .config import RunConfig
from .metrics import ExperimentResult, MetricRecord


def _rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def _map(fn, tasks, jobs: int = 1):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _seeds(cfg: RunConfig) -> list[int]:
    return [cfg.seed + i for i in range(cfg.seeds)]


# -- reference optimum --------------------------------------------------------


@dataclass(frozen=True)
class FStarCertificate:
    value: float
    method: str
    gap_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


_FSTAR_CACHE: dict = {}


def _fingerprint(problem) -> str:
    h = hashlib.sha1()
    for name in ("features", "labels", "target"):
        arr = getattr(problem, name, None)
        if arr is not None:
            h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def compute_f_star(
    problem, reg: fw.RegularizerSpec, ball: fw.SpectralBall, tol: float = 1e-10, max_iter: int = 1_000_000
) -> FStarCertificate:
    """Best composite value found, with the final Frank-Wolfe gap as an error bound.

    Cached per (problem data, regularizer, ball) within the process.
    """
    key = (_fingerprint(problem), reg, ball, tol)
    cert = _FSTAR_CACHE.get(key)
    if cert is None:
        sol = fw.solve_composite(problem, reg, ball, tol=tol, max_iter=max_iter)
        cert = FStarCertificate(sol.value, f"{sol.method}, {sol.iterations} iterations", sol.gap)
        _FSTAR_CACHE[key] = cert
    return cert


def _regularizer(b: float) -> fw.RegularizerSpec:
    return fw.RegularizerSpec("frobenius_sq", b) if b > 0 else fw.RegularizerSpec("none", 0.0)


def smoothed(values, window: int = 10) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if len(values) < window:
        return values
    return np.convolve(values, np.ones(window) / window, mode="valid")


# -- weight regularization ----------------------------------------------------


def _weight_reg_problem(cfg: RunConfig, seed: int) -> LogisticProblem:
    return gen_weight_reg_dataset(cfg.d, cfg.n, cfg.n_test, cfg.sigma_noise, _rng(seed, 0))


def _fw_cell(task):
    cfg, seed, d2, b, mode = task
    problem = _weight_reg_problem(cfg, seed)
    ball = fw.SpectralBall(d2)
    reg = _regularizer(b)
    fstar = compute_f_star(problem, reg, ball)
    lam = cfg.lam if cfg.lam is not None else 1.0 / d2
    stochastic = mode == "stochastic"
    oracle = fw.make_oracle(problem, cfg.batch_size if stochastic else None)
    beta = "k_pow_two_thirds" if stochastic else "one"
    rng = _rng(seed, 1) if stochastic else None
    x0 = np.zeros(problem.shape)
    start = time.monotonic()
    if b > 0:
        params = fw.fw_params_from_problem(ball, b, lam, beta)
        traj = fw.clipped_sgdm_run(oracle, x0, params, cfg.steps, rng)
    else:
        # b = 0: orthogonalized Frank-Wolfe step over the ball (alpha -> infinity limit)
        traj = fw.cfw_run(oracle, x0, reg, ball, cfg.steps, beta, rng)
    elapsed = time.monotonic() - start

    run_id = f"fw_seed{seed}_D2={d2:g}_b={b:g}_{mode}"
    records, residuals = [], []
    for k, x in enumerate(traj.iterates):
        if not np.all(np.isfinite(x)):
            records.append(MetricRecord(run_id, k, train_loss=math.inf, diverged=True))
            break
        train = problem.loss(x)
        resid = train + reg.value(x) - fstar.value
        records.append(MetricRecord.for_iterate(
            run_id, k, x, wall_time_s=elapsed * k / max(cfg.steps, 1), train_loss=train,
            test_loss=problem.test_loss(x) if cfg.n_test else None,
            composite_residual=resid, diverged=not math.isfinite(train),
        ))
        residuals.append(resid)
    final = traj.iterates[-1]
    cell = dict(
        seed=seed, d2=d2, b=b, mode=mode,
        final_frobenius=float(np.linalg.norm(final)),
        final_test_loss=problem.test_loss(final) if cfg.n_test else None,
        final_residual=residuals[-1],
        max_spectral_norm=max(traj.spectral_norms),
        f_star=fstar.to_dict(),
        smoothed_residual_increase=float(np.max(np.diff(smoothed(residuals)), initial=0.0)),
    )
    return records, cell


def run_fw_weight_reg(cfg: RunConfig, jobs: int = 1) -> ExperimentResult:
    """Weight-regularization grid over (D2, b) with the Frank-Wolfe parameter mapping."""
    cfg = cfg.resolved()
    if cfg.experiment != "fw_weight_reg":
        raise ConfigError("config is not an fw_weight_reg experiment")
    tasks = [
        (cfg, seed, d2, b, mode)
        for seed in _seeds(cfg)
        for mode in cfg.modes
        for d2 in cfg.d2_list
        for b in cfg.b_list
    ]
    out = _map(_fw_cell, tasks, jobs)
    records = [r for recs, _ in out for r in recs]
    cells = [c for _, c in out]

    checks = {
        "feasible": all(c["max_spectral_norm"] <= c["d2"] + 1e-8 for c in cells),
        "no_divergence": not any(r.diverged for r in records),
    }
    bs = sorted(set(cfg.b_list))
    if len(bs) > 1:
        ok = True
        for seed in _seeds(cfg):
            for mode in cfg.modes:
                for d2 in cfg.d2_list:
                    frob = {c["b"]: c["final_frobenius"] for c in cells
                            if (c["seed"], c["mode"], c["d2"]) == (seed, mode, d2)}
                    ok &= all(frob[lo] > frob[hi] for lo, hi in zip(bs, bs[1:]))
        checks["frobenius_decreasing_in_b"] = bool(ok)
    summary = {"cells": cells}
    if "deterministic" in cfg.modes:
        # the b = 0 orthogonalized step oscillates around an active constraint,
        # so monotonicity is only asserted for the clipped-momentum runs
        det = [c for c in cells if c["mode"] == "deterministic"]
        if any(c["b"] > 0 for c in det):
            checks["smoothed_residual_nonincreasing"] = all(
                c["smoothed_residual_increase"] <= 1e-12 for c in det if c["b"] > 0
            )
        summary["b0_max_smoothed_residual_increase"] = max(
            (c["smoothed_residual_increase"] for c in det if c["b"] == 0), default=None
        )
    if 0.0 in bs and len(bs) > 1 and 1.0 in cfg.d2_list and cfg.n_test:
        ok = True
        for seed in _seeds(cfg):
            for mode in cfg.modes:
                test = {c["b"]: c["final_test_loss"] for c in cells
                        if (c["seed"], c["mode"], c["d2"]) == (seed, mode, 1.0)}
                ok &= min(v for b, v in test.items() if b > 0) <= test[0.0]
        checks["regularization_improves_test_loss_at_D2_1"] = bool(ok)
    return ExperimentResult("fw_weight_reg", records, checks, summary)


# -- spike-noise robustness ---------------------------------------------------


def _spike_problem(cfg: RunConfig, seed: int) -> LogisticProblem:
    return gen_weight_reg_dataset(cfg.d, cfg.n, max(cfg.n_test, 1), cfg.sigma_noise, _rng(seed, 0))


def spike_run(problem, method: str, eta0: float, ell: float, r: int, c: float, steps: int,
              rng: np.random.Generator, beta: float = 0.1) -> dict:
    """One SGD-family run with ``g = grad f + ell U V^T``; ``eta_k = eta0/sqrt(k+1)``."""
    x = np.zeros(problem.shape)
    spec = SpikeNoiseSpec(ell, r)
    losses = [problem.loss(x)]
    m = None
    worst_ratio = 0.0
    diverged = False
    for k in range(steps):
        grad = problem.grad(x)
        g = grad + spike_noise(grad.shape, spec, rng) if ell > 0 else grad
        if method == "vanilla":
            u = g
        elif method == "global_clip":
            u = linalg.global_clip(g, c)
        elif method == "spectral_clip":
            u = linalg.spectral_clip_exact(g, c)
            worst_ratio = max(worst_ratio, np.linalg.norm(u) / (np.linalg.norm(grad) + math.sqrt(r) * c))
        else:
            fed = linalg.spectral_clip_exact(g, c) if method == "sgdm_preclip" else g
            m = fed if m is None else fw.momentum_update(m, fed, beta)
            u = m
        with np.errstate(over="ignore", invalid="ignore"):  # divergence is detected below
            x = x - eta0 / math.sqrt(k + 1.0) * u
            loss = problem.loss(x) if np.all(np.isfinite(x)) else math.inf
        if not math.isfinite(loss):
            diverged = True
            losses.append(math.inf)
            break
        losses.append(loss)
    return dict(losses=losses, final=losses[-1], diverged=diverged, update_ratio=worst_ratio)


def _spike_task(task):
    cfg, seed, ell_idx, method, eta0 = task
    problem = _spike_problem(cfg, seed)
    ell = cfg.ell_list[ell_idx]
    rng = _rng(seed, 2, ell_idx)  # same noise stream for every method and eta0
    return spike_run(problem, method, eta0, ell, cfg.r, cfg.c, cfg.steps, rng, cfg.momentum_beta)


def run_spike_robustness(cfg: RunConfig, jobs: int = 1) -> ExperimentResult:
    """Vanilla / global-clip / spectral-clip SGD and momentum variants under spike noise."""
    cfg = cfg.resolved()
    if cfg.experiment != "spike_robustness":
        raise ConfigError("config is not a spike_robustness experiment")
    if cfg.r > cfg.d:
        raise ConfigError("noise rank exceeds d")
    tasks = [
        (cfg, seed, i, method, eta0)
        for seed in _seeds(cfg)
        for i in range(len(cfg.ell_list))
        for method in cfg.methods
        for eta0 in cfg.eta0_grid
    ]
    runs = dict(zip([t[1:] for t in tasks], _map(_spike_task, tasks, jobs)))

    records, best = [], {}
    for seed in _seeds(cfg):
        for i, ell in enumerate(cfg.ell_list):
            for method in cfg.methods:
                grid = {eta0: runs[(seed, i, method, eta0)] for eta0 in cfg.eta0_grid}
                eta_best = min(grid, key=lambda e: grid[e]["final"])
                run = grid[eta_best]
                best[(seed, ell, method)] = dict(
                    eta0=eta_best, final=run["final"],
                    grid={f"{e:g}": grid[e]["final"] for e in cfg.eta0_grid},
                )
                run_id = f"spike_seed{seed}_ell={ell:g}_{method}"
                for k, loss in enumerate(run["losses"]):
                    records.append(MetricRecord(run_id, k, train_loss=loss, diverged=not math.isfinite(loss),
                                                extra={"eta0": eta_best} if k == 0 else {}))

    checks = {}
    ratios = [r["update_ratio"] for key, r in runs.items() if key[2] == "spectral_clip"]
    if ratios:
        checks["spectral_update_within_bound"] = max(ratios) <= 1.0 + 1e-9
    core = [m for m in ("vanilla", "global_clip", "spectral_clip") if m in cfg.methods]
    if len(cfg.ell_list) > 1 and len(core) == 3:
        hi, lo = max(cfg.ell_list), min(cfg.ell_list)
        fin = lambda s, ell, m: best[(s, ell, m)]["final"]
        checks["spectral_beats_others_at_max_ell"] = all(
            fin(s, hi, "spectral_clip") < min(fin(s, hi, "vanilla"), fin(s, hi, "global_clip"))
            for s in _seeds(cfg)
        )
        checks["global_not_worse_than_vanilla_at_max_ell"] = all(
            fin(s, hi, "global_clip") <= fin(s, hi, "vanilla") for s in _seeds(cfg)
        )
        checks["comparable_at_min_ell"] = all(
            max(fin(s, lo, m) for m in core) <= 1.1 * min(fin(s, lo, m) for m in core)
            for s in _seeds(cfg)
        )
    summary = {"best": [dict(seed=s, ell=e, method=m, **v) for (s, e, m), v in best.items()]}
    return ExperimentResult("spike_robustness", records, checks, summary)


# -- lemma Monte-Carlo --------------------------------------------------------


@dataclass(frozen=True)
class LemmaInstance:
    signal: np.ndarray  # G
    ell: float
    r: int

    @property
    def g_spec(self) -> float:
        return linalg.spectral_norm(self.signal)

    @property
    def g_frob(self) -> float:
        return float(np.linalg.norm(self.signal))


def make_lemma_instance(d: int, r: int, ell: float, g_norm: float, g_rank: int,
                        rng: np.random.Generator) -> LemmaInstance:
    """Square d x d signal with ``g_rank`` equal singular values ``g_norm``."""
    a = linalg.sample_stiefel(d, g_rank, rng).matrix
    b = linalg.sample_stiefel(d, g_rank, rng).matrix
    return LemmaInstance(g_norm * a @ b.T, float(ell), r)


def check_lemma_hypotheses(inst: LemmaInstance, c_spectral: float, c_global: float, kappa: float = 1.0):
    q = min(inst.signal.shape)
    g2, gf = inst.g_spec, inst.g_frob
    if inst.ell < 9.0 * math.sqrt(inst.r) * g2:
        raise HypothesisViolated(f"need ell >= 9 sqrt(r) ||G||_2 = {9 * math.sqrt(inst.r) * g2:.4g}")
    if c_spectral < g2:
        raise HypothesisViolated(f"need c >= ||G||_2 = {g2:.4g}")
    if 25.0 * kappa * inst.r**2 > q:
        raise HypothesisViolated(f"need 25 kappa r^2 <= {q}")
    if inst.ell < 3.0 * gf:
        raise HypothesisViolated(f"need ell >= 3 ||G||_F = {3 * gf:.4g}")
    if c_global > math.sqrt(inst.r) * (inst.ell - g2):
        raise HypothesisViolated("global clip threshold above sqrt(r)(ell - ||G||_2)")


def lemma_draws(inst: LemmaInstance, c_spectral: float, c_global: float, c_third: float,
                draws: int, rng: np.random.Generator, chunk: int = 10_000) -> dict:
    """Per-draw inner products and squared norms for the three clipping settings.

    ``g = G + ell U V^T`` has rank at most ``rank(G) + r``, so its SVD is
    taken from the factored form.
    """
    G = inst.signal
    d1, d2 = G.shape
    ug, sg, vg = linalg.svd_compact(G)
    # numerical rank; round-off singular values would inflate the factors
    keep = sg > (sg[0] if len(sg) else 0.0) * max(G.shape) * np.finfo(float).eps
    lg = ug[:, keep] * np.sqrt(sg[keep])
    rg = vg[:, keep] * np.sqrt(sg[keep])
    g_sq = inst.g_frob**2
    out = {k: [] for k in ("spec_inner", "spec_sq", "glob_inner", "glob_sq", "third_inner", "third_sq",
                           "third_scale")}
    done = 0
    while done < draws:
        size = min(chunk, draws - done)
        u = linalg.sample_stiefel_batch(d1, inst.r, size, rng)
        v = linalg.sample_stiefel_batch(d2, inst.r, size, rng)
        left = np.concatenate([np.broadcast_to(lg, (size,) + lg.shape), inst.ell * u], axis=2)
        right = np.concatenate([np.broadcast_to(rg, (size,) + rg.shape), v], axis=2)
        fu, fs, fv = linalg.factored_svd(left, right)
        clipped = np.minimum(fs, c_spectral)
        # <G, u_i v_i^T> = u_i^T G v_i
        proj = np.sum(fu * (G @ fv), axis=1)
        out["spec_inner"].append(np.sum(clipped * proj, axis=1))
        out["spec_sq"].append(np.sum(clipped**2, axis=1))

        cross = np.sum(u * (G @ v), axis=(1, 2))  # <G, U V^T>
        inner_raw = g_sq + inst.ell * cross
        g_frob_sq = np.sum(fs**2, axis=1)
        g_frob = np.sqrt(g_frob_sq)
        for name, c in (("glob", c_global), ("third", c_third)):
            scale = np.minimum(1.0, c / g_frob)
            out[f"{name}_inner"].append(scale * inner_raw)
            out[f"{name}_sq"].append(scale**2 * g_frob_sq)
            if name == "third":
                out["third_scale"].append(scale)
        done += size
    return {k: np.concatenate(v) for k, v in out.items()}


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


def lemma_report(inst: LemmaInstance, c_spectral: float, c_global: float, draws: int,
                 rng: np.random.Generator, slack: float = 4.0) -> tuple[dict, dict]:
    """Monte-Carlo estimates and checks for the spectral and global clipping bounds."""
    check_lemma_hypotheses(inst, c_spectral, c_global)
    g2, gf2, r, ell = inst.g_spec, inst.g_frob**2, inst.r, inst.ell
    c_third = max(ell + g2, math.sqrt(r) * ell + math.sqrt(gf2))
    data = lemma_draws(inst, c_spectral, c_global, c_third, draws, rng)
    est = {k: _mean_se(v) for k, v in data.items() if k != "third_scale"}

    sq_bound = r * min(c_spectral, ell + g2) ** 2 + gf2
    lo3 = 4.0 * c_global / (5.0 * math.sqrt(r) * ell) * gf2
    hi3 = c_global / (math.sqrt(r) * ell) * gf2
    (si, si_se), (ss, ss_se) = est["spec_inner"], est["spec_sq"]
    (gi, gi_se) = est["glob_inner"]
    (ti, ti_se), (ts, ts_se) = est["third_inner"], est["third_sq"]
    checks = {
        "spectral_inner_lower": si >= gf2 / 3.0 - slack * si_se,
        "spectral_second_moment_upper": ss <= sq_bound + slack * ss_se,
        "global_inner_in_band": lo3 - slack * gi_se <= gi <= hi3 + slack * gi_se,
        "global_norm_equals_c": bool(np.max(np.abs(data["glob_sq"] - c_global**2)) <= 1e-9 * c_global**2),
        "third_regime_unclipped": bool(np.all(data["third_scale"] == 1.0)),
        "third_regime_inner": abs(ti - gf2) <= slack * ti_se + 1e-12,
        "third_regime_second_moment": abs(ts - (gf2 + r * ell**2)) <= slack * ts_se + 1e-9,
    }
    report = dict(
        g_spectral=g2, g_frobenius_sq=gf2, ell=ell, r=r, draws=draws,
        c_spectral=c_spectral, c_global=c_global, c_third=c_third,
        estimates={k: dict(mean=m, se=s) for k, (m, s) in est.items()},
        bounds=dict(spectral_inner_lower=gf2 / 3.0, spectral_second_moment_upper=sq_bound,
                    global_inner_lower=lo3, global_inner_upper=hi3, global_second_moment=c_global**2,
                    third_inner=gf2, third_second_moment=gf2 + r * ell**2),
    )
    return report, {k: bool(v) for k, v in checks.items()}


def run_lemma_mc(cfg: RunConfig, jobs: int = 1) -> ExperimentResult:
    cfg = cfg.resolved()
    if cfg.experiment != "lemma_mc":
        raise ConfigError("config is not a lemma_mc experiment")
    records, checks, reports = [], {}, []
    for seed in _seeds(cfg):
        for i, ell in enumerate(cfg.ell_list):
            inst = make_lemma_instance(cfg.d, cfg.r, ell, cfg.g_norm, cfg.g_rank, _rng(seed, 3, i))
            c_global = cfg.extra.get("c_global", 0.5 * math.sqrt(cfg.r) * (ell - inst.g_spec))
            report, ok = lemma_report(inst, cfg.c, c_global, cfg.draws, _rng(seed, 4, i))
            run_id = f"lemma_seed{seed}_ell={ell:g}"
            for step, (name, vals) in enumerate(report["estimates"].items()):
                records.append(MetricRecord(run_id, step, extra={"quantity": name, **vals}))
            for name, value in ok.items():
                checks[name] = checks.get(name, True) and value
            reports.append(dict(seed=seed, checks=ok, **report))
    return ExperimentResult("lemma_mc", records, checks, {"reports": reports})


# -- noise structure ----------------------------------------------------------


def run_noise_analysis(cfg: RunConfig, jobs: int = 1) -> ExperimentResult:
    """Signal (full-data gradient) versus per-sample noise subspaces."""
    cfg = cfg.resolved()
    if cfg.experiment != "noise_analysis":
        raise ConfigError("config is not a noise_analysis experiment")
    if cfg.r > cfg.d:
        raise ConfigError("r exceeds d")
    records, counts, in_range = [], [], True
    for seed in _seeds(cfg):
        problem = gen_weight_reg_dataset(cfg.d, cfg.n, max(cfg.n_test, 1), cfg.sigma_noise, _rng(seed, 0))
        x = np.zeros(problem.shape)
        signal = problem.grad(x)
        for i, ell in enumerate(cfg.ell_list):
            rng = _rng(seed, 5, i)
            grads = []
            for _ in range(cfg.samples):
                g = problem.grad(x, [int(rng.integers(problem.n))]) if cfg.sample_noise else signal.copy()
                if ell > 0:
                    g = g + spike_noise(g.shape, SpikeNoiseSpec(ell, cfg.r), rng)
                grads.append(g)
            rows = signal_noise_decompose(grads, signal, cfg.r)
            counts.append(len(rows))
            run_id = f"noise_seed{seed}_ell={ell:g}"
            for row in rows:
                dists = [row.d_spec, row.d_chord, row.d_spec_left, row.d_spec_right,
                         row.d_chord_left, row.d_chord_right]
                in_range &= all(0.0 <= v <= 1.0 for v in dists)
                records.append(MetricRecord(run_id, row.index, extra=dict(
                    d_spec=row.d_spec, d_chord=row.d_chord,
                    d_spec_left=row.d_spec_left, d_spec_right=row.d_spec_right,
                    d_chord_left=row.d_chord_left, d_chord_right=row.d_chord_right,
                    noise_singular_values=row.noise_singular_values,
                )))
    checks = {
        "record_count": all(c == cfg.samples for c in counts),
        "distances_in_unit_interval": bool(in_range),
    }
    return ExperimentResult("noise_analysis", records, checks, {"record_counts": counts})


# -- momentum coefficients ----------------------------------------------------


def run_momentum_audit(cfg: RunConfig, jobs: int = 1) -> ExperimentResult:
    cfg = cfg.resolved()
    if cfg.experiment != "momentum_audit":
        raise ConfigError("config is not a momentum_audit experiment")
    if cfg.steps < 1:
        raise ConfigError("momentum_audit needs steps >= 1")
    s_max, b_max = fw.momentum_coefficient_audit(cfg.steps)
    checks = {"s_bound": s_max <= 3.0, "b_bound": b_max <= 1.0}
    rec = MetricRecord("momentum_audit", cfg.steps, extra={"max_s_k_cuberoot": s_max, "max_b_k_two_thirds": b_max})
    return ExperimentResult("momentum_audit", [rec], checks, {"max_s": s_max, "max_b": b_max, "K": cfg.steps})


RUNNERS = {
    "fw_weight_reg": run_fw_weight_reg,
    "spike_robustness": run_spike_robustness,
    "lemma_mc": run_lemma_mc,
    "noise_analysis": run_noise_analysis,
    "momentum_audit": run_momentum_audit,
}


def run_experiment(cfg: RunConfig, jobs: int = 1) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg, jobs)


def f_star_for_config(cfg: RunConfig) -> list[dict]:
    """F* certificates for every (seed, D2, b) cell of a weight-regularization config."""
    cfg = cfg.resolved()
    if cfg.experiment != "fw_weight_reg":
        raise ConfigError("fstar is only defined for fw_weight_reg configs")
    out = []
    for seed in _seeds(cfg):
        problem = _weight_reg_problem(cfg, seed)
        for d2 in cfg.d2_list:
            for b in cfg.b_list:
                cert = compute_f_star(problem, _regularizer(b), fw.SpectralBall(d2))
                out.append(dict(seed=seed, d2=d2, b=b, **cert.to_dict()))
    return out
