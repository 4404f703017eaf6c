"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` (lines are printed even
without ``-s``) or directly with ``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

import oracles
from spectra_lab import frank_wolfe as fw
from spectra_lab import linalg
from spectra_lab.harness import RunConfig, compute_f_star, run_experiment
from spectra_lab.harness import experiments as ex
from spectra_lab.optimizers import (
    BaseOptimizerSpec,
    OptimizerState,
    SpectraConfig,
    base_update,
    spectra_step,
    update_norm_ceiling_audit,
)
from spectra_lab.schedules import ScheduleSpec
from spectra_lab.synthetic import LogisticProblem, gen_weight_reg_dataset


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:2d}  {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def weight_reg_problem(seed=0):
    return ex._weight_reg_problem(RunConfig("fw_weight_reg", seed=seed).resolved(), seed)


def test_c01_soft_clip_matches_scalar_map(report):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        m, n = int(rng.integers(2, 65)), int(rng.integers(2, 97))
        q = min(m, n)
        cond = 10 ** rng.uniform(0, 4)
        s_max = 10 ** rng.uniform(-2, 2)
        s = np.sort(s_max * cond ** -rng.uniform(0, 1, q))[::-1]
        s[0], s[-1] = s_max, s_max / cond
        x = oracles.matrix_with_spectrum(rng, m, n, s)
        c = s_max / rng.uniform(1.05, 8.0)
        got = np.linalg.svd(linalg.soft_spectral_clip(x, c, 10), compute_uv=False)
        want = np.array([oracles.h(v, c) for v in np.linalg.svd(x, compute_uv=False)])
        worst = max(worst, float(np.max(np.abs(got - want) / want)))
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-6 and elapsed < 10, f"max rel err {worst:.2e} (tol 1e-6), {elapsed:.1f} s (< 10 s)")


def test_c02_scalar_gap_bound(report):
    rng = np.random.default_rng(2)
    c = 10 ** rng.uniform(-2, 2, 10_000)
    x = c * rng.choice([-1, 1], 10_000) * 10 ** rng.uniform(-3, 3, 10_000)
    gap = np.abs([linalg.scalar_soft_clip(xi, ci) - linalg.scalar_clip(xi, ci) for xi, ci in zip(x, c)])
    ax = np.abs(x)
    bound = np.where(ax <= c, ax**3 / (2 * c * c), c**3 / (2 * x * x))
    excess = float(np.max((gap - bound) / c))
    report(2, excess <= 1e-15, f"max (gap - bound)/c = {excess:.2e} over 10^4 pairs (slack 1e-15)")


def test_c03_projection_law(report):
    rng = np.random.default_rng(3)
    dominated = 0
    for _ in range(200):
        m, n = rng.integers(1, 7, size=2)
        a = 3 * rng.standard_normal((m, n))
        radius = rng.uniform(0.1, 3.0)
        p = linalg.spectral_clip_exact(a, radius)
        ys = oracles.random_ball_points(rng, (m, n), radius, 50)
        dominated += bool(np.all(np.linalg.norm(a - p) <= np.linalg.norm(a - ys, axis=(1, 2)) + 1e-12))
    worst = -np.inf
    for _ in range(20):
        g = 3 * rng.standard_normal((3, 3))
        b = rng.uniform(0.2, 2.0)
        ball = fw.SpectralBall(rng.uniform(0.2, 2.0))
        obj = lambda x: float(np.sum(g * x) + 0.5 * b * np.sum(x * x))
        best = oracles.pgd_min(lambda x: g + b * x, obj, ball.project, np.zeros((3, 3)), 0.5 / b, iters=2000)
        worst = max(worst, obj(fw.lmo_frobenius(g, b, ball)) - best)
    ok = dominated == 200 and worst <= 1e-6
    report(3, ok, f"dominance {dominated}/200, LMO minus PGD objective {worst:.2e} (tol 1e-6)")


def test_c04_clipped_momentum_equivalence(report):
    problem = weight_reg_problem()
    start = time.perf_counter()
    det = fw.fw_params_from_problem(fw.SpectralBall(1.0), 0.1, 1.0)
    sto = fw.fw_params_from_problem(fw.SpectralBall(1.0), 0.1, 1.0, "k_pow_two_thirds")
    dev_det = fw.equivalence_check(problem, 200, det, seed=0)
    dev_sto = fw.equivalence_check(problem, 200, sto, seed=0, batch_size=20)
    control = fw.equivalence_check(problem, 200, det, seed=0, c_override=1.1 * det.c_fixed)
    elapsed = time.perf_counter() - start
    ok = max(dev_det, dev_sto) <= 1e-8 and control > 1e-3 and elapsed < 30
    report(4, ok, f"deviation det {dev_det:.1e} sto {dev_sto:.1e} (tol 1e-8), "
                  f"control {control:.2e} (> 1e-3), {elapsed:.1f} s")


def test_c05_envelope(report):
    problem = weight_reg_problem()
    worst = 0.0
    for d2 in (0.2, 1.0, 5.0):
        ball = fw.SpectralBall(d2)
        c_hat = 2.0 * fw.estimate_curvature(problem, ball, 1000, np.random.default_rng(5))
        for b in (0.0, 0.1, 1.0):
            reg = ex._regularizer(b)
            f_star = compute_f_star(problem, reg, ball).value
            oracle = fw.make_oracle(problem)
            traj = fw.cfw_run(oracle, np.zeros(problem.shape), reg, ball, 1000,
                              objective=lambda x: problem.loss(x) + reg.value(x), keep_iterates=False)
            k = np.arange(len(traj.objective))
            ratio = (np.asarray(traj.objective) - f_star) * (k + 1) / (2 * c_hat)
            worst = max(worst, float(ratio[10:].max()))
    report(5, worst <= 1.0, f"max (F - F*)(k+1)/(2 C_f) over k >= 10, 9 cells: {worst:.3f} (<= 1)")


def test_c06_weight_regularization_grid(report):
    start = time.perf_counter()
    res = run_experiment(RunConfig("fw_weight_reg", seed=0, seeds=5))
    elapsed = time.perf_counter() - start
    names = ("feasible", "frobenius_decreasing_in_b", "regularization_improves_test_loss_at_D2_1")
    ok = all(res.checks[n] for n in names) and elapsed < 120
    report(6, ok, ", ".join(f"{n}={res.checks[n]}" for n in names) + f", {elapsed:.1f} s (< 120 s)")


@pytest.fixture(scope="module")
def lemma_result():
    start = time.perf_counter()
    res = run_experiment(RunConfig("lemma_mc", seed=0))
    return res, time.perf_counter() - start


def test_c07_spectral_clip_moments(report, lemma_result):
    res, elapsed = lemma_result
    rep = res.summary["reports"][0]
    est, bnd = rep["estimates"], rep["bounds"]
    names = ("spectral_inner_lower", "spectral_second_moment_upper")
    ok = all(res.checks[n] for n in names) and elapsed < 60 and rep["ell"] == 20 * rep["g_spectral"]
    report(7, ok, f"E<G,clip> {est['spec_inner']['mean']:.4f} >= {bnd['spectral_inner_lower']:.4f} - 4SE, "
                  f"E|g~|^2 {est['spec_sq']['mean']:.3f} <= {bnd['spectral_second_moment_upper']:.3f} + 4SE, "
                  f"{elapsed:.1f} s")


def test_c08_global_clip_moments(report, lemma_result):
    res, _ = lemma_result
    rep = res.summary["reports"][0]
    names = ("global_inner_in_band", "global_norm_equals_c", "third_regime_unclipped",
             "third_regime_inner", "third_regime_second_moment")
    gi = rep["estimates"]["glob_inner"]["mean"]
    ok = all(res.checks[n] for n in names)
    report(8, ok, f"E<G,g~> {gi:.4f} in [{rep['bounds']['global_inner_lower']:.4f}, "
                  f"{rep['bounds']['global_inner_upper']:.4f}] +- 4SE; "
                  + ", ".join(f"{n}={res.checks[n]}" for n in names[1:]))


def test_c09_spike_robustness_ordering(report):
    cfg = RunConfig("spike_robustness", seed=0, seeds=5, ell_list=[10.0, 1000.0],
                    methods=["vanilla", "global_clip", "spectral_clip"])
    res = run_experiment(cfg)
    names = ("spectral_beats_others_at_max_ell", "comparable_at_min_ell")
    hi = {m: max(b["final"] for b in res.summary["best"] if b["ell"] == 1000.0 and b["method"] == m)
          for m in cfg.methods}
    ok = all(res.checks[n] for n in names)
    report(9, ok, ", ".join(f"{n}={res.checks[n]}" for n in names)
           + "; worst final at l=1000: " + ", ".join(f"{m} {v:.3g}" for m, v in hi.items()))


def test_c10_stiefel_statistics(report):
    rng = np.random.default_rng(10)
    u = linalg.sample_stiefel_batch(50, 5, 20_000, rng)
    second = np.mean(u @ np.swapaxes(u, 1, 2), axis=0)
    target = 0.1 * np.eye(50)
    rel = float(np.linalg.norm(second - target) / np.linalg.norm(target))
    mean = float(np.linalg.norm(u.mean(axis=0)))
    report(10, rel <= 0.05 and mean <= 0.05, f"second-moment rel err {rel:.4f}, |E U|_F {mean:.4f} (tol 0.05)")


def test_c11_momentum_coefficients(report):
    start = time.perf_counter()
    s_max, b_max = fw.momentum_coefficient_audit(10**6)
    elapsed = time.perf_counter() - start
    ok = s_max <= 3 and b_max <= 1 and elapsed < 5
    report(11, ok, f"max S_k k^(1/3) {s_max:.6f} (<= 3), max B_k k^(2/3) {b_max:.6f} (<= 1), {elapsed:.2f} s")


def test_c12_spectra_ceiling(report):
    rng = np.random.default_rng(12)
    m, n, count = 32, 16, 200
    x_true = rng.standard_normal((m, n))
    feats = rng.standard_normal((count, m, n))
    labels = np.where(np.einsum("bij,ij->b", feats, x_true) >= 0, 1.0, -1.0)
    problem = LogisticProblem(feats, labels)

    steps = 500
    lr = ScheduleSpec("wsd", base_lr=0.01, warmup_steps=25, total_steps=steps)
    cfg = SpectraConfig(post_clip_c=1.0, weight_decay_lambda=0.1, lr_schedule=lr)
    base = BaseOptimizerSpec("signum")
    alpha = cfg.alpha_for((m, n))
    x = np.zeros((m, n))
    state = OptimizerState.zeros_like(x, "signum")
    updates, ceilings = [], []
    for k in range(steps):
        idx = rng.integers(count, size=16)
        ceilings.append(cfg.clip_threshold(k, cfg.lr(k)))
        x = spectra_step(x, problem.grad(x, idx), state, base, cfg, k)
        updates.append(alpha * state.last_direction)
    audit = update_norm_ceiling_audit(updates, alpha, ceilings, tol=1e-6)

    x = np.zeros((m, n))
    state = OptimizerState.zeros_like(x, "signum")
    raw = []
    for k in range(steps):
        idx = rng.integers(count, size=16)
        u = base_update(base, state, problem.grad(x, idx))
        raw.append(u)
        x = x - lr.base_lr * u
    floor = float(update_norm_ceiling_audit(raw).sigma_max.min())
    ok = audit.ok and floor >= math.sqrt(max(m, n)) - 1e-9
    report(12, ok, f"clipped violations {audit.violations}/{steps}, "
                   f"max |U|_2/(alpha c_k) {float(np.max(audit.sigma_max / audit.ceilings)):.4f}; "
                   f"raw Signum min |U|_2 {floor:.4f} >= sqrt({max(m, n)}) = {math.sqrt(max(m, n)):.4f}")


def test_c13_gradient_check(report):
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 7))
        problem = gen_weight_reg_dataset(d, 30, 1, 1.0, rng)
        x = rng.standard_normal((d, d))
        fd = oracles.finite_diff_grad(problem.loss, x, 1e-6)
        worst = max(worst, float(np.linalg.norm(problem.grad(x) - fd) / np.linalg.norm(fd)))
    report(13, worst <= 1e-5, f"max relative error {worst:.2e} over 20 instances (tol 1e-5)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
