import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spectra_lab.errors import OutOfRange
from spectra_lab.schedules import ClipScheduleSpec, ScheduleSpec, clip_at, lr_at


def test_constant_and_fw_harmonic():
    spec = ScheduleSpec("constant", base_lr=0.1, total_steps=50)
    assert all(lr_at(spec, k) == 0.1 for k in range(50))
    fw = ScheduleSpec("fw_harmonic", total_steps=10)
    assert lr_at(fw, 0) == 1.0
    lam = ScheduleSpec("fw_harmonic", total_steps=10, fw_lambda=0.2)
    assert all(lam.fw_lambda * lr_at(lam, k) == pytest.approx(2 / (k + 2)) for k in range(10))


def test_inv_sqrt():
    spec = ScheduleSpec("inv_sqrt", base_lr=0.3, total_steps=100)
    assert lr_at(spec, 0) == 0.3
    assert lr_at(spec, 3) == pytest.approx(0.15)


def test_out_of_range():
    spec = ScheduleSpec(total_steps=10)
    for k in (-1, 10, 11):
        with pytest.raises(OutOfRange):
            lr_at(spec, k)


def test_cosine_endpoints():
    spec = ScheduleSpec("cosine", base_lr=1.0, warmup_steps=10, total_steps=110, final_lr_fraction=0.01)
    assert lr_at(spec, 10) == pytest.approx(1.0)
    assert lr_at(spec, 60) == pytest.approx(0.505)
    assert lr_at(spec, 109.999999) == pytest.approx(0.01, abs=1e-9)
    assert lr_at(spec, 0) > 0


def test_wsd_decays_to_zero():
    spec = ScheduleSpec("wsd", base_lr=1.0, total_steps=100, stable_fraction=0.8)
    assert lr_at(spec, 80) == 1.0
    assert lr_at(spec, 90) == pytest.approx(1 - math.sqrt(0.5))
    assert lr_at(spec, 100 - 1e-9) == pytest.approx(0.0, abs=1e-4)


@given(st.integers(1, 50), st.integers(60, 500), st.floats(0.3, 1.0))
def test_wsd_continuity(warmup, total, frac):
    spec = ScheduleSpec("wsd", base_lr=0.5, warmup_steps=warmup, total_steps=total, stable_fraction=frac)
    # linear warmup joins the stable phase with no jump
    end = spec.end_stable
    if warmup < end:
        assert abs(lr_at(spec, warmup) - lr_at(spec, warmup + 1e-9)) <= 1e-9
    if end + 1 < total:
        # the square-root tail has modulus base * sqrt(eps / (total - end))
        assert lr_at(spec, end) == spec.base_lr
        for eps in (1e-2, 1e-4, 1e-6):
            k = end + eps
            gap = spec.base_lr - lr_at(spec, k)
            assert 0 <= gap <= spec.base_lr * math.sqrt((k - end) / (total - end)) * (1 + 1e-9)


def test_warmup_is_linear_and_continuous():
    spec = ScheduleSpec("cosine", base_lr=1.0, warmup_steps=4, total_steps=20)
    assert [lr_at(spec, k) for k in range(5)] == pytest.approx([0.2, 0.4, 0.6, 0.8, 1.0])
    assert abs(lr_at(spec, 4) - lr_at(spec, 4 + 1e-9)) < 1e-8


def test_schedule_validation():
    with pytest.raises(ValueError):
        ScheduleSpec("linear")
    with pytest.raises(ValueError):
        ScheduleSpec(warmup_steps=10, total_steps=10)
    with pytest.raises(ValueError):
        ScheduleSpec(base_lr=0.0)
    with pytest.raises(ValueError):
        ClipScheduleSpec("standard", 0.0)


def test_clip_standard():
    spec = ClipScheduleSpec("standard", 10.0)
    assert clip_at(spec, 5, 0.01, 0.1, 2, 80, 100) == 10.0
    assert clip_at(spec, 0, 0.01, 0.1, 2, 80, 100) == pytest.approx(100.0)
    with pytest.raises(ValueError):
        clip_at(spec, 0, 0.0, 0.1, 2, 80, 100)


def test_clip_wsd_sqrt_endpoint_and_continuity():
    spec = ClipScheduleSpec("wsd_sqrt", 4.0)
    assert clip_at(spec, 100, 1.0, 1.0, 0, 80, 100) == 0.0
    assert clip_at(spec, 90, 1.0, 1.0, 0, 80, 100) == pytest.approx(4 * (1 - math.sqrt(0.5)))
    assert clip_at(spec, 80, 1.0, 1.0, 0, 80, 100) == 4.0
    for eps in (1e-2, 1e-6, 1e-10):
        k = 80 + eps
        gap = 4.0 - clip_at(spec, k, 1.0, 1.0, 0, 80, 100)
        assert 0 <= gap <= 4.0 * math.sqrt((k - 80) / 20) * (1 + 1e-9)
    assert clip_at(spec, 120, 1.0, 1.0, 0, 80, 100) == 0.0


def test_clip_constant():
    assert clip_at(ClipScheduleSpec("constant", 3.0), 0, 1e-9, 1.0, 10, 80, 100) == 3.0


def test_standard_clip_keeps_product_constant_in_warmup():
    lr = ScheduleSpec("wsd", base_lr=0.1, warmup_steps=10, total_steps=100)
    clip = ClipScheduleSpec("standard", 10.0)
    for k in range(11):
        eta = lr_at(lr, k)
        c = clip_at(clip, k, eta, lr.base_lr, lr.warmup_steps, lr.end_stable, lr.total_steps)
        assert c * eta == pytest.approx(1.0)
