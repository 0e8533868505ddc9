"""Step/bandwidth/truncation sequences and the recursion weight ledger."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resave.sequences import (
    SequencePlan,
    WeightLedger,
    bandwidth,
    build_ledger,
    empty_ledger,
    step_size,
    truncation_level,
)

from oracles import weights_direct

# 100^{-0.2} by independent high-precision exponentiation (mpmath, 40 digits)
BANDWIDTH_100 = 0.3981071705534972304159643537465342370065


# ------------------------------------------------------------- sequences

def test_step_size_examples():
    assert step_size(1) == 1.0
    assert step_size(4) == 0.25
    assert step_size(2, SequencePlan(gamma_scale=0.5)) == 0.25


def test_step_size_clamped_to_one():
    assert step_size(1, SequencePlan(gamma_scale=3.0)) == 1.0


def test_bandwidth_examples():
    assert bandwidth(1) == 1.0
    assert bandwidth(32) == 0.5  # 32^{-0.2} = 2^{-1}
    assert abs(bandwidth(100) - BANDWIDTH_100) < 1e-15


def test_truncation_level_examples():
    assert truncation_level(1) == 0.05
    # 10^{-0.3} ~ 0.5012 still above the cap, so the cap binds even at 1e10
    assert truncation_level(10**10) == 0.05


def test_truncation_level_nonincreasing():
    plan = SequencePlan(c2=0.4, epsilon_trunc=0.5)  # floor branch reachable
    levels = [truncation_level(n, plan) for n in (1, 2, 3, 5, 10, 100, 10**4, 10**8)]
    assert all(a >= b for a, b in zip(levels, levels[1:]))


@pytest.mark.parametrize("fn", [step_size, bandwidth, truncation_level])
def test_sequences_reject_nonpositive_index(fn):
    with pytest.raises(ValueError):
        fn(0)


# ------------------------------------------------------------ plan checks

def test_plan_validation():
    with pytest.raises(ValueError):
        SequencePlan(c1=-0.1)
    with pytest.raises(ValueError):
        SequencePlan(c1=1.0)
    with pytest.raises(ValueError):
        SequencePlan(c2=0.0)
    with pytest.raises(ValueError):
        SequencePlan(epsilon_trunc=0.0)
    with pytest.raises(ValueError):
        SequencePlan(gamma_scale=0.0)
    SequencePlan(c1=0.0)  # constant bandwidth allowed in permissive mode


def test_strict_mode_rejects_default_exponents():
    # the strict band for c1 is (1/5, 1/4 - 2 c2): empty for c2 = 0.03,
    # and c1 = 0.2 sits on the boundary in any case
    with pytest.raises(ValueError):
        SequencePlan(c1=0.2, c2=0.03, strict=True)
    with pytest.raises(ValueError):
        SequencePlan(c1=0.203, c2=0.03, strict=True)


def test_strict_mode_accepts_interior_point():
    plan = SequencePlan(c1=0.203, c2=0.022, strict=True)
    assert plan.c1 == 0.203


# ----------------------------------------------------------------- ledger

def test_ledger_worked_example():
    led = empty_ledger().extend(0.5).extend(0.25).extend(1 / 6)
    want = np.array([5 / 16, 5 / 24, 1 / 6])
    assert np.abs(led.weights - want).max() < 1e-15
    assert abs(led.remaining_mass - 5 / 16) < 1e-15
    assert abs(led.weights.sum() - 11 / 16) < 1e-15


def test_single_full_step():
    led = empty_ledger().extend(1.0)
    assert led.n == 1
    assert led.weights.tolist() == [1.0]
    assert led.remaining_mass == 0.0


def test_harmonic_steps_give_flat_weights():
    for n in (5, 137):
        led = build_ledger([1.0 / i for i in range(1, n + 1)])
        assert np.abs(led.weights - 1.0 / n).max() < 1e-14
        assert led.remaining_mass == 0.0  # first step is exactly 1


def test_extend_is_nondestructive():
    led = build_ledger([0.5, 0.25])
    before = led.weights.copy()
    led.extend(0.1)
    assert np.array_equal(led.weights, before)
    with pytest.raises(ValueError):
        led.weights[0] = 99.0


@pytest.mark.parametrize("bad", [0.0, -0.5, 1.5])
def test_extend_rejects_bad_steps(bad):
    with pytest.raises(ValueError):
        empty_ledger().extend(bad)
    with pytest.raises(ValueError):
        build_ledger([0.5, bad])


def test_build_ledger_matches_fold():
    steps = np.minimum(2.0 / np.arange(1, 401), 1.0)
    led = build_ledger(steps)
    fold = empty_ledger()
    for s in steps:
        fold = fold.extend(s)
    assert np.abs(led.weights - fold.weights).max() < 1e-15
    assert abs(led.remaining_mass - fold.remaining_mass) < 1e-15


def test_mass_identity_at_ten_thousand():
    led = build_ledger([1.0 / i for i in range(1, 10**4 + 1)])
    assert abs(led.weights.sum() - (1.0 - led.remaining_mass)) < 1e-12


steps_lists = st.lists(
    st.floats(min_value=0.001, max_value=1.0, allow_nan=False), min_size=1, max_size=200
)


@settings(max_examples=80, deadline=None)
@given(steps_lists)
def test_mass_identity_property(steps):
    led = build_ledger(steps)
    assert (led.weights >= 0.0).all()
    assert 0.0 <= led.remaining_mass <= 1.0
    assert abs(led.weights.sum() - (1.0 - led.remaining_mass)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(steps_lists)
def test_ledger_matches_direct_products(steps):
    led = build_ledger(steps)
    w, pi = weights_direct(steps)
    assert np.abs(led.weights - w).max() < 1e-12
    assert abs(led.remaining_mass - pi) < 1e-12


def test_ledger_rejects_direct_construction_mismatch():
    # the dataclass is a value type: fields are what you pass, frozen after
    led = WeightLedger(2, 0.25, np.array([0.5, 0.25]))
    assert led.n == 2
    with pytest.raises(Exception):
        led.n = 3
