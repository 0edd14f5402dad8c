import pytest
from hypothesis import given, strategies as st

from nanogrid.core import ConfigurationError
from nanogrid.economics import (
    PricingSchedule,
    monetary_terminal,
    stage_cost,
    terminal_cost,
    transaction_cost,
)
from nanogrid.storage import BatterySpec

SCHED = PricingSchedule.flat(0.30, 0.10)
SPEC = BatterySpec(6.4, -5, 5)


def test_schedule_validation():
    with pytest.raises(ConfigurationError):
        PricingSchedule((0.1,) * 23, (0.1,) * 24)
    with pytest.raises(ConfigurationError):
        PricingSchedule((0.1,) * 24, (-0.1,) * 24)
    with pytest.raises(ConfigurationError):
        PricingSchedule((float("nan"),) * 24, (0.1,) * 24)


def test_stage_cost_examples():
    assert stage_cost(2, 0, SCHED, 1) == pytest.approx(0.60)
    assert stage_cost(-2, 0, SCHED, 1) == pytest.approx(-0.20)
    assert stage_cost(0, 0, PricingSchedule.flat(9, 9), 1) == 0


def test_stage_cost_uses_hour():
    buy = tuple(float(h) for h in range(24))
    sched = PricingSchedule(buy, (0.0,) * 24)
    assert stage_cost(1, 13, sched, 0.5) == 6.5


def test_transaction_cost_examples():
    assert transaction_cost([0, 0, 0], SCHED, 1) == 0
    assert transaction_cost([2, -2], SCHED, 1) == pytest.approx(0.4)
    assert transaction_cost([1.7], SCHED, 1) == stage_cost(1.7, 0, SCHED, 1)


@given(st.lists(st.floats(-10, 10), max_size=10), st.lists(st.floats(-10, 10), max_size=10))
def test_transaction_cost_additive(a, b):
    hours_a = list(range(len(a)))
    hours_b = list(range(len(a), len(a) + len(b)))
    whole = transaction_cost(a + b, SCHED, 1)
    parts = transaction_cost(a, SCHED, 1, hours_a) + transaction_cost(b, SCHED, 1, hours_b)
    assert whole == pytest.approx(parts, abs=1e-12)


@given(st.floats(-10, 10), st.floats(0.01, 100))
def test_stage_cost_homogeneous(u, alpha):
    assert stage_cost(alpha * u, 3, SCHED, 1) == pytest.approx(alpha * stage_cost(u, 3, SCHED, 1))


def test_terminal_cost_examples():
    assert terminal_cost(6.4, 100, SPEC, SCHED, 0) == 0
    assert terminal_cost(6.4 - 0.01, 100, SPEC, SCHED, 0) == pytest.approx(0.1)
    assert terminal_cost(0, 1, SPEC, SCHED, 0) == pytest.approx(6.4 * 0.1)


def test_monetary_terminal_examples():
    assert monetary_terminal(0, 0, SCHED) == 0
    assert monetary_terminal(6.4, 0, SCHED) == pytest.approx(-0.64)
    assert monetary_terminal(2.0, 0, SCHED) == 2 * monetary_terminal(1.0, 0, SCHED)


@given(st.floats(0, 6.4), st.floats(0, 200), st.integers(0, 23))
def test_terminal_signs(s, m, h):
    assert terminal_cost(s, m, SPEC, SCHED, h) >= 0
    assert monetary_terminal(s, h, SCHED) <= 0
