"""Tests for the analytic power/performance forms.

Expected values are frozen by hand from the closed forms:
  energy saving        1 - power_factor / perf_factor
  continuous gain      (1 - dperf) / (1 - dpower) - 1
  first-order gain     (1 - dperf) * (1 + dpower) - 1
  perf-per-watt gain   perf_factor / power_factor - 1
"""
import math

import pytest
from hypothesis import given, strategies as st

from powerprofiles.calibration import shared_document
from powerprofiles.errors import NoCalibrationRow
from powerprofiles.powermodel import (
    continuous_throughput_gain,
    energy_saving,
    first_order_throughput_gain,
    frequency_scaling_baseline,
    perf_per_watt_gain,
    throughput_under_cap,
)

# ---------------------------------------------------------------------------
# energy saving


def test_energy_saving_baseline_is_zero():
    assert energy_saving(1.0, 1.0) == 0.0


def test_energy_saving_frozen_values():
    # 1 - 0.88/0.98 and 1 - 0.92/0.99, computed by hand.
    assert energy_saving(0.98, 0.88) == pytest.approx(0.10204081632653061, rel=1e-12)
    assert energy_saving(0.99, 0.92) == pytest.approx(0.07070707070707072, rel=1e-12)


def test_energy_saving_rejects_nonpositive_perf():
    with pytest.raises(ValueError):
        energy_saving(0.0, 0.9)
    with pytest.raises(ValueError):
        energy_saving(-0.5, 0.9)


@given(
    perf=st.floats(min_value=0.01, max_value=1.5),
    power=st.floats(min_value=0.01, max_value=1.5),
)
def test_energy_saving_sign_tracks_power_vs_perf(perf, power):
    saving = energy_saving(perf, power)
    if power < perf:
        assert saving > 0.0
    elif power > perf:
        assert saving < 0.0
    else:
        assert saving == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# throughput gains


def test_continuous_gain_frozen_values():
    # 0.99/0.87 - 1
    assert continuous_throughput_gain(0.01, 0.13) == pytest.approx(
        0.13793103448275867, rel=1e-12
    )
    assert continuous_throughput_gain(0.0, 0.0) == 0.0


def test_first_order_gain_frozen_values():
    # 0.99 * 1.13 - 1
    assert first_order_throughput_gain(0.01, 0.13) == pytest.approx(0.1187, rel=1e-12)
    assert first_order_throughput_gain(0.0, 0.0) == 0.0


@given(
    dperf=st.floats(min_value=0.0, max_value=0.3),
    dpower=st.floats(min_value=0.0, max_value=0.5),
)
def test_continuous_dominates_first_order(dperf, dpower):
    # 1/(1-x) >= 1+x for x in [0, 1), so the continuous form never trails.
    continuous = continuous_throughput_gain(dperf, dpower)
    first_order = first_order_throughput_gain(dperf, dpower)
    assert continuous >= first_order - 1e-12


def test_gain_rejects_full_power_saving():
    with pytest.raises(ValueError):
        continuous_throughput_gain(0.01, 1.0)


# ---------------------------------------------------------------------------
# perf per watt


def test_perf_per_watt_gain_frozen_values():
    assert perf_per_watt_gain(1.0, 1.0) == 0.0
    assert perf_per_watt_gain(0.84, 0.64) == pytest.approx(0.3125, rel=1e-12)
    assert perf_per_watt_gain(0.97, 0.82) == pytest.approx(0.18292682926829262, rel=1e-12)


def test_perf_per_watt_gain_rejects_nonpositive_power():
    with pytest.raises(ValueError):
        perf_per_watt_gain(0.9, 0.0)


# ---------------------------------------------------------------------------
# cap packing


def test_throughput_under_cap_exact_packing():
    nodes, throughput = throughput_under_cap(74000.0, 7400.0, 1.0)
    assert nodes == 10
    assert throughput == pytest.approx(10.0)


def test_throughput_under_cap_floors():
    nodes, throughput = throughput_under_cap(7400.0 * 10.9, 7400.0, 0.99)
    assert nodes == 10
    assert throughput == pytest.approx(9.9)


def test_throughput_under_cap_rejects_nonpositive():
    with pytest.raises(ValueError):
        throughput_under_cap(1000.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        throughput_under_cap(-1.0, 10.0, 1.0)


@given(
    cap=st.floats(min_value=1.0, max_value=1e9),
    node_power=st.floats(min_value=1.0, max_value=1e6),
)
def test_packing_bound_invariant(cap, node_power):
    nodes, _ = throughput_under_cap(cap, node_power, 1.0)
    assert nodes * node_power <= cap
    assert cap < (nodes + 1) * node_power


@given(
    cap=st.floats(min_value=1.0, max_value=1e8),
    extra=st.floats(min_value=0.0, max_value=1e8),
    node_power=st.floats(min_value=1.0, max_value=1e6),
)
def test_packing_monotone_in_cap(cap, extra, node_power):
    lo, _ = throughput_under_cap(cap, node_power, 1.0)
    hi, _ = throughput_under_cap(cap + extra, node_power, 1.0)
    assert hi >= lo


@given(
    cap=st.floats(min_value=1.0, max_value=1e8),
    node_power=st.floats(min_value=1.0, max_value=1e6),
    inflation=st.floats(min_value=1.0, max_value=10.0),
)
def test_packing_antitone_in_node_power(cap, node_power, inflation):
    lean, _ = throughput_under_cap(cap, node_power, 1.0)
    heavy, _ = throughput_under_cap(cap, node_power * inflation, 1.0)
    assert heavy <= lean


# ---------------------------------------------------------------------------
# frequency-scaling baseline


def test_frequency_scaling_baseline_b200():
    document = shared_document()
    point = frequency_scaling_baseline(document.frequency_scaling, "B200", 0.05)
    assert point.perf_factor == pytest.approx(0.90)
    assert point.power_factor == pytest.approx(0.95)


def test_frequency_scaling_baseline_unknown_target():
    document = shared_document()
    with pytest.raises(NoCalibrationRow):
        frequency_scaling_baseline(document.frequency_scaling, "B200", 0.25)
    with pytest.raises(NoCalibrationRow):
        frequency_scaling_baseline(document.frequency_scaling, "H100", 0.05)


def test_frequency_scaling_costs_more_perf_than_profiles():
    # At the same facility-level saving, the clock-only operating point gives
    # up 10% performance where the training profile row gives up 1%.
    document = shared_document()
    point = frequency_scaling_baseline(document.frequency_scaling, "B200", 0.05)
    profile_row = document.responses.lookup(
        "B200", "MAX_Q_TRAINING", workload_class="ai_training"
    )
    assert 1.0 - point.perf_factor == pytest.approx(0.10)
    assert 1.0 - profile_row.perf_factor == pytest.approx(0.01)
    assert (1.0 - point.perf_factor) > 5 * (1.0 - profile_row.perf_factor)
