"""Closed-form power/performance arithmetic used across the package.

Everything here is a pure function of its inputs; the fleet simulator and
savings reports both build on these forms so that a number shown in a report
can always be reproduced from the calibration factors by hand.
"""
from __future__ import annotations

import math
from typing import Sequence

from .calibration import FrequencyScalingPoint
from .errors import NoCalibrationRow

_FACTOR_MAX = 1.5


def _check_factor(name: str, value: float) -> None:
    if not (0.0 < value <= _FACTOR_MAX) or not math.isfinite(value):
        raise ValueError(f"{name} must be in (0, {_FACTOR_MAX}], got {value}")


def energy_saving(perf_factor: float, system_power_factor: float) -> float:
    """Fractional job-energy saving for a perf/power operating point.

    Energy is power times runtime and runtime scales as ``1/perf_factor``,
    so the saving is ``1 - system_power_factor / perf_factor``. Negative when
    the power cost outweighs the slowdown.
    """
    _check_factor("perf_factor", perf_factor)
    _check_factor("system_power_factor", system_power_factor)
    return 1.0 - system_power_factor / perf_factor


def continuous_throughput_gain(perf_loss: float, power_saving: float) -> float:
    """Cap-constrained throughput gain in the continuous (fractional-node) limit.

    With a fixed facility cap, power headroom converts into more nodes:
    ``(1 - perf_loss) / (1 - power_saving) - 1``.
    """
    if not 0.0 <= perf_loss < 1.0:
        raise ValueError(f"perf_loss must be in [0, 1), got {perf_loss}")
    if not 0.0 <= power_saving < 1.0:
        raise ValueError(f"power_saving must be in [0, 1), got {power_saving}")
    return (1.0 - perf_loss) / (1.0 - power_saving) - 1.0


def first_order_throughput_gain(perf_loss: float, power_saving: float) -> float:
    """First-order (small-saving) approximation of the cap-constrained gain.

    ``(1 - perf_loss) * (1 + power_saving) - 1``; always at or below the
    continuous form for the same inputs.
    """
    if not 0.0 <= perf_loss < 1.0:
        raise ValueError(f"perf_loss must be in [0, 1), got {perf_loss}")
    if not 0.0 <= power_saving < 1.0:
        raise ValueError(f"power_saving must be in [0, 1), got {power_saving}")
    return (1.0 - perf_loss) * (1.0 + power_saving) - 1.0


def perf_per_watt_gain(perf_factor: float, power_factor: float) -> float:
    """Fractional efficiency gain: ``perf_factor / power_factor - 1``."""
    _check_factor("perf_factor", perf_factor)
    _check_factor("power_factor", power_factor)
    return perf_factor / power_factor - 1.0


def throughput_under_cap(
    cap_watts: float, node_power_watts: float, per_node_perf: float
) -> tuple[int, float]:
    """Whole nodes that fit under a facility cap, and their total throughput.

    Packing is physical: ``nodes_fit`` is the largest integer with
    ``nodes_fit * node_power_watts <= cap_watts``. Throughput is
    ``nodes_fit * per_node_perf``.
    """
    if cap_watts < 0.0 or not math.isfinite(cap_watts):
        raise ValueError(f"cap_watts must be non-negative, got {cap_watts}")
    if node_power_watts <= 0.0 or not math.isfinite(node_power_watts):
        raise ValueError(f"node_power_watts must be positive, got {node_power_watts}")
    if per_node_perf < 0.0:
        raise ValueError(f"per_node_perf must be non-negative, got {per_node_perf}")
    nodes = int(cap_watts // node_power_watts)
    # Division can land a hair off the packing bound; nudge onto it.
    while (nodes + 1) * node_power_watts <= cap_watts:
        nodes += 1
    while nodes > 0 and nodes * node_power_watts > cap_watts:
        nodes -= 1
    return nodes, nodes * per_node_perf


def frequency_scaling_baseline(
    points: Sequence[FrequencyScalingPoint],
    arch: str,
    target_dc_saving: float,
    tolerance: float = 1e-9,
) -> FrequencyScalingPoint:
    """Calibrated clock-only operating point for a facility-level saving."""
    for point in points:
        if point.arch == arch and math.isclose(
            point.dc_saving, target_dc_saving, abs_tol=tolerance
        ):
            return point
    raise NoCalibrationRow(
        f"no frequency-scaling point for arch={arch} at saving={target_dc_saving}"
    )
