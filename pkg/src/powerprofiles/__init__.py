"""Workload power-profile control plane over a simulated GPU fleet.

Layers, bottom to top:

- ``knobs`` / ``modes``: the arbitration engine — named knob recipes with
  priorities and conflict masks resolved into one effective configuration.
- ``calibration`` / ``catalog``: the shipped mode recipes, profile directory,
  and measured workload response factors.
- ``powermodel``: closed-form energy/throughput arithmetic.
- ``fleet``: a deterministic facility simulator with per-tick telemetry.
- ``service``: the management plane — pathways, demand response, alerts,
  job records, audit log.
- ``api`` / ``cli`` / ``scheduler``: HTTP surface, ``ppctl`` client, and the
  batch-scheduler shim.
"""

from .calibration import (
    CalibrationDocument,
    DEFAULT_PROFILE,
    ResponseEntry,
    ResponseTable,
    shared_document,
)
from .catalog import (
    Goal,
    ProfileCatalog,
    ProfileInfo,
    ProfileStatus,
    WorkloadClass,
    WorkloadHints,
    shared_catalog,
)
from .errors import PowerProfilesError
from .fleet import (
    FleetSimulator,
    SIM_EPOCH,
    TelemetryRecord,
    build_facility,
    rollup,
)
from .knobs import Knob, KnobAssignment, KnobDictionary, standard_knob_dictionary
from .modes import (
    EffectiveConfig,
    ModeRegistry,
    PerformanceMode,
    arbitrate,
    explain,
)
from .powermodel import (
    continuous_throughput_gain,
    energy_saving,
    first_order_throughput_gain,
    frequency_scaling_baseline,
    perf_per_watt_gain,
    throughput_under_cap,
)
from .scheduler import JobSpec, parse_directive, render, run_job, validate
from .service import (
    AlertRule,
    ApplyRequest,
    ControlPlaneService,
    DemandResponseEvent,
    Pathway,
    Scope,
)

__version__ = "0.1.0"

__all__ = [
    "AlertRule",
    "ApplyRequest",
    "CalibrationDocument",
    "ControlPlaneService",
    "DEFAULT_PROFILE",
    "DemandResponseEvent",
    "EffectiveConfig",
    "FleetSimulator",
    "Goal",
    "JobSpec",
    "Knob",
    "KnobAssignment",
    "KnobDictionary",
    "ModeRegistry",
    "Pathway",
    "PerformanceMode",
    "PowerProfilesError",
    "ProfileCatalog",
    "ProfileInfo",
    "ProfileStatus",
    "ResponseEntry",
    "ResponseTable",
    "SIM_EPOCH",
    "Scope",
    "TelemetryRecord",
    "WorkloadClass",
    "WorkloadHints",
    "arbitrate",
    "build_facility",
    "continuous_throughput_gain",
    "energy_saving",
    "explain",
    "first_order_throughput_gain",
    "frequency_scaling_baseline",
    "parse_directive",
    "perf_per_watt_gain",
    "render",
    "rollup",
    "run_job",
    "shared_catalog",
    "shared_document",
    "standard_knob_dictionary",
    "throughput_under_cap",
    "validate",
    "__version__",
]
