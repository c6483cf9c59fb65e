"""Simulated GPU fleet: facility hierarchy, power accounting, job execution.

The simulator is calibration-driven: a job's performance and power come from
the response table, not from a microarchitectural model. Per-GPU power tracks
the GPU-level factor; node power tracks the system-level factor, with the
node's non-GPU overhead absorbing the difference so that the hierarchy stays
sum-preserving at every instant.

Time is simulated in seconds from a fixed UTC epoch. Power is piecewise
constant between state changes; energy is integrated segment-exactly, so a
job that runs steadily under one profile reproduces its calibrated factors
to floating-point accuracy.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from .calibration import (
    DEFAULT_PROFILE,
    CalibrationDocument,
    ResponseEntry,
    ResponseTable,
    shared_document,
)
from .errors import (
    InsufficientNodes,
    JobNotFinished,
    NoCalibrationRow,
    UnknownHierarchyNode,
    UnknownJob,
)
from .knobs import NUMERIC_KINDS, standard_knob_dictionary
from .modes import EffectiveConfig

#: Simulation epoch; all telemetry timestamps are offsets from this instant.
SIM_EPOCH = datetime(2025, 1, 1, tzinfo=timezone.utc)

LEVELS = ("gpu", "node", "rack", "facility")

_EPS = 1e-9


@dataclass(frozen=True)
class GpuArch:
    """A GPU generation: rated power and default clock targets."""

    name: str
    tdp_watts: float
    default_clocks: Mapping[str, float]

    def __post_init__(self) -> None:
        if self.tdp_watts <= 0:
            raise ValueError("tdp_watts must be positive")


B200 = GpuArch("B200", 1000.0, {"MCLK": 2600, "FMAX": 1800})
H100 = GpuArch("H100", 700.0, {"MCLK": 2400, "FMAX": 1830})

_ARCHS = {a.name.lower(): a for a in (B200, H100)}


def arch_by_name(name: str) -> GpuArch:
    try:
        return _ARCHS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown GPU architecture {name!r}") from None


@dataclass(frozen=True)
class NodeSpec:
    """Per-node composition and fixed non-GPU power overhead."""

    gpus_per_node: int = 8
    cpus_per_node: int = 2
    non_gpu_power_watts: float = 600.0

    def __post_init__(self) -> None:
        if self.gpus_per_node < 1:
            raise ValueError("gpus_per_node must be >= 1")
        if self.non_gpu_power_watts < 0:
            raise ValueError("non_gpu_power_watts must be >= 0")


@dataclass(frozen=True)
class Node:
    node_id: str
    rack_id: str
    arch: GpuArch
    spec: NodeSpec
    gpu_ids: tuple[str, ...]


@dataclass
class Facility:
    """Rack/node/GPU hierarchy plus the facility power cap."""

    power_cap_watts: float
    racks: dict[str, tuple[str, ...]]
    nodes: dict[str, Node]
    facility_id: str = "facility"

    def __post_init__(self) -> None:
        if self.power_cap_watts <= 0:
            raise ValueError("power_cap_watts must be positive")
        listed = [n for ids in self.racks.values() for n in ids]
        if len(listed) != len(set(listed)) or set(listed) != set(self.nodes):
            raise ValueError("rack listing must cover each node exactly once")

    def rack_of(self, node_id: str) -> str:
        return self.nodes[node_id].rack_id

    def has_entity(self, level: str, entity_id: str) -> bool:
        if level == "facility":
            return entity_id == self.facility_id
        if level == "rack":
            return entity_id in self.racks
        if level == "node":
            return entity_id in self.nodes
        if level == "gpu":
            return any(entity_id in n.gpu_ids for n in self.nodes.values())
        return False


def build_facility(
    racks: int = 1,
    nodes_per_rack: int = 1,
    arch: GpuArch | str = B200,
    node_spec: Optional[NodeSpec] = None,
    power_cap_watts: Optional[float] = None,
) -> Facility:
    """A uniform facility with ids rack-R / node-R-N / gpu-R-N-G."""
    if isinstance(arch, str):
        arch = arch_by_name(arch)
    spec = node_spec or NodeSpec()
    rack_map: dict[str, tuple[str, ...]] = {}
    nodes: dict[str, Node] = {}
    for r in range(racks):
        rack_id = f"rack-{r}"
        node_ids = []
        for n in range(nodes_per_rack):
            node_id = f"node-{r}-{n}"
            gpu_ids = tuple(f"gpu-{r}-{n}-{g}" for g in range(spec.gpus_per_node))
            nodes[node_id] = Node(node_id, rack_id, arch, spec, gpu_ids)
            node_ids.append(node_id)
        rack_map[rack_id] = tuple(node_ids)
    if power_cap_watts is None:
        busy = sum(
            n.spec.gpus_per_node * n.arch.tdp_watts + n.spec.non_gpu_power_watts
            for n in nodes.values()
        )
        power_cap_watts = 10.0 * busy
    return Facility(power_cap_watts=power_cap_watts, racks=rack_map, nodes=nodes)


@dataclass
class GpuState:
    """Applied knob values and the profile label they came from."""

    gpu_id: str
    node_id: str
    arch: GpuArch
    entries: dict[str, object] = field(default_factory=dict)
    active_profile: str = DEFAULT_PROFILE


class JobStatus(Enum):
    RUNNING = "running"
    SUSPENDED = "suspended"
    FINISHED = "finished"


@dataclass
class JobState:
    """One job occupying whole nodes for a fixed amount of baseline work."""

    job_id: str
    application: Optional[str]
    workload_class: Optional[str]
    profile_id: str
    node_ids: tuple[str, ...]
    baseline_seconds: float
    tasks_per_node: int
    submitted_at: datetime
    started_at: datetime
    ended_at: Optional[datetime] = None
    status: JobStatus = JobStatus.RUNNING
    progress_seconds: float = 0.0
    active_wall_seconds: float = 0.0
    suspended_seconds: float = 0.0
    node_energy_joules: float = 0.0
    gpu_energy_joules: float = 0.0


@dataclass(frozen=True)
class TelemetryRecord:
    """One sample of the fixed line format, at one hierarchy entity."""

    timestamp: datetime
    level: str
    entity_id: str
    power_watts: float
    energy_joules_cum: float
    active_profile: str

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "timestamp": self.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "level": self.level,
                "id": self.entity_id,
                "power_watts": round(self.power_watts, 6),
                "energy_joules_cum": round(self.energy_joules_cum, 6),
                "active_profile": self.active_profile,
            }
        )


@dataclass(frozen=True)
class SimOutcome:
    """Post-run accounting for one finished job."""

    job_id: str
    application: Optional[str]
    profile_id: str
    arch: str
    n_nodes: int
    baseline_seconds: float
    runtime_seconds: float
    runtime_scale: float
    perf_factor: float
    avg_gpu_power_watts: float
    avg_node_power_watts: float
    gpu_power_factor: float
    system_power_factor: float
    energy_joules: float
    gpu_energy_joules: float
    suspended_seconds: float


@dataclass(frozen=True)
class RollupSeries:
    """Aggregated power series and total energy for one hierarchy slice."""

    level: str
    power_series: dict[datetime, float]
    energy_joules: float


def rollup(
    records: Sequence[TelemetryRecord],
    level: str,
    facility: Facility,
    entity_id: Optional[str] = None,
) -> RollupSeries:
    """Sum power samples at one level, optionally for a single entity."""
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}")
    if entity_id is not None and not facility.has_entity(level, entity_id):
        raise UnknownHierarchyNode(f"no {level} named {entity_id!r}")
    power: dict[datetime, float] = {}
    last_energy: dict[str, float] = {}
    for record in records:
        if record.level != level:
            continue
        if entity_id is not None and record.entity_id != entity_id:
            continue
        power[record.timestamp] = power.get(record.timestamp, 0.0) + record.power_watts
        last_energy[record.entity_id] = record.energy_joules_cum
    return RollupSeries(
        level=level,
        power_series=power,
        energy_joules=sum(last_energy.values()),
    )


class FleetSimulator:
    """Deterministic single-facility simulator with 1 s telemetry ticks."""

    def __init__(
        self,
        facility: Facility,
        document: Optional[CalibrationDocument] = None,
        actual_responses: Optional[ResponseTable] = None,
        gpu_busy_fraction: float = 0.85,
        gpu_idle_watts: float = 90.0,
        tick_seconds: float = 1.0,
    ) -> None:
        if not 0.0 < gpu_busy_fraction <= 1.0:
            raise ValueError("gpu_busy_fraction must be in (0, 1]")
        if tick_seconds <= 0:
            raise ValueError("tick_seconds must be positive")
        self.facility = facility
        self.document = document if document is not None else shared_document()
        self.responses = (
            actual_responses if actual_responses is not None else self.document.responses
        )
        self.gpu_busy_fraction = gpu_busy_fraction
        self.gpu_idle_watts = gpu_idle_watts
        self.tick_seconds = tick_seconds

        self._gpus: dict[str, GpuState] = {}
        for node in facility.nodes.values():
            for gpu_id in node.gpu_ids:
                self._gpus[gpu_id] = GpuState(gpu_id, node.node_id, node.arch)
        self._jobs: dict[str, JobState] = {}
        self._node_job: dict[str, Optional[str]] = {n: None for n in facility.nodes}
        self._seconds = 0.0
        self._tick_index = 0
        self._energy: dict[str, float] = {}
        self._records: list[TelemetryRecord] = []
        self._job_counter = 0
        self._emit_tick()  # baseline snapshot at t = 0

    # -- clock ---------------------------------------------------------------

    @property
    def seconds(self) -> float:
        return self._seconds

    @property
    def now(self) -> datetime:
        return SIM_EPOCH + timedelta(seconds=self._seconds)

    # -- device state ----------------------------------------------------------

    def gpu(self, gpu_id: str) -> GpuState:
        try:
            return self._gpus[gpu_id]
        except KeyError:
            raise UnknownHierarchyNode(f"no gpu named {gpu_id!r}") from None

    def gpu_ids(self) -> tuple[str, ...]:
        return tuple(self._gpus)

    def apply_config(
        self,
        gpu_id: str,
        config: Optional[EffectiveConfig],
        active_profile: str,
    ) -> GpuState:
        """Write an effective configuration to one GPU (clamped, idempotent)."""
        state = self.gpu(gpu_id)
        dictionary = standard_knob_dictionary(state.arch.name)
        entries: dict[str, object] = {}
        if config is not None:
            for knob_id, entry in config.entries.items():
                knob = dictionary.get(knob_id)
                value = entry.value
                if knob.value_kind in NUMERIC_KINDS:
                    value = knob.clamp(value)
                entries[knob_id] = value
        state.entries = entries
        state.active_profile = active_profile
        return state

    def _reset_gpu(self, gpu_id: str) -> None:
        state = self._gpus[gpu_id]
        state.entries = {}
        state.active_profile = DEFAULT_PROFILE

    # -- jobs ------------------------------------------------------------------

    def free_node_ids(self) -> tuple[str, ...]:
        return tuple(n for n, j in self._node_job.items() if j is None)

    def submit_job(
        self,
        application: Optional[str] = None,
        workload_class: Optional[str] = None,
        profile_id: str = DEFAULT_PROFILE,
        nodes: int = 1,
        baseline_seconds: float = 60.0,
        tasks_per_node: int = 8,
        job_id: Optional[str] = None,
    ) -> JobState:
        """Place a job on free nodes and start it immediately.

        Raises InsufficientNodes when fewer than ``nodes`` nodes are free and
        NoCalibrationRow when the profile has no response row for the
        workload on the placed architecture.
        """
        if nodes < 1:
            raise ValueError("nodes must be >= 1")
        if baseline_seconds <= 0:
            raise ValueError("baseline_seconds must be positive")
        free = self.free_node_ids()
        if len(free) < nodes:
            raise InsufficientNodes(
                f"requested {nodes} nodes, only {len(free)} free"
            )
        placed = free[:nodes]
        arch = self.facility.nodes[placed[0]].arch
        # Fail fast if the calibration cannot price this combination.
        self.responses.lookup(
            arch.name, profile_id, application=application, workload_class=workload_class
        )
        self._job_counter += 1
        job = JobState(
            job_id=job_id or f"job-{self._job_counter}",
            application=application,
            workload_class=workload_class,
            profile_id=profile_id,
            node_ids=placed,
            baseline_seconds=float(baseline_seconds),
            tasks_per_node=tasks_per_node,
            submitted_at=self.now,
            started_at=self.now,
        )
        if job.job_id in self._jobs:
            raise ValueError(f"duplicate job id {job.job_id!r}")
        self._jobs[job.job_id] = job
        for node_id in placed:
            self._node_job[node_id] = job.job_id
            for gpu_id in self.facility.nodes[node_id].gpu_ids:
                self._gpus[gpu_id].active_profile = profile_id
        return job

    def job(self, job_id: str) -> JobState:
        try:
            return self._jobs[job_id]
        except KeyError:
            raise UnknownJob(f"no job named {job_id!r}") from None

    @property
    def jobs(self) -> Mapping[str, JobState]:
        return dict(self._jobs)

    def running_jobs(self) -> tuple[JobState, ...]:
        return tuple(
            j for j in self._jobs.values() if j.status is JobStatus.RUNNING
        )

    def suspend_job(self, job_id: str) -> None:
        job = self.job(job_id)
        if job.status is not JobStatus.RUNNING:
            raise ValueError(f"job {job_id} is {job.status.value}, not running")
        job.status = JobStatus.SUSPENDED

    def resume_job(self, job_id: str) -> None:
        job = self.job(job_id)
        if job.status is not JobStatus.SUSPENDED:
            raise ValueError(f"job {job_id} is {job.status.value}, not suspended")
        job.status = JobStatus.RUNNING

    # -- power accounting --------------------------------------------------------

    def baseline_busy_node_watts(self, node_id: str) -> float:
        node = self.facility.nodes[node_id]
        return (
            node.spec.gpus_per_node * self.gpu_busy_fraction * node.arch.tdp_watts
            + node.spec.non_gpu_power_watts
        )

    def idle_node_watts(self, node_id: str) -> float:
        node = self.facility.nodes[node_id]
        return (
            node.spec.gpus_per_node * self.gpu_idle_watts
            + node.spec.non_gpu_power_watts
        )

    def job_rate(self, job_id: str) -> float:
        """Baseline-seconds of progress per wall second while running."""
        return self._entry_for(self.job(job_id)).perf_factor

    def baseline_busy_facility_watts(self) -> float:
        return sum(self.baseline_busy_node_watts(n) for n in self.facility.nodes)

    def _entry_for(self, job: JobState) -> ResponseEntry:
        first_gpu = self.facility.nodes[job.node_ids[0]].gpu_ids[0]
        state = self._gpus[first_gpu]
        profile = state.active_profile
        if profile == DEFAULT_PROFILE:
            return ResponseEntry.unit(state.arch.name)
        try:
            return self.responses.lookup(
                state.arch.name,
                profile,
                application=job.application,
                workload_class=job.workload_class,
            )
        except NoCalibrationRow:
            # The winning profile (e.g. a fleet-wide operator override) has no
            # measured row for this workload. Approximate with the same-goal
            # profile of the job's own workload class — the nearest calibrated
            # sibling — rather than halting a running facility.
            sibling = self._same_goal_sibling(profile, job)
            if sibling is None:
                raise
            return self.responses.lookup(
                state.arch.name,
                sibling,
                application=job.application,
                workload_class=job.workload_class,
            )

    def _same_goal_sibling(self, profile_id: str, job: JobState) -> Optional[str]:
        spec = self.document.profiles.get(profile_id)
        if spec is None:
            return None
        workload_class = job.workload_class
        if workload_class is None and job.application is not None:
            workload_class = self.responses.class_of(job.application)
        if workload_class is None or workload_class == spec.workload_class:
            return None
        for candidate in self.document.profiles.values():
            if (
                candidate.workload_class == workload_class
                and candidate.goal == spec.goal
            ):
                return candidate.profile_id
        return None

    def _segment_powers(self) -> tuple[dict[str, float], dict[str, float]]:
        """Per-GPU and per-node power for the current instant."""
        gpu_power: dict[str, float] = {}
        node_power: dict[str, float] = {}
        for node_id, node in self.facility.nodes.items():
            job_id = self._node_job[node_id]
            job = self._jobs[job_id] if job_id else None
            if job is not None and job.status is JobStatus.RUNNING:
                entry = self._entry_for(job)
                per_gpu = (
                    self.gpu_busy_fraction
                    * node.arch.tdp_watts
                    * entry.gpu_power_factor
                )
                total = entry.system_power_factor * self.baseline_busy_node_watts(
                    node_id
                )
                residual = total - per_gpu * node.spec.gpus_per_node
                if residual < -1e-6:
                    raise ValueError(
                        f"calibration row for profile {entry.profile_id} puts GPU "
                        f"power above node power on {node_id} (residual {residual:.3f} W)"
                    )
            else:
                per_gpu = self.gpu_idle_watts
                total = (
                    per_gpu * node.spec.gpus_per_node + node.spec.non_gpu_power_watts
                )
            for gpu_id in node.gpu_ids:
                gpu_power[gpu_id] = per_gpu
            node_power[node_id] = total
        return gpu_power, node_power

    def gpu_power_watts(self, gpu_id: str) -> float:
        self.gpu(gpu_id)
        gpu_power, _ = self._segment_powers()
        return gpu_power[gpu_id]

    def node_power_watts(self, node_id: str) -> float:
        if node_id not in self.facility.nodes:
            raise UnknownHierarchyNode(f"no node named {node_id!r}")
        _, node_power = self._segment_powers()
        return node_power[node_id]

    def facility_power_watts(self) -> float:
        _, node_power = self._segment_powers()
        return sum(
            sum(node_power[n] for n in node_ids)
            for node_ids in self.facility.racks.values()
        )

    def set_power_cap(self, watts: float) -> None:
        if watts <= 0:
            raise ValueError("power cap must be positive")
        self.facility.power_cap_watts = watts

    # -- time advancement -----------------------------------------------------

    def advance(self, seconds: float) -> list[JobState]:
        """Advance simulated time, returning jobs that finished on the way."""
        if seconds < 0:
            raise ValueError("cannot advance backwards")
        end = self._seconds + seconds
        finished: list[JobState] = []
        while self._seconds < end - _EPS:
            gpu_power, node_power = self._segment_powers()
            boundary = end
            next_tick = (self._tick_index + 1) * self.tick_seconds
            boundary = min(boundary, next_tick)
            rates: dict[str, float] = {}
            for job in self._jobs.values():
                if job.status is not JobStatus.RUNNING:
                    continue
                rate = self._entry_for(job).perf_factor
                rates[job.job_id] = rate
                if rate > 0:
                    remaining = job.baseline_seconds - job.progress_seconds
                    boundary = min(boundary, self._seconds + remaining / rate)
            dt = boundary - self._seconds
            if dt > _EPS:
                self._integrate(dt, gpu_power, node_power, rates)
            self._seconds = boundary
            for job in list(self._jobs.values()):
                if (
                    job.status is JobStatus.RUNNING
                    and job.progress_seconds >= job.baseline_seconds - _EPS
                ):
                    self._finish_job(job)
                    finished.append(job)
            if abs(self._seconds - next_tick) <= _EPS and next_tick <= end + _EPS:
                self._tick_index += 1
                self._emit_tick()
        return finished

    def _integrate(
        self,
        dt: float,
        gpu_power: Mapping[str, float],
        node_power: Mapping[str, float],
        rates: Mapping[str, float],
    ) -> None:
        for gpu_id, watts in gpu_power.items():
            self._energy[gpu_id] = self._energy.get(gpu_id, 0.0) + watts * dt
        for node_id, watts in node_power.items():
            self._energy[node_id] = self._energy.get(node_id, 0.0) + watts * dt
        facility_total = 0.0
        for rack_id, node_ids in self.facility.racks.items():
            rack_watts = sum(node_power[n] for n in node_ids)
            self._energy[rack_id] = self._energy.get(rack_id, 0.0) + rack_watts * dt
            facility_total += rack_watts
        facility_id = self.facility.facility_id
        self._energy[facility_id] = (
            self._energy.get(facility_id, 0.0) + facility_total * dt
        )
        for job in self._jobs.values():
            if job.status is JobStatus.RUNNING:
                job.progress_seconds += rates[job.job_id] * dt
                job.active_wall_seconds += dt
                job.node_energy_joules += sum(
                    node_power[n] for n in job.node_ids
                ) * dt
                job.gpu_energy_joules += sum(
                    gpu_power[g]
                    for n in job.node_ids
                    for g in self.facility.nodes[n].gpu_ids
                ) * dt
            elif job.status is JobStatus.SUSPENDED:
                job.suspended_seconds += dt

    def _finish_job(self, job: JobState) -> None:
        job.status = JobStatus.FINISHED
        job.ended_at = self.now
        job.progress_seconds = job.baseline_seconds
        for node_id in job.node_ids:
            self._node_job[node_id] = None
            for gpu_id in self.facility.nodes[node_id].gpu_ids:
                self._reset_gpu(gpu_id)

    def _emit_tick(self) -> None:
        timestamp = SIM_EPOCH + timedelta(seconds=self._tick_index * self.tick_seconds)
        gpu_power, node_power = self._segment_powers()
        records = self._records
        rack_power: dict[str, float] = {}
        for node_id, node in self.facility.nodes.items():
            labels = {self._gpus[g].active_profile for g in node.gpu_ids}
            node_label = labels.pop() if len(labels) == 1 else "mixed"
            for gpu_id in node.gpu_ids:
                state = self._gpus[gpu_id]
                records.append(
                    TelemetryRecord(
                        timestamp, "gpu", gpu_id,
                        gpu_power[gpu_id], self._energy.get(gpu_id, 0.0),
                        state.active_profile,
                    )
                )
            records.append(
                TelemetryRecord(
                    timestamp, "node", node_id,
                    node_power[node_id], self._energy.get(node_id, 0.0),
                    node_label,
                )
            )
        facility_total = 0.0
        for rack_id, node_ids in self.facility.racks.items():
            watts = sum(node_power[n] for n in node_ids)
            rack_power[rack_id] = watts
            facility_total += watts
            labels = {
                r.active_profile for r in records
                if r.timestamp == timestamp and r.level == "node" and r.entity_id in node_ids
            }
            rack_label = labels.pop() if len(labels) == 1 else "mixed"
            records.append(
                TelemetryRecord(
                    timestamp, "rack", rack_id,
                    watts, self._energy.get(rack_id, 0.0), rack_label,
                )
            )
        node_sum = sum(
            node_power[n] for ids in self.facility.racks.values() for n in ids
        )
        assert math.isclose(facility_total, node_sum, rel_tol=0.0, abs_tol=1e-6)
        labels = {r.active_profile for r in records
                  if r.timestamp == timestamp and r.level == "rack"}
        records.append(
            TelemetryRecord(
                timestamp, "facility", self.facility.facility_id,
                facility_total,
                self._energy.get(self.facility.facility_id, 0.0),
                labels.pop() if len(labels) == 1 else "mixed",
            )
        )

    # -- telemetry and outcomes --------------------------------------------------

    @property
    def telemetry(self) -> list[TelemetryRecord]:
        return list(self._records)

    def telemetry_between(
        self,
        level: Optional[str] = None,
        entity_id: Optional[str] = None,
        start: Optional[datetime] = None,
        end: Optional[datetime] = None,
    ) -> list[TelemetryRecord]:
        out = []
        for record in self._records:
            if level is not None and record.level != level:
                continue
            if entity_id is not None and record.entity_id != entity_id:
                continue
            if start is not None and record.timestamp < start:
                continue
            if end is not None and record.timestamp > end:
                continue
            out.append(record)
        return out

    def outcome(self, job_id: str) -> SimOutcome:
        job = self.job(job_id)
        if job.status is not JobStatus.FINISHED:
            raise JobNotFinished(f"job {job_id} is {job.status.value}")
        node = self.facility.nodes[job.node_ids[0]]
        n_nodes = len(job.node_ids)
        gpus = n_nodes * node.spec.gpus_per_node
        wall = job.active_wall_seconds
        avg_node = job.node_energy_joules / (wall * n_nodes)
        avg_gpu = job.gpu_energy_joules / (wall * gpus)
        baseline_node = self.baseline_busy_node_watts(job.node_ids[0])
        baseline_gpu = self.gpu_busy_fraction * node.arch.tdp_watts
        return SimOutcome(
            job_id=job.job_id,
            application=job.application,
            profile_id=job.profile_id,
            arch=node.arch.name,
            n_nodes=n_nodes,
            baseline_seconds=job.baseline_seconds,
            runtime_seconds=wall,
            runtime_scale=wall / job.baseline_seconds,
            perf_factor=job.baseline_seconds / wall,
            avg_gpu_power_watts=avg_gpu,
            avg_node_power_watts=avg_node,
            gpu_power_factor=avg_gpu / baseline_gpu,
            system_power_factor=avg_node / baseline_node,
            energy_joules=job.node_energy_joules,
            gpu_energy_joules=job.gpu_energy_joules,
            suspended_seconds=job.suspended_seconds,
        )


def simulate_job(
    application: Optional[str] = None,
    workload_class: Optional[str] = None,
    profile_id: str = DEFAULT_PROFILE,
    arch: GpuArch = B200,
    nodes: int = 1,
    baseline_seconds: float = 60.0,
    document: Optional[CalibrationDocument] = None,
    actual_responses: Optional[ResponseTable] = None,
) -> SimOutcome:
    """Run one job to completion on a fresh facility and account for it."""
    facility = build_facility(racks=1, nodes_per_rack=nodes, arch=arch)
    sim = FleetSimulator(facility, document, actual_responses)
    job = sim.submit_job(
        application=application,
        workload_class=workload_class,
        profile_id=profile_id,
        nodes=nodes,
        baseline_seconds=baseline_seconds,
    )
    guard = 0
    while sim.job(job.job_id).status is not JobStatus.FINISHED:
        sim.advance(max(baseline_seconds, 1.0))
        guard += 1
        if guard > 1000:
            raise RuntimeError("job did not finish; perf factor likely zero")
    return sim.outcome(job.job_id)
