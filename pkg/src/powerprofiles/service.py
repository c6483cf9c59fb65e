"""Control-plane service: pathways, demand response, alerts, job records.

Two request pathways reach the same per-GPU mode registries:

* ``in_band`` — the tenant path. May target only single GPUs or whole jobs.
* ``out_of_band`` — the operator path. May target anything up to the fleet.

Each pathway owns one slot per GPU: applying a profile through a pathway
replaces whatever that pathway had on the device before, and never touches
the other pathway's modes. Operator modes are registered under an ``admin:``
id prefix with a fixed priority offset, so arbitration alone enforces that
operator intent wins conflicts and knob overlaps.

Every state-changing request appends one audit record; replaying the audit
log's apply records onto a fresh service reproduces the same per-GPU
effective configurations.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Iterable, Mapping, Optional

from .calibration import DEFAULT_PROFILE, CalibrationDocument, ResponseTable
from .catalog import Goal, ProfileCatalog, WorkloadHints
from .errors import JobNotFinished, Unauthorized, UnknownJob, UnknownScope
from .fleet import (
    SIM_EPOCH,
    Facility,
    FleetSimulator,
    JobState,
    JobStatus,
    build_facility,
)
from .knobs import standard_knob_dictionary
from .modes import EffectiveConfig, ModeRegistry, PerformanceMode, explain
from .powermodel import energy_saving
from .store import AppendOnlyStore

#: Priority offset that puts every operator-applied mode above any tenant mode.
ADMIN_PRIORITY_OFFSET = 1000

_ADMIN_PREFIX = "admin:"

#: Expected-vs-actual divergence (in absolute fraction) that triggers a
#: re-profiling recommendation.
RECOMMEND_DELTA = 0.02


class Pathway(str, Enum):
    IN_BAND = "in_band"
    OUT_OF_BAND = "out_of_band"


_SCOPE_KINDS = ("gpu", "node", "rack", "fleet", "job")
_IN_BAND_KINDS = frozenset({"gpu", "job"})


@dataclass(frozen=True)
class Scope:
    """A target expression: ``fleet`` or ``<kind>:<id>``."""

    kind: str
    target: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in _SCOPE_KINDS:
            raise UnknownScope(f"unknown scope kind {self.kind!r}")
        if self.kind == "fleet":
            if self.target is not None:
                raise UnknownScope("fleet scope takes no target id")
        elif not self.target:
            raise UnknownScope(f"{self.kind} scope requires a target id")

    @classmethod
    def parse(cls, text: str) -> "Scope":
        text = text.strip()
        if text == "fleet":
            return cls("fleet")
        kind, sep, target = text.partition(":")
        if not sep:
            raise UnknownScope(f"scope must be 'fleet' or 'kind:id', got {text!r}")
        return cls(kind, target)

    def __str__(self) -> str:
        return self.kind if self.kind == "fleet" else f"{self.kind}:{self.target}"


@dataclass(frozen=True)
class ApplyRequest:
    pathway: Pathway
    scope: Scope
    profile_id: str
    requester: str
    hints: WorkloadHints = WorkloadHints()


@dataclass(frozen=True)
class DeviceApplyResult:
    """Outcome of one apply on one GPU: the winning config and its story."""

    gpu_id: str
    active_modes: tuple[str, ...]
    entries: Mapping[str, object]
    discarded: tuple[tuple[str, str], ...]  # (mode, lost_to)
    explain_report: str
    active_profile: str


@dataclass(frozen=True)
class ApplyResult:
    request: ApplyRequest
    devices: tuple[DeviceApplyResult, ...]
    audit_seq: int


@dataclass(frozen=True)
class DemandResponseEvent:
    """A temporary facility power-cap reduction."""

    event_id: str
    new_cap_watts: float
    effective_at: datetime
    expires_at: datetime
    note: str = ""

    def __post_init__(self) -> None:
        if self.new_cap_watts <= 0:
            raise ValueError("new_cap_watts must be positive")
        if not self.effective_at < self.expires_at:
            raise ValueError("effective_at must precede expires_at")


@dataclass(frozen=True)
class _Slot:
    """What one pathway currently has applied to one GPU."""

    profile_id: str
    mode_ids: tuple[str, ...]
    hints: WorkloadHints


@dataclass
class _EventState:
    event: DemandResponseEvent
    status: str = "pending"  # pending | active | expired
    prior_cap_watts: float = 0.0
    prior_slots: dict[str, dict[Pathway, _Slot]] = field(default_factory=dict)
    suspended_jobs: list[str] = field(default_factory=list)
    switched_jobs: list[str] = field(default_factory=list)
    cap_unreachable: bool = False
    noop: bool = False


@dataclass(frozen=True)
class AlertRule:
    rule_id: str
    metric: str
    threshold_fraction: float
    scope: str = "fleet"  # fleet | profile:<id> | application:<name> | job:<id>

    def __post_init__(self) -> None:
        if self.metric != "perf_degradation":
            raise ValueError(f"unsupported alert metric {self.metric!r}")
        if not 0.0 < self.threshold_fraction < 1.0:
            raise ValueError("threshold_fraction must be in (0, 1)")


@dataclass(frozen=True)
class Alert:
    alert_id: str
    rule_id: str
    job_id: str
    profile_id: str
    measured_perf_factor: float
    degradation: float
    at: datetime


@dataclass(frozen=True)
class FactorSet:
    perf_factor: float
    gpu_power_factor: float
    system_power_factor: float
    energy_saving: float

    def to_dict(self) -> dict:
        return {
            "perf_factor": self.perf_factor,
            "gpu_power_factor": self.gpu_power_factor,
            "system_power_factor": self.system_power_factor,
            "energy_saving": self.energy_saving,
        }


@dataclass
class JobRecord:
    """Durable record of one job: what was promised and what happened."""

    job_id: str
    application: Optional[str]
    workload_class: Optional[str]
    profile_id: str
    hints: tuple[str, ...]
    nodes: int
    submitted_at: datetime
    started_at: datetime
    ended_at: Optional[datetime] = None
    status: str = "running"
    expected: Optional[FactorSet] = None
    actual: Optional[FactorSet] = None
    energy_joules: Optional[float] = None
    recommendation: Optional[str] = None

    def to_dict(self) -> dict:
        stamp = "%Y-%m-%dT%H:%M:%SZ"
        return {
            "job_id": self.job_id,
            "application": self.application,
            "workload_class": self.workload_class,
            "profile_id": self.profile_id,
            "hints": list(self.hints),
            "nodes": self.nodes,
            "submitted_at": self.submitted_at.strftime(stamp),
            "started_at": self.started_at.strftime(stamp),
            "ended_at": self.ended_at.strftime(stamp) if self.ended_at else None,
            "status": self.status,
            "expected": self.expected.to_dict() if self.expected else None,
            "actual": self.actual.to_dict() if self.actual else None,
            "energy_joules": self.energy_joules,
            "recommendation": self.recommendation,
        }


@dataclass(frozen=True)
class SavingsReport:
    job_id: str
    application: Optional[str]
    profile_id: str
    expected: FactorSet
    actual: FactorSet
    perf_delta: float
    energy_saving_delta: float
    recommendation: str

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "application": self.application,
            "profile_id": self.profile_id,
            "expected": self.expected.to_dict(),
            "actual": self.actual.to_dict(),
            "perf_delta": self.perf_delta,
            "energy_saving_delta": self.energy_saving_delta,
            "recommendation": self.recommendation,
        }


def admin_variant(mode: PerformanceMode) -> PerformanceMode:
    """Re-key a mode into the operator namespace with elevated priority."""
    conflicts = frozenset(mode.conflicts_with) | frozenset(
        _ADMIN_PREFIX + c for c in mode.conflicts_with
    )
    return replace(
        mode,
        mode_id=_ADMIN_PREFIX + mode.mode_id,
        priority=mode.priority + ADMIN_PRIORITY_OFFSET,
        conflicts_with=conflicts,
    )


class ControlPlaneService:
    """Single-facility management service over a simulated fleet."""

    def __init__(
        self,
        facility: Optional[Facility] = None,
        document: Optional[CalibrationDocument] = None,
        actual_responses: Optional[ResponseTable] = None,
        persist_path=None,
    ) -> None:
        facility = facility if facility is not None else build_facility(1, 2)
        self.sim = FleetSimulator(facility, document, actual_responses)
        self.document = self.sim.document
        self.catalog = ProfileCatalog(self.document)
        self.audit = AppendOnlyStore(persist_path)
        self._registries: dict[str, ModeRegistry] = {}
        self._slots: dict[str, dict[Pathway, _Slot]] = {}
        for node in facility.nodes.values():
            dictionary = standard_knob_dictionary(node.arch.name)
            for gpu_id in node.gpu_ids:
                self._registries[gpu_id] = ModeRegistry(dictionary)
                self._slots[gpu_id] = {}
        self._events: dict[str, _EventState] = {}
        self._event_counter = 0
        self._alert_rules: dict[str, AlertRule] = {}
        self._alerts: list[Alert] = []
        self._fired: set[tuple[str, str]] = set()
        self._alert_counter = 0
        self._rule_counter = 0
        self._job_records: dict[str, JobRecord] = {}

    # -- scope expansion ---------------------------------------------------------

    def _gpus_for_scope(self, scope: Scope) -> tuple[str, ...]:
        facility = self.sim.facility
        if scope.kind == "fleet":
            return self.sim.gpu_ids()
        if scope.kind == "gpu":
            if scope.target not in self._registries:
                raise UnknownScope(f"no gpu named {scope.target!r}")
            return (scope.target,)
        if scope.kind == "node":
            node = facility.nodes.get(scope.target)
            if node is None:
                raise UnknownScope(f"no node named {scope.target!r}")
            return node.gpu_ids
        if scope.kind == "rack":
            node_ids = facility.racks.get(scope.target)
            if node_ids is None:
                raise UnknownScope(f"no rack named {scope.target!r}")
            return tuple(g for n in node_ids for g in facility.nodes[n].gpu_ids)
        if scope.kind == "job":
            job = self.sim.job(scope.target)  # raises UnknownJob
            return tuple(
                g for n in job.node_ids for g in facility.nodes[n].gpu_ids
            )
        raise UnknownScope(f"unknown scope kind {scope.kind!r}")

    # -- apply -------------------------------------------------------------------

    def apply(self, request: ApplyRequest) -> ApplyResult:
        """Apply a profile through a pathway; audited, per-device results."""
        if (
            request.pathway is Pathway.IN_BAND
            and request.scope.kind not in _IN_BAND_KINDS
        ):
            raise Unauthorized(
                f"in_band requests may not target {request.scope.kind} scope"
            )
        profile_id = self.catalog.normalize(request.profile_id)
        if profile_id != DEFAULT_PROFILE:
            self.catalog.spec(profile_id)  # raises UnknownProfile
        gpu_ids = self._gpus_for_scope(request.scope)
        devices = tuple(
            self._apply_to_gpu(gpu_id, request.pathway, profile_id, request.hints)
            for gpu_id in gpu_ids
        )
        seq = self.audit.append(
            {
                "kind": "apply",
                "at": self.sim.now.isoformat(),
                "pathway": request.pathway.value,
                "scope": str(request.scope),
                "profile_id": profile_id,
                "requester": request.requester,
                "hints": list(request.hints.tokens()),
                "devices": [
                    {
                        "gpu_id": d.gpu_id,
                        "active_profile": d.active_profile,
                        "active_modes": list(d.active_modes),
                    }
                    for d in devices
                ],
            }
        )
        return ApplyResult(
            request=replace(request, profile_id=profile_id),
            devices=devices,
            audit_seq=seq,
        )

    def _apply_to_gpu(
        self,
        gpu_id: str,
        pathway: Pathway,
        profile_id: str,
        hints: WorkloadHints,
    ) -> DeviceApplyResult:
        registry = self._registries[gpu_id]
        slots = self._slots[gpu_id]
        previous = slots.pop(pathway, None)
        if previous is not None:
            for mode_id in previous.mode_ids:
                registry.unregister(mode_id)
        arch = self.sim.gpu(gpu_id).arch.name
        modes = self.catalog.profile_modes(profile_id, hints, arch=arch)
        if pathway is Pathway.OUT_OF_BAND:
            modes = tuple(admin_variant(m) for m in modes)
        for mode in modes:
            registry.register(mode)
            registry.set_enabled(mode.mode_id, True)
        if modes:
            slots[pathway] = _Slot(
                profile_id, tuple(m.mode_id for m in modes), hints
            )
        config = registry.arbitrate()
        label = self._winning_profile(gpu_id, config)
        self.sim.apply_config(gpu_id, config, label)
        return DeviceApplyResult(
            gpu_id=gpu_id,
            active_modes=config.active_modes,
            entries={k: e.value for k, e in sorted(config.entries.items())},
            discarded=tuple((d.mode_id, d.lost_to) for d in config.discarded),
            explain_report=explain(config),
            active_profile=label,
        )

    def _winning_profile(self, gpu_id: str, config: EffectiveConfig) -> str:
        """The profile label whose pathway owns the highest-priority survivor."""
        if not config.active_modes:
            return DEFAULT_PROFILE
        top = config.active_modes[0]
        slots = self._slots[gpu_id]
        pathway = (
            Pathway.OUT_OF_BAND if top.startswith(_ADMIN_PREFIX) else Pathway.IN_BAND
        )
        slot = slots.get(pathway)
        return slot.profile_id if slot is not None else DEFAULT_PROFILE

    def effective_config(self, gpu_id: str) -> EffectiveConfig:
        if gpu_id not in self._registries:
            raise UnknownScope(f"no gpu named {gpu_id!r}")
        return self._registries[gpu_id].arbitrate()

    def enabled_modes(self, gpu_id: str) -> frozenset[str]:
        if gpu_id not in self._registries:
            raise UnknownScope(f"no gpu named {gpu_id!r}")
        return self._registries[gpu_id].enabled

    def mode_priorities(self, arch: str = "B200"):
        """Catalog-wide priority/conflict table for one architecture."""
        from .knobs import standard_knob_dictionary

        registry = ModeRegistry(standard_knob_dictionary(arch))
        for recipe in self.document.mode_recipes.values():
            registry.register(recipe.materialize(arch))
        return registry.query_priorities()

    # -- jobs ---------------------------------------------------------------------

    def start_job(
        self,
        application: Optional[str] = None,
        workload_class: Optional[str] = None,
        profile_id: str = DEFAULT_PROFILE,
        hints: WorkloadHints = WorkloadHints(),
        nodes: int = 1,
        baseline_seconds: float = 60.0,
        tasks_per_node: int = 8,
        requester: str = "tenant",
    ) -> JobRecord:
        """Place a job, apply its profile through the in-band path, record it."""
        profile_id = self.catalog.normalize(profile_id)
        job = self.sim.submit_job(
            application=application,
            workload_class=workload_class,
            profile_id=profile_id,
            nodes=nodes,
            baseline_seconds=baseline_seconds,
            tasks_per_node=tasks_per_node,
        )
        self.apply(
            ApplyRequest(
                pathway=Pathway.IN_BAND,
                scope=Scope("job", job.job_id),
                profile_id=profile_id,
                requester=requester,
                hints=hints,
            )
        )
        arch = self.sim.facility.nodes[job.node_ids[0]].arch.name
        expected_row = self.document.responses.lookup(
            arch, profile_id, application=application, workload_class=workload_class
        )
        expected = FactorSet(
            perf_factor=expected_row.perf_factor,
            gpu_power_factor=expected_row.gpu_power_factor,
            system_power_factor=expected_row.system_power_factor,
            energy_saving=energy_saving(
                expected_row.perf_factor, expected_row.system_power_factor
            ),
        )
        record = JobRecord(
            job_id=job.job_id,
            application=application,
            workload_class=workload_class,
            profile_id=profile_id,
            hints=hints.tokens(),
            nodes=nodes,
            submitted_at=job.submitted_at,
            started_at=job.started_at,
            expected=expected,
        )
        self._job_records[job.job_id] = record
        self.audit.append(
            {
                "kind": "job_started",
                "at": self.sim.now.isoformat(),
                "job_id": job.job_id,
                "application": application,
                "profile_id": profile_id,
                "nodes": nodes,
                "requester": requester,
            }
        )
        return record

    def job_record(self, job_id: str) -> JobRecord:
        try:
            return self._job_records[job_id]
        except KeyError:
            raise UnknownJob(f"no job named {job_id!r}") from None

    def job_records(self) -> list[JobRecord]:
        return list(self._job_records.values())

    def _finalize_job(self, job: JobState) -> None:
        record = self._job_records.get(job.job_id)
        if record is None or record.status == "finished":
            return
        # The job's tenant-path modes die with the job; operator-path modes
        # (e.g. an active demand-response override) stay until their owner
        # removes them. Active events forget the dead slot so expiry does not
        # resurrect it.
        cleared: list[str] = []
        for node_id in job.node_ids:
            for gpu_id in self.sim.facility.nodes[node_id].gpu_ids:
                if Pathway.IN_BAND in self._slots[gpu_id]:
                    self._apply_to_gpu(
                        gpu_id, Pathway.IN_BAND, DEFAULT_PROFILE, WorkloadHints()
                    )
                    cleared.append(gpu_id)
                for event_state in self._events.values():
                    if event_state.status == "active":
                        event_state.prior_slots.get(gpu_id, {}).pop(
                            Pathway.IN_BAND, None
                        )
        if cleared:
            self.audit.append(
                {
                    "kind": "apply",
                    "at": self.sim.now.isoformat(),
                    "pathway": Pathway.IN_BAND.value,
                    "scope": f"job:{job.job_id}",
                    "profile_id": DEFAULT_PROFILE,
                    "requester": "policy:job-end",
                    "hints": [],
                    "devices": [
                        {"gpu_id": g, "active_profile": DEFAULT_PROFILE}
                        for g in cleared
                    ],
                }
            )
        outcome = self.sim.outcome(job.job_id)
        record.status = "finished"
        record.ended_at = job.ended_at
        record.energy_joules = outcome.energy_joules
        record.actual = FactorSet(
            perf_factor=outcome.perf_factor,
            gpu_power_factor=outcome.gpu_power_factor,
            system_power_factor=outcome.system_power_factor,
            energy_saving=energy_saving(
                outcome.perf_factor, outcome.system_power_factor
            ),
        )
        record.recommendation = self._recommendation(record)
        self.audit.append(
            {
                "kind": "job_finished",
                "at": self.sim.now.isoformat(),
                "job_id": job.job_id,
                "energy_joules": outcome.energy_joules,
                "actual_perf_factor": outcome.perf_factor,
                "actual_system_power_factor": outcome.system_power_factor,
            }
        )

    def _recommendation(self, record: JobRecord) -> str:
        expected, actual = record.expected, record.actual
        delta_energy = actual.energy_saving - expected.energy_saving
        delta_perf = actual.perf_factor - expected.perf_factor
        if abs(delta_energy) > RECOMMEND_DELTA or abs(delta_perf) > RECOMMEND_DELTA:
            return (
                f"Actual savings diverged from calibration by "
                f"{abs(delta_energy) * 100:.1f} pp (perf by {abs(delta_perf) * 100:.1f} pp); "
                f"re-profile this workload with explicit hints "
                f"(memory_bound/compute_bound, nvlink_heavy/nvlink_light) "
                f"before the next submission."
            )
        if record.profile_id == DEFAULT_PROFILE:
            classes = record.workload_class or (
                self.document.responses.class_of(record.application)
                if record.application
                else None
            )
            if classes:
                profile = self.catalog.resolve_profile(classes, Goal.MAX_Q)
                row = self.document.responses.lookup(
                    "B200", profile, application=record.application,
                    workload_class=record.workload_class,
                )
                saving = energy_saving(row.perf_factor, row.system_power_factor)
                return (
                    f"No profile was applied; {profile} is calibrated for "
                    f"~{saving * 100:.0f}% energy saving on this workload class."
                )
            return "No profile was applied and no calibration class is known."
        return (
            f"Profile performed within calibration; keep {record.profile_id} "
            f"for future submissions of this workload."
        )

    def savings_report(self, job_id: str) -> SavingsReport:
        record = self.job_record(job_id)
        if record.status != "finished" or record.actual is None:
            raise JobNotFinished(f"job {job_id} has not finished")
        return SavingsReport(
            job_id=record.job_id,
            application=record.application,
            profile_id=record.profile_id,
            expected=record.expected,
            actual=record.actual,
            perf_delta=record.actual.perf_factor - record.expected.perf_factor,
            energy_saving_delta=(
                record.actual.energy_saving - record.expected.energy_saving
            ),
            recommendation=record.recommendation,
        )

    def history_query(
        self,
        application: Optional[str] = None,
        profile_id: Optional[str] = None,
        start: Optional[datetime] = None,
        end: Optional[datetime] = None,
    ) -> list[JobRecord]:
        out = []
        for record in self._job_records.values():
            if application is not None and record.application != application:
                continue
            if profile_id is not None and record.profile_id != profile_id:
                continue
            if start is not None and record.started_at < start:
                continue
            if end is not None and record.started_at > end:
                continue
            out.append(record)
        out.sort(key=lambda r: (r.started_at, r.job_id))
        return out

    # -- demand response ----------------------------------------------------------

    def demand_response(
        self,
        new_cap_watts: float,
        expires_at: datetime,
        effective_at: Optional[datetime] = None,
        note: str = "",
    ) -> DemandResponseEvent:
        """Register a temporary cap reduction; takes effect at effective_at."""
        effective = effective_at if effective_at is not None else self.sim.now
        self._event_counter += 1
        event = DemandResponseEvent(
            event_id=f"dr-{self._event_counter}",
            new_cap_watts=float(new_cap_watts),
            effective_at=effective,
            expires_at=expires_at,
            note=note,
        )
        self._events[event.event_id] = _EventState(event=event)
        self.audit.append(
            {
                "kind": "demand_response_registered",
                "at": self.sim.now.isoformat(),
                "event_id": event.event_id,
                "new_cap_watts": event.new_cap_watts,
                "effective_at": event.effective_at.isoformat(),
                "expires_at": event.expires_at.isoformat(),
                "note": note,
            }
        )
        self._process_due_events()
        return event

    def events(self) -> list[dict]:
        out = []
        for state in self._events.values():
            out.append(
                {
                    "event_id": state.event.event_id,
                    "new_cap_watts": state.event.new_cap_watts,
                    "effective_at": state.event.effective_at.isoformat(),
                    "expires_at": state.event.expires_at.isoformat(),
                    "status": state.status,
                    "cap_unreachable": state.cap_unreachable,
                    "noop": state.noop,
                    "suspended_jobs": list(state.suspended_jobs),
                    "switched_jobs": list(state.switched_jobs),
                    "note": state.event.note,
                }
            )
        return out

    def _seconds_of(self, at: datetime) -> float:
        return (at - SIM_EPOCH).total_seconds()

    def _process_due_events(self) -> None:
        now = self.sim.seconds + 1e-9
        for state in self._events.values():
            if state.status == "pending" and self._seconds_of(
                state.event.effective_at
            ) <= now:
                self._activate_event(state)
            if state.status == "active" and self._seconds_of(
                state.event.expires_at
            ) <= now:
                self._expire_event(state)

    def _activate_event(self, state: _EventState) -> None:
        event = state.event
        state.status = "active"
        state.prior_cap_watts = self.sim.facility.power_cap_watts
        state.prior_slots = {
            gpu_id: dict(slots) for gpu_id, slots in self._slots.items()
        }
        self.sim.set_power_cap(event.new_cap_watts)
        if self.sim.facility_power_watts() <= event.new_cap_watts:
            state.noop = True
            self.audit.append(
                {
                    "kind": "demand_response_activated",
                    "at": self.sim.now.isoformat(),
                    "event_id": event.event_id,
                    "noop": True,
                }
            )
            return
        # Step 1: move every running job's devices to its class's Max-Q variant.
        for job in self.sim.running_jobs():
            workload_class = job.workload_class or (
                self.document.responses.class_of(job.application)
                if job.application
                else None
            )
            if workload_class is None:
                continue
            target = self.catalog.resolve_profile(workload_class, Goal.MAX_Q)
            current = self.sim.gpu(
                self.sim.facility.nodes[job.node_ids[0]].gpu_ids[0]
            ).active_profile
            if current == target:
                continue
            self.apply(
                ApplyRequest(
                    pathway=Pathway.OUT_OF_BAND,
                    scope=Scope("job", job.job_id),
                    profile_id=target,
                    requester="policy:demand-response",
                )
            )
            state.switched_jobs.append(job.job_id)
        # Step 2: if still over the cap, suspend newest jobs until under it.
        while self.sim.facility_power_watts() > event.new_cap_watts:
            running = sorted(
                self.sim.running_jobs(),
                key=lambda j: (j.started_at, j.job_id),
            )
            if not running:
                state.cap_unreachable = True
                break
            newest = running[-1]
            self.sim.suspend_job(newest.job_id)
            state.suspended_jobs.append(newest.job_id)
            self.audit.append(
                {
                    "kind": "job_suspended",
                    "at": self.sim.now.isoformat(),
                    "job_id": newest.job_id,
                    "event_id": event.event_id,
                }
            )
        self.audit.append(
            {
                "kind": "demand_response_activated",
                "at": self.sim.now.isoformat(),
                "event_id": event.event_id,
                "noop": False,
                "switched_jobs": list(state.switched_jobs),
                "suspended_jobs": list(state.suspended_jobs),
                "cap_unreachable": state.cap_unreachable,
            }
        )

    def _expire_event(self, state: _EventState) -> None:
        event = state.event
        state.status = "expired"
        self.sim.set_power_cap(state.prior_cap_watts)
        if not state.noop:
            for job_id in reversed(state.suspended_jobs):
                job = self.sim.jobs.get(job_id)
                if job is not None and job.status is JobStatus.SUSPENDED:
                    self.sim.resume_job(job_id)
                    self.audit.append(
                        {
                            "kind": "job_resumed",
                            "at": self.sim.now.isoformat(),
                            "job_id": job_id,
                            "event_id": event.event_id,
                        }
                    )
            # Restore each device's pre-event slots through the normal path so
            # registries, labels, and knob entries all return exactly.
            groups: dict[tuple, list[str]] = {}
            for gpu_id, prior in state.prior_slots.items():
                current = self._slots[gpu_id]
                if current == prior:
                    continue
                for pathway in (Pathway.IN_BAND, Pathway.OUT_OF_BAND):
                    prior_slot = prior.get(pathway)
                    if prior_slot == current.get(pathway):
                        continue
                    profile_id = (
                        prior_slot.profile_id if prior_slot else DEFAULT_PROFILE
                    )
                    hints = prior_slot.hints if prior_slot else WorkloadHints()
                    self._apply_to_gpu(gpu_id, pathway, profile_id, hints)
                    groups.setdefault(
                        (pathway.value, profile_id, hints.tokens()), []
                    ).append(gpu_id)
            for (pathway_value, profile_id, hint_tokens), gpu_ids in groups.items():
                self.audit.append(
                    {
                        "kind": "apply",
                        "at": self.sim.now.isoformat(),
                        "pathway": pathway_value,
                        "scope": f"event:{event.event_id}",
                        "profile_id": profile_id,
                        "requester": "policy:demand-response",
                        "hints": list(hint_tokens),
                        "devices": [
                            {"gpu_id": g, "active_profile": profile_id}
                            for g in gpu_ids
                        ],
                    }
                )
        self.audit.append(
            {
                "kind": "demand_response_expired",
                "at": self.sim.now.isoformat(),
                "event_id": event.event_id,
            }
        )

    # -- alerts ---------------------------------------------------------------------

    def add_alert_rule(
        self,
        threshold_fraction: float,
        scope: str = "fleet",
        metric: str = "perf_degradation",
    ) -> AlertRule:
        self._rule_counter += 1
        rule = AlertRule(
            rule_id=f"rule-{self._rule_counter}",
            metric=metric,
            threshold_fraction=threshold_fraction,
            scope=scope,
        )
        self._alert_rules[rule.rule_id] = rule
        self.audit.append(
            {
                "kind": "alert_rule_added",
                "at": self.sim.now.isoformat(),
                "rule_id": rule.rule_id,
                "metric": metric,
                "threshold_fraction": threshold_fraction,
                "scope": scope,
            }
        )
        return rule

    def alert_rules(self) -> list[AlertRule]:
        return list(self._alert_rules.values())

    def alerts(self) -> list[Alert]:
        return list(self._alerts)

    def _rule_matches(self, rule: AlertRule, record: JobRecord) -> bool:
        if rule.scope == "fleet":
            return True
        kind, _, target = rule.scope.partition(":")
        if kind == "profile":
            return record.profile_id == target
        if kind == "application":
            return record.application == target
        if kind == "job":
            return record.job_id == target
        return False

    def _measured_perf_factor(self, job: JobState) -> Optional[float]:
        if job.status is JobStatus.FINISHED:
            return job.baseline_seconds / job.active_wall_seconds
        if job.active_wall_seconds >= 1.0:
            return job.progress_seconds / job.active_wall_seconds
        return None

    def evaluate_alerts(self) -> list[Alert]:
        """Fire at most one alert per (rule, job) whose degradation crosses."""
        emitted: list[Alert] = []
        for rule in self._alert_rules.values():
            for job in self.sim.jobs.values():
                key = (rule.rule_id, job.job_id)
                if key in self._fired:
                    continue
                record = self._job_records.get(job.job_id)
                if record is None or not self._rule_matches(rule, record):
                    continue
                measured = self._measured_perf_factor(job)
                if measured is None:
                    continue
                if measured < 1.0 - rule.threshold_fraction:
                    self._fired.add(key)
                    self._alert_counter += 1
                    alert = Alert(
                        alert_id=f"alert-{self._alert_counter}",
                        rule_id=rule.rule_id,
                        job_id=job.job_id,
                        profile_id=record.profile_id,
                        measured_perf_factor=measured,
                        degradation=1.0 - measured,
                        at=self.sim.now,
                    )
                    self._alerts.append(alert)
                    emitted.append(alert)
                    self.audit.append(
                        {
                            "kind": "alert_fired",
                            "at": self.sim.now.isoformat(),
                            "alert_id": alert.alert_id,
                            "rule_id": rule.rule_id,
                            "job_id": job.job_id,
                            "degradation": alert.degradation,
                        }
                    )
        return emitted

    # -- time -----------------------------------------------------------------------

    def advance(self, seconds: float) -> list[JobState]:
        """Advance simulated time, honoring event boundaries on the way."""
        if seconds < 0:
            raise ValueError("cannot advance backwards")
        end = self.sim.seconds + seconds
        finished_all: list[JobState] = []
        while True:
            self._process_due_events()
            now = self.sim.seconds
            if now >= end - 1e-9:
                break
            boundary = end
            for state in self._events.values():
                candidates = []
                if state.status == "pending":
                    candidates.append(self._seconds_of(state.event.effective_at))
                    candidates.append(self._seconds_of(state.event.expires_at))
                elif state.status == "active":
                    candidates.append(self._seconds_of(state.event.expires_at))
                for t in candidates:
                    if now + 1e-9 < t < boundary:
                        boundary = t
            finished = self.sim.advance(boundary - now)
            for job in finished:
                self._finalize_job(job)
                finished_all.append(job)
            self.evaluate_alerts()
        return finished_all

    # -- telemetry --------------------------------------------------------------------

    def telemetry(
        self,
        level: Optional[str] = None,
        entity_id: Optional[str] = None,
        start: Optional[datetime] = None,
        end: Optional[datetime] = None,
    ):
        return self.sim.telemetry_between(level, entity_id, start, end)

    # -- audit replay -------------------------------------------------------------------

    def replay_audit(self, records: Iterable[Mapping]) -> None:
        """Re-execute apply records (oldest first) against this service.

        Replay targets the recorded device lists rather than re-expanding
        scopes, so job- and event-scoped applies replay exactly even though
        the jobs themselves are not part of the audit state.
        """
        for record in records:
            if record.get("kind") != "apply":
                continue
            pathway = Pathway(record["pathway"])
            hints = WorkloadHints.from_tokens(record.get("hints", ()))
            for entry in record["devices"]:
                self._apply_to_gpu(
                    entry["gpu_id"], pathway, record["profile_id"], hints
                )

    def compact_audit(self) -> None:
        """Fold the audit log into a snapshot of current per-GPU slots."""
        state = {
            "slots": {
                gpu_id: {
                    pathway.value: {
                        "profile_id": slot.profile_id,
                        "hints": list(slot.hints.tokens()),
                    }
                    for pathway, slot in slots.items()
                }
                for gpu_id, slots in self._slots.items()
                if slots
            },
            "through": self.sim.now.isoformat(),
        }
        self.audit.compact(state)
