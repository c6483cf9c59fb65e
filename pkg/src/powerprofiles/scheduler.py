"""Scheduler integration shim.

Parses batch-launch directives carrying a power-profile selection, validates
a submission against node availability and the facility power budget, and
drives the full job lifecycle (in-band profile apply, simulation, savings
report) through the control plane.
"""
from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from typing import Optional

from .calibration import DEFAULT_PROFILE
from .catalog import WorkloadHints, shared_catalog
from .errors import AdmissionRejected, MalformedDirective
from .service import ControlPlaneService

# Flags the shim understands. --power-profile may be styled case-insensitively
# with hyphens or underscores; anything not listed here is ignored so that
# real-world batch scripts with extra flags still parse.
_KNOWN_FLAGS = {
    "partition",
    "power-profile",
    "nodes",
    "ntasks-per-node",
    "application",
    "workload-class",
    "hints",
}
_INT_FLAGS = {"nodes", "ntasks-per-node"}


@dataclass(frozen=True)
class JobSpec:
    """One batch submission as the scheduler sees it."""

    profile_id: str = DEFAULT_PROFILE
    nodes: int = 1
    ntasks_per_node: int = 8
    partition: Optional[str] = None
    script: Optional[str] = None
    application: Optional[str] = None
    workload_class: Optional[str] = None
    hints: WorkloadHints = field(default_factory=WorkloadHints)

    def __post_init__(self) -> None:
        if self.nodes < 1:
            raise ValueError("nodes must be >= 1")
        if self.ntasks_per_node < 1:
            raise ValueError("ntasks_per_node must be >= 1")


@dataclass(frozen=True)
class AdmissionDecision:
    """Outcome of budget/capacity validation for one JobSpec."""

    admitted: bool
    reason: str
    projected_watts: float
    remaining_budget_watts: float
    deficit_watts: float = 0.0
    profile_enabled_admission: bool = False


def parse_directive(launch_line: str) -> JobSpec:
    """Parse a batch launch line into a JobSpec.

    Recognized flags: --partition, --power-profile, --nodes,
    --ntasks-per-node, --application, --workload-class, --hints (comma
    list). Both ``--flag=value`` and ``--flag value`` spellings work for
    recognized flags; unrecognized flags are skipped (with their ``=value``
    if attached inline). The first bare token after the command word is kept
    as the script name. A missing --power-profile means DEFAULT.
    """
    try:
        tokens = shlex.split(launch_line)
    except ValueError as exc:
        raise MalformedDirective(f"unparseable launch line: {exc}") from exc
    if not tokens:
        raise MalformedDirective("empty launch line")
    if not tokens[0].startswith("--"):
        tokens = tokens[1:]  # command word, e.g. "sbatch"

    values: dict[str, str] = {}
    script: Optional[str] = None
    index = 0
    while index < len(tokens):
        token = tokens[index]
        index += 1
        if not token.startswith("--"):
            if script is None:
                script = token
            continue
        body = token[2:]
        if not body:
            raise MalformedDirective("bare '--' is not a flag")
        if "=" in body:
            name, _, value = body.partition("=")
            if not name:
                raise MalformedDirective(f"flag with empty name: {token!r}")
            if name in _KNOWN_FLAGS:
                if not value:
                    raise MalformedDirective(f"flag --{name} has empty value")
                values[name] = value
            continue
        if body not in _KNOWN_FLAGS:
            continue  # unknown boolean-style flag
        if index >= len(tokens) or tokens[index].startswith("--"):
            raise MalformedDirective(f"flag --{body} is missing its value")
        values[body] = tokens[index]
        index += 1

    for name in _INT_FLAGS & values.keys():
        try:
            parsed = int(values[name])
        except ValueError:
            raise MalformedDirective(
                f"flag --{name} expects an integer, got {values[name]!r}"
            ) from None
        if parsed < 1:
            raise MalformedDirective(f"flag --{name} must be >= 1")

    profile_id = DEFAULT_PROFILE
    if "power-profile" in values:
        # Raises UnknownProfileName for names outside the catalog.
        profile_id = shared_catalog().normalize(values["power-profile"])
    hints = WorkloadHints()
    if "hints" in values:
        hints = WorkloadHints.from_tokens(
            token for token in values["hints"].split(",") if token
        )
    return JobSpec(
        profile_id=profile_id,
        nodes=int(values.get("nodes", 1)),
        ntasks_per_node=int(values.get("ntasks-per-node", 8)),
        partition=values.get("partition"),
        script=script,
        application=values.get("application"),
        workload_class=values.get("workload-class"),
        hints=hints,
    )


def render(spec: JobSpec) -> str:
    """Launch line for a JobSpec; parse_directive(render(s)) == s."""
    parts = ["sbatch"]
    if spec.partition is not None:
        parts.append(f"--partition={spec.partition}")
    if spec.profile_id != DEFAULT_PROFILE:
        parts.append(f"--power-profile={spec.profile_id}")
    parts.append(f"--nodes={spec.nodes}")
    parts.append(f"--ntasks-per-node={spec.ntasks_per_node}")
    if spec.application is not None:
        parts.append(f"--application={spec.application}")
    if spec.workload_class is not None:
        parts.append(f"--workload-class={spec.workload_class}")
    tokens = spec.hints.tokens()
    if tokens:
        parts.append(f"--hints={','.join(tokens)}")
    if spec.script is not None:
        parts.append(spec.script)
    return " ".join(parts)


def _projected_node_watts(
    service: ControlPlaneService, spec: JobSpec, profile_id: str
) -> float:
    """Busy-node wattage for the spec's workload under one profile."""
    sim = service.sim
    free = sim.free_node_ids()
    node_id = free[0] if free else next(iter(sim.facility.nodes))
    arch = sim.facility.nodes[node_id].arch
    workload_class = spec.workload_class
    if (
        workload_class is None
        and spec.application is None
        and profile_id != DEFAULT_PROFILE
    ):
        # Nothing known about the workload: project with the profile's own
        # class-level calibration row.
        workload_class = service.catalog.spec(profile_id).workload_class
    row = service.document.responses.lookup(
        arch.name,
        profile_id,
        application=spec.application,
        workload_class=workload_class,
    )
    return row.system_power_factor * sim.baseline_busy_node_watts(node_id)


def validate(spec: JobSpec, service: ControlPlaneService) -> AdmissionDecision:
    """Admission decision: node capacity first, then the power budget.

    The projected job power is nodes × calibrated busy-node watts under the
    spec's profile. The budget credits back the idle draw of the nodes the
    job would occupy, so the test is exactly "would facility power stay
    under the cap once this job is running".
    """
    sim = service.sim
    free = sim.free_node_ids()
    if spec.nodes > len(free):
        return AdmissionDecision(
            admitted=False,
            reason=(
                f"requested {spec.nodes} nodes, only {len(free)} free"
            ),
            projected_watts=0.0,
            remaining_budget_watts=0.0,
        )
    claimed = free[: spec.nodes]
    idle_credit = sum(sim.idle_node_watts(node_id) for node_id in claimed)
    remaining = (
        sim.facility.power_cap_watts - sim.facility_power_watts() + idle_credit
    )
    projected = spec.nodes * _projected_node_watts(service, spec, spec.profile_id)
    if projected > remaining:
        return AdmissionDecision(
            admitted=False,
            reason=(
                f"projected {projected:.0f} W exceeds remaining budget "
                f"{remaining:.0f} W"
            ),
            projected_watts=projected,
            remaining_budget_watts=remaining,
            deficit_watts=projected - remaining,
        )
    note = "fits power budget"
    profile_enabled = False
    if spec.profile_id != DEFAULT_PROFILE:
        unprofiled = spec.nodes * _projected_node_watts(
            service, spec, DEFAULT_PROFILE
        )
        if unprofiled > remaining:
            profile_enabled = True
            note = (
                f"admitted only because {spec.profile_id} cuts projected "
                f"power {unprofiled:.0f} W -> {projected:.0f} W"
            )
    return AdmissionDecision(
        admitted=True,
        reason=note,
        projected_watts=projected,
        remaining_budget_watts=remaining,
        profile_enabled_admission=profile_enabled,
    )


def run_job(
    spec: JobSpec,
    service: ControlPlaneService,
    baseline_seconds: float = 60.0,
    requester: str = "scheduler",
):
    """Admit, launch, simulate to completion, and report one job.

    Returns the finished JobRecord (expected and actual factors filled in,
    recommendation attached). Raises AdmissionRejected when validation
    fails; control-plane and simulator errors propagate unchanged.
    """
    decision = validate(spec, service)
    if not decision.admitted:
        raise AdmissionRejected(decision.reason)
    record = service.start_job(
        application=spec.application,
        workload_class=spec.workload_class,
        profile_id=spec.profile_id,
        hints=spec.hints,
        nodes=spec.nodes,
        baseline_seconds=baseline_seconds,
        tasks_per_node=spec.ntasks_per_node,
        requester=requester,
    )
    job = service.sim.job(record.job_id)
    while job.status.value != "finished":
        remaining = job.baseline_seconds - job.progress_seconds
        rate = service.sim.job_rate(record.job_id)
        service.advance(max(remaining / max(rate, 1e-9), 1.0))
    return service.job_record(record.job_id)
