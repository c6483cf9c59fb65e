"""HTTP/JSON control-plane API.

Exposes the profile directory, mode priorities, apply, demand response,
telemetry, job records and reports, and alerting over a small REST surface.
Authorization is a static token→role map: the ``admin`` role may use the
out-of-band pathway, raise demand-response events, manage alert rules, and
drive the simulation clock; the ``tenant`` role is limited to in-band applies,
job submission, and reads.
"""
from __future__ import annotations

from datetime import datetime, timezone
from typing import Literal, Optional

import click
from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .calibration import DEFAULT_PROFILE
from .catalog import WorkloadHints
from .errors import (
    InsufficientNodes,
    JobNotFinished,
    PowerProfilesError,
    Unauthorized,
    UnknownHierarchyNode,
    UnknownJob,
    UnknownProfile,
    UnknownProfileName,
    UnknownScope,
)
from .fleet import build_facility
from .service import ApplyRequest, ControlPlaneService, Pathway, Scope

DEFAULT_TOKENS = {
    "admin-token": "admin",
    "tenant-token": "tenant",
}

_NOT_FOUND = (UnknownJob, UnknownScope, UnknownHierarchyNode, UnknownProfile,
              UnknownProfileName)
_CONFLICT = (JobNotFinished, InsufficientNodes)


class ApplyBody(BaseModel):
    pathway: Literal["in_band", "out_of_band"]
    scope: str
    profile_id: str
    requester: str = "anonymous"
    hints: list[str] = Field(default_factory=list)


class DemandResponseBody(BaseModel):
    new_cap_watts: float = Field(gt=0)
    expires_at: datetime
    effective_at: Optional[datetime] = None
    note: str = ""


class AlertRuleBody(BaseModel):
    metric: Literal["perf_degradation"] = "perf_degradation"
    threshold_fraction: float = Field(gt=0, lt=1)
    scope: str = "fleet"


class JobSubmitBody(BaseModel):
    application: Optional[str] = None
    workload_class: Optional[str] = None
    profile_id: str = DEFAULT_PROFILE
    nodes: int = Field(default=1, ge=1)
    baseline_seconds: float = Field(gt=0)
    hints: list[str] = Field(default_factory=list)
    requester: str = "anonymous"


class AdvanceBody(BaseModel):
    seconds: float = Field(gt=0)


def _utc(value: Optional[datetime]) -> Optional[datetime]:
    """Treat naive client timestamps as UTC; normalize aware ones to UTC."""
    if value is None:
        return None
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def create_app(
    service: Optional[ControlPlaneService] = None,
    *,
    racks: int = 1,
    nodes_per_rack: int = 2,
    arch: str = "B200",
    tokens: Optional[dict[str, str]] = None,
) -> FastAPI:
    if service is None:
        facility = build_facility(
            racks=racks, nodes_per_rack=nodes_per_rack, arch=arch
        )
        service = ControlPlaneService(facility)

    app = FastAPI(title="GPU power-profile control plane", version="1.0")
    app.state.service = service
    app.state.tokens = dict(tokens) if tokens is not None else dict(DEFAULT_TOKENS)

    def role_of(
        request: Request,
        x_auth_token: str = Header(default=""),
    ) -> str:
        role = request.app.state.tokens.get(x_auth_token)
        if role is None:
            raise HTTPException(status_code=401, detail="unknown or missing token")
        return role

    def require_admin(role: str = Depends(role_of)) -> str:
        if role != "admin":
            raise HTTPException(status_code=403, detail="admin role required")
        return role

    @app.exception_handler(PowerProfilesError)
    async def _domain_error(request: Request, exc: PowerProfilesError):
        if isinstance(exc, Unauthorized):
            status = 403
        elif isinstance(exc, _NOT_FOUND):
            status = 404
        elif isinstance(exc, _CONFLICT):
            status = 409
        else:
            status = 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "detail": str(exc)},
        )

    # -- read side ---------------------------------------------------------------

    @app.get("/v1/profiles")
    def list_profiles(role: str = Depends(role_of)):
        return {
            "profiles": [
                {
                    "profile_id": info.profile_id,
                    "workload_class": info.workload_class.value,
                    "goal": info.goal.value,
                    "status": info.status.value,
                    "description": info.description,
                    "mode_ids": list(
                        service.document.profiles[info.profile_id].mode_ids
                    ),
                }
                for info in service.catalog.list_profiles()
            ]
        }

    @app.get("/v1/modes/priorities")
    def mode_priorities(
        arch: str = Query(default="B200"),
        role: str = Depends(role_of),
    ):
        recipes = service.document.mode_recipes
        return {
            "arch": arch,
            "modes": [
                {
                    "mode_id": mode_id,
                    "priority": priority,
                    "conflicts_with": sorted(conflicts),
                    "assignments": {
                        a.knob_id: a.value
                        for a in recipes[mode_id].materialize(arch).assignments
                    },
                }
                for mode_id, priority, conflicts
                in service.mode_priorities(arch)
            ],
        }

    @app.get("/v1/facility")
    def facility_view(role: str = Depends(role_of)):
        facility = service.sim.facility
        arch_names = {node.arch.name for node in facility.nodes.values()}
        return {
            "arch": arch_names.pop() if len(arch_names) == 1 else "mixed",
            "power_cap_watts": facility.power_cap_watts,
            "power_watts": service.sim.facility_power_watts(),
            "baseline_busy_watts": service.sim.baseline_busy_facility_watts(),
            "now": service.sim.now.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "racks": {
                rack_id: list(node_ids)
                for rack_id, node_ids in facility.racks.items()
            },
            "nodes": {
                node_id: {
                    "gpu_ids": list(node.gpu_ids),
                    "power_watts": service.sim.node_power_watts(node_id),
                }
                for node_id, node in facility.nodes.items()
            },
            "gpus": {
                gpu_id: {
                    "active_profile": service.sim.gpu(gpu_id).active_profile,
                    "power_watts": service.sim.gpu_power_watts(gpu_id),
                }
                for gpu_id in service.sim.gpu_ids()
            },
        }

    @app.get("/v1/telemetry", response_class=PlainTextResponse)
    def telemetry(
        level: Optional[str] = Query(default=None),
        id: Optional[str] = Query(default=None),
        from_: Optional[datetime] = Query(default=None, alias="from"),
        to: Optional[datetime] = Query(default=None),
        role: str = Depends(role_of),
    ):
        records = service.telemetry(
            level=level, entity_id=id, start=_utc(from_), end=_utc(to)
        )
        body = "\n".join(record.to_json_line() for record in records)
        return PlainTextResponse(
            content=body + ("\n" if body else ""),
            media_type="application/x-ndjson",
        )

    @app.get("/v1/jobs")
    def list_jobs(
        application: Optional[str] = Query(default=None),
        profile_id: Optional[str] = Query(default=None),
        from_: Optional[datetime] = Query(default=None, alias="from"),
        to: Optional[datetime] = Query(default=None),
        role: str = Depends(role_of),
    ):
        records = service.history_query(
            application=application,
            profile_id=profile_id,
            start=_utc(from_),
            end=_utc(to),
        )
        return {"jobs": [record.to_dict() for record in records]}

    @app.get("/v1/jobs/{job_id}/report")
    def job_report(job_id: str, role: str = Depends(role_of)):
        return service.savings_report(job_id).to_dict()

    @app.get("/v1/alerts")
    def list_alerts(role: str = Depends(role_of)):
        return {
            "alerts": [
                {
                    "alert_id": alert.alert_id,
                    "rule_id": alert.rule_id,
                    "job_id": alert.job_id,
                    "profile_id": alert.profile_id,
                    "measured_perf_factor": alert.measured_perf_factor,
                    "degradation": alert.degradation,
                    "at": alert.at.strftime("%Y-%m-%dT%H:%M:%SZ"),
                }
                for alert in service.alerts()
            ]
        }

    @app.get("/v1/events/demand-response")
    def list_events(role: str = Depends(role_of)):
        return {"events": service.events()}

    # -- write side --------------------------------------------------------------

    @app.post("/v1/apply")
    def apply_profile(body: ApplyBody, role: str = Depends(role_of)):
        pathway = Pathway(body.pathway)
        if pathway is Pathway.OUT_OF_BAND and role != "admin":
            raise HTTPException(
                status_code=403,
                detail="out_of_band pathway requires the admin role",
            )
        result = service.apply(
            ApplyRequest(
                pathway=pathway,
                scope=Scope.parse(body.scope),
                profile_id=body.profile_id,
                requester=body.requester,
                hints=WorkloadHints.from_tokens(body.hints),
            )
        )
        return {
            "profile_id": result.request.profile_id,
            "audit_seq": result.audit_seq,
            "devices": [
                {
                    "gpu_id": device.gpu_id,
                    "active_profile": device.active_profile,
                    "active_modes": list(device.active_modes),
                    "entries": device.entries,
                    "discarded": [list(pair) for pair in device.discarded],
                    "explain_report": device.explain_report,
                }
                for device in result.devices
            ],
        }

    @app.post("/v1/jobs", status_code=201)
    def submit_job(body: JobSubmitBody, role: str = Depends(role_of)):
        record = service.start_job(
            application=body.application,
            workload_class=body.workload_class,
            profile_id=body.profile_id,
            nodes=body.nodes,
            baseline_seconds=body.baseline_seconds,
            hints=WorkloadHints.from_tokens(body.hints),
            requester=body.requester,
        )
        return record.to_dict()

    @app.post("/v1/events/demand-response", status_code=201)
    def demand_response(
        body: DemandResponseBody, role: str = Depends(require_admin)
    ):
        service.demand_response(
            new_cap_watts=body.new_cap_watts,
            expires_at=_utc(body.expires_at),
            effective_at=_utc(body.effective_at),
            note=body.note,
        )
        return {"events": service.events()}

    @app.post("/v1/alerts/rules", status_code=201)
    def add_alert_rule(
        body: AlertRuleBody, role: str = Depends(require_admin)
    ):
        rule = service.add_alert_rule(
            threshold_fraction=body.threshold_fraction,
            scope=body.scope,
            metric=body.metric,
        )
        return {
            "rule_id": rule.rule_id,
            "metric": rule.metric,
            "threshold_fraction": rule.threshold_fraction,
            "scope": rule.scope,
        }

    @app.post("/v1/sim/advance")
    def advance(body: AdvanceBody, role: str = Depends(require_admin)):
        finished = service.advance(body.seconds)
        return {
            "now": service.sim.now.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "finished_job_ids": [record.job_id for record in finished],
            "facility_power_watts": service.sim.facility_power_watts(),
        }

    return app


@click.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8040, show_default=True, type=int)
@click.option("--racks", default=1, show_default=True, type=int)
@click.option("--nodes-per-rack", default=2, show_default=True, type=int)
@click.option("--arch", default="B200", show_default=True,
              type=click.Choice(["B200", "H100"]))
def serve_main(host: str, port: int, racks: int, nodes_per_rack: int, arch: str):
    """Run the control plane over a freshly built simulated facility."""
    import uvicorn

    app = create_app(racks=racks, nodes_per_rack=nodes_per_rack, arch=arch)
    uvicorn.run(app, host=host, port=port, log_level="info")


__all__ = ["create_app", "serve_main", "DEFAULT_TOKENS"]
