"""Command-line client for the control plane.

Exit codes: 0 success · 1 user error (bad name, refusal, unknown job) ·
2 connectivity or catalog unavailable · 3 applied-with-conflicts (the apply
succeeded but one or more modes lost arbitration and were discarded).
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass

import click
import httpx

from .calibration import CalibrationDocument
from .catalog import ProfileCatalog
from .errors import PowerProfilesError
from .scheduler import parse_directive

EXIT_OK = 0
EXIT_USER = 1
EXIT_CONN = 2
EXIT_CONFLICTS = 3

_CONNECT_ERRORS = (httpx.ConnectError, httpx.ConnectTimeout, httpx.ReadTimeout)


@dataclass
class CliContext:
    endpoint: str
    token: str
    fmt: str
    role: str = "tenant"

    def client(self) -> httpx.Client:
        return httpx.Client(
            base_url=self.endpoint,
            headers={"X-Auth-Token": self.token},
            timeout=10.0,
        )


def _fail_user(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_USER)


def _fail_conn(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_CONN)


def _checked(response: httpx.Response) -> dict:
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        _fail_user(f"{response.status_code}: {detail}")
    return response.json()


def _structured(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _table(rows: list[list[str]], header: list[str]) -> str:
    widths = [
        max(len(str(row[i])) for row in [header, *rows])
        for i in range(len(header))
    ]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths))]
    for row in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


@click.group()
@click.option(
    "--endpoint",
    envvar="PPCTL_ENDPOINT",
    default="http://127.0.0.1:8040",
    show_default=True,
    help="Control-plane base URL.",
)
@click.option(
    "--role",
    envvar="PPCTL_ROLE",
    type=click.Choice(["tenant", "admin"]),
    default="tenant",
    show_default=True,
    help="Requester role; admin uses the out-of-band pathway.",
)
@click.option(
    "--token",
    envvar="PPCTL_TOKEN",
    default=None,
    help="Auth token; defaults to the role's well-known token.",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["table", "structured"]),
    default="table",
    show_default=True,
)
@click.pass_context
def main(ctx: click.Context, endpoint: str, role: str, token: str, fmt: str):
    """Query and steer GPU power profiles."""
    ctx.obj = CliContext(
        endpoint=endpoint,
        token=token if token is not None else f"{role}-token",
        fmt=fmt,
        role=role,
    )


@main.group()
def profiles():
    """Profile directory commands."""


@profiles.command("list")
@click.option("--status", "status_filter", default=None,
              help="Only rows with this lifecycle status.")
@click.option("--offline", is_flag=True,
              help="Read the local catalog instead of the control plane.")
@click.option("--catalog", "catalog_path", default=None,
              help="Calibration document path for --offline.")
@click.pass_obj
def profiles_list(obj: CliContext, status_filter, offline, catalog_path):
    """List the profile directory."""
    if offline:
        try:
            document = CalibrationDocument.load(catalog_path)
        except PowerProfilesError as exc:
            _fail_conn(str(exc))
        rows_src = [
            {
                "profile_id": info.profile_id,
                "workload_class": info.workload_class.value,
                "goal": info.goal.value,
                "status": info.status.value,
            }
            for info in ProfileCatalog(document).list_profiles()
        ]
    else:
        try:
            with obj.client() as client:
                payload = _checked(client.get("/v1/profiles"))
        except _CONNECT_ERRORS as exc:
            _fail_conn(f"cannot reach control plane: {exc}")
        rows_src = payload["profiles"]
    if status_filter is not None:
        rows_src = [r for r in rows_src if r["status"] == status_filter]
    if obj.fmt == "structured":
        click.echo(_structured({"profiles": rows_src}))
        return
    click.echo(_table(
        [
            [r["profile_id"], r["workload_class"], r["goal"], r["status"]]
            for r in rows_src
        ],
        ["PROFILE", "CLASS", "GOAL", "STATUS"],
    ))


@main.command()
@click.option("--gpu", default=None, help="Target one GPU id.")
@click.option("--node", default=None, help="Target one node id.")
@click.option("--rack", default=None, help="Target one rack id.")
@click.option("--fleet", is_flag=True, help="Target every GPU.")
@click.option("--profile", "profile_id", required=True)
@click.option("--hints", default="", help="Comma-separated workload hints.")
@click.pass_obj
def apply(obj: CliContext, gpu, node, rack, fleet, profile_id, hints):
    """Apply a profile to a scope; prints the arbitration report."""
    scopes = [
        s for s in (
            f"gpu:{gpu}" if gpu else None,
            f"node:{node}" if node else None,
            f"rack:{rack}" if rack else None,
            "fleet" if fleet else None,
        ) if s
    ]
    if len(scopes) != 1:
        _fail_user("give exactly one of --gpu/--node/--rack/--fleet")
    pathway = "out_of_band" if obj.role == "admin" else "in_band"
    body = {
        "pathway": pathway,
        "scope": scopes[0],
        "profile_id": profile_id,
        "requester": f"ppctl:{obj.role}",
        "hints": [h for h in hints.split(",") if h],
    }
    try:
        with obj.client() as client:
            payload = _checked(client.post("/v1/apply", json=body))
    except _CONNECT_ERRORS as exc:
        _fail_conn(f"cannot reach control plane: {exc}")
    conflicts = sum(len(d["discarded"]) for d in payload["devices"])
    if obj.fmt == "structured":
        click.echo(_structured(payload))
    else:
        click.echo(
            f"applied {payload['profile_id']} to "
            f"{len(payload['devices'])} device(s)"
        )
        first = payload["devices"][0]
        click.echo(first["explain_report"])
        if conflicts:
            click.echo(f"{conflicts} mode(s) discarded across the scope")
        else:
            click.echo("no conflicts")
    sys.exit(EXIT_CONFLICTS if conflicts else EXIT_OK)


@main.command()
@click.option("--arch", default="B200", show_default=True)
@click.pass_obj
def priorities(obj: CliContext, arch):
    """Mode priority/conflict table, highest priority first."""
    try:
        with obj.client() as client:
            payload = _checked(
                client.get("/v1/modes/priorities", params={"arch": arch})
            )
    except _CONNECT_ERRORS as exc:
        _fail_conn(f"cannot reach control plane: {exc}")
    if obj.fmt == "structured":
        click.echo(_structured(payload))
        return
    click.echo(_table(
        [
            [
                m["mode_id"],
                m["priority"],
                ",".join(m["conflicts_with"]) or "-",
            ]
            for m in payload["modes"]
        ],
        ["MODE", "PRIORITY", "CONFLICTS-WITH"],
    ))


@main.command()
@click.option("--job", "job_id", required=True)
@click.pass_obj
def report(obj: CliContext, job_id):
    """Expected-vs-actual savings report for a finished job."""
    try:
        with obj.client() as client:
            payload = _checked(client.get(f"/v1/jobs/{job_id}/report"))
    except _CONNECT_ERRORS as exc:
        _fail_conn(f"cannot reach control plane: {exc}")
    if obj.fmt == "structured":
        click.echo(_structured(payload))
        return
    expected, actual = payload["expected"], payload["actual"]
    rows = [
        [
            metric,
            f"{expected[metric]:.4f}",
            f"{actual[metric]:.4f}",
            f"{actual[metric] - expected[metric]:+.4f}",
        ]
        for metric in (
            "perf_factor", "gpu_power_factor",
            "system_power_factor", "energy_saving",
        )
    ]
    click.echo(f"job {payload['job_id']}  application={payload['application']}"
               f"  profile={payload['profile_id']}")
    click.echo(_table(rows, ["METRIC", "EXPECTED", "ACTUAL", "DELTA"]))
    click.echo(f"recommendation: {payload['recommendation']}")


@main.group()
def jobs():
    """Job submission and lifecycle commands."""


@jobs.command("submit")
@click.argument("launch_line")
@click.option("--baseline-seconds", default=60.0, show_default=True,
              type=float, help="Baseline (unthrottled) runtime of the job.")
@click.pass_obj
def jobs_submit(obj: CliContext, launch_line, baseline_seconds):
    """Parse a batch launch line and submit it as a job."""
    try:
        spec = parse_directive(launch_line)
    except PowerProfilesError as exc:
        _fail_user(str(exc))
    body = {
        "application": spec.application,
        "workload_class": spec.workload_class,
        "profile_id": spec.profile_id,
        "nodes": spec.nodes,
        "baseline_seconds": baseline_seconds,
        "hints": list(spec.hints.tokens()),
        "requester": "ppctl:submit",
    }
    try:
        with obj.client() as client:
            payload = _checked(client.post("/v1/jobs", json=body))
    except _CONNECT_ERRORS as exc:
        _fail_conn(f"cannot reach control plane: {exc}")
    if obj.fmt == "structured":
        click.echo(_structured(payload))
    else:
        click.echo(f"submitted {payload['job_id']} "
                   f"(profile {payload['profile_id']}, "
                   f"{payload['nodes']} node(s))")


if __name__ == "__main__":
    main()
