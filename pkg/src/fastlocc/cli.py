"""Command-line front end: a thin HTTP client for the service.

By default commands run against the service in-process (no network); pass
--server URL to talk to a remote instance started with ``fastlocc serve``.

Fixture arguments are either a builtin example name (ex1i, ..., ex8,
counterexample) optionally followed by key=value integer parameters, or a
path to a JSON fixture file.

Exit codes: 0 pass, 1 verification/condition failure, 2 invalid input,
3 search budget exhausted.
"""

from __future__ import annotations

import json
import os
import sys
from typing import Optional, Tuple

import click
import httpx


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    from .service import create_app

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    return TestClient(create_app(), base_url="http://fastlocc.local")


def _fixture_payload(fixture: str, params: Tuple[str, ...]) -> dict:
    if os.path.exists(fixture):
        if params:
            raise click.UsageError("key=value parameters only apply to builtin examples")
        try:
            with open(fixture) as fh:
                return {"fixture": json.load(fh)}
        except json.JSONDecodeError as exc:
            click.echo(f"invalid fixture JSON at line {exc.lineno}, column {exc.colno}", err=True)
            sys.exit(2)
    parsed = {}
    for p in params:
        if "=" not in p:
            raise click.UsageError(f"expected key=value, got {p!r}")
        key, _, value = p.partition("=")
        try:
            parsed[key] = int(value)
        except ValueError:
            raise click.UsageError(f"parameter {key} must be an integer, got {value!r}")
    return {"example": fixture, "params": parsed}


def _run(server: Optional[str], endpoint: str, payload: dict, as_json: bool):
    with _client(server) as client:
        resp = client.post(endpoint, json=payload)
    if resp.status_code == 422:
        click.echo(f"invalid request: {resp.text}", err=True)
        sys.exit(2)
    resp.raise_for_status()
    body = resp.json()
    report = body["report"]
    if as_json:
        click.echo(json.dumps(report, indent=2, sort_keys=False))
    else:
        _human(report, body["status"])
    sys.exit(body["exit_code"])


def _human(report: dict, status: str) -> None:
    for key, value in report.items():
        if key in ("branches", "survivors", "fixture", "coeffs"):
            click.echo(f"{key}: ({len(value)} entries)" if isinstance(value, list) else f"{key}: (elided)")
        else:
            click.echo(f"{key}: {value}")
    click.echo(f"status: {status}")


server_option = click.option("--server", default=None, help="remote service URL (default: in-process)")
tol_option = click.option("--tol", default=1e-9, show_default=True, help="numerical tolerance")
json_option = click.option("--json", "as_json", is_flag=True, help="machine-readable report on stdout")


@click.group()
def main():
    """Construct, simulate and verify fast LOCC protocols for bipartite
    nonlocal unitaries."""


@main.command()
@click.argument("fixture")
@click.argument("params", nargs=-1)
@click.option("--inputs", default="basis", show_default=True, help="'basis' or 'random:K'")
@click.option("--seed", default=None, type=int, help="seed for random inputs")
@tol_option
@json_option
@server_option
def verify(fixture, params, inputs, seed, tol, as_json, server):
    """Simulate all protocol branches and assert they reproduce the target."""
    payload = _fixture_payload(fixture, params)
    payload.update({"tol": tol, "inputs": inputs, "seed": seed})
    _run(server, "/verify", payload, as_json)


@main.command()
@click.argument("fixture")
@click.argument("params", nargs=-1)
@tol_option
@json_option
@server_option
def check(fixture, params, tol, as_json, server):
    """Check the three fast-protocol coefficient conditions."""
    payload = _fixture_payload(fixture, params)
    payload.update({"tol": tol})
    _run(server, "/check", payload, as_json)


@main.command()
@click.argument("fixture")
@click.argument("params", nargs=-1)
@click.option("--budget", default=10_000_000, show_default=True, help="max candidates examined")
@click.option("--classify/--no-classify", default=True, show_default=True)
@tol_option
@json_option
@server_option
def search(fixture, params, budget, classify, tol, as_json, server):
    """Exhaustively search roots-of-unity coefficient sets for a representation."""
    payload = _fixture_payload(fixture, params)
    payload.update({"tol": tol, "budget": budget, "classify": classify})
    _run(server, "/search", payload, as_json)


@main.command()
@click.argument("fixture")
@click.argument("params", nargs=-1)
@click.option("--out", default=None, type=click.Path(), help="write the converted fixture here")
@tol_option
@json_option
@server_option
def convert(fixture, params, out, tol, as_json, server):
    """Convert a controlled fixture to double-group form and verify it."""
    payload = _fixture_payload(fixture, params)
    payload.update({"tol": tol})
    with _client(server) as client:
        resp = client.post("/convert", json=payload)
    if resp.status_code == 422:
        click.echo(f"invalid request: {resp.text}", err=True)
        sys.exit(2)
    resp.raise_for_status()
    body = resp.json()
    report = body["report"]
    if out and "fixture" in report:
        with open(out, "w") as fh:
            json.dump(report["fixture"], fh, indent=2)
            fh.write("\n")
    if as_json:
        click.echo(json.dumps(report, indent=2, sort_keys=False))
    else:
        _human({k: v for k, v in report.items() if k != "fixture"}, body["status"])
    sys.exit(body["exit_code"])


@main.command()
@click.argument("fixture")
@click.argument("params", nargs=-1)
@click.option("--kak/--no-kak", default=True, show_default=True)
@click.option("--schmidt/--no-schmidt", default=True, show_default=True)
@click.option("--cost/--no-cost", default=True, show_default=True)
@tol_option
@json_option
@server_option
def report(fixture, params, kak, schmidt, cost, tol, as_json, server):
    """Print analytics (canonical invariants, Schmidt rank, cost) for a fixture."""
    payload = _fixture_payload(fixture, params)
    payload.update({"tol": tol, "kak": kak, "schmidt": schmidt, "cost": cost})
    _run(server, "/report", payload, as_json)


@main.command()
@json_option
@server_option
def examples(as_json, server):
    """List builtin example names."""
    with _client(server) as client:
        resp = client.get("/examples")
    resp.raise_for_status()
    names = resp.json()["examples"]
    if as_json:
        click.echo(json.dumps(names))
    else:
        for n in names:
            click.echo(n)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8047, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
