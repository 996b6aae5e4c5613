"""FastAPI service wrapping the core package. The CLI talks to this app
in-process by default; ``fastlocc serve`` exposes it over HTTP."""

from __future__ import annotations

from fastapi import FastAPI

from ..fixtures import builtin_example, builtin_example_names
from ..reports import (
    EXIT_BUDGET,
    EXIT_INVALID,
    EXIT_PASS,
    analytics_report,
    check_report,
    convert_report,
    search_report,
    verify_report,
)
from ..serialization import FixtureError, spec_from_dict
from .schemas import (
    CheckRequest,
    CommandResponse,
    ConvertRequest,
    ExamplesResponse,
    FixtureRequest,
    HealthResponse,
    ReportRequest,
    SearchRequest,
    VerifyRequest,
)

_STATUS = {EXIT_PASS: "pass", 1: "fail", EXIT_INVALID: "invalid", EXIT_BUDGET: "budget"}


def _resolve(req: FixtureRequest):
    if req.example is not None:
        try:
            return builtin_example(req.example, **req.params), None
        except (KeyError, TypeError, ValueError) as exc:
            return None, str(exc)
    try:
        return spec_from_dict(req.fixture), None
    except FixtureError as exc:
        return None, str(exc)


def _respond(report: dict, code: int) -> CommandResponse:
    return CommandResponse(exit_code=code, status=_STATUS.get(code, "fail"), report=report)


def _invalid(command: str, message: str) -> CommandResponse:
    return _respond({"command": command, "error": message}, EXIT_INVALID)


def create_app() -> FastAPI:
    app = FastAPI(title="fastlocc", version="0.1.0")

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok")

    @app.get("/examples", response_model=ExamplesResponse)
    def examples():
        return ExamplesResponse(examples=builtin_example_names())

    @app.post("/verify", response_model=CommandResponse)
    def verify(req: VerifyRequest):
        spec, err = _resolve(req)
        if spec is None:
            return _invalid("verify", err)
        return _respond(*verify_report(spec, tol=req.tol, inputs=req.inputs, seed=req.seed))

    @app.post("/check", response_model=CommandResponse)
    def check(req: CheckRequest):
        spec, err = _resolve(req)
        if spec is None:
            return _invalid("check", err)
        return _respond(*check_report(spec, tol=req.tol))

    @app.post("/search", response_model=CommandResponse)
    def search(req: SearchRequest):
        spec, err = _resolve(req)
        if spec is None:
            return _invalid("search", err)
        return _respond(*search_report(spec, budget=req.budget, classify=req.classify, tol=req.tol))

    @app.post("/convert", response_model=CommandResponse)
    def convert(req: ConvertRequest):
        spec, err = _resolve(req)
        if spec is None:
            return _invalid("convert", err)
        return _respond(*convert_report(spec, tol=req.tol))

    @app.post("/report", response_model=CommandResponse)
    def report(req: ReportRequest):
        spec, err = _resolve(req)
        if spec is None:
            return _invalid("report", err)
        return _respond(
            *analytics_report(spec, kak=req.kak, schmidt=req.schmidt, cost=req.cost, tol=req.tol)
        )

    return app
