"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Dict, Optional

from pydantic import BaseModel, Field, model_validator


class FixtureRequest(BaseModel):
    """Either a builtin example name (with optional integer parameters) or an
    inline fixture object."""

    example: Optional[str] = None
    params: Dict[str, int] = Field(default_factory=dict)
    fixture: Optional[Dict[str, Any]] = None
    tol: float = 1e-9

    @model_validator(mode="after")
    def _one_source(self):
        if (self.example is None) == (self.fixture is None):
            raise ValueError("provide exactly one of 'example' or 'fixture'")
        return self


class VerifyRequest(FixtureRequest):
    inputs: str = "basis"  # "basis" or "random:K"
    seed: Optional[int] = None


class CheckRequest(FixtureRequest):
    pass


class SearchRequest(FixtureRequest):
    budget: int = 10_000_000
    classify: bool = True


class ConvertRequest(FixtureRequest):
    pass


class ReportRequest(FixtureRequest):
    kak: bool = True
    schmidt: bool = True
    cost: bool = True


class CommandResponse(BaseModel):
    exit_code: int
    status: str  # pass | fail | invalid | budget
    report: Dict[str, Any]


class ExamplesResponse(BaseModel):
    examples: list[str]


class HealthResponse(BaseModel):
    status: str
