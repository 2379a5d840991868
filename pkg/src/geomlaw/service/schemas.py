"""Pydantic request/response models for the service endpoints (shared by
the FastAPI app and the CLI thin client)."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class SequenceDoc(BaseModel):
    role: Literal["p", "a", "b", "ptilde", "beta"]
    d: Optional[int] = None
    values: list[float]


class ParamsDoc(BaseModel):
    family: Literal["narrow", "wide"]
    d: int
    params: dict[str, float]


class WitnessModel(BaseModel):
    reason: str
    k: Optional[int] = None
    j: Optional[int] = None
    value: float


class SequenceReportModel(BaseModel):
    checked: list[float]
    in_M: bool
    in_LM: bool
    in_SM: bool
    hankel_extendible_M: bool
    lm_extendible_heuristic: bool
    lm_extendible_exact: bool
    witnesses: dict[str, WitnessModel]


class ClassifySeqRequest(BaseModel):
    values: list[float]
    tolerance: Optional[float] = None


class ClassifyRequest(BaseModel):
    sequence: SequenceDoc


class ClassifyResponse(BaseModel):
    family: str
    degenerate: bool
    report: SequenceReportModel


class SurvivalRequest(BaseModel):
    params: Optional[ParamsDoc] = None
    sequence: Optional[SequenceDoc] = None
    at: list[int]
    fill: bool = False


class SurvivalResponse(BaseModel):
    survival: float


class PmfRequest(BaseModel):
    params: Optional[ParamsDoc] = None
    sequence: Optional[SequenceDoc] = None
    at: list[int]
    fill: bool = False


class PmfResponse(BaseModel):
    value: float
    raw: float
    clamped: bool
    violation: bool


class SampleRequest(BaseModel):
    model: Literal["narrow", "wide", "definetti", "sieve"]
    spec: dict[str, Any]
    n: int = Field(ge=0)
    seed: int = 0
    workers: int = Field(default=1, ge=1)


class SampleMeta(BaseModel):
    model: str
    d: int
    n_samples: int
    seed: int
    workers: int
    algorithm: str
    params_digest: str


class DependenceRequest(BaseModel):
    params: Optional[ParamsDoc] = None
    sequence: Optional[SequenceDoc] = None
    grid_max: int = 3
    fill: bool = False


class DependenceResponse(BaseModel):
    corr: list[list[float]]
    mrti: Optional[bool]
    mrti_witness: Optional[dict[str, Any]]
    family_notes: list[str]


class MomentsRequest(BaseModel):
    law: dict[str, Any]
    d: int = Field(ge=1)


class MomentsResponse(BaseModel):
    sequence: SequenceDoc
    infinitely_divisible: bool
    law: dict[str, Any]


class ExtendRequest(BaseModel):
    sequence: SequenceDoc


class ExtendResponse(BaseModel):
    feasible: bool
    lower: float
    upper: float
    open_lower: bool
    open_upper: bool
    route: Literal["narrow", "wide"]


class ConvertRequest(BaseModel):
    to: str
    document: dict[str, Any]
    fill: bool = False


class ConvertResponse(BaseModel):
    document: dict[str, Any]


class VerifyRequest(BaseModel):
    suite: Literal["quick", "all"] = "quick"


class VerifyResponse(BaseModel):
    suite: str
    passed: bool
    checks: list[dict[str, Any]]


class ErrorBody(BaseModel):
    code: str
    message: str
    detail: Optional[dict[str, Any]] = None
