from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Any, Dict, List, Optional
from datetime import datetime
from enum import Enum

from hillspec.services.seqspace import PotentialKind


class Suite(str, Enum):
    SPECTRUM = "spectrum"
    LOCALIZE = "localize"
    ASYMPTOTICS = "asymptotics"
    RESOLVENT = "resolvent"
    PROJECTOR = "projector"
    VERIFY_ALL = "verify-all"


# Experiment configuration schemas
class PotentialDescriptor(BaseModel):
    """Either a built-in kind with its parameters or a coefficient CSV"""
    kind: PotentialKind = PotentialKind.ZERO
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0)
    path: Optional[str] = None


class ContourConfig(BaseModel):
    re: float
    im: float = 0.0
    radius: float = Field(gt=0)
    nodes: int = 64

    @field_validator("nodes")
    @classmethod
    def nodes_even(cls, v: int) -> int:
        if v < 8 or v % 2:
            raise ValueError("nodes must be an even integer >= 8")
        return v

    @property
    def center(self) -> complex:
        return complex(self.re, self.im)


class Tolerances(BaseModel):
    residual: float = Field(default=1e-8, gt=0)
    tie: float = Field(default=1e-9, gt=0)
    quadrature: float = Field(default=1e-3, gt=0)


class ExperimentConfig(BaseModel):
    suite: Suite
    m: int = Field(default=1, ge=1)
    potential: PotentialDescriptor = Field(default_factory=PotentialDescriptor)
    K: Optional[int] = Field(default=None, ge=1)
    K_list: Optional[List[int]] = None
    count: int = Field(default=10, ge=1)
    M: Optional[float] = Field(default=None, ge=1)
    n0: Optional[int] = Field(default=None, ge=1)
    n_max: Optional[int] = Field(default=None, ge=1)
    contour: Optional[ContourConfig] = None
    s_grid: List[float] = Field(default_factory=lambda: [i / 10 for i in range(11)])
    split_eps: float = Field(default=0.05, gt=0)
    delta: float = Field(default=0.1, gt=0)
    trials: int = Field(default=200, ge=1)
    n_values: List[int] = Field(default_factory=lambda: [8, 16, 32, 64])
    lambda_shift: Optional[List[float]] = None
    neumann_order: int = Field(default=30, ge=0)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    out: str = "out"

    @field_validator("K_list")
    @classmethod
    def ascending(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and (not v or any(b <= a for a, b in zip(v, v[1:])) or v[0] < 1):
            raise ValueError("K_list must be a strictly ascending list of positive integers")
        return v

    @field_validator("s_grid")
    @classmethod
    def unit_interval(cls, v: List[float]) -> List[float]:
        if not v or any(not 0.0 <= s <= 1.0 for s in v):
            raise ValueError("s_grid values must lie in [0, 1]")
        return v

    @field_validator("lambda_shift")
    @classmethod
    def re_im_pair(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and len(v) != 2:
            raise ValueError("lambda_shift takes two values: re,im")
        return v

    @model_validator(mode="after")
    def suite_parameters(self) -> "ExperimentConfig":
        needs_window = {Suite.SPECTRUM, Suite.LOCALIZE, Suite.ASYMPTOTICS, Suite.RESOLVENT, Suite.PROJECTOR}
        if self.suite in needs_window and self.K is None and not self.K_list:
            raise ValueError(f"suite {self.suite.value} requires K or K_list")
        if self.suite is Suite.PROJECTOR and self.contour is None:
            raise ValueError("suite projector requires a contour")
        return self

    @property
    def window(self) -> int:
        """K, or the largest entry of K_list"""
        return self.K if self.K is not None else self.K_list[-1]

    @property
    def lam(self) -> Optional[complex]:
        return complex(*self.lambda_shift) if self.lambda_shift is not None else None


# Run manifest schemas
class FileEntry(BaseModel):
    path: str
    sha256: str
    size: int


class StageTiming(BaseModel):
    name: str
    seconds: float
    status: str = "ok"


class AssertionResult(BaseModel):
    label: str
    passed: bool
    message: str = ""


class RunManifest(BaseModel):
    config_digest: str
    version: str
    suite: Suite
    started_at: datetime
    stages: List[StageTiming] = Field(default_factory=list)
    assertions: List[AssertionResult] = Field(default_factory=list)
    files: List[FileEntry] = Field(default_factory=list)
    exit_code: int = 0
    failed_stage: Optional[str] = None


# Run ledger schemas
class RunFileResponse(BaseModel):
    path: str
    sha256: str
    size: int

    class Config:
        from_attributes = True


class RunRecordResponse(BaseModel):
    id: int
    suite: str
    config_digest: str
    exit_code: int
    failed_stage: Optional[str] = None
    started_at: datetime
    wall_seconds: float
    files: List[RunFileResponse] = Field(default_factory=list)

    class Config:
        from_attributes = True
