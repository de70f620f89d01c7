"""Strict JSON run configuration.

Unknown keys are rejected everywhere, so a misspelled field fails loudly
instead of silently falling back to a default.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .diagnostics import MODEL_KINDS, SweepConfig
from .errors import ConfigurationError
from .losses import LossWeights
from .problems import builtin_problems, get_problem
from .qnode import QNodeConfig
from .statevector import MAX_QUBITS
from .training import TrainConfig

_PROBLEM_PARAMS = {"exp_decay": {"lam"}, "harmonic": {"omega"}, "logistic": set()}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemSection(_Strict):
    name: str
    lam: Optional[float] = None
    omega: Optional[float] = None
    t0: float = 0.0
    t_end: float = 1.0
    collocation_points: int = Field(32, ge=1)
    known_points: int = Field(0, ge=0)

    @field_validator("name")
    @classmethod
    def _known_name(cls, v):
        if v not in builtin_problems():
            raise ValueError(f"unknown problem {v!r}; available: {', '.join(sorted(builtin_problems()))}")
        return v

    @model_validator(mode="after")
    def _params_match(self):
        for p in ("lam", "omega"):
            if getattr(self, p) is not None and p not in _PROBLEM_PARAMS[self.name]:
                raise ValueError(f"parameter {p!r} does not apply to problem {self.name!r}")
        if not self.t0 < self.t_end:
            raise ValueError("t0 must be smaller than t_end")
        return self

    def build(self):
        overrides = {
            k: getattr(self, k) for k in ("lam", "omega") if getattr(self, k) is not None
        }
        return get_problem(
            self.name,
            t0=self.t0,
            t_end=self.t_end,
            collocation_points=self.collocation_points,
            known_points=self.known_points,
            **overrides,
        )

    def overrides(self) -> dict:
        return self.model_dump(exclude={"name"}, exclude_none=True)


class ModelSection(_Strict):
    hidden: List[int] = Field(default_factory=lambda: [16, 16], min_length=1)
    activation: Literal["tanh", "sigmoid", "relu"] = "tanh"
    n_qubits: int = Field(4, ge=1, le=MAX_QUBITS)
    depth: int = Field(3, ge=1)
    phi: float = Field(math.pi, ge=0.0, le=2 * math.pi)
    observable: Literal["z_sum", "z_global"] = "z_sum"

    @field_validator("hidden")
    @classmethod
    def _positive(cls, v):
        if any(w < 1 for w in v):
            raise ValueError("hidden widths must be positive")
        return v

    def qnode_config(self) -> QNodeConfig:
        return QNodeConfig(self.n_qubits, self.depth, self.phi)


class LossWeightsSection(_Strict):
    ic: float = Field(1.0, ge=0.0)
    ode: float = Field(1.0, ge=0.0)
    sol: float = Field(1.0, ge=0.0)

    def build(self) -> LossWeights:
        return LossWeights(self.ic, self.ode, self.sol)


class TrainSection(_Strict):
    optimizer: Literal["adam", "sgd"] = "adam"
    learning_rate: float = Field(1e-2, ge=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)
    epochs: int = Field(5000, ge=1)
    log_every: int = Field(50, ge=1)
    solution_points: int = Field(101, ge=1)

    def build(self, seed: int) -> TrainConfig:
        return TrainConfig(
            self.optimizer, self.learning_rate, self.beta1, self.beta2, self.eps,
            self.epochs, seed, self.log_every,
        )


class SweepSection(_Strict):
    qubit_range: List[int] = Field(default_factory=lambda: [2, 4, 6, 8, 10], min_length=1)
    depth_range: List[int] = Field(default_factory=lambda: [3], min_length=1)
    samples: int = Field(200, ge=2)
    eps_grad: float = Field(1e-3, ge=0.0)
    model_kind: Union[str, List[str]] = "mac"
    t_probe: Optional[List[float]] = None
    component: Tuple[int, int] = (0, 0)
    workers: int = Field(1, ge=1)

    @field_validator("qubit_range", "depth_range")
    @classmethod
    def _increasing(cls, v):
        if v[0] < 1 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("must be increasing positive integers")
        return v

    @field_validator("model_kind")
    @classmethod
    def _kinds(cls, v):
        kinds = [v] if isinstance(v, str) else v
        if not kinds:
            raise ValueError(f"at least one model kind required; valid kinds: {', '.join(MODEL_KINDS)}")
        for k in kinds:
            if k not in MODEL_KINDS:
                raise ValueError(f"unknown model_kind {k!r}; valid kinds: {', '.join(MODEL_KINDS)}")
        return v

    @property
    def kinds(self) -> list[str]:
        return [self.model_kind] if isinstance(self.model_kind, str) else list(self.model_kind)


class SolveSection(_Strict):
    snapshot: str
    t_start: Optional[float] = None
    t_end: Optional[float] = None
    points: int = Field(101, ge=1)


class RunConfig(_Strict):
    mode: Optional[Literal["train", "solve", "diagnose"]] = None
    seed: int = Field(0, ge=0, lt=2**64)
    problem: Optional[ProblemSection] = None
    model: ModelSection = Field(default_factory=ModelSection)
    loss_weights: LossWeightsSection = Field(default_factory=LossWeightsSection)
    train: TrainSection = Field(default_factory=TrainSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    solve: Optional[SolveSection] = None
    output_dir: Optional[str] = None

    def require_for(self, mode: str) -> None:
        if self.mode is not None and self.mode != mode:
            raise ConfigurationError(f"mode: config is for {self.mode!r}, command is {mode!r}")
        if mode in ("train", "diagnose") and self.problem is None:
            raise ConfigurationError("problem.name: a problem is required for " + mode)
        if mode == "solve" and self.solve is None:
            raise ConfigurationError("solve.snapshot: a solve section is required")

    def sweep_configs(self) -> list[SweepConfig]:
        s = self.sweep
        return [
            SweepConfig(
                qubit_range=tuple(s.qubit_range),
                depth_range=tuple(s.depth_range),
                samples=s.samples,
                seed=self.seed,
                eps_grad=s.eps_grad,
                model_kind=kind,
                problem=self.problem.name,
                problem_overrides=self.problem.overrides(),
                t_probe=tuple(s.t_probe) if s.t_probe is not None else None,
                hidden=tuple(self.model.hidden),
                activation=self.model.activation,
                phi=self.model.phi,
                component=tuple(s.component),
                workers=s.workers,
            )
            for kind in s.kinds
        ]


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigurationError(_format_validation(err)) from None


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as err:
        raise ConfigurationError(f"cannot read config {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"config {path} is not valid JSON: {err}") from None
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a JSON object")
    return parse_config(data)
