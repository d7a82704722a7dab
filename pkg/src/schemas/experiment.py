"""Experiment configuration schemas and the YAML loader."""

from enum import Enum
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.adversary.models import AttackSpec, ServerTamperSpec
from src.aggregation.models import BaselineKind, ReferenceSource
from src.client.params import OutputMode, RainParams, validate_dp
from src.exceptions import ConfigError
from src.integrity.stream import IntegrityPolicy
from src.ring.field import DEFAULT_MODULUS


class RunMode(str, Enum):
    PLAINTEXT = "plaintext"
    MPC = "mpc"


class AggregatorKind(str, Enum):
    RAIN = "rain"
    MEAN = BaselineKind.MEAN.value
    COORD_MEDIAN = BaselineKind.COORD_MEDIAN.value
    MAJORITY_SIGN = BaselineKind.MAJORITY_SIGN.value


class SweepAxis(str, Enum):
    RHO = "rho"
    EPSILON = "epsilon"
    K = "K"
    D = "d"


class RainSection(BaseModel):
    """Schema for mechanism and aggregation parameters."""

    model_config = ConfigDict(extra="forbid")

    epsilon: float = Field(default=8.0, gt=0)
    delta: float = Field(default=1e-5, ge=0, lt=1)
    sigma: float | None = Field(default=0.06, gt=0, description="null derives the minimal compliant sigma")
    sigma_margin: float = Field(default=1.01, gt=1.0)
    clip: float = Field(default=0.05, gt=0)
    sensitivity: float | None = Field(default=None, gt=0)
    lambda_mad: float = Field(default=0.0, ge=0, description="0 puts tau at the median distance")
    modulus: int = DEFAULT_MODULUS
    output_mode: OutputMode = OutputMode.SIGN
    integrity: IntegrityPolicy = IntegrityPolicy.HALT
    halt_is_fatal: bool = False
    learning_rate: float | None = Field(default=None, gt=0)
    reference_source: ReferenceSource = ReferenceSource.ROOT_DATA
    scale_lr_by_weight_mass: bool = False

    @property
    def effective_sensitivity(self) -> float:
        return 2.0 * self.clip if self.sensitivity is None else self.sensitivity

    @property
    def effective_sigma(self) -> float:
        if self.sigma is not None:
            return self.sigma
        bound = max(2.0 * self.clip / 3.0, 4.0 * self.effective_sensitivity / self.epsilon)
        return bound * self.sigma_margin

    @property
    def effective_learning_rate(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 0.05 if self.output_mode is OutputMode.WEIGHTED else 0.01

    def params(self) -> RainParams:
        return RainParams(
            epsilon=self.epsilon,
            delta=self.delta,
            sigma=self.effective_sigma,
            clip=self.clip,
            sensitivity=self.effective_sensitivity,
            lambda_mad=self.lambda_mad,
            modulus=self.modulus,
            output_mode=self.output_mode,
            integrity=self.integrity,
        )


class TaskSection(BaseModel):
    """Schema for the synthetic task and federation shape."""

    model_config = ConfigDict(extra="forbid")

    d_feat: int = Field(default=20, ge=1)
    num_classes: int = Field(default=10, ge=2)
    num_clients: int = Field(default=50, ge=1)
    q: float = Field(default=0.5, le=1.0)
    samples_per_client: int = Field(default=100, ge=1)
    test_size: int = Field(default=1000, ge=1)
    calibration_size: int = Field(default=100, ge=1)
    class_separation: float = Field(default=2.0, gt=0)
    baseline_lr: float = Field(default=1.0, gt=0, description="Step size for mean and coord_median")

    @property
    def dimension(self) -> int:
        # M x d_feat weights plus M biases
        return self.num_classes * (self.d_feat + 1)


class GateSection(BaseModel):
    """Schema for the gate cost model."""

    model_config = ConfigDict(extra="forbid")

    cmp_elements: int = Field(default=2, ge=0)
    cmp_rounds: int = Field(default=1, ge=0)
    threshold_rounds: int = Field(default=1, ge=0)


class SweepSection(BaseModel):
    """Schema for a parameter sweep."""

    model_config = ConfigDict(extra="forbid")

    axis: SweepAxis
    values: list[float] = Field(min_length=1)


class ExperimentConfig(BaseModel):
    """Schema for one experiment file, validated as a whole before any round runs."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0)
    mode: RunMode = RunMode.PLAINTEXT
    aggregator: AggregatorKind = AggregatorKind.RAIN
    rounds: int = Field(default=200, ge=1)
    output_dir: Path | None = None
    dump_transcripts: bool = False
    rain: RainSection = Field(default_factory=RainSection)
    task: TaskSection = Field(default_factory=TaskSection)
    attack: AttackSpec = Field(default_factory=AttackSpec)
    tamper: list[ServerTamperSpec] = Field(default_factory=list)
    gates: GateSection = Field(default_factory=GateSection)
    sweep: SweepSection | None = None

    @model_validator(mode="after")
    def _check_whole(self) -> "ExperimentConfig":
        report = validate_dp(self.rain.params())
        if not report.ok:
            raise ValueError(report.message())

        task = self.task
        if task.q < 1.0 / task.num_classes - 1e-12:
            raise ValueError(f"q={task.q} is below 1/M = {1.0 / task.num_classes}")
        if self.attack.target_label >= task.num_classes:
            raise ValueError(f"target_label {self.attack.target_label} outside [0, {task.num_classes})")

        d = task.dimension
        if task.num_clients * d * (d + 1) >= (self.rain.modulus - 1) // 2:
            raise ValueError(
                f"Headroom policy violated: K*d*(d+1) = {task.num_clients * d * (d + 1)} "
                f"must stay below (p-1)/2 = {(self.rain.modulus - 1) // 2}"
            )

        if self.mode is RunMode.MPC:
            if self.rain.output_mode is not OutputMode.SIGN:
                raise ValueError("mpc mode requires rain.output_mode = sign")
            if self.aggregator is not AggregatorKind.RAIN:
                raise ValueError("mpc mode requires aggregator = rain")
        elif self.tamper:
            raise ValueError("tamper entries only apply in mpc mode")

        for entry in self.tamper:
            if entry.round >= self.rounds:
                raise ValueError(f"tamper round {entry.round} is beyond rounds={self.rounds}")
            if entry.position >= task.num_clients:
                raise ValueError(f"tamper position {entry.position} outside batch of {task.num_clients} slots")
            if entry.coordinate >= d:
                raise ValueError(f"tamper coordinate {entry.coordinate} outside model dimension {d}")
        return self

    def tamper_for_round(self, round_index: int) -> list[ServerTamperSpec]:
        return [t for t in self.tamper if t.round == round_index]

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        """Re-validated copy with top-level fields replaced."""
        data = self.model_dump(mode="python")
        data.update(changes)
        return ExperimentConfig.model_validate(data)

    def with_axis(self, axis: SweepAxis, value: float) -> "ExperimentConfig":
        """Re-validated copy with one sweep axis set; the epsilon axis re-derives sigma."""
        data = self.model_dump(mode="python")
        data["sweep"] = None
        if axis is SweepAxis.RHO:
            data["attack"]["malicious_fraction"] = value
        elif axis is SweepAxis.EPSILON:
            data["rain"]["epsilon"] = value
            data["rain"]["sigma"] = None
        elif axis is SweepAxis.K:
            data["task"]["num_clients"] = int(value)
        else:
            data["task"]["d_feat"] = int(value)
        return ExperimentConfig.model_validate(data)


def format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse YAML text into a validated config; every failure becomes ConfigError."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
        raise ConfigError(f"{source}: YAML parse error{where}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {format_validation_error(exc)}") from exc


def load_config(path: Path) -> ExperimentConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def dump_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=True)
