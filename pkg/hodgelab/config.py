from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .errors import ConfigurationError, ModelLookupError

Command = Literal["pages", "hodge", "certify", "foliate", "witten", "suite"]
BackendChoice = Literal["exact", "float", "both"]
MetricChoice = Literal["identity", "model", "random"]
GridMetricChoice = Literal["flat", "bundle-like"]

COMMANDS: Tuple[str, ...] = ("pages", "hodge", "certify", "foliate", "witten", "suite")


class Tolerances(BaseModel):
    rank_rel: float = 1e-10
    harmonic_rel: float = 1e-9
    identity_float: float = 1e-10
    decomposition: float = 1e-9
    grid_exact: float = 1e-10
    grid_spectral: float = 1e-6

    @field_validator("*")
    @classmethod
    def validate_positive(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("tolerances must be positive")
        return float(value)


class WittenSettings(BaseModel):
    n: int = 1
    grid: int = 16
    phi: Optional[str] = None
    bands: Tuple[int, int] = (2, 1)
    trials: int = 20
    metric: GridMetricChoice = "flat"
    refine: bool = True
    decompose: bool = False

    @field_validator("n")
    @classmethod
    def validate_n(cls, value: int) -> int:
        if value < 1:
            raise ValueError("witten.n must be >= 1")
        return value

    @field_validator("trials")
    @classmethod
    def validate_trials(cls, value: int) -> int:
        if value < 1:
            raise ValueError("witten.trials must be >= 1")
        return value

    @field_validator("bands")
    @classmethod
    def validate_bands(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if min(value) < 0:
            raise ValueError("witten.bands must be non-negative")
        return value


class FoliationGridSettings(BaseModel):
    n: int = 2
    r: int = 1
    grid: int = 16
    bands: Tuple[int, int] = (2, 1)
    trials: int = 4

    @model_validator(mode="after")
    def validate_partition(self) -> "FoliationGridSettings":
        if not 1 <= self.r < self.n:
            raise ValueError("foliation_grid.r must satisfy 1 <= r < n")
        return self


class RunConfig(BaseModel):
    command: Command = "suite"
    model: Optional[str] = None
    backend: BackendChoice = "exact"
    tolerances: Tolerances = Field(default_factory=Tolerances)
    max_page: int = 4
    seed: int = 0
    output: Optional[str] = None
    html_output: Optional[str] = None
    metric: MetricChoice = "identity"
    random_metrics: int = 10
    explore: int = 0
    partition: Optional[Tuple[List[int], List[int]]] = None
    witten: WittenSettings = Field(default_factory=WittenSettings)
    foliation_grid: FoliationGridSettings = Field(default_factory=FoliationGridSettings)
    max_exact_n: int = 4
    timing: bool = False

    @field_validator("max_page")
    @classmethod
    def validate_max_page(cls, value: int) -> int:
        if value < 1:
            raise ValueError("max_page must be >= 1")
        return value

    @field_validator("random_metrics", "explore")
    @classmethod
    def validate_counts(cls, value: int) -> int:
        if value < 0:
            raise ValueError("sample counts must be non-negative")
        return value

    @field_validator("partition")
    @classmethod
    def validate_partition(cls, value: Optional[Tuple[List[int], List[int]]]) -> Optional[Tuple[List[int], List[int]]]:
        if value is None:
            return None
        n_part, f_part = value
        if not n_part or not f_part:
            raise ValueError("partition needs non-empty N and F blocks")
        if set(n_part) & set(f_part):
            raise ValueError("partition blocks must be disjoint")
        if min(n_part + f_part) < 1:
            raise ValueError("partition uses 1-based coframe positions")
        return value

    @model_validator(mode="after")
    def validate_command(self) -> "RunConfig":
        if self.command in ("pages", "hodge", "certify", "foliate") and not self.model:
            raise ValueError(f"command {self.command!r} needs a model")
        if self.command == "witten" and self.witten.grid < 4:
            raise ValueError("witten needs a grid of at least 4 points per axis")
        if self.command == "foliate" and self.partition is None and self.model and self.model.startswith("builtin:"):
            from .models import builtin_model

            try:
                if builtin_model(self.model).foliation is None:
                    raise ValueError(f"model {self.model} has no foliation; pass a partition")
            except ModelLookupError:
                # unknown names are reported when the run resolves the model
                pass
        return self

    # --- YAML I/O ---
    @classmethod
    def from_yaml(cls, path: str) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except OSError as exc:
            raise ConfigurationError(f"Cannot read run configuration {path}: {exc}") from exc
        return cls.from_dict(data, source=path)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: str = "<dict>") -> "RunConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            raise ConfigurationError(f"Invalid RunConfig ({source}): {exc}") from exc

    @classmethod
    def merged(cls, command: str, path: Optional[str] = None, **overrides: Any) -> "RunConfig":
        """File values (if any) with every non-None command-line override on top, validated once."""
        data: Dict[str, Any] = {}
        if path is not None:
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = yaml.safe_load(f) or {}
            except OSError as exc:
                raise ConfigurationError(f"Cannot read run configuration {path}: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigurationError(f"Run configuration {path} must be a mapping")
        data["command"] = command
        witten = dict(data.get("witten") or {})
        for key, value in overrides.items():
            if value is None:
                continue
            if key.startswith("witten_"):
                witten[key[len("witten_"):]] = value
            else:
                data[key] = value
        if witten:
            data["witten"] = witten
        return cls.from_dict(data, source=path or "command line")

    def to_yaml(self, path: Optional[str] = None) -> str:
        yaml_str = yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)
        if path is not None:
            with open(path, "w", encoding="utf-8") as f:
                f.write(yaml_str)
        return yaml_str
