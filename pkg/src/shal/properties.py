"""Property definitions for the Smart Home Activity Learner"""

import json
import math
from datetime import date
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import (
    DEFAULT_DB_WINDOW_DAYS,
    DEFAULT_EMISSION_FLOOR,
    DEFAULT_MIN_PRE,
    DEFAULT_MINSUP,
    DEFAULT_OPTIONAL_RATE,
    DEFAULT_PREDICT_WINDOW,
    DEFAULT_RHO,
    DEFAULT_SEED,
    DEFAULT_SEGMENT_GAP,
    DEFAULT_SMOOTHING,
    DEFAULT_START_DATE,
    DEFAULT_TIME_BASIS,
    SECONDS_PER_DAY,
)
from .exceptions import DataError
from .utils import read_text

TimeBasis = Literal["absolute", "clock"]


def resolve_minsup(minsup: float, sequence_count: int) -> int:
    """Turn a support threshold into an absolute count.

    Values below 1 are fractions of the database size and are rounded up;
    values of 1 or more are counts and must be whole numbers.
    """
    if minsup <= 0:
        raise ValueError(f"minsup must be positive, got {minsup}")
    if minsup < 1:
        return max(1, math.ceil(minsup * sequence_count - 1e-12))
    if float(minsup) != int(minsup):
        raise ValueError(f"minsup {minsup} >= 1 must be a whole count")
    return int(minsup)


class MiningConfig(BaseModel):
    """Thresholds and constants shared by every pipeline stage"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rho: float = Field(
        default=DEFAULT_RHO,
        ge=0.0,
        le=1.0,
        description="Average-linkage distance below which clusters merge",
    )
    minsup: float = Field(
        default=DEFAULT_MINSUP,
        gt=0.0,
        description="Support threshold: fraction of sequences if < 1, else a count",
    )
    min_pre: float = Field(
        default=DEFAULT_MIN_PRE,
        ge=0.0,
        le=1.0,
        description="Minimum predictability of a prediction rule",
    )
    smoothing: float = Field(
        default=DEFAULT_SMOOTHING,
        ge=0.0,
        description="Laplace constant added to initial and transition counts",
    )
    emission_floor: float = Field(
        default=DEFAULT_EMISSION_FLOOR,
        gt=0.0,
        lt=1.0,
        description="Emission probability of symbols a state does not stand for",
    )
    segment_gap: float = Field(
        default=DEFAULT_SEGMENT_GAP,
        gt=0.0,
        description="Seconds of silence that split an event stream",
    )
    window: int = Field(
        default=DEFAULT_PREDICT_WINDOW,
        ge=1,
        description="Number of recent endpoint slots the predictor looks at",
    )
    db_window_days: int = Field(
        default=DEFAULT_DB_WINDOW_DAYS,
        ge=1,
        description="Calendar days folded into one endpoint sequence",
    )
    time_basis: TimeBasis = Field(
        default=DEFAULT_TIME_BASIS,
        description="Compare occurrence windows as instants or as clock time of day",
    )
    include_partial: bool = Field(
        default=True,
        description="Keep frequent prefixes with open intervals in mined pattern files",
    )

    @field_validator("minsup")
    @classmethod
    def _minsup_is_count_or_fraction(cls, value: float) -> float:
        if value >= 1 and float(value) != int(value):
            raise ValueError("minsup >= 1 must be a whole count")
        return value


class ActivityTemplate(BaseModel):
    """How one synthetic activity is performed"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    label: str = Field(min_length=1)
    location: str = Field(min_length=1)
    core: list[str] = Field(min_length=1, description="Ordered 'service:type' steps")
    optional: list[str] = Field(default_factory=list)
    optional_rate: float = Field(default=DEFAULT_OPTIONAL_RATE, ge=0.0, le=1.0)
    swap_probability: float = Field(default=0.0, ge=0.0, le=1.0)
    drop_probability: float = Field(default=0.0, ge=0.0, le=1.0)
    start_mean: float = Field(ge=0.0, lt=SECONDS_PER_DAY, description="Seconds after midnight")
    start_stddev: float = Field(default=0.0, ge=0.0)
    duration_mean: float = Field(gt=0.0, description="Seconds")
    duration_stddev: float = Field(default=0.0, ge=0.0)

    @field_validator("core", "optional")
    @classmethod
    def _keys_have_service_and_type(cls, value: list[str]) -> list[str]:
        for item in value:
            service_id, sep, event_type = item.rpartition(":")
            if not sep or not service_id or not event_type:
                raise ValueError(f"{item!r} is not 'service_id:event_type'")
        return value


class SyntheticSpec(BaseModel):
    """A reproducible recipe for a labeled corpus"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    activities: list[ActivityTemplate] = Field(min_length=1)
    days: int = Field(ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=-(2**63), lt=2**64)
    start_date: date = Field(default=date.fromisoformat(DEFAULT_START_DATE))

    @model_validator(mode="after")
    def _labels_are_unique(self) -> "SyntheticSpec":
        labels = [template.label for template in self.activities]
        if len(set(labels)) != len(labels):
            raise ValueError("activity template labels must be unique")
        return self


class RunManifest(BaseModel):
    """Provenance written next to every output artifact"""

    subcommand: str
    config: MiningConfig
    inputs: list[str]
    outputs: list[str]
    seed: Optional[int] = None
    tool_version: str
    duration_seconds: float


def load_config(path: Optional[str], overrides: Optional[dict] = None) -> MiningConfig:
    """Merge defaults, an optional JSON config file and explicit overrides.

    Raises:
        pydantic.ValidationError: If any value is out of range
        DataError: If the config file is not a JSON object
    """
    values: dict = {}
    if path:
        try:
            document = json.loads(read_text(path))
        except json.JSONDecodeError as e:
            raise DataError(f"config {path}: {e}") from e
        if not isinstance(document, dict):
            raise DataError(f"config {path}: expected a JSON object")
        values.update(document)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return MiningConfig.model_validate(values)
