import math
from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)


def to_upper(v: Any) -> Any:
    if isinstance(v, str):
        return v.upper()
    return v


def to_lower(v: Any) -> Any:
    if isinstance(v, str):
        return v.lower()
    return v


LogLevel = Literal["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG", "NOTSET"]
CaseInsensitiveLogLevel = Annotated[LogLevel, BeforeValidator(to_upper)]

DEFAULT_SAMPLE_COUNT = 5001
DEFAULT_ENERGY_THRESHOLD = 1.0 - 1e-10


class SignalKind(str, Enum):
    SINE_ON_POLYNOMIAL = "sine_on_polynomial"
    ENSO = "enso"
    CHIRP = "chirp"
    PIECEWISE = "piecewise"
    SQUARE_WAVE = "square_wave"
    MACKEY_GLASS = "mackey_glass"
    F1 = "f1"
    F2 = "f2"
    F3 = "f3"


class Method(str, Enum):
    VANILLA = "vanilla"
    PHASEDNN = "phasednn"
    PFFDNN = "pffdnn"


# Half-open sampling domains; Mackey-Glass is handled by its transient skip.
DEFAULT_DOMAINS: Dict[SignalKind, Tuple[float, float]] = {
    SignalKind.SINE_ON_POLYNOMIAL: (-math.pi, math.pi),
    SignalKind.ENSO: (0.0, 24.0),
    SignalKind.CHIRP: (0.0, 1.0),
    SignalKind.PIECEWISE: (-math.pi, math.pi),
    SignalKind.SQUARE_WAVE: (-math.pi, math.pi),
    SignalKind.F1: (0.0, 2.0 * math.pi),
    SignalKind.F2: (0.0, 2.0 * math.pi),
    SignalKind.F3: (0.0, 2.0 * math.pi),
}

MACKEY_GLASS_SPAN = 500.0


class BaseConfigModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LoggingSettings(BaseConfigModel):
    level: CaseInsensitiveLogLevel = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    loggers: Dict[str, CaseInsensitiveLogLevel] = Field(default_factory=dict)


class MetricsSettings(BaseConfigModel):
    enabled: bool = False
    filename: str = "metrics.prom"


class ChirpSettings(BaseConfigModel):
    period: float = Field(1.0, gt=0)
    f0: float = 0.01
    f_end: float = 50.0
    linear: bool = False


class MackeyGlassConfig(BaseConfigModel):
    delay: float = Field(30.0, gt=0)
    production: float = 0.2
    decay: float = 0.1
    exponent: float = 10.0
    history_value: float = 1.2
    step_size: float = Field(0.01, gt=0)
    transient_skip: float = Field(100.0, ge=0)

    @property
    def delay_steps(self) -> int:
        return round(self.delay / self.step_size)

    @model_validator(mode="after")
    def validate_delay_is_step_multiple(self) -> "MackeyGlassConfig":
        ratio = self.delay / self.step_size
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(
                f"delay ({self.delay}) must be an integer multiple of "
                f"step_size ({self.step_size})"
            )
        return self


class SignalSpec(BaseConfigModel):
    """
    A sampled test signal: its kind, sampling domain and sample count.

    Samples sit on the half-open grid x_j = x_start + j * (x_end - x_start) / n.
    When 'domain' is omitted it defaults per kind; for Mackey-Glass it starts
    at the transient skip and spans MACKEY_GLASS_SPAN units.
    """

    kind: Annotated[SignalKind, BeforeValidator(to_lower)] = (
        SignalKind.SINE_ON_POLYNOMIAL
    )
    domain: Optional[Tuple[float, float]] = None
    n: int = Field(DEFAULT_SAMPLE_COUNT, ge=2)
    chirp: ChirpSettings = Field(
        default_factory=ChirpSettings  # pyright:ignore[reportArgumentType]
    )
    mackey_glass: MackeyGlassConfig = Field(
        default_factory=MackeyGlassConfig  # pyright:ignore[reportArgumentType]
    )

    @model_validator(mode="after")
    def fill_default_domain(self) -> "SignalSpec":
        if self.domain is None:
            if self.kind == SignalKind.MACKEY_GLASS:
                start = self.mackey_glass.transient_skip
                self.domain = (start, start + MACKEY_GLASS_SPAN)
            else:
                self.domain = DEFAULT_DOMAINS[self.kind]
        x_start, x_end = self.domain
        if not x_start < x_end:
            raise ValueError(f"domain start {x_start} must be below its end {x_end}")
        if self.kind == SignalKind.MACKEY_GLASS and x_start < 0:
            raise ValueError("Mackey-Glass sampling cannot start before x = 0")
        return self

    @property
    def x_start(self) -> float:
        assert self.domain is not None
        return self.domain[0]

    @property
    def x_end(self) -> float:
        assert self.domain is not None
        return self.domain[1]

    @property
    def spacing(self) -> float:
        return (self.x_end - self.x_start) / self.n

    @property
    def is_closed_form(self) -> bool:
        return self.kind != SignalKind.MACKEY_GLASS


class TrainingSettings(BaseConfigModel):
    net_shape: List[int] = Field(default_factory=lambda: [1, 40, 40, 40, 1])
    learning_rate: float = Field(0.0002, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)
    batch_size: int = Field(100, ge=1)
    updates: int = Field(10000, ge=0)
    eval_every: int = Field(100, ge=1)
    seed: int = Field(0, ge=0)
    elu_alpha: float = Field(1.0, gt=0)

    @field_validator("net_shape", mode="before")
    @classmethod
    def parse_net_shape(cls, v: Any) -> Any:
        if isinstance(v, str):
            try:
                return [int(part) for part in v.replace("-", ",").split(",") if part]
            except ValueError as e:
                raise ValueError(f"Invalid net shape string: {v}") from e
        return v

    @field_validator("net_shape")
    @classmethod
    def validate_net_shape(cls, v: List[int]) -> List[int]:
        if len(v) < 2 or any(size < 1 for size in v):
            raise ValueError("net_shape needs at least two positive layer sizes")
        if v[0] != 1 or v[-1] != 1:
            raise ValueError("net_shape must start and end with 1 (scalar in/out)")
        return v


class ExperimentSettings(BaseConfigModel):
    signal: SignalSpec = Field(
        default_factory=SignalSpec  # pyright:ignore[reportArgumentType]
    )
    methods: List[Annotated[Method, BeforeValidator(to_lower)]] = Field(
        default_factory=lambda: [Method.PFFDNN], min_length=1
    )
    delta_omega: List[Annotated[int, Field(ge=1)]] = Field(
        default_factory=lambda: [11, 21, 31, 41, 51], min_length=1
    )
    energy_threshold: float = Field(DEFAULT_ENERGY_THRESHOLD, gt=0, le=1)
    training: TrainingSettings = Field(
        default_factory=TrainingSettings  # pyright:ignore[reportArgumentType]
    )
    output_dir: str = "runs"
    workers: int = Field(1, ge=1)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    metrics: MetricsSettings = Field(default_factory=MetricsSettings)

    @model_validator(mode="before")
    @classmethod
    def accept_scalar_lists(cls, data: Any) -> Any:
        """Lets a config file say 'method: pffdnn' or 'delta_omega: 11'."""
        if isinstance(data, dict):
            if "method" in data:
                data.setdefault("methods", data.pop("method"))
            for key in ("methods", "delta_omega"):
                value = data.get(key)
                if value is not None and not isinstance(value, (list, tuple)):
                    data[key] = [value]
        return data
