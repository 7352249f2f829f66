import math
from dataclasses import astuple, dataclass

CSV_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "trial",
    "algorithm",
    "rate_bps_hz",
    "rate_quantized_bps_hz",
    "iterations",
    "lipschitz_L",
    "alpha",
    "wall_ms",
    "status",
)


@dataclass(frozen=True)
class ResultRow:
    """One (sweep value, trial, algorithm) outcome; field order is the CSV column order."""

    sweep_param: str
    sweep_value: float | str
    trial: int
    algorithm: str
    rate_bps_hz: float
    rate_quantized_bps_hz: float | None
    iterations: int | None
    lipschitz_L: float
    alpha: float
    wall_ms: float | None
    status: str

    @classmethod
    def error(cls, sweep_param: str, sweep_value: float | str, trial: int, algorithm: str, exc: BaseException) -> "ResultRow":
        return cls(
            sweep_param=sweep_param,
            sweep_value=sweep_value,
            trial=trial,
            algorithm=algorithm,
            rate_bps_hz=math.nan,
            rate_quantized_bps_hz=None,
            iterations=None,
            lipschitz_L=math.nan,
            alpha=math.nan,
            wall_ms=None,
            status=f"error:{type(exc).__name__}",
        )

    @property
    def ok(self) -> bool:
        return not self.status.startswith("error")

    def csv_fields(self) -> list[str]:
        return [_format(v) for v in astuple(self)]


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)
