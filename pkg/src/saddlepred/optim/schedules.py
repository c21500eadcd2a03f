from dataclasses import dataclass
import math

SCHEDULE_KINDS = ("constant", "inverse_sqrt")


@dataclass(frozen=True)
class Schedule:
    """Step-size sequence indexed from ``k = 1``.

    ``constant`` returns ``base`` for every step, ``inverse_sqrt`` returns
    ``base / sqrt(k)``.
    """

    kind: str = "constant"
    base: float = 0.1

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; expected one of {SCHEDULE_KINDS}")
        if not (math.isfinite(self.base) and self.base >= 0):
            raise ValueError(f"schedule base must be finite and >= 0, got {self.base}")

    def rate(self, k: int) -> float:
        if k < 1:
            raise ValueError("schedules are indexed from k = 1")
        if self.kind == "constant":
            return self.base
        return self.base / math.sqrt(k)


def constant(base: float) -> Schedule:
    return Schedule("constant", base)


def inverse_sqrt(base: float) -> Schedule:
    return Schedule("inverse_sqrt", base)
