from __future__ import annotations

from dataclasses import dataclass, field


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly binned, non-negative counts; the unit lives in the name."""

    bin_ns: int
    start_ns: int
    values: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.bin_ns <= 0:
            raise AnalysisError(f"bin width must be positive, got {self.bin_ns}")
        if any(v < 0 for v in self.values):
            raise AnalysisError("negative value in time series")

    def __len__(self) -> int:
        return len(self.values)

    def time_of(self, i: int) -> int:
        return self.start_ns + i * self.bin_ns
