"""Draw-time distribution objects for profile behavior parameters.

Heavy tails use the inverse-CDF Pareto form x_min * u^(-1/alpha) with
u in (0, 1], so u = 1 maps exactly onto x_min. Caps are plain truncation,
documented per profile; they keep desk-scale runs from drawing gigabyte flows
while leaving several decades of tail.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..engine import RngStream


class DistributionError(ValueError):
    pass


def draw_heavy_tailed(alpha: float, x_min: float, rng: RngStream, cap: float | None = None) -> float:
    """One Pareto(alpha, x_min) draw; alpha must lie in (1, 2]."""
    if not 1.0 < alpha <= 2.0:
        raise DistributionError(f"heavy-tail shape must be in (1, 2], got {alpha}")
    if x_min <= 0:
        raise DistributionError("x_min must be positive")
    u = 1.0 - rng.random()  # (0, 1]
    value = x_min * u ** (-1.0 / alpha)
    if cap is not None and value > cap:
        value = cap
    return value


@dataclass(frozen=True)
class Constant:
    value: float

    def draw(self, rng: RngStream) -> float:
        return self.value

    def mean(self) -> float:
        return self.value


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self):
        if self.low > self.high:
            raise DistributionError(f"uniform low {self.low} > high {self.high}")

    def draw(self, rng: RngStream) -> float:
        return rng.uniform(self.low, self.high)

    def mean(self) -> float:
        return (self.low + self.high) / 2


@dataclass(frozen=True)
class UniformInt:
    low: int
    high: int

    def __post_init__(self):
        if self.low > self.high:
            raise DistributionError(f"uniform_int low {self.low} > high {self.high}")

    def draw(self, rng: RngStream) -> int:
        return rng.randint(self.low, self.high)

    def mean(self) -> float:
        return (self.low + self.high) / 2


@dataclass(frozen=True)
class Pareto:
    alpha: float
    x_min: float
    cap: float | None = None

    def __post_init__(self):
        if not 1.0 < self.alpha <= 2.0:
            raise DistributionError(f"pareto alpha must be in (1, 2], got {self.alpha}")

    def draw(self, rng: RngStream) -> float:
        return draw_heavy_tailed(self.alpha, self.x_min, rng, self.cap)

    def mean(self) -> float:
        return self.alpha * self.x_min / (self.alpha - 1)


@dataclass(frozen=True)
class ParetoInt(Pareto):
    def draw(self, rng: RngStream) -> int:
        return int(round(draw_heavy_tailed(self.alpha, self.x_min, rng, self.cap)))


_KINDS = {
    "constant": (Constant, ("value",)),
    "uniform": (Uniform, ("low", "high")),
    "uniform_int": (UniformInt, ("low", "high")),
    "pareto": (Pareto, ("alpha", "x_min", "cap")),
    "pareto_int": (ParetoInt, ("alpha", "x_min", "cap")),
}

_OPTIONAL = {"cap"}


def parse_distribution(obj: dict):
    """Strict scenario-file form: {"dist": "pareto", "alpha": 1.3, "x_min": 2000}."""
    if not isinstance(obj, dict) or "dist" not in obj:
        raise DistributionError(f"distribution must be an object with a 'dist' key, got {obj!r}")
    kind = obj["dist"]
    if kind not in _KINDS:
        raise DistributionError(f"unknown distribution kind {kind!r}")
    cls, fields = _KINDS[kind]
    extra = set(obj) - set(fields) - {"dist"}
    if extra:
        raise DistributionError(f"unknown keys {sorted(extra)} for distribution {kind!r}")
    missing = [f for f in fields if f not in obj and f not in _OPTIONAL]
    if missing:
        raise DistributionError(f"distribution {kind!r} missing {missing}")
    return cls(**{f: obj[f] for f in fields if f in obj})


def distribution_to_json(dist) -> dict:
    for name, (cls, fields) in _KINDS.items():
        if type(dist) is cls:
            out = {"dist": name}
            for f in fields:
                v = getattr(dist, f)
                if v is not None:
                    out[f] = v
            return out
    raise DistributionError(f"not a distribution: {dist!r}")
