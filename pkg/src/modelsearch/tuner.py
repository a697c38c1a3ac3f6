"""Configuration generators: grid search and random search.

The driver talks to a :class:`Tuner`, whose ``propose`` method accepts
the evaluation results of previously proposed configs. The two static
tuners here ignore that feedback; the slot exists so an adaptive tuner
can be dropped in without touching the driver.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Protocol, Sequence

from .core import ModelConfig, ParamValue, SearchSpace, check_param_value, grid_enumerate
from .errors import InvalidSearchSpaceError

RANGE_KINDS = ("real-uniform", "integer-uniform", "choice")


@dataclass(frozen=True)
class RandomRange:
    """Sampling range for one hyperparameter of a random search."""

    name: str
    kind: str
    low: float | int | None = None
    high: float | int | None = None
    choices: tuple[ParamValue, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in RANGE_KINDS:
            raise InvalidSearchSpaceError(
                f"range {self.name!r}: kind must be one of {RANGE_KINDS}, got {self.kind!r}"
            )
        if self.kind == "choice":
            if not self.choices:
                raise InvalidSearchSpaceError(f"range {self.name!r}: choice list is empty")
            for v in self.choices:
                check_param_value(self.name, v)
        else:
            if self.low is None or self.high is None:
                raise InvalidSearchSpaceError(f"range {self.name!r}: uniform kinds need low and high")
            if not self.low < self.high:
                raise InvalidSearchSpaceError(
                    f"range {self.name!r}: low must be < high, got [{self.low}, {self.high}]"
                )

    @classmethod
    def real(cls, name: str, low: float, high: float) -> "RandomRange":
        return cls(name, "real-uniform", low=float(low), high=float(high))

    @classmethod
    def integer(cls, name: str, low: int, high: int) -> "RandomRange":
        """Integer range, both endpoints inclusive."""
        return cls(name, "integer-uniform", low=int(low), high=int(high))

    @classmethod
    def choice(cls, name: str, choices: Sequence[ParamValue]) -> "RandomRange":
        return cls(name, "choice", choices=tuple(choices))

    def draw(self, rng: random.Random) -> ParamValue:
        if self.kind == "real-uniform":
            return rng.uniform(self.low, self.high)
        if self.kind == "integer-uniform":
            return rng.randint(self.low, self.high)
        return rng.choice(self.choices)


class Tuner(Protocol):
    def propose(self, feedback: Sequence | None = None) -> list[ModelConfig]:
        """Return the configs to train next; empty list means done."""


def tune_grid(space: SearchSpace) -> list[ModelConfig]:
    """Exhaustive grid search: all grid points, in enumeration order."""
    return grid_enumerate(space)


def tune_random(algorithm: str, ranges: Sequence[RandomRange], n: int, seed: int) -> list[ModelConfig]:
    """Draw n configs with each parameter sampled independently from its range.

    Draws are with replacement, so repeated points are possible for
    discrete ranges. Deterministic for a given seed.
    """
    if n < 1:
        raise InvalidSearchSpaceError(f"random search needs n >= 1, got {n}")
    names = [r.name for r in ranges]
    if len(set(names)) != len(names):
        raise InvalidSearchSpaceError(f"duplicate parameter names in ranges: {names}")
    rng = random.Random(seed)
    configs = []
    for i in range(n):
        params = {r.name: r.draw(rng) for r in ranges}
        configs.append(ModelConfig(i, algorithm, params))
    return configs


class GridTuner:
    """Static tuner that proposes every grid point once."""

    def __init__(self, space: SearchSpace):
        self._space = space
        self._done = False

    def propose(self, feedback: Sequence | None = None) -> list[ModelConfig]:
        if self._done:
            return []
        self._done = True
        return tune_grid(self._space)


class RandomTuner:
    """Static tuner that proposes one seeded batch of random draws."""

    def __init__(self, algorithm: str, ranges: Sequence[RandomRange], n: int, seed: int):
        self._args = (algorithm, tuple(ranges), n, seed)
        self._done = False

    def propose(self, feedback: Sequence | None = None) -> list[ModelConfig]:
        if self._done:
            return []
        self._done = True
        return tune_random(*self._args)
