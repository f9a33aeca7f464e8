"""Log-domain weights.

All machine weights live in the natural-log domain: multiplying
probabilities along a path becomes adding log weights, and summing
probabilities over alternative paths becomes log-sum-exp.  Working in the
log domain keeps long traces from underflowing.  Probability-domain values
appear only at ingestion boundaries (``from_probability``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["LogWeight", "ZERO", "ONE"]

_NEG_INF = float("-inf")


@dataclass(frozen=True, slots=True, order=True)
class LogWeight:
    """A scalar weight stored as its natural logarithm.

    The semiring zero is log 0 = -inf (no path); the semiring one is
    log 1 = 0 (a free transition).  ``times`` is exact float addition;
    ``plus`` is log-sum-exp with a max shift for stability.
    """

    value: float

    @staticmethod
    def zero() -> "LogWeight":
        return ZERO

    @staticmethod
    def one() -> "LogWeight":
        return ONE

    @classmethod
    def from_probability(cls, p: float) -> "LogWeight":
        if p < 0.0:
            raise ValueError(f"probability {p!r} is negative")
        return cls(_NEG_INF) if p == 0.0 else cls(math.log(p))

    def to_probability(self) -> float:
        return math.exp(self.value)

    def is_zero(self) -> bool:
        return self.value == _NEG_INF

    def times(self, other: "LogWeight") -> "LogWeight":
        # -inf + finite = -inf, so zero annihilates as required.
        return LogWeight(self.value + other.value)

    def plus(self, other: "LogWeight") -> "LogWeight":
        a, b = self.value, other.value
        if a == _NEG_INF:
            return other
        if b == _NEG_INF:
            return self
        m = a if a >= b else b
        return LogWeight(m + math.log1p(math.exp(-abs(a - b))))

    def __mul__(self, other: "LogWeight") -> "LogWeight":
        return self.times(other)

    def __add__(self, other: "LogWeight") -> "LogWeight":
        return self.plus(other)

    def __repr__(self) -> str:
        return f"LogWeight({self.value!r})"


ZERO = LogWeight(_NEG_INF)
ONE = LogWeight(0.0)
