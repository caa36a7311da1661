"""Signed magnitudes stored as natural logs.

The effective constants of the integer-coefficient bounds have exponents in
the thousands, and double-exponential factors overflow at small radii, so
those quantities travel as ``LogScalar`` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

LOG10_E = math.log10(math.e)
_MAX_EXACT = 700.0


@total_ordering
@dataclass(frozen=True)
class LogScalar:
    """``sign * exp(log_mag)``; ``log_mag`` is ignored when ``sign == 0``."""

    sign: int
    log_mag: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log_mag", -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogScalar":
        if x == 0:
            return cls(0)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, log_mag: float, sign: int = 1) -> "LogScalar":
        return cls(sign, float(log_mag))

    @property
    def log10(self) -> float:
        return self.log_mag * LOG10_E

    def is_representable(self) -> bool:
        return self.sign == 0 or abs(self.log_mag) <= _MAX_EXACT

    def to_float(self) -> float:
        """Plain float; overflows to +-inf and underflows to 0 outside double range."""
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_mag)
        except OverflowError:
            return self.sign * math.inf

    __float__ = to_float

    def __mul__(self, other):
        other = _as_log(other)
        if self.sign == 0 or other.sign == 0:
            return LogScalar(0)
        return LogScalar(self.sign * other.sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_log(other)
        if other.sign == 0:
            raise ZeroDivisionError("LogScalar division by zero")
        if self.sign == 0:
            return LogScalar(0)
        return LogScalar(self.sign * other.sign, self.log_mag - other.log_mag)

    def __rtruediv__(self, other):
        return _as_log(other) / self

    def __neg__(self):
        return LogScalar(-self.sign, self.log_mag)

    def __add__(self, other):
        other = _as_log(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.log_mag >= other.log_mag else (other, self)
        ratio = math.exp(lo.log_mag - hi.log_mag)
        if hi.sign == lo.sign:
            return LogScalar(hi.sign, hi.log_mag + math.log1p(ratio))
        if ratio == 1.0:
            return LogScalar(0)
        return LogScalar(hi.sign, hi.log_mag + math.log1p(-ratio))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_log(other))

    def __pow__(self, p: float):
        if self.sign < 0:
            raise ValueError("fractional powers of negative LogScalar")
        if self.sign == 0:
            return LogScalar(0) if p > 0 else LogScalar(1, 0.0)
        return LogScalar(1, self.log_mag * p)

    def sqrt(self):
        return self ** 0.5

    def _key(self):
        # total order on signed magnitudes
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.log_mag)

    def __eq__(self, other):
        if not isinstance(other, (LogScalar, int, float)):
            return NotImplemented
        return self._key() == _as_log(other)._key()

    def __lt__(self, other):
        if not isinstance(other, (LogScalar, int, float)):
            return NotImplemented
        return self._key() < _as_log(other)._key()

    def __hash__(self):
        return hash(self._key())

    def to_json(self) -> dict:
        """``{"sign", "log10", "value"}``; ``value`` is null when not representable."""
        return {
            "sign": self.sign,
            "log10": None if self.sign == 0 else self.log10,
            "value": self.to_float() if self.is_representable() else None,
        }


def _as_log(x) -> LogScalar:
    if isinstance(x, LogScalar):
        return x
    return LogScalar.from_float(float(x))
