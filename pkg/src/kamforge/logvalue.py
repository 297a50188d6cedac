"""Sign + log-magnitude scalars for overflow-safe constant chains.

Every explicit constant and threshold in this package is assembled from
products, powers and sums of terms whose magnitudes range from ~1e-300 to
far beyond 1e300.  A LogValue keeps the sign, an exact integer power of
two, and a small residual natural log; the split keeps full double
precision through arbitrarily long product chains and gives 1e-15-level
round trips over the whole representable range, which a single stored
log (ulp ~1e-13 at |ln x| ~ 700) cannot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_LN2 = math.log(2.0)
_LN10 = math.log(10.0)


def _split(exp2: int, t: float) -> tuple[int, float]:
    """Normalize so the residual log t lies in [-ln2/2, ln2/2]."""
    if t != t or abs(t) == math.inf:
        return exp2, t
    k = round(t / _LN2)
    if k:
        return exp2 + k, t - k * _LN2
    return exp2, t


@dataclass(frozen=True, order=False)
class LogValue:
    """A real number as sign * 2^exp2 * exp(lnm)."""

    sign: int
    exp2: int
    lnm: float

    # -- construction -----------------------------------------------------

    @staticmethod
    def from_real(x: float) -> "LogValue":
        x = float(x)
        if x == 0.0:
            return ZERO
        if math.isinf(x):
            return LogValue(1 if x > 0 else -1, 0, math.inf)
        m, e = math.frexp(abs(x))  # x = m * 2^e, m in [0.5, 1)
        exp2, lnm = _split(e, math.log(m))
        return LogValue(1 if x > 0 else -1, exp2, lnm)

    @staticmethod
    def from_ln(ln_magnitude: float, sign: int = 1) -> "LogValue":
        if sign == 0:
            return ZERO
        if math.isinf(ln_magnitude):
            if ln_magnitude < 0:
                return ZERO
            return LogValue(1 if sign > 0 else -1, 0, math.inf)
        exp2, lnm = _split(0, float(ln_magnitude))
        return LogValue(1 if sign > 0 else -1, exp2, lnm)

    @staticmethod
    def from_pow2(e: float) -> "LogValue":
        """2**e with the integer part of e carried exactly."""
        n = math.floor(e)
        exp2, lnm = _split(int(n), (e - n) * _LN2)
        return LogValue(1, exp2, lnm)

    @staticmethod
    def gamma(z: float) -> "LogValue":
        """Gamma(z) for z > 0 via lgamma."""
        if z <= 0:
            raise ValueError("gamma: only positive arguments are used here")
        return LogValue.from_ln(math.lgamma(z))

    @staticmethod
    def exp(t: float) -> "LogValue":
        """e**t without evaluating the exponential."""
        return LogValue.from_ln(float(t))

    # -- conversions -------------------------------------------------------

    @property
    def log_magnitude(self) -> float:
        """Natural log of |value| (display precision at the extremes)."""
        if self.sign == 0:
            return -math.inf
        return self.exp2 * _LN2 + self.lnm

    @property
    def log10(self) -> float:
        return self.log_magnitude / _LN10

    def to_real(self) -> float:
        if self.sign == 0:
            return 0.0
        if math.isinf(self.lnm):
            return self.sign * math.inf
        if self.exp2 > 1100:
            return self.sign * math.inf
        if self.exp2 < -1140:
            return self.sign * 0.0
        return self.sign * math.ldexp(math.exp(self.lnm), self.exp2)

    def value_if_representable(self) -> float | None:
        """The float value, or None if it would over/underflow a double."""
        if self.sign == 0:
            return 0.0
        if abs(self.log10) > 307.0:
            return None
        return self.to_real()

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "LogValue":
        if isinstance(other, LogValue):
            return other
        return LogValue.from_real(other)

    def __mul__(self, other) -> "LogValue":
        o = self._coerce(other)
        s = self.sign * o.sign
        if s == 0:
            return ZERO
        exp2, lnm = _split(self.exp2 + o.exp2, self.lnm + o.lnm)
        return LogValue(s, exp2, lnm)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogValue":
        o = self._coerce(other)
        if o.sign == 0:
            raise ZeroDivisionError("LogValue division by zero")
        if self.sign == 0:
            return ZERO
        exp2, lnm = _split(self.exp2 - o.exp2, self.lnm - o.lnm)
        return LogValue(self.sign * o.sign, exp2, lnm)

    def __rtruediv__(self, other) -> "LogValue":
        return self._coerce(other) / self

    def __pow__(self, p: float) -> "LogValue":
        if self.sign == 0:
            if p <= 0:
                raise ZeroDivisionError("0**p with p <= 0")
            return ZERO
        sign = 1
        if self.sign < 0:
            if float(p) != int(p):
                raise ValueError("non-integer power of a negative LogValue")
            sign = -1 if int(p) % 2 else 1
        if float(p) == int(p):
            n = int(p)
            exp2, lnm = _split(self.exp2 * n, self.lnm * n)
            return LogValue(sign, exp2, lnm)
        t = p * self.exp2
        n = math.floor(t)
        exp2, lnm = _split(int(n), (t - n) * _LN2 + p * self.lnm)
        return LogValue(sign, exp2, lnm)

    def sqrt(self) -> "LogValue":
        return self ** 0.5

    def __neg__(self) -> "LogValue":
        return LogValue(-self.sign, self.exp2, self.lnm)

    def __abs__(self) -> "LogValue":
        return LogValue(abs(self.sign), self.exp2, self.lnm)

    def _delta_ln(self, o: "LogValue") -> float:
        """ln(|o|/|self|), accurate when magnitudes are comparable."""
        return (o.exp2 - self.exp2) * _LN2 + (o.lnm - self.lnm)

    def __add__(self, other) -> "LogValue":
        o = self._coerce(other)
        if self.sign == 0:
            return o
        if o.sign == 0:
            return self
        if self._delta_ln(o) >= 0:
            big, small = o, self
        else:
            big, small = self, o
        delta = big._delta_ln(small)  # <= 0
        if delta < -745.0:
            return big
        if self.sign == o.sign:
            exp2, lnm = _split(big.exp2, big.lnm + math.log1p(math.exp(delta)))
            return LogValue(big.sign, exp2, lnm)
        if delta == 0.0:
            return ZERO
        exp2, lnm = _split(big.exp2, big.lnm + math.log1p(-math.exp(delta)))
        return LogValue(big.sign, exp2, lnm)

    __radd__ = __add__

    def __sub__(self, other) -> "LogValue":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LogValue":
        return self._coerce(other) + (-self)

    # -- ordering ------------------------------------------------------------

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        if self.sign != o.sign:
            return self.sign < o.sign
        if self.sign == 0:
            return False
        mag_lt = self._delta_ln(o) > 0
        return mag_lt if self.sign > 0 else o._delta_ln(self) > 0

    def __le__(self, other) -> bool:
        return self < other or self == self._coerce(other)

    def __gt__(self, other) -> bool:
        return self._coerce(other) < self

    def __ge__(self, other) -> bool:
        return self._coerce(other) <= self

    def __eq__(self, other) -> bool:
        if not isinstance(other, (LogValue, int, float)):
            return NotImplemented
        o = self._coerce(other)
        if self.sign != o.sign:
            return False
        if self.sign == 0:
            return True
        return self.exp2 == o.exp2 and self.lnm == o.lnm

    def __hash__(self):
        return hash((self.sign, self.exp2, self.lnm))

    def __repr__(self) -> str:
        v = self.value_if_representable()
        if v is not None:
            return f"LogValue({v!r})"
        return f"LogValue(sign={self.sign}, log10={self.log10:.6f})"

    def isclose(self, other, rel: float = 1e-12) -> bool:
        """Relative closeness in the log domain."""
        o = self._coerce(other)
        if self.sign != o.sign:
            return self.sign == 0 and o.sign == 0
        if self.sign == 0:
            return True
        return abs(self._delta_ln(o)) <= rel

    def to_json(self) -> dict:
        return {
            "sign": self.sign,
            "log10": None if self.sign == 0 else self.log10,
            "value_if_representable": self.value_if_representable(),
        }


ZERO = LogValue(0, 0, -math.inf)
ONE = LogValue(1, 0, 0.0)


def lv_max(*vals) -> LogValue:
    out = None
    for v in vals:
        v = v if isinstance(v, LogValue) else LogValue.from_real(v)
        out = v if out is None or v > out else out
    return out


def lv_min(*vals) -> LogValue:
    out = None
    for v in vals:
        v = v if isinstance(v, LogValue) else LogValue.from_real(v)
        out = v if out is None or v < out else out
    return out


def lv_sum(terms) -> LogValue:
    out = ZERO
    for t in terms:
        out = out + t
    return out
