"""Exact and log-space combinatorial primitives.

Everything that can overflow a double (binomials of large populations,
products such as ``2**(3k) * e**(3k) * ln(n)**(2k)``) goes through
:class:`LogReal`.  Hypergeometric laws are kept as exact
:class:`fractions.Fraction` pmfs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

Number = Union[int, float, Fraction]

# log_binomial sums logs exactly term by term up to this many factors,
# and falls back to lgamma differences above it.
_DIRECT_TERMS = 256


def log_number(x: Number) -> float:
    """Natural log of a positive int, float or Fraction (big ints are fine)."""
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def logsumexp(xs: Iterable[float]) -> float:
    xs = [x for x in xs if x != -math.inf]
    if not xs:
        return -math.inf
    top = max(xs)
    if math.isinf(top):
        return top
    return top + math.log(math.fsum(math.exp(x - top) for x in xs))


@dataclass(frozen=True, order=False)
class LogReal:
    """A real number stored as ``sign * exp(log_abs)``.

    ``sign == 0`` is zero, and ``log_abs`` is then ``-inf`` by convention.
    """

    sign: int
    log_abs: float

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")
        if self.sign == 0:
            object.__setattr__(self, "log_abs", -math.inf)
        elif math.isnan(self.log_abs):
            raise ValueError("log_abs is NaN")

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls) -> "LogReal":
        return cls(0, -math.inf)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(1, 0.0)

    @classmethod
    def from_log(cls, log_abs: float, sign: int = 1) -> "LogReal":
        if log_abs == -math.inf:
            return cls.zero()
        return cls(sign, log_abs)

    @classmethod
    def of(cls, x: Union[Number, "LogReal"]) -> "LogReal":
        if isinstance(x, LogReal):
            return x
        if x == 0:
            return cls.zero()
        sign = 1 if x > 0 else -1
        return cls(sign, log_number(abs(x)))

    # -- conversions --------------------------------------------------
    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf

    @property
    def value(self) -> float:
        return float(self)

    def ln(self) -> float:
        if self.sign <= 0:
            raise ValueError("logarithm of a non-positive LogReal")
        return self.log_abs

    def decimal(self, digits: int = 6) -> str:
        """Scientific rendering that survives magnitudes beyond double range."""
        if self.sign == 0:
            return "0"
        if math.isinf(self.log_abs):
            return "-inf" if self.sign < 0 else "inf"
        log10 = self.log_abs / math.log(10)
        exponent = math.floor(log10)
        mantissa = 10 ** (log10 - exponent)
        if mantissa >= 10 - 0.5 * 10 ** (1 - digits):
            mantissa /= 10
            exponent += 1
        text = f"{mantissa:.{digits - 1}f}e{exponent:+d}"
        return ("-" if self.sign < 0 else "") + text

    def to_json(self) -> dict:
        return {
            "sign": self.sign,
            "log_abs": None if self.sign == 0 else self.log_abs,
            "decimal": self.decimal(),
        }

    # -- arithmetic ---------------------------------------------------
    def __neg__(self) -> "LogReal":
        return LogReal(-self.sign, self.log_abs)

    def __abs__(self) -> "LogReal":
        return LogReal(abs(self.sign), self.log_abs)

    def __mul__(self, other: Union[Number, "LogReal"]) -> "LogReal":
        other = LogReal.of(other)
        if self.sign == 0 or other.sign == 0:
            return LogReal.zero()
        return LogReal(self.sign * other.sign, self.log_abs + other.log_abs)

    __rmul__ = __mul__

    def __truediv__(self, other: Union[Number, "LogReal"]) -> "LogReal":
        other = LogReal.of(other)
        if other.sign == 0:
            raise ZeroDivisionError("LogReal division by zero")
        if self.sign == 0:
            return LogReal.zero()
        return LogReal(self.sign * other.sign, self.log_abs - other.log_abs)

    def __rtruediv__(self, other: Number) -> "LogReal":
        return LogReal.of(other) / self

    def __pow__(self, exponent: Number) -> "LogReal":
        exponent = float(exponent)
        if self.sign == 0:
            if exponent > 0:
                return LogReal.zero()
            if exponent == 0:
                return LogReal.one()
            raise ZeroDivisionError("zero to a negative power")
        if self.sign < 0:
            if not float(exponent).is_integer():
                raise ValueError("non-integer power of a negative LogReal")
            sign = -1 if int(exponent) % 2 else 1
        else:
            sign = 1
        if exponent == 0:
            return LogReal.one()
        return LogReal(sign, self.log_abs * exponent)

    def __add__(self, other: Union[Number, "LogReal"]) -> "LogReal":
        other = LogReal.of(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.log_abs >= other.log_abs else (other, self)
        if math.isinf(hi.log_abs):
            if hi.sign != lo.sign and math.isinf(lo.log_abs):
                raise ValueError("inf - inf")
            return hi
        delta = lo.log_abs - hi.log_abs
        if hi.sign == lo.sign:
            return LogReal(hi.sign, hi.log_abs + math.log1p(math.exp(delta)))
        if delta == 0:
            return LogReal.zero()
        return LogReal(hi.sign, hi.log_abs + math.log1p(-math.exp(delta)))

    __radd__ = __add__

    def __sub__(self, other: Union[Number, "LogReal"]) -> "LogReal":
        return self + (-LogReal.of(other))

    def __rsub__(self, other: Number) -> "LogReal":
        return LogReal.of(other) - self

    # -- comparisons --------------------------------------------------
    def _key(self) -> tuple:
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.log_abs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (LogReal, int, float, Fraction)):
            return NotImplemented
        return self._key() == LogReal.of(other)._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __lt__(self, other: Union[Number, "LogReal"]) -> bool:
        return self._key() < LogReal.of(other)._key()

    def __le__(self, other: Union[Number, "LogReal"]) -> bool:
        return self._key() <= LogReal.of(other)._key()

    def __gt__(self, other: Union[Number, "LogReal"]) -> bool:
        return self._key() > LogReal.of(other)._key()

    def __ge__(self, other: Union[Number, "LogReal"]) -> bool:
        return self._key() >= LogReal.of(other)._key()

    def __repr__(self) -> str:
        return f"LogReal({self.decimal()})"


def log_sum(terms: Iterable[LogReal]) -> LogReal:
    """Sum of nonnegative LogReals via a single log-sum-exp pass."""
    logs = []
    for term in terms:
        if term.sign < 0:
            raise ValueError("log_sum expects nonnegative terms")
        if term.sign > 0:
            logs.append(term.log_abs)
    return LogReal.from_log(logsumexp(logs))


def log_binomial(a: int, b: int) -> LogReal:
    """``ln C(a, b)`` as a LogReal; zero when ``b > a``."""
    if a < 0:
        raise ValueError(f"log_binomial needs a >= 0, got a={a}")
    if b < 0:
        raise ValueError(f"log_binomial needs b >= 0, got b={b}")
    if b > a:
        return LogReal.zero()
    b = min(b, a - b)
    if b == 0:
        return LogReal.one()
    if b <= _DIRECT_TERMS:
        num = math.fsum(math.log(a - i) for i in range(b))
        den = math.fsum(math.log(i) for i in range(2, b + 1))
        return LogReal(1, num - den)
    return LogReal(1, math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1))


def falling_factorial(x: int, u: int) -> int:
    """``x (x-1) ... (x-u+1)``; the empty product for ``u == 0``."""
    if u < 0:
        raise ValueError(f"falling_factorial needs u >= 0, got {u}")
    out = 1
    for i in range(u):
        out *= x - i
    return out


@dataclass(frozen=True)
class HypergeomLaw:
    """Number of marked items in ``draws`` uniform draws without replacement."""

    population: int
    marked: int
    draws: int
    pmf: dict = field(repr=False)

    @property
    def support(self) -> list:
        return sorted(v for v, pr in self.pmf.items() if pr)

    @property
    def lower(self) -> int:
        return max(0, self.draws + self.marked - self.population)

    @property
    def upper(self) -> int:
        return min(self.draws, self.marked)

    def prob(self, value: int) -> Fraction:
        return self.pmf.get(value, Fraction(0))

    def tail(self, value: int) -> Fraction:
        """``P(overlap >= value)``."""
        return sum((pr for v, pr in self.pmf.items() if v >= value), Fraction(0))

    def mean(self) -> Fraction:
        return sum((v * pr for v, pr in self.pmf.items()), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.pmf.values(), Fraction(0))


def hypergeom(population: int, marked: int, draws: int) -> HypergeomLaw:
    if not 0 <= marked <= population:
        raise ValueError(f"need 0 <= marked <= population, got {marked}, {population}")
    if not 1 <= draws <= population:
        raise ValueError(f"need 1 <= draws <= population, got {draws}, {population}")
    total = math.comb(population, draws)
    lo = max(0, draws + marked - population)
    hi = min(draws, marked)
    pmf = {
        j: Fraction(math.comb(marked, j) * math.comb(population - marked, draws - j), total)
        for j in range(lo, hi + 1)
    }
    return HypergeomLaw(population, marked, draws, pmf)
