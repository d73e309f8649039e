"""Uniform weighted hypergraphs, their upsets, weights and covers.

Subsets of the ground set ``{0, ..., n-1}`` are plain ``int`` bitmasks
(bit ``i`` set means element ``i`` is present).  Ground sets are capped at
64 elements so masks also fit a ``numpy.uint64``; full enumeration of
``2**n`` subsets is capped at ``n <= 24``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .numerics import LogReal, Number, log_number, log_sum

MAX_GROUND = 64
MAX_ENUMERATION = 24

Subset = int


class TooLarge(ValueError):
    """Raised when an exact enumeration would exceed its size cap."""


class REmpty(ValueError):
    """Raised when ``r > d``: the upset is empty and ``p`` is undefined."""


class AssumptionWarning(UserWarning):
    pass


# --------------------------------------------------------------------------
# bitmask helpers


def mask_of(elements: Iterable[int]) -> Subset:
    out = 0
    for i in elements:
        if i < 0:
            raise ValueError(f"negative element {i}")
        out |= 1 << i
    return out


def members(mask: Subset) -> list:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def size(mask: Subset) -> int:
    return bin(mask).count("1")


def is_subset(a: Subset, b: Subset) -> bool:
    return a & ~b == 0


def as_fraction(x: Union[Number, str]) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class SubsetFamily:
    """An ordered family of distinct subsets; duplicates are dropped."""

    sets: tuple = ()

    def __post_init__(self) -> None:
        seen = dict.fromkeys(int(s) for s in self.sets)
        object.__setattr__(self, "sets", tuple(seen))

    def __iter__(self) -> Iterator[Subset]:
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def __contains__(self, mask: object) -> bool:
        return mask in self.sets

    def __or__(self, other: "SubsetFamily") -> "SubsetFamily":
        return SubsetFamily(self.sets + tuple(other))

    def as_lists(self) -> list:
        return [members(s) for s in self.sets]

    def is_antichain(self) -> bool:
        return not any(
            a != b and is_subset(a, b) for a in self.sets for b in self.sets
        )


@dataclass(frozen=True)
class Instance:
    """A k-uniform hypergraph on ``n`` elements with constant weight ``1/r``.

    ``edges`` is ordered; its length is ``d``.
    """

    n: int
    k: int
    edges: tuple
    r: Fraction
    labels: Optional[tuple] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(int(e) for e in self.edges))
        object.__setattr__(self, "r", as_fraction(self.r))
        if self.n < 1:
            raise ValueError(f"ground set needs n >= 1, got {self.n}")
        if self.n > MAX_GROUND:
            raise TooLarge(f"ground sets are capped at {MAX_GROUND} elements, got {self.n}")
        if self.k < 1:
            raise ValueError(f"edge size k must be positive, got {self.k}")
        if not self.edges:
            raise ValueError("an instance needs at least one edge")
        if self.r <= 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("edges must be pairwise distinct")
        for e in self.edges:
            if e >> self.n:
                raise ValueError(f"edge {members(e)} leaves the ground set of size {self.n}")
            if size(e) != self.k:
                raise ValueError(f"edge {members(e)} does not have exactly k={self.k} elements")

    @classmethod
    def from_lists(cls, n: int, k: int, edges: Iterable[Iterable[int]], r: Union[Number, str]) -> "Instance":
        return cls(n, k, tuple(mask_of(e) for e in edges), as_fraction(r))

    @property
    def d(self) -> int:
        return len(self.edges)

    @property
    def p(self) -> float:
        return solve_p(self)

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.uint64)

    def assumption_warnings(self, L: Optional[float] = None) -> list:
        """Hypotheses of the general setting that this instance violates."""
        out = []
        if not (math.log(self.n) >= self.k >= 2):
            out.append(f"ln n >= k >= 2 fails (k={self.k}, ln n={math.log(self.n):.4f})")
        if self.r > self.d:
            out.append(f"r <= d fails (r={self.r}, d={self.d}); the upset is empty")
        if L is not None and log_number(self.r) < self.k * math.log(L):
            out.append(f"r >= L^k fails (r={self.r}, L^k={L ** self.k:.6g}); G := E is already a cover")
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "r": f"{self.r.numerator}/{self.r.denominator}",
            "edges": [members(e) for e in self.edges],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


class InstanceFormatError(ValueError):
    pass


def load_instance(text: str) -> Instance:
    """Parse the JSON instance format; errors carry line information."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise InstanceFormatError("instance must be a JSON object")
    missing = [key for key in ("n", "k", "r", "edges") if key not in raw]
    if missing:
        raise InstanceFormatError(f"missing keys: {', '.join(missing)}")
    try:
        r = Fraction(str(raw["r"]))
        return Instance.from_lists(int(raw["n"]), int(raw["k"]), raw["edges"], r)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, TooLarge):
            raise
        raise InstanceFormatError(str(exc)) from exc


@dataclass(frozen=True)
class UpsetSummary:
    minimal: SubsetFamily

    @property
    def m(self) -> int:
        return len(self.minimal)


# --------------------------------------------------------------------------
# operations


def weight_g(inst: Instance, q: Number, exact: bool = False) -> Union[LogReal, Fraction]:
    """``w(g, q) = (d/r) q^k``; a Fraction when ``exact`` (q must be rational)."""
    if exact:
        if isinstance(q, float):
            raise TypeError("exact mode needs a rational q")
        return Fraction(inst.d) / inst.r * Fraction(q) ** inst.k
    if q < 0 or q > 1:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if q == 0:
        return LogReal.zero()
    return LogReal(1, math.log(inst.d) - log_number(inst.r) + inst.k * log_number(q))


def solve_p(inst: Instance, L: Optional[float] = None) -> float:
    """The ``p`` with ``w(g, p) = 1``, i.e. ``(r/d)^(1/k)``."""
    if inst.r > inst.d:
        raise REmpty(f"r={inst.r} exceeds d={inst.d}: the upset is empty")
    if L is not None and log_number(inst.r) < inst.k * math.log(L):
        warnings.warn(
            f"r={inst.r} < L^k; the edge family itself is a cover", AssumptionWarning, stacklevel=2
        )
    return math.exp((log_number(inst.r) - math.log(inst.d)) / inst.k)


def p_upper_rational(inst: Instance, digits: int = 15) -> Fraction:
    """A rational ``P >= p`` certified exactly by ``P**k >= r/d``."""
    target = inst.r / inst.d
    if target > 1:
        raise REmpty(f"r={inst.r} exceeds d={inst.d}")
    guess = Fraction(solve_p(inst)).limit_denominator(10**digits)
    step = Fraction(1, 10**digits)
    while guess**inst.k < target:
        guess += step
    return min(guess, Fraction(1))


def edges_inside(inst: Instance, S: Subset) -> int:
    return sum(1 for e in inst.edges if e & ~S == 0)


def upset_contains(inst: Instance, S: Subset) -> bool:
    """Whether ``S`` carries g-mass at least one: at least ``r`` edges inside."""
    if S >> inst.n:
        raise ValueError("subset leaves the ground set")
    return edges_inside(inst, S) >= inst.r


def _check_enumerable(n: int) -> None:
    if n > MAX_ENUMERATION:
        raise TooLarge(f"full subset enumeration is capped at n={MAX_ENUMERATION}, got n={n}")


def _membership_table(inst: Instance) -> np.ndarray:
    _check_enumerable(inst.n)
    masks = np.arange(1 << inst.n, dtype=np.uint32)
    counts = np.zeros(masks.shape, dtype=np.int32)
    for e in inst.edges:
        e32 = np.uint32(e)
        counts += (masks & e32) == e32
    # integer count >= rational r  <=>  count >= ceil(r)
    need = math.ceil(inst.r)
    return counts >= need


def minimal_elements(inst: Instance) -> UpsetSummary:
    """All minimal members of the upset, by enumerating every subset."""
    member = _membership_table(inst)
    masks = np.arange(1 << inst.n, dtype=np.uint32)
    minimal = member.copy()
    for i in range(inst.n):
        bit = np.uint32(1 << i)
        has = (masks & bit) != 0
        minimal &= ~(has & member[masks ^ bit])
    found = np.flatnonzero(minimal)
    return UpsetSummary(SubsetFamily(tuple(int(s) for s in found)))


def covers(G: Iterable[Subset], inst: Instance, summary: Optional[UpsetSummary] = None) -> bool:
    """Whether every member of the upset of g contains some member of ``G``."""
    if summary is None:
        summary = minimal_elements(inst)
    family = list(G)
    return all(any(g & ~S == 0 for g in family) for S in summary.minimal)


def weight_family(G: Iterable[Subset], q: Number, exact: bool = False) -> Union[LogReal, Fraction]:
    """``w(G, q) = sum over S in G of q^|S|``."""
    sizes = [size(s) for s in G]
    if exact:
        if isinstance(q, float):
            raise TypeError("exact mode needs a rational q")
        q = Fraction(q)
        return sum((q**s for s in sizes), Fraction(0))
    if q < 0 or q > 1:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if q == 0:
        return LogReal(1, 0.0) * sizes.count(0) if 0 in sizes else LogReal.zero()
    lq = log_number(q)
    return log_sum(LogReal(1, s * lq) for s in sizes)
