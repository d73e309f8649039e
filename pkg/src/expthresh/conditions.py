"""Sufficient conditions for small-weight covers, and the explicit two-family cover.

Two conditions are checked here:

* the overlap-sum condition on ``sum_j Y_j`` (with its pointwise
  strengthening on conditional tails of ``Y_s``), which controls random
  covers built from ``s``-fold unions;
* the pair-overlap condition on ``Y_2 = |e & e'|``, which controls the
  deterministic cover ``G0 | G1`` where ``G0`` holds unions of two
  intersecting edges and ``G1`` unions of ``r`` pairwise disjoint edges.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from .core import Instance, SubsetFamily, TooLarge, p_upper_rational, solve_p, weight_family
from .cover import trace_unions
from .numerics import LogReal, Number, log_sum
from .report import ConditionReport, point

PAIR_LIMIT = 10**4
G1_LIMIT = 10**6
EXACT_SUM_LIMIT = 2 * 10**6
# Past this many overlap values, zero-mass points are summarized, not listed.
EXPLICIT_POINTS = 4096
# Monte Carlo points within this many standard errors are INCONCLUSIVE.
SIGMAS = 3.0


@dataclass(frozen=True)
class OverlapLaw:
    """Distribution of an integer overlap variable.

    ``kind`` is ``"exact"`` (Fraction masses), ``"empirical"`` (counts over
    ``trials`` samples) or ``"dominating"`` (an upper-bounding law).
    """

    probs: dict
    kind: str = "exact"
    trials: Optional[int] = None
    counts: Optional[dict] = field(default=None, repr=False)

    @classmethod
    def empirical(cls, counts: dict, trials: int) -> "OverlapLaw":
        probs = {y: c / trials for y, c in sorted(counts.items())}
        return cls(probs, "empirical", trials, dict(counts))

    @property
    def support(self) -> list:
        return sorted(y for y, pr in self.probs.items() if pr)

    def prob(self, y: int) -> Number:
        return self.probs.get(y, 0)

    def total(self) -> Number:
        return sum(self.probs.values())

    def mean(self) -> Number:
        return sum(y * pr for y, pr in self.probs.items())

    def stderr(self, y: int) -> float:
        """Standard error of an empirical mass, with add-one smoothing so it never vanishes."""
        if self.kind != "empirical":
            return 0.0
        smoothed = (self.counts.get(y, 0) + 1) / (self.trials + 2)
        return math.sqrt(smoothed * (1 - smoothed) / self.trials)

    def band(self, y: int) -> Optional[tuple]:
        if self.kind != "empirical":
            return None
        pr, se = float(self.prob(y)), self.stderr(y)
        return max(0.0, pr - SIGMAS * se), min(1.0, pr + SIGMAS * se)

    def tv_distance(self, other: "OverlapLaw") -> float:
        keys = set(self.probs) | set(other.probs)
        return 0.5 * sum(abs(float(self.prob(y)) - float(other.prob(y))) for y in keys)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "trials": self.trials,
            "probs": {
                str(y): (f"{pr.numerator}/{pr.denominator}" if isinstance(pr, Fraction) else pr)
                for y, pr in sorted(self.probs.items())
            },
        }


# --------------------------------------------------------------------------
# overlap laws


def pair_overlap_law(inst: Instance) -> OverlapLaw:
    """Exact law of ``|e & e'|`` over ordered pairs drawn with replacement."""
    if inst.d > PAIR_LIMIT:
        raise TooLarge(f"pair enumeration needs d <= {PAIR_LIMIT}, got {inst.d}")
    edges = inst.edge_array()
    counts = np.zeros(inst.k + 1, dtype=np.int64)
    for e in edges:
        counts += np.bincount(np.bitwise_count(edges & e), minlength=inst.k + 1)
    total = inst.d * inst.d
    return OverlapLaw({y: Fraction(int(c), total) for y, c in enumerate(counts) if c})


def exact_sum_overlap_law(inst: Instance, s: int) -> OverlapLaw:
    """Exact law of ``sum_j Y_j`` by enumerating all ``d**s`` draws."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if inst.d**s > EXACT_SUM_LIMIT:
        raise TooLarge(f"d**s = {inst.d ** s} draws exceed {EXACT_SUM_LIMIT}")
    idx = np.array(list(itertools.product(range(inst.d), repeat=s)), dtype=np.int64)
    idx = idx.reshape(-1, s)
    _, ys = trace_unions(inst.edge_array(), idx)
    values, counts = np.unique(ys.sum(axis=1), return_counts=True)
    total = inst.d**s
    return OverlapLaw({int(v): Fraction(int(c), total) for v, c in zip(values, counts)})


def sum_overlap_law(inst: Instance, s: int, trials: int, seed: int = 0) -> OverlapLaw:
    """Empirical law of ``sum_j Y_j`` from ``trials`` independent unions."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, inst.d, size=(trials, s))
    _, ys = trace_unions(inst.edge_array(), idx)
    values, counts = np.unique(ys.sum(axis=1), return_counts=True)
    return OverlapLaw.empirical({int(v): int(c) for v, c in zip(values, counts)}, trials)


def _index_range(lo: int, hi: int, law: OverlapLaw) -> tuple:
    """Indices to evaluate explicitly and the count of skipped zero-mass ones."""
    if hi - lo + 1 <= EXPLICIT_POINTS or law.kind == "empirical":
        return list(range(lo, hi + 1)), 0
    keep = [y for y in law.support if lo <= y <= hi]
    return keep, (hi - lo + 1) - len(keep)


def _law_point(name: str, law: OverlapLaw, y: int, coef: LogReal, rhs: LogReal):
    pr = law.prob(y)
    band = law.band(y)
    lhs_band = None if band is None else (coef * band[0], coef * band[1])
    return point(name, LogReal.of(pr) * coef, rhs, index=y, lhs_band=lhs_band)


def _log_r(inst_or_r) -> float:
    r = inst_or_r.r if isinstance(inst_or_r, Instance) else Fraction(inst_or_r)
    return math.log(r.numerator) - math.log(r.denominator)


# --------------------------------------------------------------------------
# pair-overlap condition and the explicit cover


def check_thm_two(
    inst: Instance, law: OverlapLaw, L: float, *, r=None, d=None, k=None
) -> ConditionReport:
    """``P(Y_2 = y) r^(2 - y/k) d^(y/k) <= L^k`` for ``y = 1 .. k-1``.

    ``r``, ``d`` and ``k`` default to the instance's; they can be passed
    with ``inst=None`` for instances that are never materialized.
    """
    r = Fraction(r) if r is not None else inst.r
    d = d if d is not None else inst.d
    k = k if k is not None else inst.k
    log_r = math.log(r.numerator) - math.log(r.denominator)
    log_d = math.log(d)
    rhs = LogReal(1, k * math.log(L))
    report = ConditionReport(
        "P(Y2=y) r^(2-y/k) d^(y/k) <= L^k",
        params={"L": L, "r": str(r), "d": d, "k": k, "law": law.kind},
    )
    if inst is not None:
        report.warnings.extend(inst.assumption_warnings(L))
    if L < 2 * math.e:
        report.warnings.append(f"L >= 2e fails (L={L})")
    ys, skipped = _index_range(1, k - 1, law)
    for y in ys:
        coef = LogReal(1, (2 - y / k) * log_r + (y / k) * log_d)
        report.points.append(_law_point("pair overlap", law, y, coef, rhs))
    if skipped:
        report.notes.append(f"{skipped} overlap values carry zero mass and pass trivially")
    return report


def build_explicit_cover(inst: Instance) -> tuple:
    """``G0`` (unions of two distinct intersecting edges) and ``G1`` (unions of
    ``r`` pairwise disjoint edges)."""
    if inst.r.denominator != 1:
        raise ValueError(f"the explicit cover needs an integer r, got {inst.r}")
    r = int(inst.r)
    g0 = intersecting_unions(inst.edges)
    if math.comb(inst.d, r) > G1_LIMIT:
        raise TooLarge(f"C(d, r) = C({inst.d}, {r}) exceeds {G1_LIMIT}; G1 is bounded analytically only")
    return g0, SubsetFamily(tuple(_disjoint_unions(inst.edges, r)))


def intersecting_unions(edges: tuple) -> SubsetFamily:
    # distinct k-sets never overlap in all k elements
    return SubsetFamily(tuple(a | b for i, a in enumerate(edges) for b in edges[i + 1:] if a & b))


def _disjoint_unions(edges: tuple, r: int):
    def extend(start: int, used: int, left: int):
        if left == 0:
            yield used
            return
        for i in range(start, len(edges) - left + 1):
            e = edges[i]
            if e & used == 0:
                yield from extend(i + 1, used | e, left - 1)

    yield from extend(0, 0, r)


@dataclass
class CoverWeights:
    w0: Union[LogReal, Fraction]
    w1: Union[LogReal, Fraction]
    g0_mode: str
    g1_mode: str
    exact: bool = False

    @property
    def total(self):
        return self.w0 + self.w1

    @property
    def w0_ok(self) -> bool:
        return self.w0 <= Fraction(1, 2)

    @property
    def w1_ok(self) -> bool:
        return self.w1 <= Fraction(1, 2)

    def to_json(self) -> dict:
        def enc(x):
            if isinstance(x, Fraction):
                return {"fraction": f"{x.numerator}/{x.denominator}", "decimal": float(x)}
            return x.to_json()

        return {
            "w0": enc(self.w0),
            "w1": enc(self.w1),
            "total": enc(self.total),
            "w0_ok": self.w0_ok,
            "w1_ok": self.w1_ok,
            "g0_mode": self.g0_mode,
            "g1_mode": self.g1_mode,
            "exact": self.exact,
        }


def g0_weight_bound(inst: Instance, law: OverlapLaw, L: float) -> LogReal:
    """``sum_{y=1}^{k-1} P(Y2=y) d^2 (p/L)^(2k-y)``."""
    log_q = math.log(solve_p(inst)) - math.log(L)
    return log_sum(
        LogReal.of(law.prob(y)) * LogReal(1, 2 * math.log(inst.d) + (2 * inst.k - y) * log_q)
        for y in range(1, inst.k)
    )


def g1_weight_bound(d: int, r: Number, k: int, L: float) -> LogReal:
    """``(e d / r)^r / L^(r k)``, the bound on the disjoint-union family."""
    r = Fraction(r)
    log_r = math.log(r.numerator) - math.log(r.denominator)
    rf = float(r)
    return LogReal(1, rf * (1 + math.log(d) - log_r) - rf * k * math.log(L))


def explicit_cover_weights(inst: Instance, L: float, exact: bool = False) -> CoverWeights:
    """Weights of ``G0`` and ``G1`` at ``p/L``.

    Families are materialized when small enough, otherwise the analytic
    bounds are used.  With ``exact=True`` the weights are Fractions computed
    at a rational ``q >= p/L`` (``p`` rounded up with ``P**k >= r/d`` checked
    exactly, ``L`` taken as the exact binary value of the float), so they are
    certified upper bounds on the true weights.
    """
    if exact:
        q = p_upper_rational(inst) / Fraction(L)
    else:
        q = solve_p(inst) / L
    try:
        g0, g1 = build_explicit_cover(inst)
    except TooLarge:
        if exact:
            raise
        g0, g1 = intersecting_unions(inst.edges), None
    w0 = weight_family(g0, q, exact=exact)
    if g1 is not None:
        return CoverWeights(w0, weight_family(g1, q, exact=exact), "materialized", "materialized", exact)
    bound = g1_weight_bound(inst.d, inst.r, inst.k, L)
    return CoverWeights(w0, bound, "materialized", "analytic", exact)


# --------------------------------------------------------------------------
# overlap-sum condition


def check_thm_one(
    inst: Instance,
    law: OverlapLaw,
    s: int,
    L: float,
    t: Optional[int] = None,
) -> ConditionReport:
    """``P(sum Y = m) (d e^k / r)^(m/k) <= (L / 2e)^((s-1)k - m)`` for ``m = 1 .. (s-1)k``.

    ``m = 0`` is reported as an informational point.
    """
    k, d = inst.k, inst.d
    log_base = math.log(d) + k - _log_r(inst)
    log_ratio = math.log(L) - math.log(2 * math.e)
    top = (s - 1) * k
    report = ConditionReport(
        "P(sum Y = m) (d e^k/r)^(m/k) <= (L/2e)^((s-1)k-m)",
        warnings=inst.assumption_warnings(L),
        params={"s": s, "L": L, "t": t, "law": law.kind, "trials": law.trials},
    )
    if s * k < math.log(inst.n):
        report.warnings.append(f"s k >= ln n fails (s k={s * k}, ln n={math.log(inst.n):.4f})")
    if L < 2 * math.e:
        report.warnings.append(f"L >= 2e fails (L={L})")
    if t is not None:
        target = math.exp(-s * k * math.log(solve_p(inst)) + math.log(inst.n))
        if t < target:
            report.warnings.append(f"t >= p^(-sk) n fails (t={t}, p^(-sk) n={target:.6g})")
    zero = _law_point("overlap sum", law, 0, LogReal.one(), LogReal(1, top * log_ratio))
    zero.informational = True
    report.points.append(zero)
    ms, skipped = _index_range(1, top, law)
    for m in ms:
        coef = LogReal(1, (m / k) * log_base)
        rhs = LogReal(1, (top - m) * log_ratio)
        report.points.append(_law_point("overlap sum", law, m, coef, rhs))
    if skipped:
        report.notes.append(f"{skipped} overlap sums carry zero mass and pass trivially")
    return report


TailFn = Callable[[int], Union[Number, LogReal]]


def check_thm_one_pointwise(tail: TailFn, inst: Optional[Instance], L: float, *, r=None, d=None, k=None) -> ConditionReport:
    """``tail(y) (d 2^k e^k / r)^(y/k) <= (L / 4e)^(k - y)`` for ``y = 1 .. k``.

    ``tail(y)`` must bound ``P(Y_s >= y | Y_1, ..., Y_{s-1})`` uniformly over
    histories.
    """
    r = Fraction(r) if r is not None else inst.r
    d = d if d is not None else inst.d
    k = k if k is not None else inst.k
    log_d = math.log(d)
    log_base = log_d + k * math.log(2 * math.e) - (math.log(r.numerator) - math.log(r.denominator))
    log_ratio = math.log(L) - math.log(4 * math.e)
    report = ConditionReport(
        "P(Y_s >= y | history) (d 2^k e^k/r)^(y/k) <= (L/4e)^(k-y)",
        params={"L": L, "r": str(r), "d": d, "k": k},
    )
    if inst is not None:
        report.warnings.extend(inst.assumption_warnings(L))
    if L < 4 * math.e:
        report.warnings.append(f"L >= 4e fails (L={L})")
    if k > EXPLICIT_POINTS:
        raise TooLarge(f"pointwise check over k={k} values is not supported")
    for y in range(1, k + 1):
        lhs = LogReal.of(tail(y)) * LogReal(1, (y / k) * log_base)
        report.points.append(point("conditional tail", lhs, LogReal(1, (k - y) * log_ratio), index=y))
    return report
