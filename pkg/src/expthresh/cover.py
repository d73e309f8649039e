"""Random covers built from unions of uniformly drawn edges.

A cover ``G`` consists of ``t`` unions, each of ``s`` edges drawn uniformly
with replacement.  For each union we keep the overlap trace
``Y_j = |e_j & (e_1 | ... | e_{j-1})|``, so ``|union| = s*k - sum(Y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    Instance,
    SubsetFamily,
    TooLarge,
    UpsetSummary,
    minimal_elements,
    solve_p,
)
from .numerics import LogReal, log_binomial, log_sum
from .report import ConditionReport, point

# Largest number of unions ever materialized for a single cover.
T_CAP = 10**6
# Elements per vectorized block when sampling many covers at once.
_BLOCK = 1 << 22


@dataclass(frozen=True)
class CoverParams:
    s: int
    t: int
    L: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")
        if not self.L > 1:
            raise ValueError(f"L must exceed 1, got {self.L}")

    @classmethod
    def default(cls, inst: Instance, L: float, seed: int = 0) -> "CoverParams":
        """``s = ceil(ln n / k)`` and ``t = ceil(p^(-s k) n)``."""
        s = max(1, math.ceil(math.log(inst.n) / inst.k))
        return cls(s, default_t(inst, s), L, seed)

    def to_json(self) -> dict:
        return {"s": self.s, "t": self.t, "L": self.L, "seed": self.seed}


def default_t(inst: Instance, s: int) -> int:
    p = solve_p(inst)
    return math.ceil(math.exp(-s * inst.k * math.log(p) + math.log(inst.n)))


@dataclass(frozen=True)
class CoverSample:
    unions: SubsetFamily
    union_list: tuple
    y_traces: tuple
    sizes: tuple
    draws: tuple = field(repr=False, default=())


def trace_unions(edges: np.ndarray, idx: np.ndarray) -> tuple:
    """Unions and overlap traces for index blocks of shape ``(..., s)``."""
    picked = edges[idx]
    running = np.zeros(idx.shape[:-1], dtype=np.uint64)
    ys = np.empty(idx.shape, dtype=np.int64)
    for j in range(idx.shape[-1]):
        ys[..., j] = np.bitwise_count(picked[..., j] & running)
        running |= picked[..., j]
    return running, ys


def sample_cover(
    inst: Instance, params: CoverParams, rng: Optional[np.random.Generator] = None
) -> CoverSample:
    """Draw one random cover; deterministic in ``params.seed`` when ``rng`` is None."""
    if params.t > T_CAP:
        raise TooLarge(f"t={params.t} unions exceed the materialization cap {T_CAP}")
    if rng is None:
        rng = np.random.default_rng(params.seed)
    idx = rng.integers(0, inst.d, size=(params.t, params.s))
    unions, ys = trace_unions(inst.edge_array(), idx)
    sizes = np.bitwise_count(unions).astype(np.int64)
    expected = params.s * inst.k - ys.sum(axis=1)
    if not np.array_equal(sizes, expected):
        raise AssertionError("union sizes disagree with their overlap traces")
    union_list = tuple(int(u) for u in unions)
    return CoverSample(
        unions=SubsetFamily(union_list),
        union_list=union_list,
        y_traces=tuple(tuple(int(y) for y in row) for row in ys),
        sizes=tuple(int(x) for x in sizes),
        draws=tuple(tuple(int(i) for i in row) for row in idx),
    )


# --------------------------------------------------------------------------
# coverage


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple:
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class CoverageReport:
    params: CoverParams
    trials: int
    successes: Optional[int]
    m: int
    analytic_bound: float
    analytic_bound_exp: float
    materialized: bool = True
    warnings: list = field(default_factory=list)

    @property
    def estimate(self) -> Optional[float]:
        if self.successes is None or self.trials == 0:
            return None
        return self.successes / self.trials

    @property
    def wilson(self) -> Optional[tuple]:
        if self.successes is None:
            return None
        return wilson_interval(self.successes, self.trials)

    @property
    def wilson_se(self) -> Optional[float]:
        """Standard error implied by the 95% Wilson interval (half-width / 1.96)."""
        if self.successes is None:
            return None
        lo, hi = self.wilson
        return (hi - lo) / (2 * 1.96)

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "trials": self.trials,
            "successes": self.successes,
            "estimate": self.estimate,
            "wilson95": list(self.wilson) if self.wilson else None,
            "wilson_se": self.wilson_se,
            "m": self.m,
            "analytic_bound": self.analytic_bound,
            "analytic_bound_exp": self.analytic_bound_exp,
            "materialized": self.materialized,
            "warnings": list(self.warnings),
        }


def _lower_bounds(p: float, s: int, k: int, t: int, m: int) -> tuple:
    """``1 - m (1 - p^(sk))^t`` and the weaker ``1 - exp(ln m - p^(sk) t)``."""
    psk = p ** (s * k)
    if psk >= 1:
        tight = 1.0 if t > 0 else 1.0 - m
    else:
        tight = 1.0 - m * math.exp(t * math.log1p(-psk))
    loose = 1.0 - math.exp(math.log(m) - psk * t) if m > 0 else 1.0
    return tight, loose


def _covered_rows(unions: np.ndarray, minimal: np.ndarray) -> np.ndarray:
    """For each row of unions, whether every minimal set contains one of them."""
    ok = np.ones(unions.shape[0], dtype=bool)
    for S in minimal:
        ok &= ((unions & ~S) == 0).any(axis=1)
    return ok


def _sample_covers(inst: Instance, params: CoverParams, trials: int, rng: np.random.Generator):
    """Yield blocks of ``(rows, t)`` union arrays, one row per trial."""
    edges = inst.edge_array()
    per_trial = max(1, params.t * params.s)
    rows = max(1, _BLOCK // per_trial)
    done = 0
    while done < trials:
        count = min(rows, trials - done)
        idx = rng.integers(0, inst.d, size=(count, params.t, params.s))
        unions, _ = trace_unions(edges, idx)
        yield unions
        done += count


def coverage_probability(
    inst: Instance,
    params: CoverParams,
    trials: int,
    summary: Optional[UpsetSummary] = None,
) -> CoverageReport:
    """Monte Carlo estimate of ``P(cover)`` next to the union-bound guarantee."""
    if summary is None:
        summary = minimal_elements(inst)
    p = solve_p(inst)
    m = summary.m
    tight, loose = _lower_bounds(p, params.s, inst.k, params.t, m)
    warnings = inst.assumption_warnings(params.L)
    if params.t == 0:
        return CoverageReport(params, trials, 0, m, tight, loose, warnings=warnings)
    if params.t > T_CAP:
        warnings.append(f"t={params.t} exceeds {T_CAP}; coverage reported analytically only")
        return CoverageReport(params, trials, None, m, tight, loose, materialized=False, warnings=warnings)
    rng = np.random.default_rng(params.seed)
    minimal = np.array(summary.minimal.sets, dtype=np.uint64)
    successes = 0
    for block in _sample_covers(inst, params, trials, rng):
        successes += int(_covered_rows(block, minimal).sum())
    return CoverageReport(params, trials, successes, m, tight, loose, warnings=warnings)


# --------------------------------------------------------------------------
# expected weight


@dataclass
class WeightReport:
    params: CoverParams
    trials: int
    estimate: LogReal
    stderr: LogReal
    exact: bool
    size_counts: dict = field(default_factory=dict)
    transfer_bound: Optional[LogReal] = None
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "trials": self.trials,
            "estimate": self.estimate.to_json(),
            "stderr": self.stderr.to_json(),
            "exact": self.exact,
            "size_counts": {str(k): v for k, v in sorted(self.size_counts.items())},
            "transfer_bound": None if self.transfer_bound is None else self.transfer_bound.to_json(),
            "warnings": list(self.warnings),
        }


def _mean_power(sizes: dict, total: int, log_q: float) -> tuple:
    """Sample mean and standard error of ``q^size`` from a size histogram."""
    base = min(sizes)
    scaled = {c: math.exp((c - base) * log_q) for c in sizes}
    mean = sum(n * scaled[c] for c, n in sizes.items()) / total
    second = sum(n * scaled[c] ** 2 for c, n in sizes.items()) / total
    var = max(0.0, second - mean * mean) * total / max(1, total - 1)
    scale = LogReal(1, base * log_q)
    return scale * mean, scale * math.sqrt(var / total)


def expected_cover_weight(
    inst: Instance,
    params: CoverParams,
    trials: int,
    coverage: Optional[float] = None,
) -> WeightReport:
    """Estimate ``E[w(G, p/L)] = t * E[(p/L)^|e_1|]``.

    ``t`` only enters as a factor, so it is never materialized here.  When a
    coverage probability is supplied, ``E[w] / P(cover)`` is reported as the
    bound on the conditional expectation given coverage.
    """
    p = solve_p(inst)
    log_q = math.log(p) - math.log(params.L)
    warnings = inst.assumption_warnings(params.L)
    if params.s == 1:
        per_union = LogReal(1, inst.k * log_q)
        est = per_union * params.t
        report = WeightReport(params, 0, est, LogReal.zero(), True, {inst.k: 1}, warnings=warnings)
    else:
        rng = np.random.default_rng(params.seed)
        idx = rng.integers(0, inst.d, size=(trials, params.s))
        _, ys = trace_unions(inst.edge_array(), idx)
        sizes = params.s * inst.k - ys.sum(axis=1)
        values, counts = np.unique(sizes, return_counts=True)
        hist = {int(v): int(c) for v, c in zip(values, counts)}
        mean, se = _mean_power(hist, trials, log_q)
        report = WeightReport(params, trials, mean * params.t, se * params.t, False, hist, warnings=warnings)
    if coverage is not None:
        if coverage <= 0:
            raise ValueError("coverage probability must be positive for the transfer bound")
        report.transfer_bound = report.estimate / coverage
    return report


def exact_cover_weight(inst: Instance, params: CoverParams, sum_law) -> LogReal:
    """``t * sum_m P(sum Y = m) (p/L)^(sk - m)`` from an overlap-sum law."""
    p = solve_p(inst)
    log_q = math.log(p) - math.log(params.L)
    sk = params.s * inst.k
    terms = (
        LogReal.of(sum_law.prob(m)) * LogReal(1, (sk - m) * log_q) for m in sum_law.support
    )
    return log_sum(terms) * params.t


@dataclass
class TransferReport:
    """Empirical check of ``E[w | cover] <= E[w] / P(cover)``."""

    trials: int
    covered: int
    mean_weight: float
    conditional_mean: Optional[float]
    conditional_se: float
    bound: Optional[float]

    @property
    def holds(self) -> bool:
        if self.conditional_mean is None:
            return True
        return self.conditional_mean <= self.bound + 3 * self.conditional_se

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "covered": self.covered,
            "mean_weight": self.mean_weight,
            "conditional_mean": self.conditional_mean,
            "conditional_se": self.conditional_se,
            "bound": self.bound,
            "holds": self.holds,
        }


def conditional_weight_experiment(
    inst: Instance,
    params: CoverParams,
    trials: int,
    summary: Optional[UpsetSummary] = None,
) -> TransferReport:
    """Sample whole covers and compare the weight conditioned on coverage.

    Weights use the deduplicated family, as ``G`` is a set.  Values are
    plain floats, adequate while ``(p/L)^n`` stays within double range.
    """
    if params.t > T_CAP:
        raise TooLarge(f"t={params.t} unions exceed the materialization cap {T_CAP}")
    if summary is None:
        summary = minimal_elements(inst)
    q = solve_p(inst) / params.L
    minimal = np.array(summary.minimal.sets, dtype=np.uint64)
    rng = np.random.default_rng(params.seed)
    weights, flags = [], []
    for block in _sample_covers(inst, params, trials, rng):
        ordered = np.sort(block, axis=1)
        fresh = np.ones(ordered.shape, dtype=bool)
        fresh[:, 1:] = ordered[:, 1:] != ordered[:, :-1]
        w = (fresh * q ** np.bitwise_count(ordered).astype(np.float64)).sum(axis=1)
        weights.append(w)
        flags.append(_covered_rows(block, minimal))
    w = np.concatenate(weights) if weights else np.zeros(0)
    ok = np.concatenate(flags) if flags else np.zeros(0, dtype=bool)
    covered = int(ok.sum())
    mean_w = float(w.mean()) if trials else 0.0
    if covered == 0:
        return TransferReport(trials, 0, mean_w, None, 0.0, None)
    cond = w[ok]
    se = float(cond.std(ddof=1) / math.sqrt(covered)) if covered > 1 else 0.0
    return TransferReport(trials, covered, mean_w, float(cond.mean()), se, mean_w / (covered / trials))


# --------------------------------------------------------------------------
# single-edge covers


def s1_construction(
    inst: Instance,
    c: float,
    L: float,
    m_mode: str = "exact",
    seed: int = 0,
) -> tuple:
    """Covers made of single edges (``s = 1``) and their weight chain.

    ``m_mode`` is ``"exact"`` (enumerate minimal elements, ``n <= 24``) or
    ``"bound"`` (use ``m <= C(d, ceil r)``).  Returns the report and a cover
    sample, the latter ``None`` if ``t`` is beyond the materialization cap.
    """
    if not c > 1:
        raise ValueError(f"c must exceed 1, got {c}")
    p = solve_p(inst)
    k, n, r = inst.k, inst.n, inst.r
    log_r = math.log(r.numerator) - math.log(r.denominator)
    notes = []
    if m_mode == "exact":
        m = minimal_elements(inst).m
        log_m = math.log(m)
        notes.append(f"m={m} from exhaustive enumeration")
    elif m_mode == "bound":
        m = None
        log_m = log_binomial(inst.d, math.ceil(r)).ln()
        notes.append(f"m bounded by C(d, ceil r) = exp({log_m:.6g})")
    else:
        raise ValueError(f"unknown m_mode {m_mode!r}")

    log_2m = math.log(2) + log_m
    log_c = math.log(c)
    ln_n = math.log(n)
    t_real = math.exp(-k * math.log(p)) * log_2m
    t = math.ceil(t_real)

    report = ConditionReport(
        "single-edge cover: t = p^-k ln(2m)",
        warnings=inst.assumption_warnings(L),
        params={"c": c, "L": L, "s": 1, "t": t, "m": m, "m_mode": m_mode},
        notes=notes,
    )
    hyp_lhs = LogReal.of(log_r / log_c) + LogReal.of(math.log(ln_n) / log_c) if ln_n > 0 else None
    if hyp_lhs is None:
        report.points.append(point("k >= log_c r + log_c ln n", 0, k, note="ln n = 0"))
    else:
        report.points.append(point("k >= log_c r + log_c ln n", hyp_lhs, k))
    report.points.append(point("L >= 2c", 2 * c, L))
    chain_a = LogReal(1, math.log(log_2m) - k * math.log(L))
    chain_b = (LogReal.of(k) * LogReal.of(r) * LogReal.of(ln_n)) / LogReal(1, k * math.log(2 * c))
    report.points.append(point("p^-k ln(2m) (p/L)^k <= k r ln n / (2c)^k", chain_a, chain_b))
    report.points.append(point("k r ln n / (2c)^k <= 1/2", chain_b, 0.5))
    materialized_weight = LogReal.of(t) * LogReal(1, k * (math.log(p) - math.log(L)))
    report.points.append(
        point(
            "E[w(G, p/L)] at integer t <= 1/2",
            materialized_weight,
            0.5,
            informational=True,
            note="uses ceil(t); rounding may push it past the unrounded chain",
        )
    )

    sample = None
    if t <= T_CAP:
        sample = sample_cover(inst, CoverParams(1, t, L, seed))
    else:
        report.notes.append(f"t={t} exceeds {T_CAP}; cover not materialized")
    return report, sample
