"""Clique hypergraphs: ground set = l-subsets of [nt], edges = all l-subsets of a kt-set.

Naming: ``nt``, ``kt`` and ``l`` are the vertex count, clique order and base
uniformity.  The derived hypergraph has ``n = C(nt, l)`` elements, edges of
size ``k = C(kt, l)`` and ``d = C(nt, kt)`` edges.

l-subsets are indexed in colex order: ``{c_1 < ... < c_l}`` gets index
``sum_i C(c_i, i)``.  Instance files built here are therefore reproducible.

The vertex overlap ``Yt_j = |T_j & (T_1 | ... | T_{j-1})|`` depends on the
past only through the union size, and given that size it is hypergeometric.
Edge overlaps are dominated by it: ``Y_j <= C(Yt_j, l)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .conditions import OverlapLaw
from .core import MAX_GROUND, Instance, TooLarge, mask_of
from .numerics import LogReal, Number, hypergeom, log_binomial, log_number
from .report import ConditionReport, log_margin, point, LOG_TOL

FOUR_E = 4 * math.e
TWO_E = 2 * math.e


@dataclass(frozen=True)
class CliqueParams:
    nt: int
    kt: int
    l: int

    def __post_init__(self) -> None:
        if not self.nt > self.kt > self.l >= 2:
            raise ValueError(f"need nt > kt > l >= 2, got ({self.nt}, {self.kt}, {self.l})")

    @property
    def n(self) -> int:
        return math.comb(self.nt, self.l)

    @property
    def k(self) -> int:
        return math.comb(self.kt, self.l)

    @property
    def d(self) -> int:
        return math.comb(self.nt, self.kt)

    @property
    def log_n(self) -> float:
        return log_binomial(self.nt, self.l).ln()

    @property
    def log_d(self) -> float:
        return log_binomial(self.nt, self.kt).ln()

    def warnings(self) -> list:
        out = []
        if self.k > self.log_n:
            out.append(f"C(kt, l) <= ln C(nt, l) fails (k={self.k}, ln n={self.log_n:.4f})")
        return out

    def to_json(self) -> dict:
        return {"nt": self.nt, "kt": self.kt, "l": self.l}


def colex_rank(subset) -> int:
    return sum(math.comb(c, i + 1) for i, c in enumerate(sorted(subset)))


def colex_subsets(size: int, universe: int) -> list:
    """All ``size``-subsets of ``range(universe)`` in colex order."""
    return sorted(itertools.combinations(range(universe), size), key=lambda c: c[::-1])


def build_clique_instance(params: CliqueParams, r) -> Instance:
    """Materialize the clique hypergraph; edges follow the colex order of their vertex sets."""
    if params.n > MAX_GROUND:
        raise TooLarge(
            f"C({params.nt}, {params.l}) = {params.n} elements exceed {MAX_GROUND}; "
            "use the analytic checkers on CliqueParams instead"
        )
    edges = []
    for T in colex_subsets(params.kt, params.nt):
        edges.append(mask_of(colex_rank(A) for A in itertools.combinations(T, params.l)))
    labels = tuple(colex_subsets(params.l, params.nt))
    return Instance(params.n, params.k, tuple(edges), Fraction(r), labels=labels)


def ytilde_map(y: int, l: int) -> int:
    """Smallest ``yt`` with ``C(yt, l) >= y``; 0 for ``y = 0``."""
    if y < 0:
        raise ValueError(f"y must be >= 0, got {y}")
    if y == 0:
        return 0
    yt = l
    while math.comb(yt, l) < y:
        yt += 1
    return yt


def exact_pair_law_cliques(params: CliqueParams) -> OverlapLaw:
    """Law of the edge overlap of two uniform cliques: ``Y_2 = C(Yt_2, l)``."""
    law = hypergeom(params.nt, params.kt, params.kt)
    probs: dict = {}
    for yt, pr in law.pmf.items():
        if pr:
            y = math.comb(yt, params.l)
            probs[y] = probs.get(y, Fraction(0)) + pr
    return OverlapLaw(dict(sorted(probs.items())))


@dataclass
class VertexChain:
    """Exact laws along the vertex-union chain.

    ``union_laws[j]`` is the law of ``|T_1 | ... | T_{j+1}|`` and
    ``overlap_laws[j]`` that of ``Yt_{j+1}``.
    """

    params: CliqueParams
    union_laws: list
    overlap_laws: list

    def to_json(self) -> dict:
        def enc(law):
            return {str(v): f"{p.numerator}/{p.denominator}" for v, p in sorted(law.items())}

        return {
            "params": self.params.to_json(),
            "steps": [
                {"j": j + 1, "union_size": enc(u), "vertex_overlap": enc(o)}
                for j, (u, o) in enumerate(zip(self.union_laws, self.overlap_laws))
            ],
        }


def vertex_union_chain(params: CliqueParams, s: int) -> VertexChain:
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    nt, kt = params.nt, params.kt
    union = {kt: Fraction(1)}
    unions, overlaps = [dict(union)], [{0: Fraction(1)}]
    for _ in range(1, s):
        nxt: dict = {}
        ov: dict = {}
        for mt, pm in union.items():
            for yt, py in hypergeom(nt, mt, kt).pmf.items():
                if not py:
                    continue
                w = pm * py
                ov[yt] = ov.get(yt, Fraction(0)) + w
                nxt[mt + kt - yt] = nxt.get(mt + kt - yt, Fraction(0)) + w
        union = nxt
        unions.append(dict(sorted(nxt.items())))
        overlaps.append(dict(sorted(ov.items())))
    return VertexChain(params, unions, overlaps)


@dataclass
class TailCheck:
    exact: Fraction
    bound: LogReal

    @property
    def passed(self) -> bool:
        return log_margin(LogReal.of(self.exact), self.bound) >= -LOG_TOL


def tail_bound(nt: int, mt: int, kt: int, yt: int) -> LogReal:
    """``(mt/nt)^yt (e kt / yt)^yt``, the tail bound for vertex overlaps."""
    if yt == 0:
        return LogReal.one()
    if mt == 0:
        return LogReal.zero()
    return LogReal(1, yt * (math.log(mt) - math.log(nt) + 1 + math.log(kt) - math.log(yt)))


def tail_bound_check(nt: int, mt: int, kt: int, yt: int) -> TailCheck:
    """Exact ``P(Yt >= yt)`` with ``mt`` marked vertices against the closed-form bound."""
    if not 0 <= mt <= nt:
        raise ValueError(f"need 0 <= mt <= nt, got mt={mt}, nt={nt}")
    return TailCheck(hypergeom(nt, mt, kt).tail(yt), tail_bound(nt, mt, kt, yt))


@dataclass
class FTable:
    kt: int
    l: int
    values: dict

    @property
    def f_low_ok(self) -> bool:
        return self.values[self.l] >= self.l - 1

    @property
    def f_top_ok(self) -> bool:
        return self.values[self.kt - 1] == self.l - 1

    @property
    def concave(self) -> bool:
        ys = sorted(self.values)
        f = [self.values[y] for y in ys]
        return all(f[i - 1] - 2 * f[i] + f[i + 1] <= 0 for i in range(1, len(f) - 1))

    @property
    def ok(self) -> bool:
        return self.f_low_ok and self.f_top_ok and self.concave


def f_analysis(kt: int, l: int) -> FTable:
    """``f(yt) = yt - kt C(yt, l) / C(kt, l)`` on ``[l, kt - 1]``, exactly."""
    if not kt > l >= 2:
        raise ValueError(f"need kt > l >= 2, got kt={kt}, l={l}")
    k = math.comb(kt, l)
    values = {yt: yt - Fraction(kt * math.comb(yt, l), k) for yt in range(l, kt)}
    return FTable(kt, l, values)


# --------------------------------------------------------------------------
# thresholds (natural logs)


def log_threshold_general(params: CliqueParams) -> float:
    """``ln(2^(3k) e^(3k) ln^(2kt) nt)``."""
    k = params.k
    return 3 * k * math.log(2) + 3 * k + 2 * params.kt * math.log(math.log(params.nt))


def log_threshold_succinct(params: CliqueParams) -> float:
    """``ln((ln(e nt / l))^l nt e^(3(l+1)))``."""
    l, nt = params.l, params.nt
    return l * math.log(math.log(math.e * nt / l)) + math.log(nt) + 3 * (l + 1)


def log_upper_bound_53(params: CliqueParams, L: float) -> float:
    """``ln sqrt(L^k nt^(l-1) / (e^(2kt) kt^(l-1)))``."""
    l, nt, kt = params.l, params.nt, params.kt
    return 0.5 * (params.k * math.log(L) + (l - 1) * math.log(nt) - 2 * kt - (l - 1) * math.log(kt))


def _log_r(r) -> float:
    if isinstance(r, LogReal):
        return r.ln()
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    return log_number(r)


def _regime_warnings(params: CliqueParams, log_r: float, L: float) -> list:
    out = params.warnings()
    if log_r < params.k * math.log(L) - LOG_TOL:
        out.append("r >= L^k fails")
    if log_r > params.log_d + LOG_TOL:
        out.append("r <= C(nt, kt) fails")
    return out


def regime_check_52(params: CliqueParams, r, L: float, case: str = "general") -> ConditionReport:
    """Lower-bound regimes on ``r`` under which the overlap-sum condition holds for cliques.

    ``case="general"`` needs ``l <= 4 ln nt``; ``case="succinct"`` needs
    ``kt = l + 1``.  Besides the hypotheses, the final inequalities of the
    supporting estimate are re-evaluated at the given parameters.
    """
    log_r = _log_r(r)
    nt, kt, l, k = params.nt, params.kt, params.l, params.k
    r_val = LogReal(1, log_r)
    report = ConditionReport(
        f"lower r-regime ({case})",
        warnings=_regime_warnings(params, log_r, L),
        params={**params.to_json(), "log_r": log_r, "L": L, "case": case},
    )
    if case == "general":
        log_t = log_threshold_general(params)
        report.points.append(point("l <= 4 ln nt", l, 4 * math.log(nt)))
        report.points.append(point("r >= 2^(3k) e^(3k) ln^(2kt)(nt)", LogReal(1, log_t), r_val))
        report.points.append(point("L >= 4e", FOUR_E, L))
        chain = 2 * kt + 2 * kt * math.log(math.log(nt)) + 3 * k * math.log(2) + k - log_r
        report.points.append(point("e^(2kt) ln^(2kt)(nt) 2^(3k) e^k / r <= 1", LogReal(1, chain), 1))
        # per overlap size: (4 e kt ln^2 nt / nt)^yt (d 2^k e^k / r)^(C(yt,l)/k) <= 1
        log_tail = math.log(4 * math.e * kt) + 2 * math.log(math.log(nt)) - math.log(nt)
        log_base = params.log_d + k * math.log(TWO_E) - log_r
        for yt in range(l, kt + 1):
            lhs = yt * log_tail + math.comb(yt, l) / k * log_base
            report.points.append(point("tail estimate", LogReal(1, lhs), 1, index=yt))
    elif case == "succinct":
        if kt != l + 1:
            raise ValueError(f"the succinct case needs kt = l + 1, got kt={kt}, l={l}")
        log_t = log_threshold_succinct(params)
        report.points.append(point("r >= ln^l(e nt/l) nt e^(3(l+1))", LogReal(1, log_t), r_val))
        report.points.append(point("L >= 4e", FOUR_E, L))
        chain = (
            l * math.log(l)
            + l * math.log(math.log(math.e * nt / l))
            + math.log(nt)
            + 2 * (l + 1)
            + (l + 1) * math.log(2)
            - l * math.log(l + 1)
            - log_r
        )
        report.points.append(
            point("l^l ln^l(e nt/l) nt e^(2(l+1)) 2^(l+1) / ((l+1)^l r) <= 1", LogReal(1, chain), 1)
        )
    else:
        raise ValueError(f"unknown case {case!r}")
    empty = max(log_t, k * math.log(L), 0.0) > params.log_d + LOG_TOL
    report.params["regime_empty"] = empty
    if empty:
        report.notes.append("regime empty: the lower bound on r exceeds C(nt, kt)")
    return report


def regime_check_53(params: CliqueParams, r, L: float) -> ConditionReport:
    """Upper-bound regime on ``r`` under which the pair-overlap condition holds for cliques."""
    log_r = _log_r(r)
    nt, kt, l, k = params.nt, params.kt, params.l, params.k
    log_b = log_upper_bound_53(params, L)
    report = ConditionReport(
        "upper r-regime",
        warnings=_regime_warnings(params, log_r, L),
        params={**params.to_json(), "log_r": log_r, "L": L, "log_bound": log_b},
    )
    report.points.append(
        point("r <= sqrt(L^k nt^(l-1) / (e^(2kt) kt^(l-1)))", LogReal(1, log_r), LogReal(1, log_b))
    )
    report.points.append(point("L >= 2e", TWO_E, L))
    chain = 2 * kt + 2 * log_r + (l - 1) * (math.log(kt) - math.log(nt))
    report.points.append(
        point("e^(2kt) r^2 (kt/nt)^(l-1) <= L^k", LogReal(1, chain), LogReal(1, k * math.log(L)))
    )
    return report


# --------------------------------------------------------------------------
# regime scan


@dataclass
class RegimeScan:
    params: CliqueParams
    L: float
    log_lo: float
    log_hi: float
    log_threshold: float
    log_upper: float
    case1: bool
    case2: bool
    upper_ok: bool
    rows: list = field(default_factory=list)
    comparison: Optional[ConditionReport] = None

    @property
    def vacuous(self) -> bool:
        return self.log_lo > self.log_hi

    @property
    def regimes_meet(self) -> bool:
        """No value of r falls strictly between the two regimes."""
        return self.log_threshold <= self.log_upper + LOG_TOL

    @property
    def gap(self) -> Optional[tuple]:
        """Uncovered log-r interval inside ``[max(1, L^k), d]``, if any."""
        lo = max(self.log_upper, self.log_lo)
        hi = min(self.log_threshold, self.log_hi)
        if self.vacuous or lo >= hi - LOG_TOL:
            return None
        return lo, hi

    @property
    def covered(self) -> bool:
        return self.gap is None

    def summary(self) -> dict:
        def fin(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")

        return {
            **self.params.to_json(),
            "L": self.L,
            "log_r_min": fin(self.log_lo),
            "log_r_max": fin(self.log_hi),
            "log_lower_regime": fin(self.log_threshold),
            "log_upper_regime": fin(self.log_upper),
            "case1_applies": self.case1,
            "case2_applies": self.case2,
            "upper_applies": self.upper_ok,
            "vacuous": self.vacuous,
            "regimes_meet": self.regimes_meet,
            "covered": self.covered,
            "gap": None if self.gap is None else [fin(g) for g in self.gap],
        }


def regime_comparison(params: CliqueParams, L: float) -> ConditionReport:
    """The squared comparisons of the lower and upper regimes, one per branch."""
    nt, kt, l, k = params.nt, params.kt, params.l, params.k
    lnln = math.log(math.log(nt))
    report = ConditionReport("regime comparison", params={**params.to_json(), "L": L})
    general = (
        6 * k * math.log(2) + 6 * k + 2 * kt - k * math.log(L)
        + 4 * kt * lnln + (l - 1) * (math.log(kt) - math.log(nt))
    )
    report.points.append(
        point(
            "2^(6k) e^(6k) e^(2kt) / L^k * ln^(4kt)(nt) kt^(l-1) / nt^(l-1) <= 1",
            LogReal(1, general),
            1,
            informational=l > 4 * math.log(nt),
        )
    )
    if kt == l + 1:
        succinct = (
            2 * l * math.log(math.log(math.e * nt / l)) + 8 * (l + 1) + (l - 1) * math.log(l + 1)
            - (l + 1) * math.log(L) - (l - 3) * math.log(nt)
        )
        report.points.append(
            point(
                "ln^(2l)(e nt/l) e^(8(l+1)) (l+1)^(l-1) / (L^(l+1) nt^(l-3)) <= 1",
                LogReal(1, succinct),
                1,
            )
        )
    else:
        report.notes.append("kt != l + 1: succinct branch not applicable")
    return report


def regime_coverage_scan(params: CliqueParams, L: float, points: int = 33) -> RegimeScan:
    """Which of the two regimes each ``r`` in ``[max(1, L^k), C(nt, kt)]`` falls into."""
    nt, kt, l, k = params.nt, params.kt, params.l, params.k
    case1 = l <= 4 * math.log(nt) and L >= FOUR_E
    case2 = kt == l + 1 and L >= FOUR_E
    upper_ok = L >= TWO_E
    lower = []
    if case1:
        lower.append(log_threshold_general(params))
    if case2:
        lower.append(log_threshold_succinct(params))
    log_t = min(lower) if lower else math.inf
    log_b = log_upper_bound_53(params, L) if upper_ok else -math.inf
    log_lo = max(0.0, k * math.log(L))
    scan = RegimeScan(
        params, L, log_lo, params.log_d, log_t, log_b, case1, case2, upper_ok,
        comparison=regime_comparison(params, L),
    )
    if scan.vacuous:
        return scan
    grid = set(np.linspace(log_lo, params.log_d, points).tolist())
    for edge in (log_t, log_b):
        if log_lo <= edge <= params.log_d:
            grid.add(edge)
    t1 = log_threshold_general(params) if case1 else math.inf
    t2 = log_threshold_succinct(params) if case2 else math.inf
    for x in sorted(grid):
        in1 = x >= t1 - LOG_TOL
        in2 = x >= t2 - LOG_TOL
        in3 = x <= log_b + LOG_TOL
        scan.rows.append(
            {
                "log_r": x,
                "lemma52_case1": in1,
                "lemma52_case2": in2,
                "lemma53": in3,
                "covered": in1 or in2 or in3,
                "margin_lower": x - log_t if math.isfinite(log_t) else None,
                "margin_upper": log_b - x if math.isfinite(log_b) else None,
            }
        )
    return scan


def scan_grid(nt_grid, kt: int, l: int, L: float, points: int = 33) -> dict:
    """Scan every ``nt`` in the grid; report the smallest ``nt`` whose regimes meet."""
    scans = [regime_coverage_scan(CliqueParams(int(nt), kt, l), L, points) for nt in nt_grid]
    meet = [s.params.nt for s in scans if s.regimes_meet]
    gaps = [s.params.nt for s in scans if not s.covered]
    return {
        "scans": scans,
        "min_gap_free_nt": min(meet) if meet else None,
        "gap_nts": gaps,
        "all_vacuous": all(s.vacuous for s in scans),
    }


# --------------------------------------------------------------------------
# Monte Carlo traces and tails


@dataclass
class CliqueTraces:
    """Edge overlaps ``Y`` and vertex overlaps ``Yt``, shape ``(trials, s)``."""

    y: np.ndarray
    yt: np.ndarray
    union_sizes: np.ndarray

    def domination_violations(self, l: int) -> int:
        table = np.array([math.comb(v, l) for v in range(int(self.yt.max(initial=0)) + 1)])
        return int((self.y > table[self.yt]).sum())


def sample_clique_traces(params: CliqueParams, s: int, trials: int, seed: int = 0) -> CliqueTraces:
    """Draw ``trials`` sequences of ``s`` uniform cliques and trace both overlaps.

    Cliques are sampled through their vertex sets, so the edge-level ground
    set is never materialized (only ``nt <= 64`` is required).
    """
    nt, kt, l = params.nt, params.kt, params.l
    if nt > 64:
        raise TooLarge(f"vertex masks need nt <= 64, got {nt}")
    rng = np.random.default_rng(seed)
    verts = np.sort(np.argsort(rng.random((trials, s, nt)), axis=-1)[..., :kt], axis=-1)
    bits = np.left_shift(np.uint64(1), verts.astype(np.uint64))
    tmask = np.bitwise_or.reduce(bits, axis=-1)

    yt = np.zeros((trials, s), dtype=np.int64)
    sizes = np.zeros((trials, s), dtype=np.int64)
    running = np.zeros(trials, dtype=np.uint64)
    for j in range(s):
        yt[:, j] = np.bitwise_count(tmask[:, j] & running)
        running |= tmask[:, j]
        sizes[:, j] = np.bitwise_count(running)

    y = np.zeros((trials, s), dtype=np.int64)
    for combo in itertools.combinations(range(kt), l):
        amask = np.bitwise_or.reduce(bits[..., list(combo)], axis=-1)
        for j in range(1, s):
            inside = np.zeros(trials, dtype=bool)
            for jp in range(j):
                inside |= (amask[:, j] & ~tmask[:, jp]) == 0
            y[:, j] += inside
    return CliqueTraces(y, yt, sizes)


def clique_tail_function(
    params: CliqueParams, s: int, kind: str = "exact", mt: Optional[int] = None
) -> Callable[[int], object]:
    """A history-uniform bound ``y -> P(Y_s >= y | history)``.

    ``kind="exact"`` uses the hypergeometric tail at the largest possible
    union ``mt = min(nt, (s-1) kt)`` (tails grow with ``mt``).
    ``kind="analytic"`` uses ``min(1, (4 e kt ln^2(nt) / nt)^yt)``.
    """
    nt, kt, l = params.nt, params.kt, params.l
    if kind == "exact":
        if mt is None:
            mt = min(nt, (s - 1) * kt)
        law = hypergeom(nt, mt, kt)
        return lambda y: law.tail(ytilde_map(y, l))
    if kind == "analytic":
        base = math.log(4 * math.e * kt) + 2 * math.log(math.log(nt)) - math.log(nt)

        def tail(y: int) -> LogReal:
            return LogReal(1, min(0.0, ytilde_map(y, l) * base))

        return tail
    raise ValueError(f"unknown tail kind {kind!r}")
