"""Gaussian-moment-theorem predictions, deviations, conditions, and series.

The GMT prediction for m = n is the pair-partition sum over products of
first-order correlators; for m != n it is zero.  Deviations are reported as

    delta_g = g_GMT - g_exact ,

split into a finite-size part (re-evaluated with the coherence zeroed while
keeping the fluctuation: p -> f, c -> 0) and the spin-coherence remainder.
The split is exact by construction.  Note: the displayed closed forms for
the finite-size part carry the sign matching this definition; at equal
directions and full inversion delta_g^(2) = +2/N.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import enumerate_pair_partitions, falling_factorial
from .ensemble import Ensemble, structure_factor
from .quantum import (
    CorrelationOrder,
    correlate,
    deviation_coh_forward_ratio,
    g1_function,
)
from .states import SingleAtomState

DEFAULT_MARGIN_POLICY = 0.1  # "much less than one" reported as ratio < policy


@dataclass(frozen=True)
class ConditionMargin:
    """One admissibility condition as numbers, not booleans: lhs << rhs."""

    name: str
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return math.inf if self.lhs > 0.0 else 0.0
        return self.lhs / self.rhs

    def satisfied(self, policy: float = DEFAULT_MARGIN_POLICY) -> bool:
        return self.ratio < policy


@dataclass(frozen=True)
class ConditionReport:
    order: CorrelationOrder
    n_atoms: int
    ratio: float
    margins: tuple[ConditionMargin, ...]

    def margin(self, name: str) -> ConditionMargin:
        for m in self.margins:
            if m.name == name:
                return m
        raise KeyError(name)

    def flagged(self, policy: float = DEFAULT_MARGIN_POLICY) -> bool:
        return any(not m.satisfied(policy) for m in self.margins)


@dataclass(frozen=True)
class DeviationReport:
    order: CorrelationOrder
    directions: np.ndarray
    g_exact: complex
    g_gmt: complex
    delta_total: complex
    delta_n: complex
    delta_coh: complex
    epsilon: float
    conditions: ConditionReport


def gmt_predict(order: CorrelationOrder, directions, g1) -> complex:
    """Pair-partition sum of g^(1) products; zero when m != n.

    ``g1`` is any callable (k_i, k_j) -> complex, typically
    :func:`photonstat.quantum.g1_function`.
    """
    if not order.equal_order:
        return 0.0 + 0.0j
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    m = order.m
    total = 0.0 + 0.0j
    for partition in enumerate_pair_partitions(m):
        term = 1.0 + 0.0j
        for i, j in partition.pairs:
            term *= g1(dirs[i - 1], dirs[j - 1])
        total += term
    return total


def check_conditions(ratio: float, nat: int, order: CorrelationOrder) -> ConditionReport:
    """Margins for the admissibility conditions at the given coherence ratio.

    For m = n: the finite-size condition m! m (m-1) / (2N) << 1, the
    quadratic spin-coherence condition R^2 << 4 / (N^2 m (m-1)), and the
    stricter intermediate linear condition R << 1 / (m (N - m + 1)).  For
    m != n only a spin-coherence condition remains:
    sqrt(R) << (N-x)! N^x / (x! N! sqrt(N)) with x = max(m, n).
    """
    m, n = order.m, order.n
    margins = []
    if order.equal_order:
        lhs = math.factorial(m) * m * (m - 1) / (2.0 * nat)
        margins.append(ConditionMargin("finite_n", lhs, 1.0))
        if m * (m - 1) > 0:
            margins.append(
                ConditionMargin(
                    "spin_coherence_quadratic",
                    ratio**2,
                    4.0 / (nat**2 * m * (m - 1)),
                )
            )
            margins.append(
                ConditionMargin(
                    "spin_coherence_linear", ratio, 1.0 / (m * (nat - m + 1))
                )
            )
        else:
            margins.append(ConditionMargin("spin_coherence_quadratic", 0.0, 1.0))
            margins.append(ConditionMargin("spin_coherence_linear", 0.0, 1.0))
    else:
        x = order.x
        rhs = float(nat) ** x / float(falling_factorial(nat, x)) / (
            math.factorial(x) * math.sqrt(nat)
        )
        margins.append(ConditionMargin("spin_coherence_sqrt", math.sqrt(ratio), rhs))
    return ConditionReport(order=order, n_atoms=nat, ratio=ratio, margins=tuple(margins))


def deviation(
    state: SingleAtomState,
    ensemble: Ensemble,
    order: CorrelationOrder,
    directions,
    method: str = "auto",
) -> DeviationReport:
    """Full deviation decomposition at the given observation directions."""
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    result = correlate(state, ensemble, order, dirs, method=method)
    g_exact = result.value
    g_gmt = gmt_predict(order, dirs, g1_function(state, ensemble))
    delta_total = g_gmt - g_exact
    if order.equal_order:
        zeroed = state.coherence_zeroed()
        result0 = correlate(zeroed, ensemble, order, dirs, method=method)
        gmt0 = gmt_predict(order, dirs, g1_function(zeroed, ensemble))
        delta_n = gmt0 - result0.value
    else:
        delta_n = 0.0 + 0.0j
    delta_coh = delta_total - delta_n
    return DeviationReport(
        order=order,
        directions=dirs,
        g_exact=g_exact,
        g_gmt=g_gmt,
        delta_total=delta_total,
        delta_n=delta_n,
        delta_coh=delta_coh,
        epsilon=math.factorial(order.x) * math.sqrt(state.ratio),
        conditions=check_conditions(state.ratio, ensemble.n, order),
    )


def deviation_N_closed_form(ensemble: Ensemble, order: CorrelationOrder, directions) -> complex:
    """Finite-size deviation from structure factors, m in {2, 3}.

    delta^(2)_N = (2/N^2) S(k1 + k2 - k3 - k4);
    delta^(3)_N = (1/(2 N^3)) sum_(s,s') S(k_s(1) - k_(3+s'(1)))
                  S(k_s(2) + k_s(3) - k_(3+s'(2)) - k_(3+s'(3)))
                  - (12/N^3) S(k1 + k2 + k3 - k4 - k5 - k6),
    with the overall sign matching delta = g_GMT - g_exact.
    """
    if not order.equal_order or order.m not in (2, 3):
        raise ValueError("closed form available for m = n in {2, 3} only")
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    nat = ensemble.n
    m = order.m
    if m == 2:
        return (2.0 / nat**2) * structure_factor(
            ensemble, dirs[0] + dirs[1] - dirs[2] - dirs[3]
        )
    total = 0.0 + 0.0j
    for sig in itertools.permutations(range(3)):
        for sigp in itertools.permutations(range(3)):
            single = structure_factor(ensemble, dirs[sig[0]] - dirs[3 + sigp[0]])
            pair = structure_factor(
                ensemble,
                dirs[sig[1]] + dirs[sig[2]] - dirs[3 + sigp[1]] - dirs[3 + sigp[2]],
            )
            total += single * pair
    total /= 2.0 * nat**3
    total -= (12.0 / nat**3) * structure_factor(
        ensemble, dirs[0] + dirs[1] + dirs[2] - dirs[3] - dirs[4] - dirs[5]
    )
    return total


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value plus enough metadata to shade validity regions."""

    value: float
    truncation_order: int
    next_term_estimate: float


def taylor_forward_equal(nat: int, m: int, r: float, variant: str = "exact-N") -> SeriesValue:
    """Second-order expansion of g^(m)(0,...,0) in the coherence ratio.

    ``exact-N`` keeps the finite-N prefactors; ``large-N`` is
    m! - m! m (m-1) R - (1/4) m! m (m-1) N^2 R^2.  The two orders exchange
    dominance at the crossover R ~ 4 / N^2 (see :func:`crossover_ratio`).
    """
    if r < 0.0:
        raise ValueError("ratio must be non-negative")
    fact = math.factorial(m)
    mm1 = m * (m - 1)
    if variant == "large-N":
        value = fact - fact * mm1 * r - 0.25 * fact * mm1 * nat**2 * r**2
    elif variant == "exact-N":
        lead = fact**2 * math.comb(nat, m) / float(nat) ** m
        quad = nat**2 - 3 * nat - 2 * m * nat + 3 * m - m**2 - 2
        value = lead * (1.0 - mm1 * r - 0.25 * quad * mm1 * r**2)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    # empirical magnitude of the dropped R^3 term (e.g. 2 N (N-1)(N-5) R^3 at m = 2)
    next_term = fact * max(mm1, 1) * float(nat) ** 3 * r**3
    return SeriesValue(value=float(value), truncation_order=2, next_term_estimate=next_term)


def crossover_ratio(nat: int) -> float:
    """R at which the first- and second-order coherence corrections match: 4/N^2."""
    return 4.0 / nat**2


def classical_taylor_forward(nat: int, m: int, r: float) -> SeriesValue:
    """Classical counterpart: m! + (1/2) m! m (m-1) R - (1/4) m! m (m-1) N^2 R^2.

    Against the quantum series the linear term is half as large and of
    opposite sign; the quadratic term coincides.
    """
    if r < 0.0:
        raise ValueError("ratio must be non-negative")
    fact = math.factorial(m)
    mm1 = m * (m - 1)
    value = fact + 0.5 * fact * mm1 * r - 0.25 * fact * mm1 * nat**2 * r**2
    next_term = fact * max(mm1, 1) * float(nat) ** 3 * r**3
    return SeriesValue(value=float(value), truncation_order=2, next_term_estimate=next_term)


@dataclass(frozen=True)
class OffAxisSeries:
    """Truncated expansion of the off-axis spin-coherence deviation."""

    value: complex
    epsilon: float
    truncation_order: int
    next_term_estimate: float
    large_n_limit: float  # disorder-averaged magnitude: 2 R^2 (m=2), 18 R^2 (m=3)


def taylor_offaxis_coh(ensemble: Ensemble, m: int, k, r: float) -> OffAxisSeries:
    """Expansion of the off-axis autocorrelation deviation in eps = m! sqrt(R).

    m = 2 returns the realization-specific structure-factor form; m = 3 the
    disorder-averaged leading term (2N^2 - 19N + 32)/(144 N^2) eps^4.  Both
    expose the large-N disorder-averaged limits 2 R^2 and 18 R^2.
    """
    if m not in (2, 3):
        raise ValueError("off-axis series available for m in {2, 3} only")
    if r < 0.0:
        raise ValueError("ratio must be non-negative")
    nat = ensemble.n
    eps = math.factorial(m) * math.sqrt(r)
    if m == 2:
        s_k = structure_factor(ensemble, np.asarray(k, dtype=float))
        s_2k = structure_factor(ensemble, 2.0 * np.asarray(k, dtype=float))
        a2 = abs(s_k) ** 2
        quadratic = (a2 - nat) / nat**2
        quartic = -(
            nat * abs(s_2k) ** 2
            - (nat - 10.0) * a2**2
            - 8.0 * nat * a2
            - 2.0 * nat * (s_2k * s_k.conjugate() ** 2).real
        ) / (16.0 * nat**3)
        value = quadratic * eps**2 + quartic * eps**4
        large_n = 2.0 * r**2
    else:
        value = (2.0 * nat**2 - 19.0 * nat + 32.0) / (144.0 * nat**2) * eps**4
        large_n = 18.0 * r**2
    return OffAxisSeries(
        value=complex(value),
        epsilon=eps,
        truncation_order=4,
        next_term_estimate=eps**6,
        large_n_limit=large_n,
    )


_LEADING_UNEQUAL = {
    (2, 1): lambda nat, r: 2.0 * math.sqrt(nat * r),
    (3, 1): lambda nat, r: 3.0 * nat * r,
    (3, 2): lambda nat, r: 6.0 * math.sqrt(nat * r),
}


def leading_unequal(nat: int, r: float, order: CorrelationOrder) -> float:
    """Leading magnitude of |g^(m,n)(0)|: 2 sqrt(NR), 3 NR, 6 sqrt(NR)."""
    key = (order.m, order.n)
    if key not in _LEADING_UNEQUAL:
        raise ValueError(f"no tabulated leading term for order {key}")
    return _LEADING_UNEQUAL[key](nat, r)


def deviation_coh_equal_directions(
    state: SingleAtomState, ensemble: Ensemble, order: CorrelationOrder, k
) -> complex:
    """Spin-coherence deviation for an autocorrelation (all slots at one k).

    At equal directions the coherence-zeroed exact value collapses to
    m! N(N-1)...(N-m+1)/N^m independent of positions, so only the full-state
    correlator needs the product kernel.
    """
    if not order.equal_order:
        raise ValueError("equal-direction shortcut applies to m = n")
    m = order.m
    nat = ensemble.n
    dirs = np.tile(np.asarray(k, dtype=float), (order.total, 1))
    g_full = correlate(state, ensemble, order, dirs, method="multilinear").value
    g_zeroed = math.factorial(m) * falling_factorial(nat, m) / float(nat) ** m
    return g_zeroed - g_full


def fig2_curve(nat: int, m: int, r_values) -> list[float]:
    """|delta_coh(0)| over an R grid via the cancellation-free forward path."""
    return [abs(deviation_coh_forward_ratio(nat, m, r)) for r in r_values]


def locate_crossover(nat: int, m: int, r_lo: float = None, r_hi: float = None) -> float:
    """R where the local log-log slope of |delta_coh(0)| passes 1.5.

    Scans a dense log grid bracketing 4/N^2 and interpolates the slope
    change; confirms the analytic crossover estimate.
    """
    guess = crossover_ratio(nat)
    lo = r_lo if r_lo is not None else guess / 100.0
    hi = r_hi if r_hi is not None else guess * 100.0
    grid = np.geomspace(lo, hi, 241)
    vals = np.array([deviation_coh_forward_ratio(nat, m, r) for r in grid])
    logs = np.log(np.abs(vals))
    logr = np.log(grid)
    slopes = np.diff(logs) / np.diff(logr)
    mid = np.sqrt(grid[:-1] * grid[1:])
    for i in range(len(slopes) - 1):
        if (slopes[i] - 1.5) * (slopes[i + 1] - 1.5) <= 0.0:
            t = (1.5 - slopes[i]) / (slopes[i + 1] - slopes[i])
            return float(mid[i] ** (1 - t) * mid[i + 1] ** t)
    raise ValueError("no slope crossover found in the scanned range")
