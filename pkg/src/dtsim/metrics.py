"""Volatility of block incentives.

Volatility is the sample standard deviation (n-1 denominator) of the
logarithmic returns of consecutive incentives. A rolling variant evaluates
the same statistic over trailing windows of returns. The historical
reference range used for classification ships as fixed constants; its
source data is not redistributable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Sequence

# Yearly historical volatility of average daily block incentives, as
# published; the bolded 2019 minimum and 2012 maximum bound the reference
# range. (The published table lists these nine years.)
HISTORICAL_VOLATILITY = {
    2012: 0.238111,
    2013: 0.200857,
    2014: 0.218010,
    2015: 0.180948,
    2016: 0.073051,
    2017: 0.063965,
    2018: 0.045616,
    2019: 0.037647,
    2020: 0.059485,
}

BENCHMARK_MIN = 0.037647
BENCHMARK_MAX = 0.238111


@dataclass(frozen=True)
class ReturnSeries:
    """Log returns plus a tag for where the underlying series came from."""

    values: tuple
    source: str = "block"

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class VolatilityBenchmark:
    """Reference range of historical yearly volatilities."""

    yearly: dict
    minimum: float
    maximum: float


BENCHMARK = VolatilityBenchmark(
    yearly=dict(HISTORICAL_VOLATILITY),
    minimum=BENCHMARK_MIN,
    maximum=BENCHMARK_MAX,
)


def log_returns(incentives: Sequence[float], source: str = "block",
                drop_nonpositive: bool = False) -> ReturnSeries:
    """R_n = ln(I_n / I_{n-1}) over consecutive incentives.

    Requires at least two strictly positive values. With `drop_nonpositive`
    the offending entries are skipped with a warning instead of raising
    (useful for force-sealed empty tail blocks).
    """
    values = list(incentives)
    if drop_nonpositive:
        kept = [v for v in values if v > 0]
        if len(kept) != len(values):
            warnings.warn(
                f"dropped {len(values) - len(kept)} non-positive incentives "
                f"before computing returns", stacklevel=2)
        values = kept
    if len(values) < 2:
        raise ValueError("need at least two incentives to form returns")
    for i, v in enumerate(values):
        if v <= 0:
            raise ValueError(f"incentive at index {i} is {v}; returns need positive values")
    rets = tuple(math.log(values[i] / values[i - 1]) for i in range(1, len(values)))
    return ReturnSeries(values=rets, source=source)


def volatility(returns) -> float:
    """Sample standard deviation of the returns about their mean."""
    values = list(returns)
    n = len(values)
    if n < 2:
        raise ValueError("volatility needs at least two returns")
    avg = math.fsum(values) / n
    ss = math.fsum((r - avg) ** 2 for r in values)
    return math.sqrt(ss / (n - 1))


def series_volatility(incentives: Sequence[float]) -> float:
    """Volatility of an incentive series: log returns, then sample std."""
    return volatility(log_returns(incentives))


def rolling_volatility(incentives: Sequence[float], window: int) -> List[float]:
    """Volatility over each trailing window of `window` consecutive returns.

    An incentive series of length L yields L-1 returns and therefore
    L-window values; `window` equal to the full return count degenerates to
    the single overall volatility.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    rets = log_returns(incentives).values
    if window > len(rets):
        raise ValueError(
            f"window {window} exceeds the {len(rets)} available returns")
    return [
        volatility(rets[i: i + window])
        for i in range(len(rets) - window + 1)
    ]


def benchmark_check(vol: float, benchmark: VolatilityBenchmark = BENCHMARK) -> str:
    """Classify a volatility against the historical range: below/within/above."""
    if vol < 0:
        raise ValueError("volatility cannot be negative")
    if vol < benchmark.minimum:
        return "below"
    if vol > benchmark.maximum:
        return "above"
    return "within"
