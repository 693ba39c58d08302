"""Fee-driven block-space allocation.

Maps a transaction's fee through the CDF of a log-normal distribution to a
whole number of occupied leaf slots, so that expensive transactions consume
more of a block's fixed capacity. Also provides the capacity test and the
per-block incentive sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)

# Below this, the Maclaurin-style series wins; above, the Laplace continued
# fraction for erfc converges faster. Both deliver < 1e-14 relative error at
# the crossover (see tests for the oracle table).
_ERF_SERIES_CUTOFF = 2.0
_CEIL_SLACK = 1e-9


def erf(x: float) -> float:
    """Gauss error function, accurate to better than 1e-12 relative error.

    Uses the scaled power series 2x*exp(-x^2)/sqrt(pi) * sum (2x^2)^n / (2n+1)!!
    for small arguments (all terms positive, no cancellation) and a Lentz
    continued-fraction evaluation of erfc for large ones.
    """
    if x != x:  # NaN
        return x
    ax = abs(x)
    if ax == 0.0:
        return 0.0
    if ax < _ERF_SERIES_CUTOFF:
        y = _erf_series(ax)
    else:
        y = 1.0 - _erfc_cf(ax)
    return y if x > 0 else -y


def erfc(x: float) -> float:
    """Complementary error function, 1 - erf(x), without cancellation loss."""
    if x < -_ERF_SERIES_CUTOFF:
        return 2.0 - _erfc_cf(-x)
    if x > _ERF_SERIES_CUTOFF:
        return _erfc_cf(x)
    return 1.0 - erf(x)


def _erf_series(ax: float) -> float:
    # erf(x) = (2x e^{-x^2}/sqrt(pi)) * sum_{n>=0} (2x^2)^n / (1*3*...*(2n+1))
    x2 = ax * ax
    t = 1.0
    acc = 1.0
    denom = 1.0
    for n in range(1, 200):
        denom += 2.0
        t *= 2.0 * x2 / denom
        acc += t
        if t < acc * 1e-18:
            break
    return 2.0 * ax * math.exp(-x2) * _INV_SQRT_PI * acc


def _erfc_cf(ax: float) -> float:
    # erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    # evaluated with the modified Lentz algorithm.
    tiny = 1e-300
    f = ax
    c = f
    d = 0.0
    for m in range(1, 300):
        a_m = 0.5 * m
        d = ax + a_m * d
        if abs(d) < tiny:
            d = tiny
        c = ax + a_m / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    return math.exp(-ax * ax) * _INV_SQRT_PI / f


@dataclass(frozen=True)
class AllocationParams:
    """Log-normal CDF parameters plus the per-transaction slot cap.

    `scale` is the mean of the fee's natural logarithm, `shape` its standard
    deviation; `max_trx_nodes` caps how many leaf slots one transaction may
    occupy no matter how large its fee.
    """

    scale: float
    shape: float
    max_trx_nodes: int

    def __post_init__(self):
        if self.shape <= 0:
            raise ValueError("shape must be positive")
        if self.max_trx_nodes < 1:
            raise ValueError("max_trx_nodes must be >= 1")


def lognormal_cdf(x: float, params: AllocationParams) -> float:
    """F(x) = 1/2 + 1/2*erf((ln x - scale) / (shape*sqrt(2))) for x > 0."""
    if x <= 0:
        raise ValueError(f"lognormal_cdf requires x > 0, got {x}")
    z = (math.log(x) - params.scale) / (params.shape * _SQRT2)
    return 0.5 + 0.5 * erf(z)


def leaf_nodes(fee: float, params: AllocationParams) -> int:
    """Leaf slots occupied by a transaction paying `fee`.

    Rounds F(fee) * max_trx_nodes up to a whole slot with a floor of one, so
    every transaction occupies at least one slot and none exceeds the cap.
    A 1e-9 slack absorbs float noise when the product lands on an exact
    integer (e.g. F = 0.5 with an even cap).
    """
    if fee <= 0:
        raise ValueError(f"leaf_nodes requires fee > 0, got {fee}")
    raw = lognormal_cdf(fee, params) * params.max_trx_nodes
    n = math.ceil(raw - _CEIL_SLACK)
    if n < 1:
        return 1
    if n > params.max_trx_nodes:
        return params.max_trx_nodes
    return n


def fits(occupied: int, tx_nodes: int, capacity: int) -> bool:
    """True when `tx_nodes` more slots still fit under the block capacity."""
    if not 0 <= occupied <= capacity:
        raise ValueError(f"occupied {occupied} outside [0, {capacity}]")
    if tx_nodes < 1:
        raise ValueError("tx_nodes must be >= 1")
    return occupied + tx_nodes <= capacity


def block_incentive(fees) -> float:
    """Total fee income of one block: the compensated sum of its fees."""
    fees = list(fees)
    for f in fees:
        if f < 0:
            raise ValueError("fees must be non-negative")
    return math.fsum(fees)
