"""Space-allocation rule tests.

Oracle values were computed with mpmath at 40+ significant digits (erf and
the log-normal CDF); the table below freezes them so the suite stays
hermetic. Regenerate with: mpmath.erf(x) at mp.dps=40.
"""

import math

import numpy as np
import pytest

from dtsim.allocation import AllocationParams, block_incentive, erf, erfc, fits, leaf_nodes, lognormal_cdf

# (x, erf(x)) pairs spanning the series branch, the continued-fraction
# branch and the sign reflection.
ERF_ORACLE = [
    (0.0, 0.0),
    (1e-12, 1.128379167095512573896e-12),
    (0.01, 0.01128341555584961691591),
    (0.1, 0.1124629160182848922033),
    (0.25, 0.2763263901682369329851),
    (0.5, 0.5204998778130465376827),
    (0.75, 0.7111556336535151315989),
    (1.0, 0.8427007929497148693412),
    (1.25, 0.9229001282564582301365),
    (1.5, 0.966105146475310727067),
    (1.75, 0.9866716712191824437722),
    (2.0, 0.9953222650189527341621),
    (2.5, 0.9995930479825550410604),
    (3.0, 0.9999779095030014145586),
    (4.0, 0.99999998458274209972),
    (5.0, 0.9999999999984625402056),
    (6.0, 0.9999999999999999784803),
    (-0.3, -0.3286267594591274276389),
    (-1.7, -0.9837904585907745636262),
    (-3.5, -0.9999992569016276585873),
]


@pytest.mark.parametrize("x,expected", ERF_ORACLE)
def test_erf_oracle_table(x, expected):
    got = erf(x)
    if expected == 0.0:
        assert got == 0.0
    else:
        assert abs(got - expected) / abs(expected) < 1e-12


def test_erfc_complements_erf():
    for x in (-3.0, -0.7, 0.0, 0.4, 1.9, 2.5, 4.0):
        assert erfc(x) == pytest.approx(1.0 - erf(x), abs=1e-15)


def test_erf_is_odd_and_monotone():
    xs = [i / 7 for i in range(-30, 31)]
    for x in xs:
        assert erf(-x) == -erf(x)
    values = [erf(x) for x in xs]
    assert all(a <= b for a, b in zip(values, values[1:]))


PARAMS_EXP17 = AllocationParams(scale=6.94, shape=1.00, max_trx_nodes=110)


class TestLognormalCdf:
    def test_median_is_half(self):
        # erf(0) = 0 exactly at the distribution median, for any shape.
        for sigma in (0.1, 0.5, 1.0, 3.0):
            p = AllocationParams(scale=6.94, shape=sigma, max_trx_nodes=100)
            assert lognormal_cdf(math.exp(6.94), p) == pytest.approx(0.5, abs=1e-13)

    def test_limit_toward_one(self):
        assert lognormal_cdf(1e300, PARAMS_EXP17) == pytest.approx(1.0, abs=1e-15)

    def test_oracle_point(self):
        # mpmath: 0.5 + 0.5*erf((ln 2000 - 6.94)/sqrt(2)) at dps=40
        expected = 0.745662565671609974769
        assert abs(lognormal_cdf(2000.0, PARAMS_EXP17) - expected) / expected < 1e-12

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            lognormal_cdf(0.0, PARAMS_EXP17)
        with pytest.raises(ValueError):
            lognormal_cdf(-5.0, PARAMS_EXP17)

    def test_shape_must_be_positive(self):
        with pytest.raises(ValueError):
            AllocationParams(scale=1.0, shape=0.0, max_trx_nodes=10)


class TestLeafNodes:
    def test_huge_fee_saturates_at_cap(self):
        assert leaf_nodes(1e12, PARAMS_EXP17) == 110

    def test_median_fee_takes_half_the_cap(self):
        p = AllocationParams(scale=6.94, shape=1.00, max_trx_nodes=100)
        assert leaf_nodes(math.exp(6.94), p) == 50

    def test_tiny_fee_floors_at_one(self):
        # F(2) = 2.094e-10 (mpmath oracle); ceil would give 1 node anyway,
        # the floor guards the even smaller fees that underflow to 0.
        assert leaf_nodes(2.0, PARAMS_EXP17) == 1
        assert leaf_nodes(1e-300, PARAMS_EXP17) == 1

    def test_oracle_interior_points(self):
        # ceil(F(fee)*110) computed with mpmath at dps=40
        assert leaf_nodes(1000.0, PARAMS_EXP17) == 54
        assert leaf_nodes(5000.0, PARAMS_EXP17) == 104

    def test_rejects_nonpositive_fee(self):
        with pytest.raises(ValueError):
            leaf_nodes(0.0, PARAMS_EXP17)

    def test_monotone_in_fee_quantified(self):
        # Spec-level property: 1e4 random fee pairs per parameter set.
        rng = np.random.default_rng(1234)
        for params in (PARAMS_EXP17,
                       AllocationParams(scale=4.0, shape=0.3, max_trx_nodes=17),
                       AllocationParams(scale=8.0, shape=2.0, max_trx_nodes=800)):
            fees = rng.lognormal(params.scale, 2.0, size=(10_000, 2))
            for f1, f2 in fees:
                lo, hi = sorted((f1, f2))
                assert leaf_nodes(lo, params) <= leaf_nodes(hi, params)

    def test_bounds_hold_across_regimes(self):
        rng = np.random.default_rng(99)
        for _ in range(2000):
            fee = float(rng.lognormal(5.0, 4.0))
            n = leaf_nodes(fee, PARAMS_EXP17)
            assert 1 <= n <= PARAMS_EXP17.max_trx_nodes

    def test_increasing_scale_never_increases_cdf(self):
        fee = 900.0
        last = 1.0
        for scale in (5.0, 6.0, 6.94, 8.0, 9.5):
            p = AllocationParams(scale=scale, shape=1.0, max_trx_nodes=110)
            value = lognormal_cdf(fee, p)
            assert value <= last + 1e-15
            last = value


class TestFits:
    def test_exact_fill(self):
        assert fits(0, 2100, 2100) is True

    def test_overflow_rejected(self):
        assert fits(2090, 110, 2100) is False

    def test_nineteen_max_transactions_fill_2090(self):
        occupied = 0
        for _ in range(19):
            assert fits(occupied, 110, 2100)
            occupied += 110
        assert occupied == 2090
        assert not fits(occupied, 110, 2100)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            fits(-1, 5, 2100)
        with pytest.raises(ValueError):
            fits(0, 0, 2100)


class TestBlockIncentive:
    def test_commission_example(self):
        fees = [amount * 0.002 for amount in (1000.0, 2000.0)]
        assert block_incentive(fees) == pytest.approx(6.0, abs=1e-12)

    def test_empty(self):
        assert block_incentive([]) == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            block_incentive([1.0, -0.5])

    def test_compensated_sum_oracle_400k(self):
        # Oracle: math.fsum IS exactly-rounded summation; cross-check the
        # result against a from-scratch Kahan accumulation.
        rng = np.random.default_rng(42)
        fees = rng.lognormal(4.0, 1.0, size=400_000).tolist()
        total = block_incentive(fees)
        acc = 0.0
        comp = 0.0
        for f in fees:
            y = f - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        assert abs(total - acc) <= 1e-9 * max(1.0, abs(total))
