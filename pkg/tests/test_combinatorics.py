import math

import mpmath
import numpy as np
import pytest

from cluster_posterior.combinatorics import build_tables, log_gamma
from cluster_posterior.errors import DomainError
from cluster_posterior.oracle import bell_exact, stirling1_exact, stirling2_exact


def test_published_counts(tables):
    assert math.exp(tables.log_stirling2(20, 4)) == pytest.approx(4.5e10, rel=0.01)
    assert math.exp(tables.log_bell(20)) == pytest.approx(5.2e13, rel=0.01)
    assert math.exp(tables.log_stirling2(18, 3)) == pytest.approx(6.4e7, rel=0.01)
    assert math.exp(tables.log_stirling2(18, 6)) == pytest.approx(1.1e11, rel=0.01)


def test_ratio_of_six_to_three_partitions(tables):
    ratio = math.exp(tables.log_stirling2(18, 6) - tables.log_stirling2(18, 3))
    exact = stirling2_exact(18, 6) / stirling2_exact(18, 3)
    assert ratio == pytest.approx(exact, rel=1e-12)
    assert ratio == pytest.approx(1700, rel=0.05)


@pytest.mark.parametrize("n", range(1, 31))
def test_extreme_stirling_entries(tables, n):
    assert tables.log_stirling2(n, 1) == pytest.approx(0.0, abs=1e-12)
    assert tables.log_stirling2(n, n) == pytest.approx(0.0, abs=1e-12)
    assert tables.log_stirling2(n, 0) == -math.inf


def test_row_sums(tables):
    for n in range(1, 31):
        row = np.logaddexp.reduce([tables.log_stirling2(n, k) for k in range(1, n + 1)])
        assert math.exp(row - tables.log_bell(n)) == pytest.approx(1.0, rel=1e-10)
    for n in range(1, 21):
        row = sum(math.exp(tables.log_stirling1(n, k)) for k in range(1, n + 1))
        assert row == pytest.approx(math.factorial(n), rel=1e-10)


def test_against_integer_recurrences(tables):
    for n in range(1, 21):
        assert math.exp(tables.log_bell(n)) == pytest.approx(bell_exact(n), rel=1e-12)
        for k in range(1, n + 1):
            assert math.exp(tables.log_stirling2(n, k)) == pytest.approx(stirling2_exact(n, k), rel=1e-12)
            assert math.exp(tables.log_stirling1(n, k)) == pytest.approx(stirling1_exact(n, k), rel=1e-12)


@pytest.mark.parametrize("bad", [0, 65])
def test_build_range(bad):
    with pytest.raises(DomainError):
        build_tables(bad)


def test_out_of_table_lookup():
    with pytest.raises(DomainError):
        build_tables(5).log_bell(6)


class TestLogGamma:
    def test_small_integers(self):
        assert log_gamma(1) == 0.0
        assert log_gamma(2) == 0.0
        assert log_gamma(21) == pytest.approx(math.log(math.factorial(20)), rel=1e-14)

    def test_half(self):
        ref = float(mpmath.log(mpmath.gamma(mpmath.mpf("0.5"))))
        assert log_gamma(0.5) == pytest.approx(ref, rel=1e-14)
        assert log_gamma(0.5) == pytest.approx(0.5723649429, abs=1e-10)

    def test_against_mpmath_grid(self):
        for x in np.geomspace(1e-3, 1e6, 60):
            ref = float(mpmath.loggamma(mpmath.mpf(float(x))))
            assert log_gamma(float(x)) == pytest.approx(ref, rel=1e-12, abs=1e-14)

    def test_recurrence(self):
        for x in np.linspace(0.05, 50, 200):
            assert log_gamma(x + 1) == pytest.approx(log_gamma(x) + math.log(x), abs=1e-10)

    @pytest.mark.parametrize("bad", [0.0, -1.5])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            log_gamma(bad)
