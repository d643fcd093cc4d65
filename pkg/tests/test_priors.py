import math

import numpy as np
import pytest

from cluster_posterior.errors import DomainError
from cluster_posterior.likelihood import prior_only_table
from cluster_posterior.oracle import (
    bell_exact,
    brute_force,
    cluster_masks,
    enumerate_partitions,
    stirling1_exact,
    stirling2_exact,
)
from cluster_posterior.posterior import Partition
from cluster_posterior.priors import PriorSpec, log_f_prior, log_weight, log_weights
from cluster_posterior.subsets import iterate_convolutions

from conftest import PRIOR_IDS, PRIORS


class TestFPrior:
    def test_dp_sizes(self):
        dp = PriorSpec("dp")
        assert log_f_prior(1, dp) == 0.0
        assert log_f_prior(3, dp) == pytest.approx(math.log(2))

    @pytest.mark.parametrize("variant", ["uniform-k", "uniform-partitions"])
    def test_flat_variants(self, variant):
        assert all(log_f_prior(c, PriorSpec(variant)) == 0.0 for c in range(1, 20))

    def test_empty_cluster(self):
        with pytest.raises(DomainError):
            log_f_prior(0, PriorSpec())


class TestWeights:
    def test_uniform_partitions_small(self, tables):
        w = math.exp(log_weight(2, 3, PriorSpec("uniform-partitions"), tables))
        assert w == pytest.approx(1 / (2 * 5), rel=1e-14)

    def test_uniform_k_implies_flat_marginal(self, tables):
        for n in range(1, 16):
            for k in range(1, n + 1):
                w = math.exp(log_weight(k, n, PriorSpec("uniform-k"), tables))
                assert math.factorial(k) * stirling2_exact(n, k) * w * n == pytest.approx(1.0, rel=1e-12)

    def test_dp_theta_one_small(self):
        got = brute_force(prior_only_table(3, PriorSpec("dp")), 3, PriorSpec("dp"))
        np.testing.assert_allclose(got.summary.posterior_k, [1 / 3, 1 / 2, 1 / 6], atol=1e-14)

    def test_dp_strict_form_differs_only_by_theta_power(self):
        theta = 2.7
        normal = PriorSpec("dp", theta=theta)
        strict = PriorSpec("dp", theta=theta, strict_paper=True)
        for k in range(1, 8):
            assert log_weight(k, 7, normal) - log_weight(k, 7, strict) == pytest.approx(k * math.log(theta))
        assert log_weight(3, 7, PriorSpec("dp")) == log_weight(3, 7, PriorSpec("dp", strict_paper=True))

    def test_k_range(self):
        with pytest.raises(DomainError):
            log_weight(0, 3, PriorSpec())
        with pytest.raises(DomainError):
            log_weight(4, 3, PriorSpec())

    def test_theta_must_be_positive(self):
        with pytest.raises(DomainError):
            PriorSpec("dp", theta=0.0)


def total_prior_mass_by_convolution(n, prior):
    f = prior_only_table(n, prior)
    logw = log_weights(n, prior)
    powers = iterate_convolutions(f, n)
    return sum(math.exp(logw[k] + powers[k - 1]) for k in range(1, n + 1))


@pytest.mark.parametrize("prior", PRIORS + [PriorSpec("dp", theta=0.4), PriorSpec("dp", theta=3.0)])
def test_prior_normalizes(prior):
    for n in range(1, 13):
        assert total_prior_mass_by_convolution(n, prior) == pytest.approx(1.0, rel=1e-9)
    for n in range(1, 9):
        # enumerator path: log evidence of a flat likelihood is the total prior mass
        got = brute_force(prior_only_table(n, prior), n, prior)
        assert got.summary.log_evidence == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("prior", PRIORS, ids=PRIOR_IDS)
def test_marginal_on_k(prior):
    for n in range(1, 9):
        got = brute_force(prior_only_table(n, prior), n, prior).summary.posterior_k
        ks = range(1, n + 1)
        if prior.variant == "uniform-k":
            expected = [1 / n] * n
        elif prior.variant == "uniform-partitions":
            expected = [stirling2_exact(n, k) / bell_exact(n) for k in ks]
        else:
            expected = [stirling1_exact(n, k) / math.factorial(n) for k in ks]
        np.testing.assert_allclose(got, expected, atol=1e-12)


def all_partitions(n):
    out = []
    enumerate_partitions(n, lambda rgs: out.append(Partition(n, cluster_masks(rgs))))
    return out


@pytest.mark.parametrize("n", [1, 4, 8])
def test_uniform_partitions_every_partition_equal(n):
    prior = PriorSpec("uniform-partitions")
    got = brute_force(prior_only_table(n, prior), n, prior)
    for part in all_partitions(n):
        assert got.log_posterior_of(part) == pytest.approx(-math.log(bell_exact(n)), abs=1e-12)


@pytest.mark.parametrize("theta", [1.0, 0.3, 2.5])
def test_dp_matches_chinese_restaurant_process(theta):
    # sequential seating probability of each partition, computed item by item
    n = 7
    prior = PriorSpec("dp", theta=theta)
    got = brute_force(prior_only_table(n, prior), n, prior)
    for part in all_partitions(n):
        prob, sizes = 1.0, {}
        for i, lab in enumerate(part.labels()):
            prob *= sizes[lab] / (i + theta) if lab in sizes else theta / (i + theta)
            sizes[lab] = sizes.get(lab, 0) + 1
        assert got.log_posterior_of(part) == pytest.approx(math.log(prob), abs=1e-12)
