"""Exact Bayesian clustering posteriors via subset convolution."""
