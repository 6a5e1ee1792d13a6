import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as spi

from xmdl import expfam as E
from xmdl import measures as M
from xmdl.errors import ConfigError, DomainError, NotNormalizable
from xmdl.quadrature import Verdict


@pytest.mark.parametrize("alpha,m,expected", [
    (1.0, 1, Verdict.DIVERGENT), (1.0, 2, Verdict.DIVERGENT), (1.0, 3, Verdict.FINITE),
    (0.5, 1, Verdict.DIVERGENT), (0.5, 2, Verdict.FINITE), (2.0, 4, Verdict.DIVERGENT),
    (2.0, 5, Verdict.FINITE), (-1.0, 1, Verdict.FINITE),
])
def test_gaussian_alpha_threshold(alpha, m, expected):
    F = E.gaussian_location()
    assert M.in_Fm(M.gauss_alpha_prior(F, alpha), F, m, 0.3) is expected


@pytest.mark.parametrize("m", [1, 2, 4, 8])
def test_exponential_fm_boundary(m):
    F = E.exponential()
    prior = M.exp_inv_sq_prior(F)
    assert M.in_Fm(prior, F, m, 1.0 / m + 0.05) is Verdict.FINITE
    assert M.in_Fm(prior, F, m, 1.0 / m - 0.05) is Verdict.DIVERGENT
    # the boundary itself leaves an integrand ~ y^(-2-m) near 0
    assert M.in_Fm(prior, F, m, 1.0 / m) is Verdict.DIVERGENT


def test_posterior_value_exponential():
    # prior 1/y, one observation averaging 2: posterior 2 y^-2 exp(1 - 2/y) / e
    F = E.exponential()
    state = M.PosteriorState(M.jeffreys_prior(F), F, 1, 2.0)
    assert state.normalizer.value == pytest.approx(math.e, rel=1e-8)
    assert M.posterior_log_density(state, 2.0) == pytest.approx(-math.log(2) - 1.0, abs=1e-8)


@pytest.mark.parametrize("fid,prior,m,xbar", [
    ("bernoulli", "jeffreys", 3, 1 / 3), ("bernoulli", "flat", 1, 0.0), ("poisson", "jeffreys", 2, 1.5),
    ("exponential", "jeffreys", 1, 0.7), ("gaussian-location", "flat", 2, -1.0),
    ("geometric", "jeffreys", 2, 0.5), ("gaussian-location", "gauss-alpha:1", 4, 0.5),
])
def test_posterior_integrates_to_one(fid, prior, m, xbar):
    F = E.get_family(fid)
    state = M.PosteriorState(M.get_prior(prior, F), F, m, xbar)
    lo, hi = F.mean_range.mu_inf, F.mean_range.mu_sup
    f = lambda y: math.exp(M.posterior_log_density(state, y))
    brk = [xbar] if lo < xbar < hi else None
    total = sum(spi.quad(f, a, b, limit=400)[0] for a, b in
                ([(lo, xbar), (xbar, hi)] if brk else [(lo, hi)]))
    assert total == pytest.approx(1.0, rel=1e-6)


def test_unnormalizable_posterior_raises():
    F = E.exponential()
    state = M.PosteriorState(M.jeffreys_prior(F), F, 0)
    with pytest.raises(NotNormalizable):
        M.posterior_log_density(state, 1.0)


def test_errors():
    F = E.poisson()
    with pytest.raises(DomainError):
        M.in_Fm(M.jeffreys_prior(F), F, 0, 1.0)
    with pytest.raises(ConfigError):
        M.get_prior("horseshoe", F)
    with pytest.raises(ConfigError):
        M.exp_inv_sq_prior(E.gaussian_location())
    with pytest.raises(DomainError):
        M.PosteriorState(M.jeffreys_prior(F), F, 2, -1.0)


@pytest.mark.parametrize("fid,xs", [
    ("poisson", [0, 3, 1, 4]), ("exponential", [0.5, 2.0, 1.2]), ("bernoulli", [1, 0, 0, 1, 1]),
    ("gaussian-location", [0.3, -1.2, 2.2]),
])
def test_sequential_equals_batch(fid, xs):
    F = E.get_family(fid)
    prior = M.jeffreys_prior(F) if fid != "gaussian-location" else M.flat_prior(F)
    state = M.PosteriorState(prior, F)
    for x in xs:
        state = state.update(x)
    batch = M.PosteriorState.from_sample(prior, F, xs)
    assert state.m == batch.m and state.xbar == pytest.approx(batch.xbar, rel=1e-15)
    for y in (0.4, 0.8) if fid == "bernoulli" else (0.5, 1.7):
        a = M.posterior_log_density(state, y)
        b = M.likelihood_posterior_log_density(prior, F, xs, y)
        assert a == pytest.approx(b, abs=1e-8)


@given(st.floats(0.1, 2.5), st.integers(1, 7), st.floats(-3, 3))
def test_fm_increasing_in_m(alpha, m, xbar):
    F = E.gaussian_location()
    prior = M.gauss_alpha_prior(F, alpha)
    if M.in_Fm(prior, F, m, xbar) is Verdict.FINITE:
        assert M.in_Fm(prior, F, m + 1, xbar) is Verdict.FINITE


@given(st.integers(1, 6), st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0, 1))
def test_fm_convex(m, a, b, t):
    F = E.exponential()
    prior = M.exp_inv_sq_prior(F)
    va, vb = M.in_Fm(prior, F, m, a), M.in_Fm(prior, F, m, b)
    if va is Verdict.FINITE and vb is Verdict.FINITE:
        assert M.in_Fm(prior, F, m, t * a + (1 - t) * b) is Verdict.FINITE
