import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as spi

from xmdl import expfam as E
from xmdl import jeffreys as J
from xmdl.quadrature import Verdict


def test_bernoulli_jeffreys_integral():
    res = J.jeffreys_integral(E.bernoulli())
    assert res.verdict is Verdict.FINITE
    assert res.value == pytest.approx(math.pi, abs=1e-9)


@pytest.mark.parametrize("fid", ["gaussian-location", "exponential", "poisson", "geometric", "gamma:k=2"])
def test_unbounded_families_have_infinite_jeffreys_integral(fid):
    assert J.jeffreys_integral(E.get_family(fid)).verdict is Verdict.DIVERGENT


@pytest.mark.parametrize("fid,m,xbar,expected", [
    ("bernoulli", 2, 0.5, math.pi / 2),
    ("bernoulli", 1, 1.0, math.pi / 2),                 # B(3/2, 1/2)
    ("poisson", 1, 0.0, math.sqrt(math.pi)),            # int y^-1/2 e^-y
    ("gaussian-location", 1, 0.7, math.sqrt(2 * math.pi)),
    ("exponential", 2, 1.0, math.e**2 / 4),             # e^2 int t e^-2t dt
])
def test_conditional_jeffreys_values(fid, m, xbar, expected):
    res = J.conditional_jeffreys(E.get_family(fid), m, xbar)
    assert res.verdict is Verdict.FINITE
    assert res.value == pytest.approx(expected, rel=1e-8)


@given(st.floats(0.05, 20.0))
def test_exponential_single_observation_gives_e(xbar):
    res = J.conditional_jeffreys(E.exponential(), 1, xbar)
    assert res.value == pytest.approx(math.e, rel=1e-8)


def test_conditional_jeffreys_agrees_with_scipy_for_poisson():
    F = E.poisson()
    f = lambda y: F.variance_fn(y) ** -0.5 * math.exp(-3 * E.divergence(F, 2.0, y))
    ref = spi.quad(f, 0, 2)[0] + spi.quad(f, 2, math.inf)[0]
    assert J.conditional_jeffreys(F, 3, 2.0).value == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("fid,verdict,rule,required", [
    ("bernoulli", J.Finiteness.FINITE, J.Rule.ANALYTIC_ENDPOINT, 0),
    ("exponential", J.Finiteness.FINITE, J.Rule.LIGHT_TAIL, 1),
    ("geometric", J.Finiteness.FINITE, J.Rule.LIGHT_TAIL, 1),
    ("gamma:k=3", J.Finiteness.FINITE, J.Rule.LIGHT_TAIL, 1),
    ("exp-cauchy", J.Finiteness.INFINITE, J.Rule.HEAVY_TAIL, None),
])
def test_diagnose(fid, verdict, rule, required):
    d = J.diagnose(E.get_family(fid))
    assert d.verdict is verdict
    assert d.rule is rule
    assert d.required_m == required


def test_diagnose_numeric_fallback():
    for fid in ("poisson", "gaussian-location"):
        d = J.diagnose(E.get_family(fid))
        assert d.rule is J.Rule.NUMERIC_FALLBACK
        assert d.verdict is J.Finiteness.FINITE and d.required_m == 1


def test_tail_metadata_validation():
    with pytest.raises(ValueError):
        J.TailMetadata(tail_class="Medium")
    with pytest.raises(ValueError):
        J.TailMetadata(heavy_tail_alpha=-1.0)


# exponentiated-Cauchy mixture

MODEL = J.ExpCauchyMixture()


def _Z_oracle(beta):
    """1/2 + 1/2 E exp(beta e^C) for C standard Cauchy, integrated directly over C."""
    g = lambda c: math.exp(beta * math.exp(c)) / (math.pi * (1 + c * c))
    split = -math.log(-beta)
    # beyond split + 6 the factor exp(beta e^c) is below e^-400
    v = spi.quad(g, -math.inf, split, limit=400, epsabs=1e-14)[0] \
        + spi.quad(g, split, split + 6, limit=400, epsabs=1e-14)[0]
    return 0.5 + 0.5 * v


@pytest.mark.parametrize("beta", [-1e-6, -1e-2, -0.5, -1.0, -10.0, -1e4])
def test_partition_function_matches_direct_integral(beta):
    assert MODEL.Z_beta(beta) == pytest.approx(_Z_oracle(beta), rel=1e-8)


@given(st.floats(-1e8, -1e-12))
def test_partition_function_between_half_and_one(beta):
    assert 0.5 <= MODEL.Z_beta(beta) <= 1.0


def test_partition_function_limits():
    assert MODEL.Z_beta(0.0) == 1.0
    assert MODEL.Z_beta(-math.inf) == 0.5
    with pytest.raises(Exception):
        MODEL.Z_beta(0.1)


def test_point_mass_divergence_is_one_bit():
    assert MODEL.point_mass_divergence_to_base() == pytest.approx(math.log(2), abs=1e-12)
    # reached continuously as beta -> -inf
    assert MODEL.divergence_L(0.0, 0.0) == pytest.approx(math.log(2 * MODEL.Z(0.0)))
    assert MODEL.divergence_to_base(-1e8) == pytest.approx(math.log(2), abs=1e-6)


@given(st.floats(-30, 30))
def test_divergence_to_base_below_one_bit(L):
    assert 0.0 <= MODEL.divergence_to_base(L) <= math.log(2) + 1e-12


@given(st.floats(-20, 20))
def test_fisher_information_bound_and_mean_inverse(L):
    assert MODEL.scaled_fisher(L) >= MODEL.fisher_lower_bound(L)
    mu = MODEL.mean(L)
    assert MODEL.L_of_mean(mu) == pytest.approx(L, abs=1e-9)


def test_mean_increasing():
    Ls = np.linspace(-15, 15, 61)
    means = [MODEL.log_mean(L) for L in Ls]
    assert all(b > a for a, b in zip(means, means[1:]))


def test_exp_cauchy_jeffreys_integrals_diverge():
    F = J.build_exp_cauchy()
    assert J.jeffreys_integral(F).verdict is Verdict.DIVERGENT
    for m in (1, 5, 20):
        assert J.conditional_jeffreys(F, m, 1.0).verdict is Verdict.DIVERGENT


def test_exp_cauchy_family_interface():
    F = J.build_exp_cauchy()
    assert F is E.get_family("exp-cauchy")
    mu0, mu1 = 0.4, 2.0
    # divergence from the canonical form agrees with the variance-function integral
    assert E.divergence(F, mu0, mu1) == pytest.approx(E.divergence_by_quadrature(F, mu0, mu1, 1e-9), rel=1e-6)
    assert E.divergence(F, 0.0, mu1) == pytest.approx(MODEL.divergence_L(0.0, MODEL.L_of_mean(mu1)))
