import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as spi
from scipy.special import betaln, comb

from xmdl import expfam as E
from xmdl import predict as P
from xmdl.errors import DomainError, InfeasibleHorizon, NotNormalizable, NotYetDefined


def test_kt_and_jeffreys_mixture_agree():
    F = E.bernoulli()
    kt, mix = P.KTBinary(F), P.BayesMixture(F, "jeffreys")
    assert math.exp(kt.step_log(2, 1, 1)) == 0.5
    rng = np.random.default_rng(3)
    xs = rng.integers(0, 2, 40).tolist()
    assert kt.log_prob(xs) == pytest.approx(mix.log_prob(xs), abs=1e-12)
    # closed form B(k + 1/2, n - k + 1/2) / B(1/2, 1/2)
    k = sum(xs)
    assert mix.log_prob(xs) == pytest.approx(betaln(k + 0.5, 40 - k + 0.5) - betaln(0.5, 0.5), abs=1e-12)


def test_flat_bernoulli_is_laplace():
    s = P.BayesMixture(E.bernoulli(), "flat")
    assert math.exp(s.step_log(0, 0, 1)) == 0.5
    assert math.exp(s.step_log(3, 2, 1)) == pytest.approx(3 / 5)


def test_gaussian_flat_predictive():
    s = P.BayesMixture(E.gaussian_location(), "flat")
    with pytest.raises(NotYetDefined):
        s.step_log(0, 0.0, 0.0)
    # predictive after one observation is N(xbar, 2)
    assert s.step_log(1, 0.0, 0.0) == pytest.approx(-0.5 * math.log(2 * math.pi * 2))
    assert s.step_log(1, 1.0, 2.0) == pytest.approx(-0.5 * math.log(4 * math.pi) - 0.25)


@pytest.mark.parametrize("fid,prior,m,S,xs", [
    ("bernoulli", "jeffreys", 2, 1, [0, 1]),
    ("bernoulli", "flat", 0, 0, [0, 1]),
    ("poisson", "jeffreys", 1, 2, [0, 1, 4]),
    ("poisson", "flat", 2, 3, [0, 2]),
    ("exponential", "jeffreys", 1, 1.5, [0.3, 2.0]),
    ("exponential", "flat", 2, 1.0, [0.5]),
    ("gamma:k=2", "jeffreys", 1, 2.0, [1.0, 3.0]),
    ("geometric", "jeffreys", 1, 2, [0, 3]),
    ("geometric", "flat", 2, 0, [0, 1]),
    ("gaussian-location", "flat", 2, 1.0, [-0.4, 1.3]),
])
def test_conjugate_matches_quadrature(fid, prior, m, S, xs):
    F = E.get_family(fid)
    a = P.BayesMixture(F, prior, method="conjugate")
    b = P.BayesMixture(F, prior, method="quadrature")
    for x in xs:
        assert a.step_log(m, S, x) == pytest.approx(b.step_log(m, S, x), abs=1e-8)


def test_exponential_jeffreys_needs_one_observation():
    s = P.BayesMixture(E.exponential(), "jeffreys")
    with pytest.raises(NotYetDefined):
        s.step_log(0, 0.0, 1.0)
    # after x1 the predictive is the Lomax density x1 / (x1 + x)^2
    assert s.step_log(1, 2.0, 1.0) == pytest.approx(math.log(2.0 / 9.0))


DISCRETE_SYSTEMS = [
    ("bernoulli", lambda F: P.BayesMixture(F, "jeffreys"), [0, 1]),
    ("bernoulli", lambda F: P.SNML(F), [0, 1]),
    ("bernoulli", lambda F: P.PlugIn(F), [0, 1]),
    ("bernoulli", lambda F: P.NML(F, 12), [0, 1]),
    ("poisson", lambda F: P.BayesMixture(F, "jeffreys"), range(400)),
    ("poisson", lambda F: P.SNML(F), range(400)),
    # the Beta-geometric predictive has a power tail; with m >= 4 the mass beyond 3000 is negligible
    ("geometric", lambda F: P.BayesMixture(F, "jeffreys"), range(3000)),
]
MIN_M = {"geometric": 4}


@pytest.mark.parametrize("fid,make,support", DISCRETE_SYSTEMS)
@given(data=st.data())
def test_predictive_sums_to_one(fid, make, support, data):
    F = E.get_family(fid)
    s = make(F)
    m = data.draw(st.integers(MIN_M.get(fid, 1), 10))
    S = data.draw(st.integers(0, m if fid == "bernoulli" else 3 * m))
    total = math.fsum(np.exp(s.next_log_probs(m, S, list(support))))
    assert total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("system", ["jeffreys", "snml", "plugin"])
def test_continuous_predictive_normalizes(system):
    F = E.exponential()
    s = P.get_system(system, F)
    f = lambda x: math.exp(s.step_log(2, 3.0, x))
    assert spi.quad(f, 0, 1.5)[0] + spi.quad(f, 1.5, math.inf, limit=200)[0] == pytest.approx(1.0, abs=1e-7)


@given(st.lists(st.integers(0, 1), min_size=2, max_size=12))
def test_chain_rule_and_prefixes(xs):
    s = P.SNML(E.bernoulli())
    n = len(xs)
    full = s.log_prob(xs)
    split = s.log_prob(xs[:n // 2]) + s.log_prob(xs, n // 2)
    assert full == pytest.approx(split, abs=1e-12)
    pref = s.log_prob_prefixes(xs, 0, range(1, n + 1))
    assert pref[-1] == pytest.approx(full, abs=1e-12)
    assert all(b <= a + 1e-15 for a, b in zip(pref, pref[1:]))


def test_snml_values():
    s = P.SNML(E.bernoulli())
    assert math.exp(s.step_log(1, 1, 1)) == pytest.approx(4 / 5)
    assert math.exp(s.step_log(0, 0, 1)) == pytest.approx(0.5)
    assert math.exp(s.step_log(2, 1, 1)) == pytest.approx(0.5)


def test_nml():
    F = E.bernoulli()
    s = P.NML(F, 2)
    assert math.exp(s.log_prob([1, 1])) == pytest.approx(2 / 5)
    assert math.exp(s.log_prob([0, 1])) == pytest.approx(1 / 10)
    with pytest.raises(InfeasibleHorizon):
        P.NML(F, 2, m=3)
    with pytest.raises(NotNormalizable):
        P.NML(E.poisson(), 4)


@pytest.mark.parametrize("n", [1, 2, 5, 10, 17])
def test_shtarkov_brute_force(n):
    ref = math.log(sum(comb(n, k) * (k / n) ** k * (1 - k / n) ** (n - k) for k in range(n + 1)))
    assert P.log_shtarkov_bernoulli(n) == pytest.approx(ref, abs=1e-12)


def test_nml_equalizer():
    F = E.bernoulli()
    s = P.NML(F, 8)
    regs = [P.regret2(s, x).regret2_nats for x in itertools.product((0, 1), repeat=8)]
    assert max(regs) - min(regs) <= 1e-10
    assert regs[0] == pytest.approx(P.log_shtarkov_bernoulli(8), abs=1e-10)


def test_exchangeability():
    F = E.bernoulli()
    assert P.exchangeability_probe(P.BayesMixture(F, "jeffreys"), 8) <= 1e-12
    assert P.exchangeability_probe(P.BayesMixture(F, "flat"), 6, m=1) <= 1e-12
    assert P.exchangeability_probe(P.SNML(F), 6) > 1e-3


def test_regret_gap_bernoulli():
    F = E.bernoulli()
    s = P.BayesMixture(F, "jeffreys")
    gaps = [P.regret_gap_experiment(s, P.iid_generator(F, 0.5, seed), 0, [4096])[-1].gap for seed in range(8)]
    assert np.mean(gaps) == pytest.approx(math.log(math.pi), abs=0.05)
    with pytest.raises(ValueError):
        P.regret_gap_experiment(s, P.iid_generator(F, 0.5, 0), 0, [10, 10])


def test_regret_gap_exponential_conditional():
    # with m = 1 the gap tends to ln J|x^1 + ln P^{x1}(x1); the conditional gap tends to ln e = 1
    F = E.exponential()
    s = P.BayesMixture(F, "jeffreys")
    prefix = [1.0]
    t = P.regret_gap_target(F, 1, prefix)
    assert t["log_J"] == pytest.approx(1.0, abs=1e-8)
    assert t["gap_limit"] == pytest.approx(0.0, abs=1e-8)
    recs = [P.regret_gap_experiment(s, P.iid_generator(F, 1.0, seed), 1, [20000], prefix)[-1]
            for seed in range(8)]
    assert np.mean([r.gap for r in recs]) == pytest.approx(t["gap_limit"], abs=0.1)
    assert np.mean([r.conditional_gap for r in recs]) == pytest.approx(1.0, abs=0.1)


def test_regret_record_consistency():
    F = E.poisson()
    s = P.BayesMixture(F, "jeffreys")
    xs = [2, 0, 3, 1, 1]
    with pytest.raises(NotYetDefined):
        P.regret2(s, xs)
    rec = P.regret2(s, xs, m=1)
    assert rec.regret2_nats == pytest.approx(-rec.log_q + rec.log_ml)
    assert rec.gap == pytest.approx(rec.regret2_nats - 0.5 * math.log(5 / (2 * math.pi)))
    assert rec.prefix_log_ml == pytest.approx(E.max_log_likelihood(F, xs[:1]))


def test_races():
    F = E.bernoulli()
    A, B = P.BayesMixture(F, "jeffreys"), P.PlugIn(F)
    seq, best = P.exhaustive_race(A, B, 10)
    beam = P.regret_race(A, B, 10, beam_width=8)
    assert beam.terminal_gap <= best + 1e-12
    assert beam.terminal_gap == pytest.approx(best, abs=1e-9)
    # and the other way around: plug-in can also win on some sequence
    _, back = P.exhaustive_race(B, A, 10)
    assert back > 0 and best > 0
    capped = P.regret_race(A, B, 10, budget=5)
    assert capped.exhausted


def test_get_system():
    F = E.bernoulli()
    assert isinstance(P.get_system("kt", F), P.KTBinary)
    with pytest.raises(InfeasibleHorizon):
        P.get_system("nml", F)
    with pytest.raises(DomainError):
        P.get_system("kt", E.poisson())
    with pytest.raises(DomainError):
        P.get_system("oracle", F)
