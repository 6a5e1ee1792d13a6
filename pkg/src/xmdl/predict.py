"""Sequential prediction systems and regret-2 instrumentation.

Every system predicts the next observation from the sufficient statistic
(m, S) where S = m * xbar is the running sum; `predict_log(m, xbar, x)` is
the public form.  Sequence probabilities are chained step by step, so the
chain rule holds by construction, and the sum is kept exactly (integer sums
for discrete data) to avoid drift in xbar.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.special import betaln, gammaln, logsumexp

from .errors import DomainError, InfeasibleHorizon, NotNormalizable, NotYetDefined
from .expfam import TAU, ExpFamily1D, divergence, log_density, max_log_likelihood, sample
from .measures import PosteriorState, PriorMeasure, flat_prior, get_prior, jeffreys_prior
from .quadrature import DEFAULT_TOL, Verdict, integrate_log

SNML_TAIL = 1e-17


class PredictionSystem:
    """Interface: a consistent predictor depending on the past only through (m, S)."""

    name = "system"
    exchangeable = False

    def __init__(self, family: ExpFamily1D, min_conditioning: int = 0):
        self.family = family
        self.min_conditioning = min_conditioning

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.family.name!r})"

    def step_log(self, m: int, S: float, x) -> float:
        raise NotImplementedError

    def predict_log(self, m: int, xbar: float, x) -> float:
        """log Q(x | x^m) where x^m has length m and average xbar."""
        S = 0.0 if m == 0 else m * xbar
        if self.family.discrete:
            S = round(S)
        return self.step_log(m, S, x)

    def log_prob(self, xs: Sequence, m: int = 0) -> float:
        """ln Q(x^n | x^m), chaining one-step predictions from position m to n."""
        return float(self.log_prob_prefixes(xs, m, [len(xs)])[0])

    def log_prob_prefixes(self, xs: Sequence, m: int, horizons: Iterable[int]) -> np.ndarray:
        """ln Q(x^h | x^m) for each h in `horizons` (sorted, m <= h <= len(xs))."""
        hs = list(horizons)
        xs = _as_obs(self.family, xs)
        if any(h < m or h > len(xs) for h in hs):
            raise InfeasibleHorizon("horizons must satisfy m <= h <= len(x)")
        S = _running_sum(xs[:m])
        out = np.empty(len(hs))
        acc, pos = 0.0, m
        for j, h in enumerate(hs):
            for i in range(pos, h):
                acc += self.step_log(i, S, xs[i])
                S += xs[i]
            pos = max(pos, h)
            out[j] = acc
        return out

    def next_log_probs(self, m: int, S: float, support: Sequence) -> np.ndarray:
        return np.array([self.step_log(m, S, x) for x in support])


def _as_obs(F: ExpFamily1D, xs):
    if F.discrete:
        return [int(x) for x in xs]
    return [float(x) for x in xs]


def _running_sum(xs):
    return sum(xs) if xs else 0


# ---------------------------------------------------------------------------
# Bayes mixtures

class _Conjugate:
    """Closed-form marginal likelihood up to the prior constant, plus per-observation base terms."""

    def defined(self, n, S) -> bool:
        raise NotImplementedError

    def log_marg(self, n, S):
        raise NotImplementedError

    def base(self, x):
        return 0.0

    def step(self, m, S, x):
        return self.log_marg(m + 1, S + x) - self.log_marg(m, S) + self.base(x)


class _BetaBernoulli(_Conjugate):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def defined(self, n, S):
        return S + self.a > 0 and n - S + self.b > 0

    def log_marg(self, n, S):
        return betaln(S + self.a, n - S + self.b)

    def step(self, m, S, x):
        num = S + self.a if x == 1 else m - S + self.b
        return math.log(num / (m + self.a + self.b))


class _GammaPoisson(_Conjugate):
    def __init__(self, a):
        self.a = a

    def defined(self, n, S):
        return n > 0 and S + self.a > 0

    def log_marg(self, n, S):
        return gammaln(S + self.a) - (S + self.a) * np.log(n)

    def base(self, x):
        return -gammaln(x + 1.0)


class _InverseGammaScale(_Conjugate):
    """Gamma family with shape k under prior density y^p on the mean."""

    def __init__(self, k, p):
        self.k, self.p = k, p

    def _alpha(self, n):
        return n * self.k - self.p - 1.0

    def defined(self, n, S):
        return S > 0 and self._alpha(n) > 0

    def log_marg(self, n, S):
        k, al = self.k, self._alpha(n)
        return n * k * math.log(k) - n * gammaln(k) + gammaln(al) - al * np.log(k * S)

    def base(self, x):
        return (self.k - 1.0) * math.log(x) if self.k != 1.0 else 0.0


class _GaussFlat(_Conjugate):
    def defined(self, n, S):
        return n > 0

    def log_marg(self, n, S):
        return -0.5 * n * math.log(TAU) + S * S / (2.0 * n) + 0.5 * math.log(TAU / n)

    def base(self, x):
        return -0.5 * x * x


class _BetaGeometric(_Conjugate):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def defined(self, n, S):
        return S + self.a > 0 and n + self.b > 0

    def log_marg(self, n, S):
        return betaln(S + self.a, n + self.b)


def _conjugate_for(F: ExpFamily1D, prior_label: str) -> Optional[_Conjugate]:
    name = F.name
    if prior_label not in ("jeffreys", "flat"):
        return None
    jeff = prior_label == "jeffreys"
    if name == "bernoulli":
        return _BetaBernoulli(0.5, 0.5) if jeff else _BetaBernoulli(1.0, 1.0)
    if name == "poisson":
        return _GammaPoisson(0.5 if jeff else 1.0)
    if name == "gaussian-location":
        return _GaussFlat()
    if name == "geometric":
        return _BetaGeometric(0.5, 0.0) if jeff else _BetaGeometric(1.0, -1.0)
    if "k" in F.params and F.mean_range.mu_inf == 0 and not F.discrete:
        return _InverseGammaScale(F.params["k"], -1.0 if jeff else 0.0)
    return None


class BayesMixture(PredictionSystem):
    """Posterior-weighted mixture of family members under a (possibly improper) prior.

    method="quadrature" integrates the predictive against the posterior
    numerically; "conjugate" uses closed-form marginal likelihoods for the
    catalog's Jeffreys and flat priors; "auto" prefers the closed form.
    """

    exchangeable = True

    def __init__(self, family: ExpFamily1D, prior: PriorMeasure | str = "jeffreys",
                 method: str = "auto", tol: float = DEFAULT_TOL):
        super().__init__(family)
        self.prior = get_prior(prior, family) if isinstance(prior, str) else prior
        self.name = self.prior.label
        self.tol = tol
        conj = _conjugate_for(family, self.prior.label) if method in ("auto", "conjugate") else None
        if method == "conjugate" and conj is None:
            raise DomainError(f"no conjugate form for {family.name} with prior {self.prior.label}")
        if method not in ("auto", "conjugate", "quadrature"):
            raise ValueError(f"unknown method {method!r}")
        self._conj = conj
        self.method = "conjugate" if conj is not None else "quadrature"
        self._normalizers: dict = {}

    def __repr__(self) -> str:
        return f"BayesMixture({self.family.name!r}, {self.prior.label!r}, method={self.method!r})"

    def _posterior_log_norm(self, m, S) -> float:
        key = (m, S)
        if key not in self._normalizers:
            state = PosteriorState(self.prior, self.family, m, S / m if m else math.nan, self.tol)
            res = state.normalizer
            if res.verdict is not Verdict.FINITE:
                raise NotYetDefined(f"posterior after m={m}, xbar={S / m if m else math.nan:g} is "
                                    f"{res.verdict.value}; more conditioning is needed")
            self._normalizers[key] = (state, res.log_value)
        return self._normalizers[key]

    def step_log(self, m, S, x) -> float:
        if self._conj is not None:
            if not self._conj.defined(m, S):
                raise NotYetDefined(f"{self.name} mixture undefined at m={m}, S={S}")
            return float(self._conj.step(m, S, x))
        state, log_norm = self._posterior_log_norm(m, S)
        F = self.family

        def logf(y):
            lp = state.log_unnormalized(y)
            if not lp > -math.inf:
                return lp
            return lp + log_density(F, y, x)

        sup = self.prior.support
        c = (S + x) / (m + 1)
        c = c if sup.interior(c) else F.anchor_mean
        s = math.sqrt(F.variance_fn(c) / (m + 1))
        gap = min(c - sup.mu_inf, sup.mu_sup - c)
        s = min(s, 0.5 * gap) if math.isfinite(gap) else s
        res = integrate_log(logf, sup.mu_inf, sup.mu_sup, self.tol, center=c, scale=s)
        if res.verdict is not Verdict.FINITE:
            raise NotNormalizable(f"predictive integral is {res.verdict.value}")
        return res.log_value - log_norm

    def log_prob_prefixes(self, xs, m, horizons) -> np.ndarray:
        conj = self._conj
        if conj is None or type(conj).step is not _Conjugate.step:
            return super().log_prob_prefixes(xs, m, horizons)
        # vectorized closed form: ln M(h, S_h) - ln M(m, S_m) + base terms
        hs = np.asarray(list(horizons), dtype=int)
        arr = np.asarray(_as_obs(self.family, xs), dtype=float)
        if np.any(hs < m) or np.any(hs > arr.size):
            raise InfeasibleHorizon("horizons must satisfy m <= h <= len(x)")
        csum = np.concatenate([[0.0], np.cumsum(arr)])
        Sm = csum[m]
        if not conj.defined(m, Sm):
            raise NotYetDefined(f"{self.name} mixture undefined at m={m}")
        base = np.concatenate([[0.0], np.cumsum([conj.base(x) for x in arr])])
        lm = np.array([conj.log_marg(int(h), csum[h]) for h in hs], dtype=float)
        return lm - float(conj.log_marg(m, Sm)) + base[hs] - base[m]


def jeffreys_mixture(family: ExpFamily1D, **kw) -> BayesMixture:
    return BayesMixture(family, jeffreys_prior(family), **kw)


def bayes_mixture(family: ExpFamily1D, prior: PriorMeasure | str, method: str = "auto") -> BayesMixture:
    return BayesMixture(family, prior, method)


class KTBinary(PredictionSystem):
    """Bernoulli predictor (k + 1/2)/(m + 1), computed in exact integer form."""

    name = "kt"
    exchangeable = True

    def step_log(self, m, S, x):
        k = int(S)
        return math.log((2 * (k if x == 1 else m - k) + 1) / (2 * m + 2))


# ---------------------------------------------------------------------------
# normalized maximum likelihood

class SNML(PredictionSystem):
    """Sequential NML: next symbol weighted by the maximized likelihood of the extended string."""

    name = "snml"

    def __init__(self, family: ExpFamily1D, tol: float = DEFAULT_TOL, support_cap: int = 1 << 16):
        super().__init__(family)
        self.tol = tol
        self.support_cap = support_cap

    def _log_weight(self, m, S, x) -> float:
        F = self.family
        mu = (S + x) / (m + 1)
        lw = log_density(F, mu, x) if F.mean_range.contains(mu) else -math.inf
        if m > 0:
            d = divergence(F, S / m, mu)
            lw -= m * d
        return lw

    def _log_normalizer(self, m, S) -> float:
        F = self.family
        if F.discrete:
            if F.finite_support:
                return float(logsumexp([self._log_weight(m, S, x) for x in F.support]))
            ws, total_max = [], -math.inf
            for x in range(int(F.support[0]), self.support_cap):
                w = self._log_weight(m, S, x)
                ws.append(w)
                total_max = max(total_max, w)
                if x > max(S / max(m, 1), 1.0) * 2 + 20 and w < total_max + math.log(SNML_TAIL):
                    break
            else:
                raise NotNormalizable("SNML weights did not decay within the support cap")
            return float(logsumexp(ws))
        lo, hi = F.support
        c = S / m if m > 0 else F.anchor_mean
        res = integrate_log(lambda x: self._log_weight(m, S, x), lo, hi, self.tol, center=c, scale=1.0)
        if res.verdict is not Verdict.FINITE:
            raise NotNormalizable(f"SNML normalizer is {res.verdict.value}")
        return res.log_value

    def step_log(self, m, S, x) -> float:
        return self._log_weight(m, S, x) - self._log_normalizer(m, S)

    def next_log_probs(self, m, S, support):
        lz = self._log_normalizer(m, S)
        return np.array([self._log_weight(m, S, x) - lz for x in support])


def _log_ml_counts(n: int, K: np.ndarray) -> np.ndarray:
    """ln[(K/n)^K (1 - K/n)^(n-K)] for a vector of counts."""
    K = np.asarray(K, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(K > 0, K * np.log(K / n), 0.0)
        b = np.where(n - K > 0, (n - K) * np.log((n - K) / n), 0.0)
    return a + b


def log_shtarkov_bernoulli(n: int) -> float:
    """ln sum_k C(n,k) (k/n)^k (1-k/n)^(n-k), the Bernoulli minimax regret at horizon n."""
    if n == 0:
        return 0.0
    K = np.arange(n + 1)
    logc = gammaln(n + 1.0) - gammaln(K + 1.0) - gammaln(n - K + 1.0)
    return float(logsumexp(logc + _log_ml_counts(n, K)))


class NML(PredictionSystem):
    """Bernoulli NML at a fixed horizon n, exposed through its conditionals.

    The joint law over x^n is proportional to its maximized likelihood; the
    conditional of the next symbol after j symbols with k ones is
    W(j+1, k+x) / W(j, k) with W(j, k) the total weight of all completions.
    """

    name = "nml"

    def __init__(self, family: ExpFamily1D, horizon: int, m: int = 0):
        if not family.discrete:
            raise NotNormalizable("NML over a continuous sample space is not implemented")
        if not family.finite_support:
            raise NotNormalizable(f"Shtarkov sum over the unbounded support of {family.name} is not handled")
        if family.name != "bernoulli":
            raise DomainError("NML is implemented for the Bernoulli family")
        if horizon < m:
            raise InfeasibleHorizon(f"horizon {horizon} shorter than conditioning length {m}")
        super().__init__(family, m)
        self.horizon = horizon
        K = np.arange(horizon + 1)
        self._lw = _log_ml_counts(horizon, K)
        self._cache: dict = {}

    def log_W(self, j: int, k: int) -> float:
        key = (j, k)
        if key not in self._cache:
            n = self.horizon
            r = n - j
            t = np.arange(r + 1)
            logc = gammaln(r + 1.0) - gammaln(t + 1.0) - gammaln(r - t + 1.0)
            self._cache[key] = float(logsumexp(logc + self._lw[k + t]))
        return self._cache[key]

    def log_shtarkov(self) -> float:
        return self.log_W(0, 0)

    def step_log(self, m, S, x) -> float:
        if m >= self.horizon:
            raise InfeasibleHorizon(f"NML with horizon {self.horizon} cannot predict position {m + 1}")
        k = int(S)
        return self.log_W(m + 1, k + int(x)) - self.log_W(m, k)


def nml(family: ExpFamily1D, n: int, m: int = 0, xbar: float | None = None) -> NML:
    return NML(family, n, m)


# ---------------------------------------------------------------------------
# plug-in

class PlugIn(PredictionSystem):
    """Plug-in ML with additive smoothing: mu_hat = (S + c*mu0)/(m + c)."""

    name = "plugin"

    def __init__(self, family: ExpFamily1D, pseudo_count: float = 0.1, center: float | None = None):
        super().__init__(family)
        if pseudo_count <= 0:
            raise ValueError("pseudo_count must be positive")
        self.c = pseudo_count
        self.center = family.anchor_mean if center is None else center

    def step_log(self, m, S, x) -> float:
        mu = (S + self.c * self.center) / (m + self.c)
        return log_density(self.family, mu, x)


class FixedElement(PredictionSystem):
    """An i.i.d. predictor using a single family member for every symbol."""

    name = "fixed"
    exchangeable = True

    def __init__(self, family: ExpFamily1D, mu: float):
        super().__init__(family)
        self.mu = mu

    def step_log(self, m, S, x) -> float:
        return log_density(self.family, self.mu, x)


SYSTEMS = ("jeffreys", "flat", "snml", "nml", "plugin", "kt")


def get_system(system_id: str, family: ExpFamily1D, *, horizon: int | None = None, m: int = 0,
               prior: str | None = None) -> PredictionSystem:
    sid = system_id.lower()
    if sid in ("jeffreys", "flat"):
        return BayesMixture(family, prior or sid)
    if sid == "mixture":
        return BayesMixture(family, prior or "jeffreys")
    if sid == "snml":
        return SNML(family)
    if sid == "plugin":
        return PlugIn(family)
    if sid == "kt":
        if family.name != "bernoulli":
            raise DomainError("kt is a Bernoulli predictor")
        return KTBinary(family)
    if sid == "nml":
        if horizon is None:
            raise InfeasibleHorizon("nml needs a horizon")
        return NML(family, horizon, m)
    raise DomainError(f"unknown system {system_id!r}; known: {', '.join(SYSTEMS)}")


# ---------------------------------------------------------------------------
# regret

@dataclass(frozen=True)
class RegretRecord:
    """Regret-2 of a predictor at horizon n after conditioning on m symbols.

    `gap` is regret2 - (1/2) ln(n/tau).  `prefix_log_ml` is ln P^{xbar_m}(x^m),
    the maximized likelihood of the conditioning string; `conditional_gap`
    removes it, which makes the limit ln(J|x^m) for Jeffreys mixtures.
    """

    n: int
    m: int
    regret2_nats: float
    gap: float
    log_q: float = math.nan
    log_ml: float = math.nan
    prefix_log_ml: float = 0.0

    @property
    def conditional_gap(self) -> float:
        return self.gap - self.prefix_log_ml


def _gap(regret: float, n: int) -> float:
    return regret - 0.5 * math.log(n / TAU)


def regret2(system: PredictionSystem, x: Sequence, m: int = 0) -> RegretRecord:
    """-ln Q(x^n|x^m) + ln P^{xbar(x^n)}(x^n)."""
    n = len(x)
    if n < m:
        raise InfeasibleHorizon("sequence shorter than the conditioning length")
    F = system.family
    log_q = system.log_prob(x, m)
    log_ml = max_log_likelihood(F, x)
    reg = -log_q + log_ml
    pre = max_log_likelihood(F, list(x)[:m]) if m > 0 else 0.0
    return RegretRecord(n, m, reg, _gap(reg, n) if n > 0 else math.nan, log_q, log_ml, pre)


def _prefix_ml(F: ExpFamily1D, arr: np.ndarray, hs: np.ndarray) -> np.ndarray:
    out = np.empty(len(hs))
    for j, h in enumerate(hs):
        out[j] = max_log_likelihood(F, arr[:h])
    return out


def iid_generator(F: ExpFamily1D, mu: float, seed: int) -> Callable[[int], np.ndarray]:
    """Seeded i.i.d. sampler from P^mu (numpy PCG64)."""
    def gen(n: int) -> np.ndarray:
        return sample(F, mu, n, np.random.default_rng(seed))
    return gen


def regret_gap_experiment(system: PredictionSystem, generator, m: int, horizons: Sequence[int],
                          prefix: Sequence | None = None) -> list[RegretRecord]:
    """Regret records along one trajectory at each horizon.

    `generator` is either a sequence (at least max(horizons) long) or a
    callable n -> array.  When `prefix` is given it replaces the first m
    symbols, fixing the conditioning string.
    """
    hs = sorted(int(h) for h in horizons)
    if any(b <= a for a, b in zip(hs, hs[1:])):
        raise ValueError("horizons must be strictly increasing")
    if hs and hs[0] < max(m, 1):
        raise InfeasibleHorizon("horizons must be at least max(m, 1)")
    N = hs[-1]
    arr = np.asarray(generator(N) if callable(generator) else generator, dtype=float)[:N].copy()
    if prefix is not None:
        arr[:m] = np.asarray(prefix, dtype=float)[:m]
    F = system.family
    log_q = system.log_prob_prefixes(arr, m, hs)
    log_ml = _prefix_ml(F, arr, np.asarray(hs))
    pre = max_log_likelihood(F, arr[:m]) if m > 0 else 0.0
    out = []
    for h, lq, lml in zip(hs, log_q, log_ml):
        reg = -float(lq) + float(lml)
        out.append(RegretRecord(h, m, reg, _gap(reg, h), float(lq), float(lml), pre))
    return out


def regret_gap_target(family: ExpFamily1D, m: int, prefix: Sequence | None = None) -> dict:
    """Limits the gap of a Jeffreys mixture should approach.

    Returns ln(J|x^m) and the limit of the gap as defined here,
    ln(J|x^m) + ln P^{xbar_m}(x^m).  They coincide for m = 0.
    """
    from .jeffreys import conditional_jeffreys, jeffreys_integral

    if m == 0:
        res = jeffreys_integral(family)
        pre = 0.0
    else:
        xs = list(prefix)[:m]
        res = conditional_jeffreys(family, m, float(np.mean(xs)))
        pre = max_log_likelihood(family, xs)
    if res.verdict is not Verdict.FINITE:
        return {"verdict": res.verdict.value, "log_J": math.inf, "gap_limit": math.inf, "prefix_log_ml": pre}
    lj = res.log_value if res.log_value is not None else math.log(res.value)
    return {"verdict": res.verdict.value, "log_J": lj, "gap_limit": lj + pre, "prefix_log_ml": pre}


# ---------------------------------------------------------------------------
# exchangeability and races

def _binary_strings(n: int):
    return itertools.product((0, 1), repeat=n)


def exchangeability_probe(system: PredictionSystem, n: int, m: int = 0) -> float:
    """Max |ln Q(x^n|x^m) - ln Q(y^n|x^m)| over binary strings sharing the prefix and the count.

    Permutations are taken over the continuation x_{m+1..n}; strings are
    grouped by (prefix, number of ones in the continuation).
    """
    groups: dict = {}
    for s in _binary_strings(n):
        try:
            lq = system.log_prob(s, m)
        except NotYetDefined:
            continue
        key = (s[:m], sum(s[m:]))
        lo, hi = groups.get(key, (math.inf, -math.inf))
        groups[key] = (min(lo, lq), max(hi, lq))
    return max((hi - lo for lo, hi in groups.values() if math.isfinite(hi - lo)), default=0.0)


class SearchBudgetExhausted(Exception):
    pass


@dataclass
class RaceResult:
    sequence: list
    gap_trace: list
    exhausted: bool = False
    expansions: int = 0

    @property
    def terminal_gap(self) -> float:
        return self.gap_trace[-1] if self.gap_trace else 0.0


def _race_trace(A: PredictionSystem, B: PredictionSystem, seq, m) -> list:
    """REG_B - REG_A = ln Q_A - ln Q_B at every prefix length after m."""
    hs = list(range(m + 1, len(seq) + 1))
    if not hs:
        return []
    return [float(v) for v in A.log_prob_prefixes(seq, m, hs) - B.log_prob_prefixes(seq, m, hs)]


def regret_race(systemA: PredictionSystem, systemB: PredictionSystem, n: int, *, prefix: Sequence = (),
                beam_width: int = 8, budget: int | None = None) -> RaceResult:
    """Beam search over binary continuations maximizing REG_B - REG_A at length n.

    The ML term cancels in the difference, so the score is ln Q_A - ln Q_B.
    States with equal (length, count) are merged when both systems are
    exchangeable.  `budget` caps the number of one-step expansions; hitting it
    returns the best sequence found so far with `exhausted` set.
    """
    F = systemA.family
    if not (F.discrete and F.finite_support):
        raise DomainError("regret races enumerate a finite alphabet")
    prefix = [int(v) for v in prefix]
    m = len(prefix)
    alphabet = list(F.support)
    merge = systemA.exchangeable and systemB.exchangeable
    beam = [(0.0, prefix, sum(prefix))]
    expansions = 0
    exhausted = False
    for pos in range(m, n):
        cand: dict = {}
        for score, seq, S in beam:
            for a in alphabet:
                if budget is not None and expansions >= budget:
                    exhausted = True
                    break
                expansions += 1
                try:
                    s = score + systemA.step_log(pos, S, a) - systemB.step_log(pos, S, a)
                except (NotYetDefined, NotNormalizable):
                    continue
                new = (s, seq + [a], S + a)
                key = (S + a) if merge else tuple(new[1])
                if key not in cand or cand[key][0] < s:
                    cand[key] = new
            if exhausted:
                break
        if not cand:
            break
        beam = sorted(cand.values(), key=lambda t: -t[0])[:beam_width]
        if exhausted:
            break
    best = max(beam, key=lambda t: t[0])[1]
    return RaceResult(best, _race_trace(systemA, systemB, best, m), exhausted, expansions)


def exhaustive_race(systemA: PredictionSystem, systemB: PredictionSystem, n: int,
                    prefix: Sequence = ()) -> tuple[list, float]:
    """Best continuation and terminal ln Q_A - ln Q_B by full enumeration (small n only).

    Walks the tree of continuations depth first, so each node costs one
    prediction per system.
    """
    prefix = [int(v) for v in prefix]
    alphabet = list(systemA.family.support)
    best, best_gap = None, -math.inf
    stack = [(prefix, sum(prefix), 0.0)]
    while stack:
        seq, S, score = stack.pop()
        pos = len(seq)
        if pos == n:
            if score > best_gap:
                best, best_gap = seq, score
            continue
        for a in alphabet:
            try:
                d = systemA.step_log(pos, S, a) - systemB.step_log(pos, S, a)
            except (NotYetDefined, NotNormalizable):
                continue
            stack.append((seq + [a], S + a, score + d))
    return best, best_gap
