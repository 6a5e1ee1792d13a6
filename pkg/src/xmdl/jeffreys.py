"""Jeffreys densities, (conditional) Jeffreys integrals and their finiteness rules.

The exponentiated-Cauchy mixture family also lives here: its base measure is
a half/half mixture of a point mass at 0 and the law of exp(Y) for a
standard Cauchy Y.  It has no closed forms, so everything is computed in the
coordinate L = -ln|beta| on the canonical half line beta < 0.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate as _spi
from scipy import optimize as _spo

from .errors import DomainError
from .expfam import TAU, ExpFamily1D, MeanRange
from .measures import PosteriorState, jeffreys_prior, prior_normalizer
from .quadrature import DEFAULT_TOL, QuadratureResult, Verdict, integrate, integrate_log


@dataclass(frozen=True)
class JeffreysPrior:
    family: ExpFamily1D

    def density(self, y: float) -> float:
        return 1.0 / math.sqrt(self.family.variance_fn(y))

    def log_density(self, y: float) -> float:
        return -0.5 * math.log(self.family.variance_fn(y))


def _model(F: ExpFamily1D):
    return F.params.get("model")


def jeffreys_integral(F: ExpFamily1D, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Total mass of V^(-1/2) over the mean range."""
    model = _model(F)
    if model is not None:
        return model.jeffreys_integral(tol)
    r = F.mean_range
    c = F.anchor_mean
    gap = min(c - r.mu_inf, r.mu_sup - c)
    scale = min(1.0, 0.5 * gap) if math.isfinite(gap) else 1.0
    V = F.variance_fn
    return integrate(lambda y: 1.0 / math.sqrt(V(y)), r.mu_inf, r.mu_sup, tol, center=c, scale=scale)


def conditional_jeffreys(F: ExpFamily1D, m: int, xbar: float, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Integral of exp(-m D(xbar||x)) V(x)^(-1/2) over the mean range."""
    if m < 1:
        raise DomainError("conditional Jeffreys integral needs m >= 1")
    model = _model(F)
    if model is not None:
        return model.conditional_jeffreys(m, xbar, tol)
    return prior_normalizer(PosteriorState(jeffreys_prior(F), F, m, xbar, tol))


# ---------------------------------------------------------------------------
# exponentiated-Cauchy mixture

_LOW = -40.0   # below this exp(-e^w) = 1 to double precision
_HIGH = 6.0    # above this exp(-e^w) < 1e-175


class ExpCauchyMixture:
    """Exponential family generated by Q = 1/2 delta_0 + 1/2 exp(Cauchy).

    Canonical parameters are beta = -exp(-L) for real L; beta -> -inf is the
    point mass at 0 and beta -> 0 recovers Q, whose mean is infinite.
    """

    def __init__(self, cache_size: int = 1 << 16):
        self._moments = lru_cache(maxsize=cache_size)(self._moments_uncached)
        self.L_of_mean = lru_cache(maxsize=cache_size)(self._L_of_mean)

    @staticmethod
    def _moments_uncached(L: float) -> tuple[float, float, float]:
        """(Z, e^-L Z', e^-2L Z'') at beta = -e^-L."""
        def tail(k):
            g = lambda w: math.exp(k * w - math.exp(w)) / (1.0 + (w + L) ** 2)
            pts = [-L] if _LOW + 20 * (k > 0) < -L < _HIGH else None
            lo = _LOW - (20.0 if k > 0 else 0.0)
            v, _ = _spi.quad(g, lo, _HIGH, epsabs=1e-15, epsrel=1e-13, limit=400, points=pts)
            return v
        z = 0.5 + (math.atan2(1.0, -(L + _LOW)) + tail(0)) / TAU
        return z, tail(1) / TAU, tail(2) / TAU

    def Z(self, L: float) -> float:
        return self._moments(float(L))[0]

    def Z_beta(self, beta: float) -> float:
        if beta > 0:
            raise DomainError("the partition function is infinite for beta > 0")
        if beta == 0:
            return 1.0
        if beta == -math.inf:
            return 0.5
        return self.Z(-math.log(-beta))

    def log_mean(self, L: float) -> float:
        z, s1, _ = self._moments(float(L))
        return L + math.log(s1 / z)

    def mean(self, L: float) -> float:
        lm = self.log_mean(L)
        return math.exp(lm) if lm < 709.0 else math.inf

    def scaled_fisher(self, L: float) -> float:
        """beta^2 * I_beta, the Fisher information in log|beta| coordinates."""
        z, s1, s2 = self._moments(float(L))
        return max(s2 / z - (s1 / z) ** 2, 0.0)

    def fisher(self, L: float) -> float:
        return math.exp(2.0 * L) * self.scaled_fisher(L)

    @staticmethod
    def fisher_lower_bound(L: float) -> float:
        """Analytic lower bound 1/(81 tau e (1 + L^2)) on beta^2 I_beta."""
        return 1.0 / (81.0 * TAU * math.e * (1.0 + L * L))

    def _L_of_mean(self, mu: float) -> float:
        """Invert the (increasing) mean-value map by bracketing and Brent's method."""
        if not mu > 0 or math.isinf(mu):
            raise DomainError("mean must lie in (0, inf)")
        target = math.log(mu)
        g = lambda L: self.log_mean(L) - target
        lo, hi = target - 4.0, target + 4.0
        while g(lo) > 0:
            lo -= 2.0 * (hi - lo)
        while g(hi) < 0:
            hi += 2.0 * (hi - lo)
        return _spo.brentq(g, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)

    @staticmethod
    def beta(L: float) -> float:
        return -math.exp(-L)

    def divergence_L(self, mu0: float, L1: float) -> float:
        """D(P^mu0 || Q_beta(L1)); mu0 = 0 is the point mass at 0."""
        z1 = self.Z(L1)
        if mu0 == 0:
            return math.log(2.0 * z1)
        L0 = self.L_of_mean(mu0)
        return max((self.beta(L0) - self.beta(L1)) * mu0 - math.log(self.Z(L0)) + math.log(z1), 0.0)

    def divergence_to_base(self, L: float) -> float:
        """D(Q_beta || Q) = beta mu - ln Z(beta)."""
        z, s1, _ = self._moments(float(L))
        return -s1 / z - math.log(z)

    def point_mass_divergence_to_base(self) -> float:
        """D(delta_0 || Q) = -ln Q({0})."""
        return -math.log(0.5 / self.Z_beta(0.0))

    def log_jeffreys_L(self, L: float) -> float:
        return 0.5 * math.log(self.scaled_fisher(L))

    def jeffreys_integral(self, tol: float = DEFAULT_TOL) -> QuadratureResult:
        return integrate(lambda L: math.exp(self.log_jeffreys_L(L)), -math.inf, math.inf, tol,
                         center=0.0, scale=1.0)

    def conditional_jeffreys(self, m: int, xbar: float, tol: float = DEFAULT_TOL) -> QuadratureResult:
        if xbar < 0:
            raise DomainError("xbar must be nonnegative")
        L0 = self.L_of_mean(xbar) if xbar > 0 else -20.0

        def logf(L):
            return self.log_jeffreys_L(L) - m * self.divergence_L(xbar, L)

        return integrate_log(logf, -math.inf, math.inf, tol, center=L0, scale=1.0)


_EXP_CAUCHY = None


def build_exp_cauchy() -> ExpFamily1D:
    """The exponentiated-Cauchy mixture as an ExpFamily1D in mean parametrization.

    Densities are taken with respect to the mixture base measure itself, and
    every mean-value quantity goes through numerical inversion of mu(beta).
    """
    global _EXP_CAUCHY
    if _EXP_CAUCHY is not None:
        return _EXP_CAUCHY
    model = ExpCauchyMixture()
    ref = model.mean(0.0)
    L_ref = 0.0
    Lm = model.L_of_mean

    def variance(mu):
        return model.fisher(Lm(mu))

    def div(a, b):
        return model.divergence_L(a, Lm(b))

    _EXP_CAUCHY = ExpFamily1D(
        name="exp-cauchy",
        mean_range=MeanRange(0.0, math.inf, True, False),
        variance_fn=variance,
        anchor_mean=ref,
        point_mass_left=True,
        divergence_closed_form=div,
        canonical_closed_form=lambda mu, r: model.beta(Lm(mu)) - model.beta(L_ref),
        cumulant_closed_form=lambda mu, r: math.log(model.Z(Lm(mu))) - math.log(model.Z(L_ref)),
        log_pdf=lambda mu, x: model.beta(Lm(mu)) * np.asarray(x) - math.log(model.Z(Lm(mu))),
        support=(0.0, math.inf),
        params={"model": model},
    )
    return _EXP_CAUCHY


# ---------------------------------------------------------------------------
# finiteness diagnosis

class Rule(str, enum.Enum):
    ANALYTIC_ENDPOINT = "AnalyticEndpoint"
    LIGHT_TAIL = "LightTail"
    HEAVY_TAIL = "HeavyTail"
    NUMERIC_FALLBACK = "NumericFallback"


class Finiteness(str, enum.Enum):
    FINITE = "Finite"
    INFINITE = "Infinite"
    UNKNOWN = "Unknown"


_PRECEDENCE = [Rule.NUMERIC_FALLBACK, Rule.HEAVY_TAIL, Rule.LIGHT_TAIL, Rule.ANALYTIC_ENDPOINT]


@dataclass(frozen=True)
class TailMetadata:
    left_endpoint_exponent: Optional[float] = None
    tail_class: str = "Unknown"   # Light | Heavy | Unknown
    heavy_tail_alpha: Optional[float] = None
    gamma_comparison_shape: Optional[float] = None

    def __post_init__(self):
        for v in (self.left_endpoint_exponent, self.heavy_tail_alpha, self.gamma_comparison_shape):
            if v is not None and not v > 0:
                raise ValueError("tail exponents must be positive")
        if self.tail_class not in ("Light", "Heavy", "Unknown"):
            raise ValueError(f"unknown tail class {self.tail_class!r}")


@dataclass(frozen=True)
class SideVerdict:
    verdict: Finiteness
    rule: Rule
    required_m: Optional[int]
    note: str


@dataclass(frozen=True)
class FinitenessDiagnosis:
    verdict: Finiteness
    rule: Rule
    required_m: Optional[int] = None
    notes: str = ""
    sides: dict = field(default_factory=dict)


TAIL_METADATA = {
    "bernoulli": TailMetadata(),
    "gaussian-location": TailMetadata(),
    "poisson": TailMetadata(tail_class="Unknown"),
    "exponential": TailMetadata(left_endpoint_exponent=1.0, tail_class="Light", gamma_comparison_shape=1.0),
    "geometric": TailMetadata(tail_class="Light", gamma_comparison_shape=1.0),
    "exp-cauchy": TailMetadata(tail_class="Heavy"),
}


def tail_metadata(F: ExpFamily1D) -> TailMetadata:
    if F.name in TAIL_METADATA:
        return TAIL_METADATA[F.name]
    k = F.params.get("k")
    if k is not None:
        return TailMetadata(left_endpoint_exponent=k, tail_class="Light", gamma_comparison_shape=k)
    return TailMetadata()


def light_tail_liminf(F: ExpFamily1D, k: float, upto: float = 1e6, points: int = 200) -> float:
    """min over a geometric grid of V(x) / (x^2/k), a numerical stand-in for the liminf."""
    lo = max(F.anchor_mean, 1.0)
    xs = np.geomspace(lo, upto, points)
    return float(min(F.variance_fn(float(x)) * k / (x * x) for x in xs))


LIGHT_TAIL_THRESHOLD = 1e-6


def _left_side(F: ExpFamily1D, meta: TailMetadata) -> Optional[SideVerdict]:
    r = F.mean_range
    if math.isinf(r.mu_inf):
        return None
    if F.point_mass_left:
        # lattice families have V linear at an atom, so V^(-1/2) is integrable there;
        # otherwise only the conditioned integrand, which vanishes at the atom, is certified
        if F.discrete:
            return SideVerdict(Finiteness.FINITE, Rule.ANALYTIC_ENDPOINT, 0,
                               "left: lattice point mass at the endpoint, V vanishes linearly")
        return SideVerdict(Finiteness.FINITE, Rule.ANALYTIC_ENDPOINT, 1,
                           "left: point mass at the endpoint, conditioning suppresses it")
    if meta.left_endpoint_exponent is not None:
        return SideVerdict(Finiteness.FINITE, Rule.ANALYTIC_ENDPOINT, 1,
                           f"left: analytic endpoint density with exponent {meta.left_endpoint_exponent:g}")
    return None


def _right_side(F: ExpFamily1D, meta: TailMetadata, tol: float) -> Optional[SideVerdict]:
    r = F.mean_range
    if math.isfinite(r.mu_sup):
        if F.point_mass_right and F.discrete:
            return SideVerdict(Finiteness.FINITE, Rule.ANALYTIC_ENDPOINT, 0,
                               "right: lattice point mass at the endpoint, V vanishes linearly")
        return None
    if meta.tail_class == "Light" and meta.gamma_comparison_shape is not None:
        ratio = light_tail_liminf(F, meta.gamma_comparison_shape)
        if ratio > LIGHT_TAIL_THRESHOLD:
            return SideVerdict(Finiteness.FINITE, Rule.LIGHT_TAIL, 1,
                               f"right: liminf V/V_gamma >= {ratio:.3g} on the grid")
        return None
    if meta.tail_class == "Heavy":
        if meta.heavy_tail_alpha is not None:
            return SideVerdict(Finiteness.FINITE, Rule.HEAVY_TAIL, 0,
                               f"right: q(x) = O(x^-(1+{meta.heavy_tail_alpha:g})) makes J finite")
        res = jeffreys_integral(F, tol=max(tol, 1e-8))
        if res.verdict is Verdict.FINITE:
            return SideVerdict(Finiteness.FINITE, Rule.HEAVY_TAIL, 0, "right: heavy tail and J finite")
        if res.verdict is Verdict.DIVERGENT:
            return SideVerdict(Finiteness.INFINITE, Rule.HEAVY_TAIL, None,
                               "right: heavy tail and J infinite, so every conditional integral is infinite")
        return SideVerdict(Finiteness.UNKNOWN, Rule.HEAVY_TAIL, None, "right: heavy tail, J inconclusive")
    return None


def _representative_means(F: ExpFamily1D) -> list[float]:
    c = F.anchor_mean
    r = F.mean_range
    if math.isfinite(r.mu_inf) and math.isfinite(r.mu_sup):
        return [r.mu_inf + f * (r.mu_sup - r.mu_inf) for f in (0.1, 0.5, 0.9)]
    if math.isfinite(r.mu_inf):
        return [r.mu_inf + (c - r.mu_inf) * f for f in (0.1, 1.0, 10.0)]
    if math.isfinite(r.mu_sup):
        return [r.mu_sup - (r.mu_sup - c) * f for f in (0.1, 1.0, 10.0)]
    return [c - 5.0, c, c + 5.0]


def diagnose(F: ExpFamily1D, meta: Optional[TailMetadata] = None, m: int = 1,
             tol: float = 1e-8) -> FinitenessDiagnosis:
    """Classify finiteness of the conditional Jeffreys integral after m observations.

    Each endpoint is certified by an analytic rule where the catalog
    metadata allows it; otherwise the quadrature engine decides at a few
    representative sample averages.
    """
    if m < 1:
        raise DomainError("diagnose needs m >= 1")
    meta = tail_metadata(F) if meta is None else meta
    sides = {"left": _left_side(F, meta), "right": _right_side(F, meta, tol)}

    if any(s is not None and s.verdict is Finiteness.INFINITE for s in sides.values()):
        s = next(s for s in sides.values() if s is not None and s.verdict is Finiteness.INFINITE)
        return FinitenessDiagnosis(Finiteness.INFINITE, s.rule, None, s.note, sides)

    certified = all(s is not None and s.verdict is Finiteness.FINITE for s in sides.values())
    if certified:
        req = max(s.required_m for s in sides.values())
        rule = min((s.rule for s in sides.values()), key=_PRECEDENCE.index)
        verdict = Finiteness.FINITE if m >= req else Finiteness.UNKNOWN
        notes = "; ".join(s.note for s in sides.values())
        return FinitenessDiagnosis(verdict, rule, req, notes, sides)

    verdicts = []
    for xbar in _representative_means(F):
        res = conditional_jeffreys(F, m, xbar, tol)
        verdicts.append((xbar, res.verdict))
    kinds = {v for _, v in verdicts}
    if kinds == {Verdict.FINITE}:
        verdict = Finiteness.FINITE
    elif Verdict.DIVERGENT in kinds:
        verdict = Finiteness.INFINITE
    else:
        verdict = Finiteness.UNKNOWN
    uncovered = [k for k, s in sides.items() if s is None]
    notes = (f"no rule certifies the {' and '.join(uncovered)} side; quadrature at xbar in "
             + ", ".join(f"{x:g}:{v.value}" for x, v in verdicts))
    return FinitenessDiagnosis(verdict, Rule.NUMERIC_FALLBACK, m if verdict is Finiteness.FINITE else None,
                               notes, sides)
