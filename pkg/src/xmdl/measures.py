"""Possibly improper priors on the mean range and their posterior updates.

After m observations with sample average xbar the posterior has density

    prior(y) * exp(-m * D(xbar || y)) / normalizer

with respect to Lebesgue measure on the mean range.  The normalizer may be
infinite for small m; the set of xbar values that make it finite is F_m.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import ConfigError, DomainError, NotNormalizable
from .expfam import ExpFamily1D, MeanRange, divergence, log_density
from .quadrature import DEFAULT_BUDGET, DEFAULT_TOL, QuadratureResult, Verdict, integrate, integrate_log

__all__ = [
    "PriorMeasure", "PosteriorState", "QuadratureResult", "Verdict", "integrate",
    "jeffreys_prior", "flat_prior", "gauss_alpha_prior", "exp_inv_sq_prior", "get_prior",
    "prior_normalizer", "in_Fm", "posterior_log_density", "likelihood_posterior_log_density",
]


@dataclass(frozen=True, eq=False)
class PriorMeasure:
    """A nonnegative Lebesgue density on (a subset of) the mean range, stored in log form."""

    label: str
    log_density: Callable[[float], float]
    support: MeanRange
    proper_hint: Optional[bool] = None

    def density(self, y: float) -> float:
        return math.exp(self.log_density(y))

    def __repr__(self) -> str:
        return f"PriorMeasure({self.label!r})"


def jeffreys_prior(F: ExpFamily1D) -> PriorMeasure:
    """Unnormalized Jeffreys density V(y)^(-1/2)."""
    V = F.variance_fn
    return PriorMeasure("jeffreys", lambda y: -0.5 * math.log(V(y)), F.mean_range)


def flat_prior(F: ExpFamily1D) -> PriorMeasure:
    bounded = math.isfinite(F.mean_range.mu_inf) and math.isfinite(F.mean_range.mu_sup)
    return PriorMeasure("flat", lambda y: 0.0, F.mean_range, proper_hint=bounded or None)


def gauss_alpha_prior(F: ExpFamily1D, alpha: float) -> PriorMeasure:
    """Density exp(alpha * y^2)."""
    return PriorMeasure(f"gauss-alpha:{alpha:g}", lambda y: alpha * y * y, F.mean_range)


def exp_inv_sq_prior(F: ExpFamily1D) -> PriorMeasure:
    """Density exp(1/y) * y^(-2) on the positive half line."""
    if F.mean_range.mu_inf < 0:
        raise ConfigError("exp-inv-sq needs a mean range inside (0, inf)")
    return PriorMeasure("exp-inv-sq", lambda y: 1.0 / y - 2.0 * math.log(y), F.mean_range)


PRIOR_CATALOG = ("jeffreys", "flat", "gauss-alpha:<alpha>", "exp-inv-sq")

_EPS = 2.0**-52
_NOISE = 0.1

_ALPHA_RE = re.compile(r"^gauss-alpha:([0-9.eE+-]+)$")


def get_prior(prior_id: str, F: ExpFamily1D) -> PriorMeasure:
    pid = prior_id.strip().lower()
    if pid == "jeffreys":
        return jeffreys_prior(F)
    if pid == "flat":
        return flat_prior(F)
    if pid == "exp-inv-sq":
        return exp_inv_sq_prior(F)
    m = _ALPHA_RE.match(pid)
    if m:
        return gauss_alpha_prior(F, float(m.group(1)))
    raise ConfigError(f"unknown prior {prior_id!r}; known: {', '.join(PRIOR_CATALOG)}")


def _window(F: ExpFamily1D, support: MeanRange, m: int, xbar: float) -> tuple[float, float]:
    """A center and a length scale for the posterior integrand."""
    lo, hi = support.mu_inf, support.mu_sup
    if m > 0 and support.interior(xbar):
        c = xbar
        s = math.sqrt(F.variance_fn(xbar) / m)
    else:
        c = F.anchor_mean if support.interior(F.anchor_mean) else None
        s = 1.0
        if c is None:
            c = 0.5 * (lo + hi) if math.isfinite(lo) and math.isfinite(hi) else (
                lo + 1.0 if math.isfinite(lo) else hi - 1.0)
    gap = min(c - lo, hi - c)
    if math.isfinite(gap):
        s = min(s, 0.5 * gap)
    return c, max(s, 1e-300)


@dataclass(frozen=True, eq=False)
class PosteriorState:
    """A prior conditioned on m observations with sample average xbar."""

    prior: PriorMeasure
    family: ExpFamily1D
    m: int = 0
    xbar: float = math.nan
    tol: float = DEFAULT_TOL
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.m < 0:
            raise DomainError("m must be nonnegative")
        if self.m > 0 and not self.family.mean_range.contains(self.xbar):
            raise DomainError(f"xbar {self.xbar} outside the closure of the mean range")
        if self.m == 0:
            object.__setattr__(self, "xbar", math.nan)

    @classmethod
    def from_sample(cls, prior: PriorMeasure, family: ExpFamily1D, xs: Iterable[float], **kw):
        xs = np.asarray(list(xs), dtype=float)
        if xs.size == 0:
            return cls(prior, family, 0, math.nan, **kw)
        return cls(prior, family, int(xs.size), float(np.mean(xs)), **kw)

    def update(self, x: float) -> "PosteriorState":
        """Condition on one more observation."""
        xbar = float(x) if self.m == 0 else (self.m * self.xbar + float(x)) / (self.m + 1)
        return PosteriorState(self.prior, self.family, self.m + 1, xbar, self.tol, self.budget)

    def log_unnormalized(self, y: float) -> float:
        lp = self.prior.log_density(y)
        if self.m == 0:
            return lp
        d = divergence(self.family, self.xbar, y)
        if not math.isfinite(d):
            return -math.inf
        out = lp - self.m * d
        # both terms can reach 1e15 and cancel; past that point the sum is noise
        if (abs(lp) + self.m * d) * _EPS > _NOISE:
            return math.nan
        return out

    @cached_property
    def normalizer(self) -> QuadratureResult:
        sup = self.prior.support
        c, s = _window(self.family, sup, self.m, self.xbar)
        return integrate_log(self._safe_log, sup.mu_inf, sup.mu_sup, self.tol,
                             center=c, scale=s, budget=self.budget)

    def _safe_log(self, y: float) -> float:
        try:
            return self.log_unnormalized(y)
        except (ValueError, OverflowError, ZeroDivisionError):
            return -math.inf


def prior_normalizer(state: PosteriorState) -> QuadratureResult:
    """Integral of prior(y) * exp(-m D(xbar||y)) over the prior's support."""
    return state.normalizer


def in_Fm(prior: PriorMeasure, family: ExpFamily1D, m: int, xbar: float,
          tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Whether the posterior after m observations averaging xbar can be normalized."""
    if m < 1:
        raise DomainError("F_m membership needs m >= 1")
    return prior_normalizer(PosteriorState(prior, family, m, xbar, tol, budget)).verdict


def posterior_log_density(state: PosteriorState, y: float) -> float:
    res = state.normalizer
    if res.verdict is not Verdict.FINITE:
        raise NotNormalizable(f"posterior normalizer is {res.verdict.value}: {'; '.join(res.diagnostics)}")
    return state.log_unnormalized(y) - res.log_value


def likelihood_posterior_log_density(prior: PriorMeasure, family: ExpFamily1D, xs, y: float,
                                     tol: float = DEFAULT_TOL) -> float:
    """Posterior log density computed from the raw likelihood product instead of (m, xbar).

    Used to cross-check the sufficient-statistic form; requires a family with
    `log_density` defined.
    """
    xs = [float(x) for x in xs]

    def loglik(t: float) -> float:
        try:
            return prior.log_density(t) + sum(log_density(family, t, x) for x in xs)
        except (ValueError, OverflowError, ZeroDivisionError):
            return -math.inf

    sup = prior.support
    m = len(xs)
    c, s = _window(family, sup, m, float(np.mean(xs)) if m else math.nan)
    res = integrate_log(loglik, sup.mu_inf, sup.mu_sup, tol, center=c, scale=s)
    if res.verdict is not Verdict.FINITE:
        raise NotNormalizable(f"likelihood posterior is {res.verdict.value}")
    return loglik(y) - res.log_value
