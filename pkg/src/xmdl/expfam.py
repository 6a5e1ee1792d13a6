"""One-dimensional exponential families described by their variance functions.

A family is identified by its mean range M and variance function V.  From V
alone the canonical parameter, cumulant and divergence follow by quadrature:

    beta(mu)        = int_{mu_ref}^{mu} 1/V
    A(beta(mu))     = int_{mu_ref}^{mu} nu/V(nu) dnu
    D(mu0 || mu1)   = int_{mu0}^{mu1} (nu - mu0)/V(nu) dnu

Catalog families also carry textbook closed forms, which take precedence.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _spi
from scipy.special import gammaln, log1p, logit, xlogy

from .errors import ConfigError, DomainError
from .quadrature import DEFAULT_TOL, Verdict, integrate

TAU = 2.0 * math.pi


@dataclass(frozen=True)
class MeanRange:
    mu_inf: float
    mu_sup: float
    left_closed: bool = False
    right_closed: bool = False

    def __post_init__(self):
        if not self.mu_inf < self.mu_sup:
            raise ValueError("mean range needs mu_inf < mu_sup")
        if self.left_closed and math.isinf(self.mu_inf):
            raise ValueError("an infinite endpoint cannot be closed")
        if self.right_closed and math.isinf(self.mu_sup):
            raise ValueError("an infinite endpoint cannot be closed")

    def interior(self, mu: float) -> bool:
        return self.mu_inf < mu < self.mu_sup

    def contains(self, mu: float) -> bool:
        """Membership in the closure (finite endpoints always belong to the closure)."""
        if self.interior(mu):
            return True
        return (mu == self.mu_inf and math.isfinite(mu)) or (mu == self.mu_sup and math.isfinite(mu))


@dataclass(frozen=True, eq=False)
class ExpFamily1D:
    """A one-dimensional exponential family in its mean parametrization.

    Only `name`, `mean_range`, `variance_fn` and `anchor_mean` are required;
    every closed form is optional and falls back to quadrature of the
    variance function.  `base_log_density` is the log density of the anchor
    element P^{mu_ref}, which serves as the base measure when no closed-form
    `log_pdf` exists.
    """

    name: str
    mean_range: MeanRange
    variance_fn: Callable[[float], float]
    anchor_mean: float
    discrete: bool = False
    point_mass_left: bool = False
    point_mass_right: bool = False
    divergence_closed_form: Optional[Callable[[float, float], float]] = None
    canonical_closed_form: Optional[Callable[[float, float], float]] = None
    cumulant_closed_form: Optional[Callable[[float, float], float]] = None
    log_pdf: Optional[Callable] = None
    base_log_density: Optional[Callable[[float], float]] = None
    support: Optional[tuple] = None
    sampler: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.mean_range.interior(self.anchor_mean):
            raise ValueError("anchor_mean must be interior")
        if self.point_mass_left and math.isinf(self.mean_range.mu_inf):
            raise ValueError("point mass needs a finite endpoint")
        if self.point_mass_right and math.isinf(self.mean_range.mu_sup):
            raise ValueError("point mass needs a finite endpoint")

    def __repr__(self) -> str:
        return f"ExpFamily1D({self.name!r})"

    @property
    def finite_support(self) -> bool:
        return self.discrete and self.support is not None and self.support[-1] != math.inf

    def support_values(self, upto: int | None = None) -> list:
        """Enumerate a discrete support; unbounded supports are cut at `upto`."""
        if not self.discrete:
            raise DomainError(f"{self.name} is not discrete")
        if self.finite_support:
            return list(self.support)
        if upto is None:
            raise DomainError("unbounded support needs an explicit cutoff")
        return list(range(int(self.support[0]), upto + 1))

    def in_support(self, x) -> bool:
        if self.discrete:
            if self.finite_support:
                return x in self.support
            return float(x).is_integer() and x >= self.support[0]
        lo, hi = self.support if self.support is not None else (-math.inf, math.inf)
        return lo <= x <= hi

    def with_anchor(self, anchor_mean: float) -> "ExpFamily1D":
        return replace(self, anchor_mean=anchor_mean)

    def has_point_mass_at(self, mu: float) -> bool:
        r = self.mean_range
        return (self.point_mass_left and mu == r.mu_inf) or (self.point_mass_right and mu == r.mu_sup)


def _check_closure(F: ExpFamily1D, mu: float, what: str = "mean"):
    if not F.mean_range.contains(mu):
        raise DomainError(f"{what} {mu} outside the closure of the mean range of {F.name}")


def _check_interior(F: ExpFamily1D, mu: float):
    if not F.mean_range.interior(mu):
        raise DomainError(f"mean {mu} is not interior to the mean range of {F.name}")


def divergence_by_quadrature(F: ExpFamily1D, mu0: float, mu1: float, tol: float = DEFAULT_TOL) -> float:
    if mu0 == mu1:
        return 0.0
    lo, hi = (mu0, mu1) if mu0 < mu1 else (mu1, mu0)
    res = integrate(lambda nu: abs(nu - mu0) / F.variance_fn(nu), lo, hi, tol)
    if res.verdict is Verdict.DIVERGENT:
        return math.inf
    if res.verdict is Verdict.INCONCLUSIVE:
        raise ArithmeticError(f"divergence quadrature inconclusive: {res.diagnostics}")
    return max(res.value, 0.0)


def divergence(F: ExpFamily1D, mu0: float, mu1: float) -> float:
    """Information divergence D(P^mu0 || P^mu1) between two elements of F.

    Endpoints of the mean range are accepted; when the divergence is
    infinite (e.g. mu1 at an endpoint that carries no point mass) the
    result is ``math.inf``.
    """
    _check_closure(F, mu0)
    _check_closure(F, mu1)
    if mu0 == mu1:
        return 0.0
    r = F.mean_range
    if not r.interior(mu1) and not F.has_point_mass_at(mu1):
        return math.inf
    if not r.interior(mu0) and not r.interior(mu1):
        return math.inf
    if F.divergence_closed_form is not None:
        try:
            with np.errstate(all="ignore"):
                val = float(F.divergence_closed_form(mu0, mu1))
        except (ValueError, ZeroDivisionError, OverflowError):
            val = math.nan
        if not math.isnan(val):
            return max(val, 0.0)
    return divergence_by_quadrature(F, mu0, mu1)


def _integral_from_anchor(F: ExpFamily1D, g, mu: float) -> float:
    ref = F.anchor_mean
    if mu == ref:
        return 0.0
    with np.errstate(all="ignore"):
        val, _ = _spi.quad(g, ref, mu, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def canonical_param(F: ExpFamily1D, mu: float) -> float:
    """Canonical parameter of the element with mean `mu`, zero at the anchor mean."""
    _check_interior(F, mu)
    if F.canonical_closed_form is not None:
        return float(F.canonical_closed_form(mu, F.anchor_mean))
    return _integral_from_anchor(F, lambda nu: 1.0 / F.variance_fn(nu), mu)


def cumulant(F: ExpFamily1D, mu: float) -> float:
    """Log partition function A at canonical parameter beta(mu); zero at the anchor mean."""
    _check_interior(F, mu)
    if F.cumulant_closed_form is not None:
        return float(F.cumulant_closed_form(mu, F.anchor_mean))
    return _integral_from_anchor(F, lambda nu: nu / F.variance_fn(nu), mu)


def ml_mean(F: ExpFamily1D, xbar: float) -> float:
    """Mean of the maximum-likelihood element for sample average `xbar`.

    The identity on the interior.  A finite endpoint is only accepted when
    the extended family contains the point mass there.
    """
    r = F.mean_range
    if r.interior(xbar):
        return float(xbar)
    if r.contains(xbar) and F.has_point_mass_at(xbar):
        return float(xbar)
    raise DomainError(f"no maximum-likelihood element of {F.name} for sample average {xbar}")


def log_density(F: ExpFamily1D, mu: float, x) -> float:
    """Log pmf/pdf of x under P^mu.  Point-mass endpoints give 0 or -inf."""
    if not F.in_support(x):
        raise DomainError(f"{x} outside the support of {F.name}")
    if not F.mean_range.interior(mu):
        if F.mean_range.contains(mu) and F.has_point_mass_at(mu):
            return 0.0 if x == mu else -math.inf
        raise DomainError(f"mean {mu} has no element in {F.name}")
    if F.log_pdf is not None:
        return float(F.log_pdf(mu, x))
    if F.base_log_density is None:
        raise DomainError(f"{F.name} defines no base measure; log_density unavailable")
    return float(F.base_log_density(x) + canonical_param(F, mu) * x - cumulant(F, mu))


def sum_log_density(F: ExpFamily1D, mu: float, xs) -> float:
    """Sum of log densities of the observations `xs` under P^mu (vectorized when possible)."""
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        return 0.0
    if F.mean_range.interior(mu) and F.log_pdf is not None:
        with np.errstate(divide="ignore"):
            return float(np.sum(F.log_pdf(mu, xs)))
    return float(sum(log_density(F, mu, float(x)) for x in xs))


def max_log_likelihood(F: ExpFamily1D, xs) -> float:
    """log P^{xbar}(x^n): log density of the sample under its own ML element."""
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        return 0.0
    return sum_log_density(F, ml_mean(F, float(np.mean(xs))), xs)


def sample(F: ExpFamily1D, mu: float, size: int, rng: np.random.Generator) -> np.ndarray:
    if F.sampler is None:
        raise DomainError(f"{F.name} has no sampler")
    _check_interior(F, mu)
    return np.asarray(F.sampler(mu, size, rng), dtype=float)


# ---------------------------------------------------------------------------
# catalog

def bernoulli() -> ExpFamily1D:
    return ExpFamily1D(
        name="bernoulli",
        mean_range=MeanRange(0.0, 1.0, True, True),
        variance_fn=lambda mu: mu * (1.0 - mu),
        anchor_mean=0.5,
        discrete=True,
        point_mass_left=True,
        point_mass_right=True,
        divergence_closed_form=lambda a, b: (xlogy(a, a) - xlogy(a, b)
                                             + xlogy(1 - a, 1 - a) - xlogy(1 - a, 1 - b)),
        canonical_closed_form=lambda mu, ref: logit(mu) - logit(ref),
        cumulant_closed_form=lambda mu, ref: -log1p(-mu) + log1p(-ref),
        log_pdf=lambda mu, x: xlogy(x, mu) + xlogy(1 - x, 1 - mu),
        support=(0, 1),
        sampler=lambda mu, size, rng: rng.binomial(1, mu, size),
    )


def gaussian_location() -> ExpFamily1D:
    return ExpFamily1D(
        name="gaussian-location",
        mean_range=MeanRange(-math.inf, math.inf),
        variance_fn=lambda mu: 1.0,
        anchor_mean=0.0,
        divergence_closed_form=lambda a, b: 0.5 * (a - b) ** 2,
        canonical_closed_form=lambda mu, ref: mu - ref,
        cumulant_closed_form=lambda mu, ref: 0.5 * (mu * mu - ref * ref),
        log_pdf=lambda mu, x: -0.5 * (x - mu) ** 2 - 0.5 * math.log(TAU),
        support=(-math.inf, math.inf),
        sampler=lambda mu, size, rng: rng.normal(mu, 1.0, size),
    )


def poisson() -> ExpFamily1D:
    return ExpFamily1D(
        name="poisson",
        mean_range=MeanRange(0.0, math.inf, True, False),
        variance_fn=lambda mu: mu,
        anchor_mean=1.0,
        discrete=True,
        point_mass_left=True,
        divergence_closed_form=lambda a, b: xlogy(a, a) - xlogy(a, b) - a + b,
        canonical_closed_form=lambda mu, ref: math.log(mu / ref),
        cumulant_closed_form=lambda mu, ref: mu - ref,
        log_pdf=lambda mu, x: xlogy(x, mu) - mu - gammaln(np.asarray(x) + 1.0),
        support=(0, math.inf),
        sampler=lambda mu, size, rng: rng.poisson(mu, size),
    )


def gamma(k: float = 1.0) -> ExpFamily1D:
    """Gamma family with fixed shape k, parametrized by its mean (V = mu^2/k)."""
    if k <= 0:
        raise ValueError("gamma shape must be positive")
    name = "exponential" if k == 1.0 else f"gamma:k={k:g}"
    return ExpFamily1D(
        name=name,
        mean_range=MeanRange(0.0, math.inf),
        variance_fn=lambda mu: mu * mu / k,
        anchor_mean=1.0,
        divergence_closed_form=lambda a, b: k * (a / b - 1.0 - math.log(a / b)),
        canonical_closed_form=lambda mu, ref: k * (1.0 / ref - 1.0 / mu),
        cumulant_closed_form=lambda mu, ref: k * math.log(mu / ref),
        log_pdf=lambda mu, x: (k * np.log(k / mu) + xlogy(k - 1.0, x) - k * np.asarray(x) / mu
                               - gammaln(k)),
        support=(0.0, math.inf),
        sampler=lambda mu, size, rng: rng.gamma(k, mu / k, size),
        params={"k": k},
    )


def exponential() -> ExpFamily1D:
    return gamma(1.0)


def geometric() -> ExpFamily1D:
    """Number of failures before the first success, parametrized by its mean."""
    return ExpFamily1D(
        name="geometric",
        mean_range=MeanRange(0.0, math.inf, True, False),
        variance_fn=lambda mu: mu * (1.0 + mu),
        anchor_mean=1.0,
        discrete=True,
        point_mass_left=True,
        divergence_closed_form=lambda a, b: (xlogy(a, a) - xlogy(a, b)
                                             - xlogy(1 + a, 1 + a) + xlogy(1 + a, 1 + b)),
        canonical_closed_form=lambda mu, ref: math.log(mu / (1 + mu)) - math.log(ref / (1 + ref)),
        cumulant_closed_form=lambda mu, ref: math.log1p(mu) - math.log1p(ref),
        log_pdf=lambda mu, x: xlogy(x, mu) - (np.asarray(x) + 1.0) * np.log1p(mu),
        support=(0, math.inf),
        sampler=lambda mu, size, rng: rng.geometric(1.0 / (1.0 + mu), size) - 1,
    )


def from_variance(name: str, mean_range: MeanRange, variance_fn, anchor_mean: float, **kw) -> ExpFamily1D:
    """A family defined by its variance function only; every primitive goes through quadrature."""
    return ExpFamily1D(name=name, mean_range=mean_range, variance_fn=variance_fn,
                       anchor_mean=anchor_mean, **kw)


CATALOG = ("bernoulli", "gaussian-location", "poisson", "exponential", "gamma:k=<shape>",
           "geometric", "exp-cauchy")

_GAMMA_RE = re.compile(r"^gamma(?::k=([0-9.eE+-]+))?$")


def get_family(family_id: str) -> ExpFamily1D:
    """Resolve a catalog identifier such as ``bernoulli`` or ``gamma:k=2``."""
    fid = family_id.strip().lower()
    simple = {
        "bernoulli": bernoulli,
        "gaussian-location": gaussian_location,
        "gaussian": gaussian_location,
        "poisson": poisson,
        "exponential": exponential,
        "geometric": geometric,
    }
    if fid in simple:
        return simple[fid]()
    m = _GAMMA_RE.match(fid)
    if m:
        try:
            return gamma(float(m.group(1) or 1.0))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if fid in ("exp-cauchy", "expcauchy", "exp-cauchy-mixture"):
        from .jeffreys import build_exp_cauchy
        return build_exp_cauchy()
    raise ConfigError(f"unknown family {family_id!r}; known: {', '.join(CATALOG)}")
