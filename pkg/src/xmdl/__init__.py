"""One-dimensional exponential families, Jeffreys integrals, sequential prediction and coding."""
from .errors import (ConfigError, DivergentError, DomainError, InfeasibleHorizon, KraftViolation,
                     NotNormalizable, NotYetDefined, StreamUnderflow, XMDLError, ZeroProbability)
from .expfam import (ExpFamily1D, MeanRange, canonical_param, cumulant, divergence, get_family,
                     log_density, ml_mean)
from .measures import PosteriorState, PriorMeasure, get_prior, in_Fm, posterior_log_density
from .quadrature import QuadratureResult, Verdict, integrate, integrate_log
from .jeffreys import ExpCauchyMixture, conditional_jeffreys, diagnose, jeffreys_integral
from .predict import (NML, SNML, BayesMixture, PlugIn, PredictionSystem, get_system, regret2,
                      regret_gap_experiment)
from .coding import arithmetic_decode, arithmetic_encode, build_block_code, kraft_sum

__version__ = "0.1.0"
