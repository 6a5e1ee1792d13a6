"""Exception types shared across the package."""


class XMDLError(Exception):
    pass


class DomainError(XMDLError, ValueError):
    """An argument lies outside the mean range, support, or parameter space."""


class DivergentError(XMDLError, ArithmeticError):
    pass


class NotNormalizable(XMDLError):
    """A posterior or normalizer integral is not finite (or not certified finite)."""


class NotYetDefined(XMDLError):
    """A prediction system is not defined at this (m, xbar); more conditioning is needed."""


class InfeasibleHorizon(XMDLError, ValueError):
    pass


class KraftViolation(XMDLError, ValueError):
    pass


class StreamUnderflow(XMDLError, EOFError):
    pass


class ZeroProbability(XMDLError):
    pass


class ConfigError(XMDLError, ValueError):
    pass
