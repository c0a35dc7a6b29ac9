"""High-precision gap probabilities, marginal eigenvalue distributions and
counting-statistic asymptotics for the Gaussian and Laguerre orthogonal
ensembles."""

__version__ = "0.1.0"

from .ensembles import EnsembleSpec
from .gaps import (EscalationExhausted, GapDistribution,
                   GeneratingFunctionSample, gap_distribution, trace_xi_curve,
                   xi)
from .precision import PrecisionContext

__all__ = [
    "__version__",
    "EnsembleSpec",
    "PrecisionContext",
    "EscalationExhausted",
    "GapDistribution",
    "GeneratingFunctionSample",
    "gap_distribution",
    "trace_xi_curve",
    "xi",
]
