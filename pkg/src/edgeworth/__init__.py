"""Edgeworth expansions for smooth functions of sample means.

Typical use::

    from edgeworth import ChiSquare, StatisticSpec, correlation_model
    from edgeworth import analytic_coefficients, EdgeworthApprox

    spec = StatisticSpec("pearson", correlation_model(ChiSquare(1), ChiSquare(1)))
    approx = EdgeworthApprox(analytic_coefficients(spec), n=50, order=1)
    approx.cdf(0.5)
"""
from .cumulants import ExpansionCoefficients, coefficients, u1, u2, u3, u4, u5
from .errors import (ConfigError, DegenerateStatisticError, EdgeworthError,
                     ExpressionError, ExpressionSyntaxError, InsufficientDataError,
                     NumericalError, SimulationError, UnknownVariableError,
                     UnsupportedConditioningError, UnsupportedDegreeError)
from .expansion import EdgeworthApprox, cdf, normal_cdf, normal_pdf, pdf
from .expression import Expression, parse
from .gpcc import (GpccQuery, GpccReport, estimate_modulus, jacobian_check,
                   truncation_bound)
from .model import (ChiSquare, LogNormal, Normal, Poisson, StatisticSpec, VectorModel,
                    correlation_model, covariance_matrix, mean_vector, ratio_model,
                    zscore_model)
from .moments import MomentTensor, analytic_moments, sample_moments
from .montecarlo import (CoeffSource, ExperimentConfig, GridSpec, SimulationReport,
                         analytic_coefficients, estimate_coefficients, ks_distance,
                         simulate)
from .statistics import DerivativeBundle, bundle_for, statistic_function

__version__ = "0.1.0"
