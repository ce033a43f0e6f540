"""uncertkit: uncertainty-aware distributions, dimensionality reduction and plots."""
from .distributions import (
    AffineMap,
    Distribution,
    EmpiricalSamples,
    GaussianMixture,
    MultivariateNormal,
    affine_transform,
    marginal,
    moments,
    pdf,
    sample,
)
from .estimation import GaussianKDE, fit_gaussian, fit_kde
from .exceptions import DomainError, InputError, NumericFailure, UncertkitError
from .transforms import UAMDS, UAPCA, EmbeddingResult, UamdsParams, uamds_fit, uamds_stress, uapca

__version__ = "0.1.0"
