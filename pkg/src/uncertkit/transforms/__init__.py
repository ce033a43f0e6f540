from ._base import EmbeddingResult, UapcaModel
from .uamds import UAMDS, CoupledStress, UamdsParams, initial_maps, uamds_fit, uamds_gradient, uamds_stress
from .uapca import UAPCA, uapca

__all__ = [
    "CoupledStress",
    "EmbeddingResult",
    "UAMDS",
    "UAPCA",
    "UamdsParams",
    "UapcaModel",
    "initial_maps",
    "uamds_fit",
    "uamds_gradient",
    "uamds_stress",
    "uapca",
]
