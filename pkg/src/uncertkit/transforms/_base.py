from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..distributions import AffineMap, Distribution


@dataclass
class EmbeddingResult:
    """Low-dimensional distributions with the maps that produced them."""

    distributions: list[Distribution]
    maps: list[AffineMap]
    stress_trace: list[float] = field(default_factory=list)
    converged: bool = True

    @property
    def stress(self) -> float | None:
        return self.stress_trace[-1] if self.stress_trace else None

    @property
    def n_iter(self) -> int:
        return max(len(self.stress_trace) - 1, 0)


@dataclass(frozen=True)
class UapcaModel:
    center: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def affine_map(self) -> AffineMap:
        return AffineMap(self.basis.T, -self.basis.T @ self.center)
