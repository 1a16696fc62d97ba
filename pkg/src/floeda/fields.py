"""Sampled velocity fields on the regular periodic grid.

A FieldGrid is the common currency between the spectral ocean, the
subdomain fusion step, the skill metrics and the on-disk field format:
a 2-component field sampled at nodes x_i = 2*pi*i/n, y_j = 2*pi*j/n.
"""

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass
class FieldGrid:
    """values[i, j, c]: component c at node (x_i, y_j); first axis is x."""

    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError(f"field values must be (n, n, c), got {self.values.shape}")
        if self.values.shape[0] < 2:
            raise ValueError("grid resolution must be at least 2")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def ncomp(self) -> int:
        return self.values.shape[2]

    @property
    def nodes(self) -> np.ndarray:
        """1D node coordinates, shared by both axes."""
        return TWO_PI * np.arange(self.n) / self.n

    def node_points(self) -> np.ndarray:
        """All grid nodes as an (n*n, 2) array, x-major order."""
        g = self.nodes
        xx, yy = np.meshgrid(g, g, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])


def zeros_like_grid(n: int, ncomp: int = 2, time: float = 0.0) -> FieldGrid:
    return FieldGrid(np.zeros((n, n, ncomp)), time=time)
