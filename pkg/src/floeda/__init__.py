"""Domain-decomposed Lagrangian data assimilation for drifting sea-ice floes.

Subpackages map onto the toolkit's functional blocks: spectral ocean
surrogate (`ocean`), floe drift dynamics (`floes`), ensemble transform
Kalman filter (`etkf`), domain partitioning and Gaussian fusion (`domain`),
skill metrics (`metrics`) and the twin-experiment harness (`harness`,
`cli`).  Hot numerical kernels live in `_kernels` with a compiled core and
a NumPy fallback.
"""

from floeda._kernels import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
