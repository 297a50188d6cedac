"""kamforge: quantitative KAM engine.

Explicit normal-form constants, smallness thresholds, a numerical Arnold
iteration with invariance verification, and measure estimates of
Kolmogorov sets.
"""

from .logvalue import LogValue
from .params import KamParameters

__version__ = "0.1.0"

__all__ = ["LogValue", "KamParameters", "__version__"]
