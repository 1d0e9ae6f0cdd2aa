"""Enhanced PCA with collaborative-robust sample weights.

Matrices follow the C++ convention: shape (d, n), one sample per column.
"""

from ._epca import *  # noqa: F401,F403
from ._epca import __version__  # noqa: F401
