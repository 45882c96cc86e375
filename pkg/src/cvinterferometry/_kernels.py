"""Kernel selection: compiled extension when built, pure Python otherwise.

Set ``CVINTERFEROMETRY_PURE_PYTHON=1`` to force the fallback.
"""

import os

from ._ext import moments_py

BACKEND = "python"
gaussian_moments = moments_py.gaussian_moments

if not os.environ.get("CVINTERFEROMETRY_PURE_PYTHON"):
    try:
        from ._ext import moments as _compiled
    except ImportError:
        pass
    else:
        gaussian_moments = _compiled.gaussian_moments
        BACKEND = "cython"
