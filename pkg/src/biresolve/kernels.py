"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``BIRESOLVE_PURE=1`` to force the fallback (used by the twin tests and the
benchmark).
"""

import os

from . import _pykernels

if os.environ.get("BIRESOLVE_PURE", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

COMPILED = _impl is not _pykernels
BACKEND = "cython" if COMPILED else "python"

FOUND = _pykernels.FOUND
NONE = _pykernels.NONE
TIMEOUT = _pykernels.TIMEOUT

search_subamalgamation = _impl.search_subamalgamation
homomorphism_exists = _impl.homomorphism_exists
family_agreement = _impl.family_agreement
decompose_permutations = _impl.decompose_permutations
pad_to_balanced = _impl.pad_to_balanced
