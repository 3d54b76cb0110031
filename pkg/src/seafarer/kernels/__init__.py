"""Numeric kernel dispatch: compiled extension when built, pure fallback otherwise.

Set ``SEAFARER_FORCE_BACKEND=pure`` (or ``compiled``) to pin the choice;
pinning ``compiled`` raises if the extension is not available.
"""

from __future__ import annotations

import os

from seafarer.kernels import pure

try:
    from seafarer.kernels import _compiled
except ImportError:
    _compiled = None

_forced = os.environ.get("SEAFARER_FORCE_BACKEND")
if _forced == "pure":
    _impl = pure
elif _forced == "compiled":
    if _compiled is None:
        raise ImportError(
            "SEAFARER_FORCE_BACKEND=compiled but the extension is not built; "
            "install with `pip install -e .` and Cython available"
        )
    _impl = _compiled
elif _forced:
    raise ImportError(f"unknown SEAFARER_FORCE_BACKEND {_forced!r}")
else:
    _impl = _compiled if _compiled is not None else pure

BACKEND = _impl.BACKEND_NAME
sgd_logistic = _impl.sgd_logistic
ucb_scores = _impl.ucb_scores

__all__ = ["BACKEND", "sgd_logistic", "ucb_scores", "pure"]
