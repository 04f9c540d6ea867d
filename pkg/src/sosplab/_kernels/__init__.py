"""Kernel backend selection.

The compiled extension is used when importable; otherwise the NumPy fallback.
``SOSPLAB_FORCE_FALLBACK=1`` forces the fallback (used by parity tests and the
benchmark).  Both backends expose the same functions with identical semantics;
results agree to rounding, and each backend is bit-reproducible on its own.
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("SOSPLAB_FORCE_FALLBACK", "").strip().lower() in {"1", "true", "yes"}:
    _impl = _fallback
    BACKEND = "fallback"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "fallback"


psi_arr = _impl.psi_arr
phi_arr = _impl.phi_arr
lam_arr = _impl.lam_arr
chain_value = _impl.chain_value
chain_grad = _impl.chain_grad
chain_bands = _impl.chain_bands
chain_value1 = _impl.chain_value1
chain_grad1 = _impl.chain_grad1
chain_bands1 = _impl.chain_bands1
lamsum_value = _impl.lamsum_value
lamsum_grad = _impl.lamsum_grad
lamsum_hdiag = _impl.lamsum_hdiag
lamsum_value1 = _impl.lamsum_value1
lamsum_grad1 = _impl.lamsum_grad1
lamsum_hdiag1 = _impl.lamsum_hdiag1


def backend_name() -> str:
    """Name of the active backend: ``"compiled"`` or ``"fallback"``."""
    return BACKEND
