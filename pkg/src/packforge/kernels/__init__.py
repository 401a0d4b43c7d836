"""Kernel dispatch: compiled extension if available, pure Python otherwise.

Set ``PACKFORGE_PURE=1`` to force the Python implementations (used by the
benchmark and by CI on platforms without a compiler).  ``BACKEND`` reports
which one is active.
"""

import os

if os.environ.get("PACKFORGE_PURE"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _impl

BACKEND: str = _impl.BACKEND_NAME

max_matching = _impl.max_matching
embed_backtrack = _impl.embed_backtrack
clique_factor = _impl.clique_factor
enum_cliques = _impl.enum_cliques

__all__ = [
    "BACKEND",
    "max_matching",
    "embed_backtrack",
    "clique_factor",
    "enum_cliques",
]
