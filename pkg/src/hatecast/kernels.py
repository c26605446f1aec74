"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set ``HATECAST_PURE_PY=1`` to force the fallback (useful for benchmarking and
for environments without a compiler).
"""

from __future__ import annotations

import os

from . import _treekern_py

if os.environ.get("HATECAST_PURE_PY") == "1":
    _impl = _treekern_py
else:
    try:
        from . import _treekern as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _treekern_py

BACKEND: str = _impl.BACKEND
tree_spd = _impl.tree_spd
subtree_sizes = _impl.subtree_sizes
label_bottomup = _impl.label_bottomup
