"""Kernel selection: compiled extension when available, pure fallback otherwise.

Set EVENTMINER_NO_EXT=1 to force the pure path, e.g. to run the whole test
suite against the fallback. The benchmark script does not need the switch;
it imports both modules directly.
"""

from __future__ import annotations

import os

from eventminer import _pure

if os.environ.get("EVENTMINER_NO_EXT", "") not in ("", "0"):
    _impl = _pure
    IMPLEMENTATION = "pure"
else:
    try:
        from eventminer import _native as _impl  # type: ignore[no-redef]

        IMPLEMENTATION = "native"
    except ImportError:
        _impl = _pure
        IMPLEMENTATION = "pure"

tfidf_cosine = _impl.tfidf_cosine
forest_scores = _impl.forest_scores
