"""Hot-loop kernels: numba-compiled when available, plain numpy otherwise.

The only hot kernel is the per-cell SGD sweep used by factor training.
Both paths run the same statements over the same numpy arrays, so results
are identical; set ``FMREC_NUMBA=0`` to force the fallback (useful for
debugging and for the benchmark's baseline timing).
"""

from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)

__all__ = ["sgd_epoch_python", "sgd_epoch_numba", "active_kernel", "using_numba"]


def sgd_epoch_python(ua, af, rows, cols, vals, visit, rate, reg):
    """One pass over the observed cells in ``visit`` order, updating the
    factor matrices in place.

    ua: (users, k) float64; af: (k, features) float64.
    rows/cols/vals: parallel arrays of observed cells; visit: permutation.
    """
    n = visit.shape[0]
    k = ua.shape[1]
    for t in range(n):
        cell = visit[t]
        u = rows[cell]
        i = cols[cell]
        pred = 0.0
        for a in range(k):
            pred += ua[u, a] * af[a, i]
        err = vals[cell] - pred
        for a in range(k):
            updated = ua[u, a] + rate * (err * af[a, i] - reg * ua[u, a])
            ua[u, a] = updated
            af[a, i] = af[a, i] + rate * (err * updated - reg * af[a, i])


def _numba_disabled() -> bool:
    return os.environ.get("FMREC_NUMBA", "1").strip().lower() in {"0", "false", "off", "no"}


sgd_epoch_numba = None
if not _numba_disabled():
    try:
        from numba import njit

        sgd_epoch_numba = njit(cache=True)(sgd_epoch_python)
    except ImportError:  # pragma: no cover - numba is a declared dependency
        logger.warning("numba unavailable, factor training falls back to the python kernel")


def using_numba() -> bool:
    return sgd_epoch_numba is not None


def active_kernel():
    return sgd_epoch_numba if sgd_epoch_numba is not None else sgd_epoch_python
