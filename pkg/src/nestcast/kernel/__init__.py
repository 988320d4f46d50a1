"""Kernel backend selection.

The compiled extension (``_speedups``) is used when it imported cleanly,
the plan's integers fit in int64, and ``NESTCAST_PURE_PYTHON`` is unset;
otherwise the arbitrary-precision pure-Python backend runs the same
algorithms.
"""

import os

from . import _purepy

try:
    from . import _speedups
except ImportError:  # pragma: no cover - build-dependent
    _speedups = None

_FORCE_PURE = os.environ.get("NESTCAST_PURE_PYTHON") == "1"

BACKEND = "compiled" if (_speedups is not None and not _FORCE_PURE) else "python"


def _use_compiled(plan):
    return BACKEND == "compiled" and plan.fits_int64


def _flatten(tables):
    out = []
    for t in tables:
        out.extend(t)
    return out


def eval_cost(plan, enc, domain="markov", dec1=None, dec2=None):
    """Exact cost numerator (over ``plan.cost_denom``) for one strategy.

    ``enc`` holds one table per stage over the chosen encoder domain;
    ``dec1``/``dec2`` are per-stage decoder tables over the information
    sets, or None for MAP decoding.
    """
    if _use_compiled(plan):
        arrays = plan.as_numpy()
        keys = ("midx", "doffs") if domain == "markov" else ("fidx", "foffs")
        return _speedups.eval_cost_arrays(
            arrays,
            keys[0],
            keys[1],
            _flatten(enc),
            _flatten(dec1) if dec1 is not None else None,
            _flatten(dec2) if dec2 is not None else None,
        )
    return _purepy.eval_cost(plan, enc, domain=domain, dec1=dec1, dec2=dec2)


def map_decoders(plan, enc, domain="markov"):
    """Optimal decoder tables for a fixed encoder (per-stage lists over
    the decoder information-set indices)."""
    return _purepy.map_decoders(plan, enc, domain=domain)


def enumerate_markov(plan, prefix=()):
    """Exhaustive minimum over Markov encoder tables with MAP decoders.

    Returns ``(best_numerator, best_digits, count)``; the reported
    digits are the lexicographically smallest minimizer.
    """
    if _use_compiled(plan):
        return _speedups.enumerate_markov_arrays(plan.as_numpy(), tuple(prefix), plan.nx)
    return _purepy.enumerate_markov(plan, prefix=prefix)
