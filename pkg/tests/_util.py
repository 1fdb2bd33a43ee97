"""Shared test helpers."""
import numpy as np

from specwave import tail_moment_series
from specwave.analytics import moment_arrays


def gap_enclosures(model, n_max, component=None):
    """Rigorous (lower, upper) edges of the tail gap for every N in 1..n_max.

    Uses the series identity gap(N) = sum_{N < n <= n_max} term_n + gap(n_max):
    one bracketed tail evaluation at n_max plus exact finite sums covers the
    whole level range.
    """
    tail = tail_moment_series(model, n_max, component)
    n = np.arange(2, n_max + 1, dtype=float)
    if component is None:
        terms = model.T * model.weight_over_lambda(n)
    else:
        var1, var2, _ = moment_arrays(model, n)
        terms = var1 if component == 1 else var2
    suffix = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])
    levels = np.arange(1, n_max + 1)
    mid = suffix[levels - 1] + tail.value
    slack = tail.error_bound + 8.0 * np.spacing(mid)
    return levels, mid - slack, mid + slack
