"""Global operation counters.

Cheap module-level tallies of the expensive group operations; the
benchmark and the operation-count checks read deltas through track().
Not synchronized: measurement runs are single-threaded, and in the
engine the GIL keeps the increments merely approximate, which is all
the stats endpoint needs.
"""

from contextlib import contextmanager

COUNTS = {
    "pairing": 0,
    "exp_g1": 0,
    "exp_g2": 0,
    "exp_gt": 0,
    "transform": 0,
    "user_exp": 0,
}


def bump(name, n=1):
    COUNTS[name] = COUNTS.get(name, 0) + n


def snapshot():
    return dict(COUNTS)


def reset():
    for k in COUNTS:
        COUNTS[k] = 0


@contextmanager
def track(out):
    """Collect counter deltas over a with-block into the dict `out`."""
    before = snapshot()
    try:
        yield out
    finally:
        after = snapshot()
        for k, v in after.items():
            out[k] = v - before.get(k, 0)
