"""Integer parts of real thresholds such as ``gamma * log(n)`` or ``b * n``.

Lengths that must be at least a real bound use the ceiling; counts that must
not exceed a real bound use the floor.  A small tolerance absorbs rounding so
that e.g. ``3 * log(e)`` is treated as exactly 3.
"""
import math

_TOL = 1e-9


def ceil_int(x):
    return int(math.ceil(x - _TOL))


def floor_int(x):
    return int(math.floor(x + _TOL))


def long_gap_length(b, n):
    """Smallest integer gap counted as ``>= b*n``."""
    return max(ceil_int(b * n), 1)


def log_count(c, n):
    """Largest contact count that is ``<= c*log(n)``."""
    return floor_int(c * math.log(n))
