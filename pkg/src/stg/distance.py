"""Signed symmetric-log temporal distance.

The regression target between trajectory indices i and j is
``sign(j - i) * ln(1 + |j - i|)``: antisymmetric, zero at i == j, and
compressive so distant pairs do not dominate the squared loss.
"""

from __future__ import annotations

import math


def symlog(x: float) -> float:
    """sign(x) * ln(1 + |x|). Odd, monotone, identity-like near zero."""
    return math.copysign(math.log1p(abs(x)), x)


def symexp(x: float) -> float:
    """Inverse of :func:`symlog`: sign(x) * (exp(|x|) - 1)."""
    return math.copysign(math.expm1(abs(x)), x)


def symlog_distance(i: int, j: int) -> float:
    """Compressed signed distance from index i to index j."""
    return symlog(j - i)
