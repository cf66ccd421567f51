"""Small shared helpers."""

import math


def fmt_float(x: float) -> str:
    """Shortest decimal string that parses back to exactly the same float.

    Integral values drop the trailing '.0' so zero prints as '0'.
    """
    s = repr(float(x))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.remainder(a, math.tau)
    if w <= -math.pi:
        w += math.tau
    return w
