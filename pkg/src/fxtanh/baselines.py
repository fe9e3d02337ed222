"""Reference oracle and comparison approximations (piecewise linear, Taylor).

These run in real arithmetic; quantization happens only at the output when a
caller asks for it, which keeps method error separate from rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# tanh x = x - x^3/3 + 2x^5/15 - 17x^7/315 + ...
_TAYLOR_COEFFS = (1.0, -1.0 / 3.0, 2.0 / 15.0, -17.0 / 315.0)


def reference_tanh(x: float) -> float:
    """(e^x - e^-x)/(e^x + e^-x) at full working precision; the error oracle."""
    return math.tanh(x)


@dataclass(frozen=True)
class PwlTable:
    """Piecewise-linear knot table over [0, clamp], odd-extended for x < 0."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.knots or self.knots[0] != (0.0, 0.0):
            raise ValueError("first knot must be (0, 0)")
        xs = [x for x, _ in self.knots]
        ys = [y for _, y in self.knots]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("knot inputs must be strictly ascending")
        if any(b < a for a, b in zip(ys, ys[1:])):
            raise ValueError("knot values must be nondecreasing")


def uniform_pwl_table(spacing: float = 0.25, clamp: float = 5.6) -> PwlTable:
    """Uniform tanh knots at the given spacing over [0, clamp]."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    n = math.ceil(clamp / spacing)
    return PwlTable(tuple((i * spacing, math.tanh(i * spacing)) for i in range(n + 1)))


def pwl_tanh(x: float, table: PwlTable) -> float:
    """Linear interpolation on |x| between bracketing knots, odd-extended.

    Inputs beyond the last knot return the last knot value (constant
    extension).
    """
    mag = abs(x)
    knots = table.knots
    if mag >= knots[-1][0]:
        y = knots[-1][1]
    else:
        lo, hi = 0, len(knots) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if knots[mid][0] <= mag:
                lo = mid
            else:
                hi = mid
        (x0, y0), (x1, y1) = knots[lo], knots[hi]
        y = y0 + (y1 - y0) * (mag - x0) / (x1 - x0)
    return -y if x < 0 else y


def taylor_tanh(x: float, terms: int) -> float:
    """Partial sum of the tanh Taylor series around zero.

    Accurate only for small |x|; the error grows rapidly toward the radius
    of convergence and beyond, which is what the comparison is meant to
    show.
    """
    if terms < 1:
        raise ValueError("need at least one term")
    if terms > len(_TAYLOR_COEFFS):
        raise ValueError(f"at most {len(_TAYLOR_COEFFS)} terms supported")
    acc = 0.0
    xsq = x * x
    power = x
    for k in range(terms):
        acc += _TAYLOR_COEFFS[k] * power
        power *= xsq
    return acc
