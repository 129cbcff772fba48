"""Minimal dense polynomials over mpmath reals, ascending coefficients.

Just enough arithmetic for band entries and 2x2 matrix entries: add, sub,
multiply, scalar scale, evaluate, trim. Coefficients live at whatever
working precision the caller has set.
"""

from __future__ import annotations

from mpmath import mpf


def _strip(coeffs):
    last = -1
    for i, c in enumerate(coeffs):
        if c != 0:
            last = i
    return tuple(coeffs[: last + 1])


class Poly:
    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        self.c = _strip([mpf(v) for v in coeffs])

    @classmethod
    def constant(cls, value):
        return cls([value])

    @classmethod
    def x_power(cls, j, scale=1):
        return cls([0] * j + [scale])

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial reported as -1."""
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def coefficient(self, j: int):
        return self.c[j] if 0 <= j < len(self.c) else mpf(0)

    def __call__(self, x):
        acc = mpf(0)
        for coeff in reversed(self.c):
            acc = acc * x + coeff
        return acc

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly.constant(other)
        n = max(len(self.c), len(other.c))
        return Poly(
            [self.coefficient(i) + other.coefficient(i) for i in range(n)]
        )

    __radd__ = __add__

    def __neg__(self):
        return Poly([-v for v in self.c])

    def __sub__(self, other):
        other = other if isinstance(other, Poly) else Poly.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return Poly.constant(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly([v * mpf(other) for v in self.c])
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [mpf(0)] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if a == 0:
                continue
            for j, b in enumerate(other.c):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def max_abs(self):
        return max((abs(v) for v in self.c), default=mpf(0))

    def trim(self, floor) -> "Poly":
        """Zero every coefficient with |c| < floor (absolute threshold)."""
        return Poly([v if abs(v) >= floor else mpf(0) for v in self.c])

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        return f"Poly({[str(v) for v in self.c]})"
