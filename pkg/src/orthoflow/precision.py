"""Global working-precision configuration.

Precision is counted in bits of mantissa. All pipeline entry points take an
optional ``precision`` argument; ``None`` means "use the global default".
Internal computations routinely run with guard bits above the requested
precision, but delivered accuracies are always stated against the requested
value.
"""

from __future__ import annotations

from contextlib import contextmanager

from mpmath import mp, mpf

DEFAULT_PRECISION = 256

_default = DEFAULT_PRECISION


def get_default_precision() -> int:
    return _default


def set_default_precision(bits: int) -> None:
    global _default
    if bits < 24:
        raise ValueError("precision below 24 bits is not supported")
    _default = int(bits)


def resolve(precision) -> int:
    """Map an optional precision argument to concrete bits."""
    if precision is None:
        return _default
    bits = int(precision)
    if bits < 24:
        raise ValueError("precision below 24 bits is not supported")
    return bits


@contextmanager
def working(bits: int):
    """Context manager: run the body at `bits` bits of mantissa."""
    old = mp.prec
    mp.prec = int(bits)
    try:
        yield
    finally:
        mp.prec = old


def decimal_digits(bits: int) -> int:
    """Significant decimal digits carried by `bits` bits, with slack for round-trips."""
    return int(bits * 0.30103) + 8


def to_str(x, bits: int) -> str:
    """Deterministic decimal string for x at the given precision tag."""
    return mp.nstr(mpf(x), decimal_digits(bits), strip_zeros=True)
