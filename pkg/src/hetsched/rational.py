"""Exact rational quantities.

All times, speeds, workloads and utilizations in this package are
``fractions.Fraction`` values: arbitrary precision, always stored in lowest
terms with a positive denominator.  Floats are rejected at every parsing
boundary so that simulation traces and analytical bounds are bit-exact.
"""

from fractions import Fraction

Rat = Fraction


def parse_rational(value) -> Fraction:
    """Parse an exact rational from an int, a "p/q" string or a decimal string.

    Floats are rejected on purpose: a JSON number like 0.1 has no exact
    binary representation and would silently break exactness.
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a rational, got boolean {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise ValueError(
        f"expected int or string for a rational, got {type(value).__name__} "
        f"(floats are not accepted; write the value as a string)"
    )


def parse_positive(value, what: str = "value") -> Fraction:
    q = parse_rational(value)
    if q <= 0:
        raise ValueError(f"{what} must be positive, got {q}")
    return q


def parse_nonnegative(value, what: str = "value") -> Fraction:
    q = parse_rational(value)
    if q < 0:
        raise ValueError(f"{what} must be non-negative, got {q}")
    return q


def format_rational(q: Fraction) -> str:
    """Lowest-terms "p/q" string; integral values print without "/1"."""
    return str(q)
