"""Exact/float number handling.

The package runs in one of two arithmetic modes:

* ``rational`` -- every probability and cost is a ``fractions.Fraction``;
  comparisons and belief-atom deduplication are exact.
* ``float`` -- probabilities are floats; belief-atom keys quantize each
  coordinate to 12 decimal digits.

Model files always store numbers losslessly (ints, ``"p/q"`` strings, or
decimal strings); conversion to floats happens only when a float-mode
computation asks for it.
"""

from fractions import Fraction

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

# Quantization used for float-mode belief atom keys.
KEY_DIGITS = 12
KEY_TOL = 1e-9


def parse_number(value, path=None):
    """Parse a config number into an exact Fraction.

    Accepts ints, floats (converted exactly, so ``0.5`` is 1/2 but
    ``0.1`` is the binary rational nearest 0.1), and strings such as
    ``"1/3"`` or ``"0.25"``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r} at {path}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse number {value!r} at {path}") from exc
    raise ValueError(f"cannot parse number {value!r} at {path}")


def format_number(x):
    """Serialize a number losslessly for config/report files."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return repr(x)


def as_mode(x, mode):
    if mode == FLOAT:
        return float(x)
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def canonical_key(vec, mode=None):
    """Canonical hashable key for a probability vector.

    Rational vectors compare exactly; float vectors are quantized to
    ``KEY_DIGITS`` decimal digits.
    """
    if mode is None:
        mode = FLOAT if any(isinstance(w, float) for w in vec) else RATIONAL
    if mode == RATIONAL:
        return tuple(Fraction(w) for w in vec)
    return tuple(round(float(w), KEY_DIGITS) for w in vec)


def check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"unknown arithmetic mode {mode!r}; expected one of {MODES}")
    return mode
