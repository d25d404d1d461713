"""Exact rationals extended with a single positive infinity.

Finite values are plain :class:`fractions.Fraction` objects; the infinite
value is the singleton :data:`INF`.  ``INF`` cooperates with Python's numeric
operators so that ordinary expressions like ``w * cost`` or ``sum(...)`` work
with the conventions ``0 * INF == 0`` and ``c * INF == INF`` for ``c > 0``.
Operations that would leave the extended rationals (``INF - INF``,
``-INF``, negative multiples of ``INF``) raise :class:`UndefinedArithmetic`.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Union

from .errors import UndefinedArithmetic

__all__ = [
    "INF",
    "Ext",
    "PosInf",
    "arith",
    "cmp",
    "format_ext",
    "is_finite",
    "parse_ext",
    "to_ext",
]


class PosInf:
    """Positive infinity. Use the module-level :data:`INF`; never instantiate."""

    _instance = None
    __slots__ = ()

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __hash__(self):
        return hash("pvcsp.INF")

    def __reduce__(self):
        return (PosInf, ())

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    # ordering: INF is above every finite value
    def __eq__(self, other):
        return other is self

    def __ne__(self, other):
        return other is not self

    def __lt__(self, other):
        _check_operand(other)
        return False

    def __le__(self, other):
        _check_operand(other)
        return other is self

    def __gt__(self, other):
        _check_operand(other)
        return other is not self

    def __ge__(self, other):
        _check_operand(other)
        return True

    # arithmetic
    def __add__(self, other):
        _check_operand(other)
        return self

    __radd__ = __add__

    def __sub__(self, other):
        _check_operand(other)
        if other is self:
            raise UndefinedArithmetic("inf - inf is undefined")
        return self

    def __rsub__(self, other):
        _check_operand(other)
        raise UndefinedArithmetic("finite - inf leaves the extended rationals")

    def __neg__(self):
        raise UndefinedArithmetic("negative infinity is not representable")

    def __pos__(self):
        return self

    def __mul__(self, other):
        _check_operand(other)
        if other is self:
            return self
        if other == 0:
            return Fraction(0)
        if other < 0:
            raise UndefinedArithmetic("negative multiple of inf")
        return self

    __rmul__ = __mul__

    def __truediv__(self, other):
        _check_operand(other)
        if other is self:
            raise UndefinedArithmetic("division by inf")
        if other == 0:
            raise UndefinedArithmetic("division by zero")
        if other < 0:
            raise UndefinedArithmetic("negative multiple of inf")
        return self

    def __rtruediv__(self, other):
        raise UndefinedArithmetic("division by inf")

    def __bool__(self):
        return True


INF = PosInf()

Ext = Union[Fraction, PosInf]


def _check_operand(other):
    if other is INF or isinstance(other, Rational):
        return
    raise TypeError(f"unsupported operand for extended rational: {other!r}")


def is_finite(x) -> bool:
    return x is not INF


def to_ext(x) -> Ext:
    """Coerce ints, Fractions, ``INF`` or the textual form to an extended rational."""
    if x is INF:
        return INF
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not extended rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return parse_ext(x)
    raise TypeError(f"cannot convert {x!r} to an exact extended rational")


_RAT_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


def parse_ext(text: str) -> Ext:
    """Parse ``p/q``, ``p`` or ``inf``.  A leading ``-`` is allowed on finite values only."""
    s = text.strip()
    if s == "inf":
        return INF
    m = _RAT_RE.match(s)
    if not m:
        raise ValueError(f"not an extended rational: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_ext(x) -> str:
    if x is INF:
        return "inf"
    x = to_ext(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def cmp(x, y) -> int:
    """Total order on extended rationals: -1, 0 or 1."""
    x, y = to_ext(x), to_ext(y)
    if x == y:
        return 0
    return -1 if x < y else 1


def arith(op: str, x, y=None):
    """Apply ``op`` in {add, sub, mul, neg, cmp, div} to extended rationals."""
    x = to_ext(x)
    if op == "neg":
        return -x
    y = to_ext(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "cmp":
        return cmp(x, y)
    if op == "div":
        if y is INF:
            raise UndefinedArithmetic("division by inf")
        if y == 0:
            raise UndefinedArithmetic("division by zero")
        return x / y
    raise ValueError(f"unknown operation {op!r}")
