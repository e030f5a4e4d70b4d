"""Exact arithmetic in the ordered field Q(√2).

Every probability, correlator and LP quantity in the toolkit is an
``ExactScalar`` a + b√2 with rational a and b. The field is closed under the
four operations and carries a decidable total order, which is all the
simplex method and Gaussian elimination need.
"""

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Dict, Union

from .errors import ScalarParseError

Number = Union[int, Fraction, 'ExactScalar']

_SQRT2 = math.sqrt(2.0)
_TERM = re.compile(r'[+-]?[^+-]+')


def _sign(q: Fraction) -> int:
    return (q > 0) - (q < 0)


class ExactScalar:
    """A number a + b·√2 with rational coefficients."""

    __slots__ = ('a', 'b')

    def __init__(self, a: Union[int, str, Fraction] = 0, b: Union[int, str, Fraction] = 0):
        self.a = a if type(a) is Fraction else Fraction(a)
        self.b = b if type(b) is Fraction else Fraction(b)

    @classmethod
    def coerce(cls, value: Number) -> 'ExactScalar':
        """Return ``value`` as an ExactScalar (ints and Fractions are lifted)."""
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, Rational):
            return cls(Fraction(value))
        if isinstance(value, str):
            return cls.parse(value)
        raise TypeError(f"Cannot convert {type(value).__name__} to ExactScalar")

    @classmethod
    def parse(cls, text: str) -> 'ExactScalar':
        """Parse ``"p/q"``, ``"p/q+r/s*sqrt2"``, ``"-sqrt2"`` and similar forms."""
        compact = text.replace(' ', '')
        if not compact:
            raise ScalarParseError("empty scalar")
        a = Fraction(0)
        b = Fraction(0)
        try:
            for term in _TERM.findall(compact):
                if term.endswith('sqrt2'):
                    coeff = term[:-len('sqrt2')].rstrip('*')
                    if coeff in ('', '+', '-'):
                        coeff += '1'
                    b += Fraction(coeff)
                else:
                    a += Fraction(term)
        except (ValueError, ZeroDivisionError) as e:
            raise ScalarParseError(f"cannot parse scalar {text!r}: {e}") from e
        if ''.join(_TERM.findall(compact)) != compact:
            raise ScalarParseError(f"cannot parse scalar {text!r}")
        return cls(a, b)

    @classmethod
    def from_json(cls, data: Union[Dict[str, str], str, int]) -> 'ExactScalar':
        """Read ``{"a": "p/q", "b": "r/s"}`` (missing keys are 0) or a scalar string."""
        if isinstance(data, dict):
            try:
                return cls(Fraction(str(data.get('a', '0'))), Fraction(str(data.get('b', '0'))))
            except (ValueError, ZeroDivisionError) as e:
                raise ScalarParseError(f"cannot parse scalar {data!r}: {e}") from e
        if isinstance(data, bool):
            raise ScalarParseError(f"cannot parse scalar {data!r}")
        if isinstance(data, int):
            return cls(data)
        if isinstance(data, str):
            return cls.parse(data)
        raise ScalarParseError(f"cannot parse scalar {data!r}")

    def to_json(self) -> Dict[str, str]:
        return {'a': str(self.a), 'b': str(self.b)}

    # -- field operations -------------------------------------------------

    def __add__(self, other):
        if isinstance(other, ExactScalar):
            return ExactScalar(self.a + other.a, self.b + other.b)
        if isinstance(other, Rational):
            return ExactScalar(self.a + other, self.b)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ExactScalar):
            return ExactScalar(self.a - other.a, self.b - other.b)
        if isinstance(other, Rational):
            return ExactScalar(self.a - other, self.b)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Rational):
            return ExactScalar(other - self.a, -self.b)
        return NotImplemented

    def __neg__(self):
        return ExactScalar(-self.a, -self.b)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, ExactScalar):
            if not other.b:
                return ExactScalar(self.a * other.a, self.b * other.a)
            if not self.b:
                return ExactScalar(self.a * other.a, self.a * other.b)
            return ExactScalar(self.a * other.a + 2 * self.b * other.b,
                               self.a * other.b + self.b * other.a)
        if isinstance(other, Rational):
            return ExactScalar(self.a * other, self.b * other)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> 'ExactScalar':
        if not self.b:
            if not self.a:
                raise ZeroDivisionError("ExactScalar division by zero")
            return ExactScalar(1 / self.a)
        norm = self.a * self.a - 2 * self.b * self.b
        if not norm:
            raise ZeroDivisionError("ExactScalar division by zero")
        return ExactScalar(self.a / norm, -self.b / norm)

    def __truediv__(self, other):
        if isinstance(other, ExactScalar):
            if not other.b:
                if not other.a:
                    raise ZeroDivisionError("ExactScalar division by zero")
                return ExactScalar(self.a / other.a, self.b / other.a)
            return self * other.inverse()
        if isinstance(other, Rational):
            if not other:
                raise ZeroDivisionError("ExactScalar division by zero")
            return ExactScalar(self.a / other, self.b / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Rational):
            return self.inverse() * other
        return NotImplemented

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- order ------------------------------------------------------------

    def sign(self) -> int:
        """Exact sign of a + b√2."""
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0 or sa == sb:
            return sa if sa else sb
        if sa == 0:
            return sb
        # opposite signs: compare a² with 2b²
        return sa if self.a * self.a > 2 * self.b * self.b else sb

    def _cmp(self, other) -> int:
        if isinstance(other, ExactScalar):
            return (self - other).sign()
        if isinstance(other, Rational):
            return ExactScalar(self.a - other, self.b).sign()
        raise TypeError(f"Cannot compare ExactScalar with {type(other).__name__}")

    def __eq__(self, other):
        if isinstance(other, ExactScalar):
            return self.a == other.a and self.b == other.b
        if isinstance(other, Rational):
            return not self.b and self.a == other
        return NotImplemented

    def __hash__(self):
        return hash(self.a) if not self.b else hash((self.a, self.b))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    # -- conversions ------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return not self.b

    def __float__(self):
        return float(self.a) + float(self.b) * _SQRT2

    def __str__(self):
        if not self.b:
            return str(self.a)
        coeff = f"{self.b}*sqrt2" if self.b not in (1, -1) else ('sqrt2' if self.b == 1 else '-sqrt2')
        if not self.a:
            return coeff
        return f"{self.a}{'' if coeff.startswith('-') else '+'}{coeff}"

    def __repr__(self):
        return f"ExactScalar({str(self)!r})"


ZERO = ExactScalar(0)
ONE = ExactScalar(1)
SQRT2 = ExactScalar(0, 1)
INV_SQRT2 = ExactScalar(0, Fraction(1, 2))


def scalar(value: Number) -> ExactScalar:
    """Shorthand for ``ExactScalar.coerce``."""
    return ExactScalar.coerce(value)
