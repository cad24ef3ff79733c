"""Coefficient arithmetic shared by every engine.

Two regimes are used side by side.  Structural identities are checked in
exact arithmetic: :class:`fractions.Fraction` for rational data and
:class:`GaussRational` when a table carries imaginary parts.  Anything that
involves a complex parameter ``z`` is evaluated in ``complex`` double
precision.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Union

Rational = Fraction


@dataclass(frozen=True)
class ToleranceCfg:
    abs_tol: float = 1e-9
    psd_floor: float = -1e-10

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")


DEFAULT_TOL = ToleranceCfg()


@dataclass(frozen=True)
class GaussRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    @staticmethod
    def of(x) -> "GaussRational":
        if isinstance(x, GaussRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussRational(Fraction(x), Fraction(0))
        raise TypeError(f"cannot convert {x!r} to an exact complex rational")

    def simplify(self):
        """Collapse to a Fraction when the imaginary part vanishes."""
        return self.re if self.im == 0 else self

    def conjugate(self):
        return GaussRational(self.re, -self.im).simplify()

    def __add__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) + other
        o = GaussRational.of(other)
        return GaussRational(self.re + o.re, self.im + o.im).simplify()

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) * other
        o = GaussRational.of(other)
        return GaussRational(self.re * o.re - self.im * o.im,
                             self.re * o.im + self.im * o.re).simplify()

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) / other
        o = GaussRational.of(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero")
        return (self * GaussRational(o.re / den, -o.im / den))

    def __rtruediv__(self, other):
        if isinstance(other, (complex, float)):
            return other / complex(self)
        return GaussRational.of(other) / self

    def __eq__(self, other):
        if isinstance(other, GaussRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, (complex, float)):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __repr__(self):
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


Scalar = Union[int, Fraction, GaussRational, complex, float]


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, GaussRational))


def conj(x):
    return x.conjugate()


def magnitude(x):
    """Size of a scalar, exact whenever ``x`` is exact.

    For exact complex rationals the max-norm of the parts is returned so that
    the result stays a Fraction; it is zero iff ``x`` is zero.
    """
    if isinstance(x, GaussRational):
        return max(abs(x.re), abs(x.im))
    if isinstance(x, (int, Fraction)):
        return abs(Fraction(x))
    return abs(x)


def to_complex(x) -> complex:
    return complex(x)


def parse_rational(text: Union[str, int]) -> Fraction:
    """Parse ``"num/den"`` (or a bare integer) into a reduced Fraction."""
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a 'num/den' string, got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}") from exc


def make_scalar(re: Fraction, im: Fraction = Fraction(0)):
    return re if im == 0 else GaussRational(re, im)


def q_power(q: Fraction, z: Scalar) -> complex:
    """``q**z`` for real ``0 < q < 1``, using the real logarithm of ``q``."""
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    return positive_power(q, z)


def positive_power(base, z: Scalar) -> complex:
    """Principal power of a strictly positive real base."""
    b = float(base)
    if not b > 0 or not math.isfinite(b):
        raise ValueError(f"principal powers need a strictly positive base, got {base}")
    z = complex(z)
    if z == 0:
        return 1 + 0j
    if z.imag == 0 and z.real == int(z.real) and isinstance(base, (int, Fraction)):
        # integer powers of exact bases stay bit-exact
        return complex(float(Fraction(base) ** int(z.real)))
    out = cmath.exp(z * math.log(b))
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise OverflowError(f"{base}**{z} is not finite")
    return out


def approx_eq(x: Scalar, y: Scalar, cfg: ToleranceCfg = DEFAULT_TOL) -> bool:
    return abs(complex(x) - complex(y)) <= cfg.abs_tol


def is_number(x) -> bool:
    return isinstance(x, (Number, GaussRational))
