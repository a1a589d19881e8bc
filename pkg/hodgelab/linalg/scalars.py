"""Exact Gaussian-rational scalars and the backend switch.

Exact entries are complex numbers ``a + b*i`` with ``a`` and ``b`` held as
:class:`fractions.Fraction`, so rank and kernel computations give unambiguous
integers. Float entries are plain ``complex128``.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Union

from ..errors import SchemaError


class Backend(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


QQ = Fraction

Number = Union[int, Fraction, "GaussianRational"]


class GaussianRational:
    """Complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction] = 0, im: Union[int, Fraction] = 0) -> None:
        self.re = QQ(re)
        self.im = QQ(im)

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value)
        if isinstance(value, str):
            return cls.parse(value)
        raise TypeError(f"Cannot use {type(value).__name__} as an exact scalar")

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse strings such as ``"-1"``, ``"i"``, ``"2*i"``, ``"1/2-3/4*i"``."""
        s = str(text).replace(" ", "")
        if not s:
            raise SchemaError("Empty Gaussian-rational literal")
        try:
            if not s.endswith("i"):
                return cls(QQ(s))
            body = s[:-1]
            if body.endswith("*"):
                body = body[:-1]
            split = max(body.rfind("+"), body.rfind("-"))
            if split > 0:
                re_part, im_part = body[:split], body[split:]
            else:
                re_part, im_part = "", body
            if im_part in ("", "+"):
                im = QQ(1)
            elif im_part == "-":
                im = QQ(-1)
            else:
                im = QQ(im_part)
            return cls(QQ(re_part) if re_part else QQ(0), im)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"Invalid Gaussian-rational literal {text!r}: {exc}") from exc

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __add__(self, other):
        if isinstance(other, (float, complex)):
            return complex(self) + other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re + other, self.im)
        if isinstance(other, GaussianRational):
            return GaussianRational(self.re + other.re, self.im + other.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __pos__(self) -> "GaussianRational":
        return self

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational, float, complex)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (float, complex)):
            return other - complex(self)
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (float, complex)):
            return complex(self) * other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re * other, self.im * other)
        if isinstance(other, GaussianRational):
            return GaussianRational(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (float, complex)):
            return complex(self) / other
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero Gaussian rational")
            return GaussianRational(self.re / other, self.im / other)
        if isinstance(other, GaussianRational):
            norm = other.re * other.re + other.im * other.im
            if norm == 0:
                raise ZeroDivisionError("division by zero Gaussian rational")
            num = self * other.conjugate()
            return GaussianRational(num.re / norm, num.im / norm)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (float, complex)):
            return other / complex(self)
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other) / self
        return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __repr__(self) -> str:
        return f"GaussianRational({self})"

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.im == 1:
            im = "i"
        elif self.im == -1:
            im = "-i"
        else:
            im = f"{self.im}*i"
        if self.re == 0:
            return im
        sign = "" if im.startswith("-") else "+"
        return f"{self.re}{sign}{im}"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


def gr(value) -> GaussianRational:
    """Shorthand constructor accepting ints, fractions, strings and Gaussian rationals."""
    return GaussianRational.coerce(value)
