"""Exact Gaussian-rational arithmetic.

The identity suite wants a handful of computations carried out with no
rounding at all: expanding weight polynomials from exact singularity data,
round-tripping the moment recurrence, and cross-checking the LU determinant
against cofactor expansion at small sizes.  ``QC`` is a minimal field element
``re + im*i`` over :class:`fractions.Fraction` supporting exactly the
operations the polynomial and recurrence code uses, so that code can run
unchanged over exact or floating scalars.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath


class QC:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # ---- ring/field operations ----

    def __add__(self, other):
        other = _coerce(other)
        return QC(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return QC(-self.re, -self.im)

    def __sub__(self, other):
        other = _coerce(other)
        return QC(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        return QC(self.re * other.re - self.im * other.im,
                  self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by exact zero")
        return QC((self.re * other.re + self.im * other.im) / d,
                  (self.im * other.re - self.re * other.im) / d)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return QC(1) / self ** (-k)
        out, base = QC(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # ---- predicates / conversions ----

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_zero(self) -> bool:
        return not self

    def conjugate(self):
        return QC(self.re, -self.im)

    def to_mpc(self) -> mpmath.mpc:
        return mpmath.mpc(
            mpmath.mpf(self.re.numerator) / self.re.denominator,
            mpmath.mpf(self.im.numerator) / self.im.denominator,
        )

    def __repr__(self):
        return f"QC({self.re!r}, {self.im!r})"


def _coerce(x) -> QC:
    if isinstance(x, QC):
        return x
    if isinstance(x, (int, Fraction)):
        return QC(x)
    raise TypeError(f"cannot coerce {type(x).__name__} into QC")


def qc(re, im=0) -> QC:
    """Build a QC from ints, Fractions or fraction strings like '3/8'."""
    return QC(Fraction(re), Fraction(im))


def det_cofactor(rows):
    """Determinant by cofactor expansion.  O(n!) - the small-n micro-oracle."""
    n = len(rows)
    if n == 0:
        return QC(1)
    if n == 1:
        return rows[0][0]
    total = QC(0)
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * det_cofactor(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def det_fraction_free(rows):
    """Exact determinant by Bareiss elimination, usable beyond n ~ 8."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return QC(1)
    sign = 1
    prev = QC(1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return QC(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return d if sign == 1 else -d
