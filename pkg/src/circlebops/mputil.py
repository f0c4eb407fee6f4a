"""Arbitrary-precision helpers shared by the whole pipeline.

Everything numerical runs on mpmath under a caller-chosen binary precision.
This module centralises: precision management, conversion of heterogeneous
inputs (ints, floats, Fractions, '3/8' strings, [re, im] pairs, QC) to mpc,
dense complex LU decomposition for determinants and Toeplitz solves, relative
residual measurement, and deterministic pseudo-random sample points.
"""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction
import random

import mpmath
from mpmath import mp, mpf, mpc

from .errors import DegenerateDeterminant, RootMatchingAmbiguous
from .exact import QC


# extra bits used inside cancellation-prone kernels (determinant solves,
# orthogonality pairings, series extraction) so that delivered values are
# honest at the configured precision even for badly scaled moment windows
GUARD_BITS = 48


@contextmanager
def working_precision(bits: int):
    """Run a block at the given binary precision (>= 53)."""
    if bits < 53:
        raise ValueError("working precision below 53 bits is not supported")
    with mp.workprec(bits):
        yield


def guarded():
    """Context manager adding the internal guard bits."""
    return mp.extraprec(GUARD_BITS)


def to_mpc(x) -> mpc:
    """Coerce supported scalar encodings to mpc at current precision."""
    if isinstance(x, mpc):
        return x
    if isinstance(x, QC):
        return x.to_mpc()
    if isinstance(x, Fraction):
        return mpc(mpf(x.numerator) / x.denominator)
    if isinstance(x, str):
        f = Fraction(x)
        return mpc(mpf(f.numerator) / f.denominator)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return mpc(_to_mpf(x[0]), _to_mpf(x[1]))
    if isinstance(x, complex):
        return mpc(x.real, x.imag)
    return mpc(x)


def _to_mpf(x) -> mpf:
    if isinstance(x, str):
        f = Fraction(x)
        return mpf(f.numerator) / f.denominator
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def parse_exact(x):
    """Parse a scalar encoding into an exact QC where possible.

    Accepts ints, Fractions, fraction strings, [re, im] pairs of the same,
    and floats (which are taken at their exact binary value).
    """
    if isinstance(x, QC):
        return x
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return QC(_frac(x[0]), _frac(x[1]))
    return QC(_frac(x))


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    raise TypeError(f"cannot interpret {v!r} as an exact rational")


# ---------------------------------------------------------------------------
# dense complex linear algebra (lists of lists of mpc)
# ---------------------------------------------------------------------------

def lu_det(rows) -> mpc:
    """Determinant via LU with partial pivoting.  Empty matrix gives 1."""
    n = len(rows)
    if n == 0:
        return mpc(1)
    a = [[to_mpc(v) for v in r] for r in rows]
    det = mpc(1)
    for k in range(n):
        piv, pval = k, abs(a[k][k])
        for i in range(k + 1, n):
            m = abs(a[i][k])
            if m > pval:
                piv, pval = i, m
        if pval == 0:
            return mpc(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        inv = 1 / a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] * inv
            if f != 0:
                row_i, row_k = a[i], a[k]
                for j in range(k + 1, n):
                    row_i[j] -= f * row_k[j]
    return det


def lu_solve(rows, rhs):
    """Solve a dense complex system; raises if a pivot vanishes outright."""
    n = len(rows)
    a = [[to_mpc(v) for v in r] + [to_mpc(rhs[i])] for i, r in enumerate(rows)]
    for k in range(n):
        piv, pval = k, abs(a[k][k])
        for i in range(k + 1, n):
            m = abs(a[i][k])
            if m > pval:
                piv, pval = i, m
        if pval == 0:
            raise DegenerateDeterminant("singular linear system")
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
        inv = 1 / a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] * inv
            if f != 0:
                for j in range(k + 1, n + 1):
                    a[i][j] -= f * a[k][j]
    x = [mpc(0)] * n
    for i in range(n - 1, -1, -1):
        s = a[i][n]
        for j in range(i + 1, n):
            s -= a[i][j] * x[j]
        x[i] = s / a[i][i]
    return x


# ---------------------------------------------------------------------------
# residual measurement
# ---------------------------------------------------------------------------

def rel_residual(total, scale) -> mpf:
    """|total| / scale with a floor guarding against zero scales."""
    scale = mpf(scale)
    if scale <= 0:
        scale = mpf(1)
    return abs(total) / scale


def combo_residual(terms) -> mpf:
    """Relative residual of a sum that should vanish.

    Measured against the largest participating term so the number is
    meaningful whether the identity lives at magnitude 1e-30 or 1e+30.
    """
    terms = [to_mpc(t) for t in terms]
    scale = max((abs(t) for t in terms), default=mpf(0))
    if scale == 0:
        return mpf(0)
    return abs(sum(terms)) / scale


def vector_residual(vectors) -> mpf:
    """Relative residual of a list of coefficient vectors summing to zero."""
    length = max((len(v) for v in vectors), default=0)
    scale = mpf(0)
    total = [mpc(0)] * length
    for v in vectors:
        for k, c in enumerate(v):
            c = to_mpc(c)
            total[k] += c
            a = abs(c)
            if a > scale:
                scale = a
    if scale == 0:
        return mpf(0)
    return max((abs(t) for t in total), default=mpf(0)) / scale


# ---------------------------------------------------------------------------
# sample points and root matching
# ---------------------------------------------------------------------------

def sample_points(count: int, avoid=(), radius: float = 1.37, seed: int = 1,
                  min_dist: float = 1e-6):
    """Deterministic points on a fixed circle, redrawn away from ``avoid``.

    The radius is an arbitrary but frozen choice off the unit circle; points
    colliding with singularities or roots are replaced deterministically.
    """
    rng = random.Random(seed)
    avoid = [to_mpc(a) for a in avoid]
    pts = []
    r = mpf(radius)
    while len(pts) < count:
        theta = mpf(rng.random()) * 2 * mp.pi
        z = r * mpmath.exp(mpc(0, 1) * theta)
        if all(abs(z - a) > min_dist for a in avoid):
            pts.append(z)
    return pts


def match_roots(reference, perturbed, ambiguity_ratio: float = 0.25):
    """Pair each reference root with its nearest perturbed partner.

    Keeps labels stable across a perturbed recomputation (sorting would swap
    them).  Raises if the assignment is not clearly one-to-one.
    """
    if len(reference) != len(perturbed):
        raise RootMatchingAmbiguous("root sets differ in size")
    remaining = list(range(len(perturbed)))
    out = []
    for q in reference:
        dists = sorted(remaining, key=lambda i: abs(perturbed[i] - q))
        best = dists[0]
        if len(dists) > 1:
            d0 = abs(perturbed[best] - q)
            d1 = abs(perturbed[dists[1]] - q)
            if d1 > 0 and d0 / d1 > ambiguity_ratio and d0 > 0:
                raise RootMatchingAmbiguous(
                    f"ambiguous pairing near {q}: {d0} vs {d1}")
        out.append(perturbed[best])
        remaining.remove(best)
    return out
