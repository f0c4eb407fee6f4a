"""Brute-force construction of the bi-orthogonal system from determinants.

Everything at level n is derived from the Toeplitz data of the moment
sequence: I_n = det[w_{i-j}], the two polynomial families phi_n / phibar_n
from bordered determinants (realised as Toeplitz solves, which is the same
linear algebra without the O(n^4) cofactor pass), the normalisation
kappa_n = sqrt(I_n / I_{n+1}) up to a recorded sign gauge, and the
associated functions as truncated interior expansions

    eps_n(z)     =  2 sum_{m>=0} <phi_n, m> z^m,
    epsstar_n(z) = -2 sum_{m>=1} <m-bar, phibar_n> z^{n+m},

where <phi_n, m> = sum_j c_j w_{m-j} is the moment pairing that also drives
the orthogonality relations.  At level zero these expansions reduce to the
defining normalisations kappa_0 [w_0 +- F], which pins the index conventions;
the test suite verifies the leading coefficients against the closed forms.

This module is the reference path: the recurrence-based routes elsewhere are
always compared against it.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf, mpc

from .errors import DegenerateDeterminant
from .moments import MomentSequence
from .mputil import guarded, lu_det, lu_solve, to_mpc
from .polys import OffsetSeries, padd, pscale, pshift


@dataclass
class BopsLevel:
    """All scalar and polynomial data of one level of the system."""

    n: int
    I: mpc                  # Toeplitz determinant at this level
    I_next: mpc
    kappa: mpc              # gauge * sqrt(I_n / I_{n+1})
    gauge: int
    phi: list               # coefficients of phi_n, ascending, length n+1
    phibar: list            # coefficients of phibar_n

    @property
    def phistar(self) -> list:
        """phistar_n(z) = z^n phibar_n(1/z): reversed coefficients."""
        return list(reversed(self.phibar))

    @property
    def phi0(self) -> mpc:
        return self.phi[0]

    @property
    def phibar0(self) -> mpc:
        return self.phibar[0]

    @property
    def r(self) -> mpc:
        return self.phi[0] / self.kappa

    @property
    def rbar(self) -> mpc:
        return self.phibar[0] / self.kappa

    def _monic_coeff(self, coeffs, back: int) -> mpc:
        idx = self.n - back
        if idx < 0:
            return mpc(0)
        return coeffs[idx] / self.kappa

    @property
    def lam(self) -> mpc:
        return self._monic_coeff(self.phi, 1)

    @property
    def lambar(self) -> mpc:
        return self._monic_coeff(self.phibar, 1)

    @property
    def mu(self) -> mpc:
        return self._monic_coeff(self.phi, 2)

    @property
    def mubar(self) -> mpc:
        return self._monic_coeff(self.phibar, 2)

    @property
    def nu(self) -> mpc:
        return self._monic_coeff(self.phi, 3)

    @property
    def nubar(self) -> mpc:
        return self._monic_coeff(self.phibar, 3)


# ---------------------------------------------------------------------------
# module-level determinant operations
# ---------------------------------------------------------------------------

def toeplitz_det(moments: MomentSequence, n: int) -> mpc:
    """I_n = det[w_{i-j}]_{i,j=0..n-1} by LU; I_0 = 1."""
    moments.extend(-(n - 1) if n else 0, n - 1 if n else 0)
    with guarded():
        rows = [[to_mpc(moments.w(i - j)) for j in range(n)] for i in range(n)]
        return lu_det(rows)


def phi_from_determinant(moments: MomentSequence, n: int) -> list:
    """Monic coefficients of phi_n/kappa_n.

    The bordered determinant with bottom row (1, z, ..., z^n) expands to a
    Toeplitz solve of the orthogonality conditions against monomials below n.
    """
    if n == 0:
        return [mpc(1)]
    moments.extend(-n, n)
    with guarded():
        rows = [[to_mpc(moments.w(m - j)) for j in range(n)] for m in range(n)]
        rhs = [-to_mpc(moments.w(m - n)) for m in range(n)]
        try:
            low = lu_solve(rows, rhs)
        except DegenerateDeterminant:
            raise DegenerateDeterminant(
                f"I_{n} = 0: system does not exist at level {n}")
        return low + [mpc(1)]


def phibar_from_determinant(moments: MomentSequence, n: int) -> list:
    """Monic coefficients of phibar_n/kappa_n (second family)."""
    if n == 0:
        return [mpc(1)]
    moments.extend(-n, n)
    with guarded():
        rows = [[to_mpc(moments.w(j - m)) for j in range(n)] for m in range(n)]
        rhs = [-to_mpc(moments.w(n - m)) for m in range(n)]
        try:
            low = lu_solve(rows, rhs)
        except DegenerateDeterminant:
            raise DegenerateDeterminant(
                f"I_{n} = 0: system does not exist at level {n}")
        return low + [mpc(1)]


def kappa_from_dets(moments: MomentSequence, n: int, gauge: int = 1) -> mpc:
    """kappa_n as the principal square root of I_n/I_{n+1}, times the gauge.

    The sign is not fixed by the structure; quantities that are not invariant
    under kappa_n -> -kappa_n are flagged as gauge dependent in the output
    layer, and the tests recompute under flipped gauges.
    """
    In = toeplitz_det(moments, n)
    In1 = toeplitz_det(moments, n + 1)
    if In == 0 or In1 == 0:
        raise DegenerateDeterminant(f"vanishing determinant near level {n}")
    return gauge * mpmath.sqrt(In / In1)


# ---------------------------------------------------------------------------
# pairings and associated-function expansions
# ---------------------------------------------------------------------------

def pairing_first(moments: MomentSequence, coeffs, m: int) -> mpc:
    """<f, m> = sum_j f_j w_{m-j}: integral of w f(zeta) zeta^{-m}."""
    with guarded():
        return mpmath.fsum(
            (to_mpc(c) * to_mpc(moments.w(m - j))
             for j, c in enumerate(coeffs)), absolute=False)


def pairing_second(moments: MomentSequence, coeffs, m: int) -> mpc:
    """<m, g> = sum_j g_j w_{j-m}: integral of w zeta^m g(1/zeta)."""
    with guarded():
        return mpmath.fsum(
            (to_mpc(c) * to_mpc(moments.w(j - m))
             for j, c in enumerate(coeffs)), absolute=False)


def epsilon_from_determinant(moments: MomentSequence, phi_coeffs,
                             truncation: int) -> OffsetSeries:
    """Interior expansion of eps_n up to z^truncation.

    For n >= 1 the coefficients below z^n vanish by orthogonality (kept: they
    double as a consistency alarm); the m = 0 term carries the level-zero
    normalisation.
    """
    n = len(phi_coeffs) - 1
    moments.extend(-n, truncation)
    coeffs = [2 * pairing_first(moments, phi_coeffs, m)
              for m in range(truncation + 1)]
    return OffsetSeries(0, coeffs)


def epsilonstar_from_determinant(moments: MomentSequence, phibar_coeffs,
                                 truncation: int) -> OffsetSeries:
    """Interior expansion of epsstar_n (starts at z^{n+1}) up to z^truncation."""
    n = len(phibar_coeffs) - 1
    nterms = truncation - n
    if nterms < 1:
        return OffsetSeries(n + 1, [])
    moments.extend(0, n + nterms)
    coeffs = [-2 * pairing_second(moments, phibar_coeffs, -m)
              for m in range(1, nterms + 1)]
    return OffsetSeries(n + 1, coeffs)


# ---------------------------------------------------------------------------
# the cached oracle
# ---------------------------------------------------------------------------

class ToeplitzOracle:
    """Caches determinants, levels and expansions over one moment sequence.

    ``gauge`` maps level -> +-1 and fixes the kappa_n sign; the default is
    the principal branch everywhere.
    """

    def __init__(self, moments: MomentSequence, gauge=None):
        self.moments = moments
        self._gauge = dict(gauge) if gauge else {}
        self._dets = {}
        self._levels = {}
        self._eps = {}
        self._epsstar = {}

    def gauge(self, n: int) -> int:
        return self._gauge.get(n, 1)

    def det(self, n: int) -> mpc:
        if n not in self._dets:
            self._dets[n] = toeplitz_det(self.moments, n)
        return self._dets[n]

    def level(self, n: int) -> BopsLevel:
        if n in self._levels:
            return self._levels[n]
        In, In1 = self.det(n), self.det(n + 1)
        if In == 0 or In1 == 0:
            raise DegenerateDeterminant(f"vanishing determinant at level {n}")
        if n >= 1:
            # an exactly-zero determinant computes as roundoff noise; compare
            # against the scale set by the neighbouring ratio
            floor = mpf(2) ** (-(3 * mp.prec // 4))
            ref = abs(In) ** 2 / max(abs(self.det(n - 1)), mpf(1e-300))
            if abs(In1) < floor * ref:
                raise DegenerateDeterminant(
                    f"determinant at level {n + 1} vanishes to working "
                    f"precision; the system truncates here")
        kap = self.gauge(n) * mpmath.sqrt(In / In1)
        phi = [kap * c for c in phi_from_determinant(self.moments, n)]
        phibar = [kap * c for c in phibar_from_determinant(self.moments, n)]
        lev = BopsLevel(n=n, I=In, I_next=In1, kappa=kap, gauge=self.gauge(n),
                        phi=phi, phibar=phibar)
        self._levels[n] = lev
        return lev

    def eps_series(self, n: int, truncation: int) -> OffsetSeries:
        got = self._eps.get(n)
        if got is None or got.top < truncation:
            got = epsilon_from_determinant(self.moments, self.level(n).phi,
                                           truncation)
            self._eps[n] = got
        return got

    def epsstar_series(self, n: int, truncation: int) -> OffsetSeries:
        got = self._epsstar.get(n)
        if got is None or got.top < truncation:
            got = epsilonstar_from_determinant(
                self.moments, self.level(n).phibar, truncation)
            self._epsstar[n] = got
        return got

    # -- residual diagnostics ------------------------------------------------

    def orthogonality_residual(self, n: int) -> mpf:
        """max over m < n of the first-kind pairing, relative to 1/kappa_n."""
        lev = self.level(n)
        scale = abs(pairing_first(self.moments, lev.phi, n))
        worst = mpf(0)
        for m in range(n):
            worst = max(worst, abs(pairing_first(self.moments, lev.phi, m)))
        return worst / scale if scale > 0 else worst

    def orthogonality_residual_second(self, n: int) -> mpf:
        """Same for the second family, paired against monomials below n."""
        lev = self.level(n)
        scale = abs(pairing_second(self.moments, lev.phibar, n))
        worst = mpf(0)
        for m in range(n):
            worst = max(worst,
                        abs(pairing_second(self.moments, lev.phibar, m)))
        return worst / scale if scale > 0 else worst

    def orthonormality_residual(self, n: int) -> mpf:
        """| <phi_n phibar_n(1/.)> - 1 | via double moment sums."""
        lev = self.level(n)
        total = mpc(0)
        for jj, cb in enumerate(lev.phibar):
            if cb:
                total += cb * pairing_first(self.moments, lev.phi, jj)
        return abs(total - 1)


# ---------------------------------------------------------------------------
# recurrence path (the independent route checked against the oracle)
# ---------------------------------------------------------------------------

def geronimus_step(level_n: BopsLevel, kappa_next: mpc, phi_next_0: mpc,
                   phibar_next_0: mpc):
    """(phi, phistar) at level n+1 from level n data and next-level constants.

    The transfer matrix acts on the column (phi_n, phistar_n):

        kappa_n phi_{n+1}     = kappa_{n+1} z phi_n + phi_{n+1}(0) phistar_n
        kappa_n phistar_{n+1} = phibar_{n+1}(0) z phi_n + kappa_{n+1} phistar_n
    """
    kn = level_n.kappa
    phi_next = pscale(
        padd(pscale(pshift(level_n.phi, 1), kappa_next),
             pscale(level_n.phistar, phi_next_0)), 1 / kn)
    phistar_next = pscale(
        padd(pscale(pshift(level_n.phi, 1), phibar_next_0),
             pscale(level_n.phistar, kappa_next)), 1 / kn)
    return phi_next, phistar_next


def casoratian_residuals(oracle: ToeplitzOracle, n: int,
                         extra_terms: int = 8) -> dict:
    """Relative residuals of the three cross-product identities at level n.

    Each combination of polynomial and associated-function series collapses
    to a single monomial; every other coefficient up to the truncation must
    vanish.
    """
    lev_n = oracle.level(n)
    lev_n1 = oracle.level(n + 1)
    top = 2 * n + 2 + extra_terms
    eps_n = oracle.eps_series(n, top)
    eps_n1 = oracle.eps_series(n + 1, top)
    est_n = oracle.epsstar_series(n, top)
    est_n1 = oracle.epsstar_series(n + 1, top)

    out = {}

    def finish(label, built, mono_pow, mono_coeff):
        target = OffsetSeries(mono_pow, [mono_coeff])
        resid = built.add(target.scale(-1))
        scale = max((abs(c) for c in built.coeffs), default=mpf(0))
        scale = max(scale, abs(mono_coeff))
        worst = max((abs(c) for c in resid.coeffs), default=mpf(0))
        out[label] = worst / scale if scale > 0 else worst

    a = eps_n.mul_poly(lev_n1.phi, top).add(
        eps_n1.mul_poly(lev_n.phi, top).scale(-1))
    finish("Cas:a", a, n, 2 * lev_n1.phi0 / lev_n.kappa)

    b = est_n.mul_poly(lev_n1.phistar, top).add(
        est_n1.mul_poly(lev_n.phistar, top).scale(-1))
    finish("Cas:b", b, n + 1, 2 * lev_n1.phibar0 / lev_n.kappa)

    c = est_n.mul_poly(lev_n.phi, top).add(
        eps_n.mul_poly(lev_n.phistar, top))
    finish("Cas:c", c, n, mpc(2))

    return out
