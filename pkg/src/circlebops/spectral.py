"""Spectral coefficients of the first-order matrix system and their identity lattice.

The matrix A_n(z) in dY_n/dz = A_n Y_n is parameterised by four polynomials
(Theta_n, Omega_n and starred partners).  With the origin and 1 among the
singularities (canonical placement, N free points) their degrees are

    deg Theta_n = deg Thetastar_n = N,
    deg Omega_n = deg Omegastar_n = N + 1.

Extraction works through the exact series inversions

    2 (phi_{n+1}(0)/kappa_n) z^n Theta_n
        = W [eps_n phi_n' - eps_n' phi_n] + 2V eps_n phi_n,

(and three companions), evaluated as truncated-series products of oracle
data.  Every series coefficient outside the band [z^n, z^(n+deg)] must vanish;
the out-of-band maximum is recorded and doubles as a correctness alarm for
the whole pipeline (it is the degree-bound check).

The rest of the module turns the coupled recurrences, transition identities,
bilinear evaluations, summation identities, scalar ODE data and deformation
(Schlesinger) equations into residual reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf, mpc

from .bops import BopsLevel, ToeplitzOracle
from .errors import (DegreeBoundViolated, EvaluationAtRootOfTheta,
                     SamplePointOnSingularity, SingularityCollision)
from .mputil import guarded, sample_points, to_mpc, vector_residual
from .polys import (OffsetSeries, padd, pdiff, peval, pmul, pscale, pshift,
                    psub, ptrim, pdeg, pmax_abs)
from .report import CheckResult
from .weights import PolyPair


@dataclass
class SpectralData:
    """Coefficient vectors of the four spectral polynomials at one level."""

    n: int
    theta: list          # ascending, length N+1
    omega: list          # ascending, length N+2
    thetastar: list      # ascending, length N+1
    omegastar: list      # ascending, length N+2
    band_residual: mpf   # worst out-of-band series coefficient, relative

    def theta_at(self, z):
        return peval(self.theta, to_mpc(z))

    def omega_at(self, z):
        return peval(self.omega, to_mpc(z))

    def thetastar_at(self, z):
        return peval(self.thetastar, to_mpc(z))

    def omegastar_at(self, z):
        return peval(self.omegastar, to_mpc(z))


def band_tolerance() -> mpf:
    """Out-of-band alarm threshold at P bits of precision.

    10^(-P/4) with two decades of headroom: roundoff amplification through
    the series products can lift the noise floor a little above 10^(-P/4)
    itself, and the acceptance bound at 128 bits is 1e-30.
    """
    return mpf(10) ** (-(mp.prec // 4) + 2)


def _extract_band(series: OffsetSeries, lo: int, deg: int, factor: mpc):
    """Divide by the known prefactor and split in-band / out-of-band mass."""
    coeffs = [c / factor for c in series.window(lo, lo + deg)]
    scale = max((abs(to_mpc(c)) for c in series.coeffs), default=mpf(0))
    worst = mpf(0)
    for p in range(series.offset, series.top + 1):
        if lo <= p <= lo + deg:
            continue
        worst = max(worst, abs(to_mpc(series.coeff(p))))
    rel = worst / scale if scale > 0 else worst
    return coeffs, rel


def spectral_from_oracle(oracle: ToeplitzOracle, pair: PolyPair, n: int,
                         buffer: int = 6) -> SpectralData:
    """Spectral polynomials at level n from oracle data at levels n, n+1."""
    if pair.weight.placement != "canonical":
        raise ValueError("spectral extraction assumes canonical placement")
    alarm = band_tolerance()          # judged at the delivered precision
    with guarded():
        return _spectral_from_oracle_impl(oracle, pair, n, buffer, alarm)


def _spectral_from_oracle_impl(oracle, pair, n, buffer, alarm):
    N = pair.N
    W = pair.W_mpc()
    V2 = pair.V2_mpc()
    V = pscale(V2, mpf("0.5"))
    lev_n = oracle.level(n)
    lev_n1 = oracle.level(n + 1)
    top = n + N + 2 + buffer

    eps_n = oracle.eps_series(n, top + 1)
    eps_n1 = oracle.eps_series(n + 1, top + 1)
    est_n = oracle.epsstar_series(n, top + 1)
    est_n1 = oracle.epsstar_series(n + 1, top + 1)

    phi_n, phi_n1 = lev_n.phi, lev_n1.phi
    ps_n, ps_n1 = lev_n.phistar, lev_n1.phistar
    dphi_n = pdiff(phi_n)
    dps_n = pdiff(ps_n)

    # 2 (phi0_{n+1}/kappa_n) z^n Theta_n = W[eps phi' - eps' phi] + 2V eps phi
    r_theta = eps_n.mul_poly(dphi_n, top).add(
        eps_n.diff().mul_poly(phi_n, top).scale(-1)).mul_poly(W, top).add(
        eps_n.mul_poly(phi_n, top).mul_poly(V2, top))
    fac = 2 * lev_n1.phi0 / lev_n.kappa
    theta, r1 = _extract_band(r_theta, n, N, fac)

    # 2 (phi0_{n+1}/kappa_n) z^n Omega_n
    #   = W[eps_{n+1} phi_n' - eps_n' phi_{n+1}] + V[eps_{n+1} phi_n + eps_n phi_{n+1}]
    r_omega = eps_n1.mul_poly(dphi_n, top).add(
        eps_n.diff().mul_poly(phi_n1, top).scale(-1)).mul_poly(W, top).add(
        eps_n1.mul_poly(phi_n, top).add(
            eps_n.mul_poly(phi_n1, top)).mul_poly(V, top))
    omega, r2 = _extract_band(r_omega, n, N + 1, fac)

    # 2 (phibar0_{n+1}/kappa_n) z^{n+1} Thetastar_n
    #   = W[epsstar' phistar - epsstar phistar'] - 2V epsstar phistar
    r_ts = est_n.diff().mul_poly(ps_n, top).add(
        est_n.mul_poly(dps_n, top).scale(-1)).mul_poly(W, top).add(
        est_n.mul_poly(ps_n, top).mul_poly(V2, top).scale(-1))
    fac_s = 2 * lev_n1.phibar0 / lev_n.kappa
    thetastar, r3 = _extract_band(r_ts, n + 1, N, fac_s)

    # 2 (phibar0_{n+1}/kappa_n) z^{n+1} Omegastar_n
    #   = W[epsstar_n' phistar_{n+1} - epsstar_{n+1} phistar_n']
    #     - V[epsstar_{n+1} phistar_n + epsstar_n phistar_{n+1}]
    r_os = est_n.diff().mul_poly(ps_n1, top).add(
        est_n1.mul_poly(dps_n, top).scale(-1)).mul_poly(W, top).add(
        est_n1.mul_poly(ps_n, top).add(
            est_n.mul_poly(ps_n1, top)).mul_poly(V, top).scale(-1))
    omegastar, r4 = _extract_band(r_os, n + 1, N + 1, fac_s)

    band = max(r1, r2, r3, r4)
    if band > alarm:
        raise DegreeBoundViolated(
            f"out-of-band mass {mpmath.nstr(band, 6)} at level {n}")
    return SpectralData(n=n, theta=theta, omega=omega, thetastar=thetastar,
                        omegastar=omegastar, band_residual=band)


class SpectralWorkspace:
    """Cache of spectral data over one oracle, with shared weight data."""

    def __init__(self, oracle: ToeplitzOracle, pair: PolyPair):
        self.oracle = oracle
        self.pair = pair
        self._data = {}

    @property
    def weight(self):
        return self.pair.weight

    def data(self, n: int) -> SpectralData:
        if n not in self._data:
            self._data[n] = spectral_from_oracle(self.oracle, self.pair, n)
        return self._data[n]

    def level(self, n: int) -> BopsLevel:
        return self.oracle.level(n)

    def kappa_ratio(self, n: int) -> mpc:
        """kappa_{n+1}/kappa_n."""
        return self.level(n + 1).kappa / self.level(n).kappa

    # -- polynomial shorthands -------------------------------------------------

    def W(self):
        return self.pair.W_mpc()

    def V2(self):
        return self.pair.V2_mpc()

    def V(self):
        return pscale(self.pair.V2_mpc(), mpf("0.5"))

    def W_over_z(self):
        W = self.pair.W_mpc()
        if W[0] != 0:
            raise ValueError("W/z needs the origin singular")
        return W[1:]

    def Wp(self):
        return pdiff(self.pair.W_mpc())

    def wprime_at(self, z) -> mpc:
        v = peval(self.Wp(), to_mpc(z))
        if v == 0:
            raise SingularityCollision("W' vanished at a singularity")
        return v

    def singularities(self):
        return self.pair.weight.singularities_mpc()

    def residues(self):
        return self.pair.weight.residues_mpc()


# ---------------------------------------------------------------------------
# the spectral matrix and its residue matrices
# ---------------------------------------------------------------------------

def a_matrix(ws: SpectralWorkspace, n: int, z) -> list:
    """A_n(z) entries from the spectral parameterisation."""
    z = to_mpc(z)
    sd = ws.data(n)
    lev_n, lev_n1 = ws.level(n), ws.level(n + 1)
    kr = ws.kappa_ratio(n)
    W = ws.W()
    Wz = peval(W, z)
    floor = mpf(2) ** (-mp.prec + 8) * pmax_abs(W) * \
        max(abs(z), mpf(1)) ** len(W)
    if abs(Wz) <= floor:
        raise SamplePointOnSingularity("A_n evaluated at a zero of W")
    Vz = peval(ws.V(), z)
    th, om = sd.theta_at(z), sd.omega_at(z)
    ts, os_ = sd.thetastar_at(z), sd.omegastar_at(z)
    a11 = -(om + Vz - kr * z * th) / Wz
    a12 = (lev_n1.phi0 / lev_n.kappa) * th / Wz
    a21 = -(lev_n1.phibar0 / lev_n.kappa) * z * ts / Wz
    a22 = (os_ - Vz - kr * ts) / Wz
    return [[a11, a12], [a21, a22]]


def residue_matrices(ws: SpectralWorkspace, n: int) -> list:
    """A_{n,j} for every finite singularity, in weight order.

    The origin entry is computed from the same generic formula with the
    z*Theta terms dropping out; its displayed special form and the explicit
    infinity matrix are verified separately by `residue_structure_checks`.
    """
    sd = ws.data(n)
    lev_n, lev_n1 = ws.level(n), ws.level(n + 1)
    kr = ws.kappa_ratio(n)
    out = []
    for z in ws.singularities():
        wp = ws.wprime_at(z)
        Vz = peval(ws.V(), z)
        th, om = sd.theta_at(z), sd.omega_at(z)
        ts, os_ = sd.thetastar_at(z), sd.omegastar_at(z)
        a11 = (-(om + Vz) + kr * z * th) / wp
        a12 = (lev_n1.phi0 / lev_n.kappa) * th / wp
        a21 = -(lev_n1.phibar0 / lev_n.kappa) * z * ts / wp
        a22 = (os_ - Vz - kr * ts) / wp
        out.append([[a11, a12], [a21, a22]])
    return out


def a_infinity(residues: list) -> list:
    """A_{n,infinity} = - sum of finite residue matrices."""
    out = [[mpc(0), mpc(0)], [mpc(0), mpc(0)]]
    for m in residues:
        for i in range(2):
            for j in range(2):
                out[i][j] -= m[i][j]
    return out


def _mat_scale(mats) -> mpf:
    return max((abs(m[i][j]) for m in mats for i in range(2) for j in range(2)),
               default=mpf(0))


def residue_structure_checks(ws: SpectralWorkspace, n: int, tol) -> list:
    """Displayed forms of A_{n,0} and A_{n,infinity}, trace values, and the
    partial-fraction reconstruction of A_n at sample points."""
    lev = ws.level(n)
    mats = residue_matrices(ws, n)
    ainf = a_infinity(mats)
    zs = ws.singularities()
    rhos = ws.residues()
    scale = max(_mat_scale(mats), mpf(1))
    out = []

    rho0 = rhos[0]
    want0 = [[(n - rho0), -(n - rho0) * lev.r], [mpc(0), mpc(0)]]
    d0 = max(abs(mats[0][i][j] - want0[i][j]) for i in range(2) for j in range(2))
    out.append(CheckResult.make("An:res0", d0 / scale, tol, n))

    rho_sum = sum(rhos)
    wantinf = [[mpc(-n), mpc(0)],
               [-(n + rho_sum) * lev.rbar, rho_sum]]
    dinf = max(abs(ainf[i][j] - wantinf[i][j]) for i in range(2) for j in range(2))
    out.append(CheckResult.make("An:resInfty", dinf / scale, tol, n))

    worst_tr = mpf(0)
    for j in range(1, len(zs)):
        tr = mats[j][0][0] + mats[j][1][1]
        worst_tr = max(worst_tr, abs(tr + rhos[j]))
    out.append(CheckResult.make("An:trace", worst_tr / scale, tol, n,
                                note="Tr A_{n,j} = -rho_j at nonzero points"))

    pts = sample_points(3, avoid=zs, seed=17 + n)
    worst_pf = mpf(0)
    for z in pts:
        direct = a_matrix(ws, n, z)
        rec = [[mpc(0), mpc(0)], [mpc(0), mpc(0)]]
        for zj, m in zip(zs, mats):
            f = 1 / (z - zj)
            for i in range(2):
                for k in range(2):
                    rec[i][k] += m[i][k] * f
        dscale = max(_mat_scale([direct]), mpf(1e-30))
        diff = max(abs(direct[i][k] - rec[i][k])
                   for i in range(2) for k in range(2))
        worst_pf = max(worst_pf, diff / dscale)
    out.append(CheckResult.make("An:pf", worst_pf, tol, n,
                                note="partial-fraction reconstruction"))
    return out


# ---------------------------------------------------------------------------
# linear recurrences, transitions, bilinear evaluations
# ---------------------------------------------------------------------------

def _zpoly(coeffs):
    return pshift(coeffs, 1)


def check_linear_recurrences(ws: SpectralWorkspace, n: int, tol) -> list:
    """Residuals of the eight coupled recurrences centred at level n (n >= 1)."""
    if n < 1:
        raise ValueError("linear recurrences need n >= 1")
    sm1, s0, s1 = ws.data(n - 1), ws.data(n), ws.data(n + 1)
    lm1, l0, l1, l2 = (ws.level(n - 1), ws.level(n), ws.level(n + 1),
                       ws.level(n + 2))
    Woz = ws.W_over_z()
    kr = l1.kappa / l0.kappa          # kappa_{n+1}/kappa_n
    kr2 = l2.kappa / l1.kappa         # kappa_{n+2}/kappa_{n+1}
    out = []

    def rescheck(label, vectors):
        out.append(CheckResult.make(label, vector_residual(vectors), tol, n))

    # a
    aa = l1.phi0 / l0.phi0
    rescheck("rrCf:a", [s0.omega, sm1.omega,
                        pscale(pmul([aa, kr], s0.theta), -1),
                        pscale(Woz, n - 1)])
    # b
    rescheck("rrCf:b", [pmul([aa, kr], psub(sm1.omega, s0.omega)),
                        pscale(_zpoly(s1.theta),
                               l0.kappa * l2.phi0 / (l1.kappa * l1.phi0)),
                        pscale(_zpoly(sm1.theta),
                               -lm1.kappa * l1.phi0 / (l0.kappa * l0.phi0)),
                        pscale(Woz, -aa)])
    # c
    bb = l1.phibar0 / l0.phibar0
    rescheck("rrCf:c", [s0.omegastar, sm1.omegastar,
                        pscale(pmul([kr, bb], s0.thetastar), -1),
                        pscale(Woz, -n)])
    # d
    rescheck("rrCf:d", [pmul([kr, bb], psub(sm1.omegastar, s0.omegastar)),
                        pscale(_zpoly(s1.thetastar),
                               l0.kappa * l2.phibar0 / (l1.kappa * l1.phibar0)),
                        pscale(_zpoly(sm1.thetastar),
                               -lm1.kappa * l1.phibar0 / (l0.kappa * l0.phibar0)),
                        pscale(Woz, kr)])
    # e
    aa2 = l2.phi0 / l1.phi0
    rescheck("rrCf:e", [s1.omega, s0.omegastar,
                        pscale(pmul([aa2, kr2], s1.theta), -1),
                        pscale(psub(_zpoly(s0.theta), s0.thetastar), kr)])
    # f
    rescheck("rrCf:f", [s0.omega, pscale(s1.omega, -1),
                        pscale(pmul([l1.phibar0 * l2.phi0 / (l1.kappa * l2.kappa), 1],
                                    s1.theta), kr2),
                        pscale(s0.thetastar,
                               l1.phi0 * l1.phibar0 / (l1.kappa * l0.kappa)),
                        pscale(_zpoly(s0.theta), -kr),
                        pscale(Woz, -1)])
    # g
    bb2 = l2.phibar0 / l1.phibar0
    rescheck("rrCf:g", [s1.omegastar, s0.omega,
                        pscale(pmul([kr2, bb2], s1.thetastar), -1),
                        pscale(psub(_zpoly(s0.theta), s0.thetastar), -kr),
                        pscale(Woz, -1)])
    # h
    rescheck("rrCf:h", [s0.omegastar, pscale(s1.omegastar, -1),
                        pscale(pmul([1, l1.phi0 * l2.phibar0 / (l1.kappa * l2.kappa)],
                                    s1.thetastar), kr2),
                        pscale(_zpoly(s0.theta),
                               l1.phi0 * l1.phibar0 / (l1.kappa * l0.kappa)),
                        pscale(s0.thetastar, -kr)])
    return out


def check_transitions(ws: SpectralWorkspace, n: int, tol, npoints: int = 5,
                      seed: int = 23) -> list:
    """The three transition identities, as coefficient vectors and at points."""
    s0 = ws.data(n)
    l0, l1 = ws.level(n), ws.level(n + 1)
    kr = l1.kappa / l0.kappa
    Woz = ws.W_over_z()
    out = []

    if n >= 1:
        sm1 = ws.data(n - 1)
        lm1 = ws.level(n - 1)
        vecs_i = [pscale(_zpoly(s0.thetastar), l1.phibar0 / l0.phibar0),
                  pscale(sm1.thetastar, -l0.kappa / lm1.kappa),
                  pscale(s0.theta, -l1.phi0 / l0.phi0),
                  pscale(_zpoly(sm1.theta), l0.kappa / lm1.kappa)]
        out.append(CheckResult.make("rrCf:i", vector_residual(vecs_i), tol, n))

    vecs_j = [s0.omegastar, pscale(s0.thetastar, -kr),
              pscale(s0.omega, -1), pscale(_zpoly(s0.theta), kr),
              pscale(Woz, -n)]
    out.append(CheckResult.make("rrCf:j", vector_residual(vecs_j), tol, n))

    s1 = ws.data(n + 1)
    l2 = ws.level(n + 2)
    vecs_k = [s0.omegastar, s0.omega,
              pscale(s1.theta,
                     -(l0.kappa ** 2 / l1.kappa ** 2) * (l2.phi0 / l1.phi0)),
              pscale(s0.thetastar, -(l0.kappa / l1.kappa)),
              pscale(Woz, -1)]
    out.append(CheckResult.make("rrCf:k", vector_residual(vecs_k), tol, n))

    # pointwise spot checks of rrCf:j on the sample circle
    pts = sample_points(npoints, avoid=ws.singularities(), seed=seed + n)
    worst = mpf(0)
    for z in pts:
        terms = [s0.omegastar_at(z), -kr * s0.thetastar_at(z),
                 -s0.omega_at(z), kr * z * s0.theta_at(z),
                 -n * peval(Woz, z)]
        scale = max(abs(t) for t in terms)
        worst = max(worst, abs(sum(terms)) / scale if scale > 0 else mpf(0))
    out.append(CheckResult.make("rrCf:j@pts", worst, tol, n))

    # Tform:a / Tform:b at every finite singularity (origin uses W'(0) as the
    # limit of W(z)/z)
    worst_a = mpf(0)
    worst_b = mpf(0)
    for zj in ws.singularities():
        woz = peval(Woz, zj)
        Vz = peval(ws.V(), zj)
        th, om = s0.theta_at(zj), s0.omega_at(zj)
        ts, os_ = s0.thetastar_at(zj), s0.omegastar_at(zj)
        terms_a = [os_, -kr * ts, -om, kr * zj * th, -n * woz]
        sa = max(abs(t) for t in terms_a)
        worst_a = max(worst_a, abs(sum(terms_a)) / sa if sa > 0 else mpf(0))
        lhs = (ws.level(n + 1).phi0 * ws.level(n + 1).phibar0 /
               ws.level(n).kappa ** 2) * zj * ts
        b1 = om + Vz - kr * zj * th
        b2 = om - Vz - kr * zj * th + n * woz
        rhs = b1 * b2 / th
        # at the origin both sides vanish by cancellation inside b2; measure
        # against the pre-cancellation magnitudes
        s1 = max(abs(om), abs(Vz), abs(kr * zj * th))
        s2 = max(abs(om), abs(Vz), abs(kr * zj * th), abs(n * woz))
        sb = max(abs(lhs), s1 * s2 / abs(th)) if th != 0 else abs(lhs)
        worst_b = max(worst_b, abs(lhs - rhs) / sb if sb > 0 else mpf(0))
    out.append(CheckResult.make("Tform:a", worst_a, tol, n))
    out.append(CheckResult.make("Tform:b", worst_b, tol, n))
    return out


def check_bilinear(ws: SpectralWorkspace, n: int, tol) -> list:
    """The five bilinear evaluations at every nonzero finite singularity."""
    s0, s1 = ws.data(n), ws.data(n + 1)
    l0, l1, l2 = ws.level(n), ws.level(n + 1), ws.level(n + 2)
    kr = l1.kappa / l0.kappa
    out = []
    zs = ws.singularities()[1:]

    def addcheck(label, pairs):
        worst = mpf(0)
        for lhs, rhs in pairs:
            scale = max(abs(lhs), abs(rhs), mpf(1e-40))
            worst = max(worst, abs(lhs - rhs) / scale)
        out.append(CheckResult.make(label, worst, tol, n))

    pairs_a, pairs_b, pairs_e = [], [], []
    for zj in zs:
        Vz = peval(ws.V(), zj)
        pairs_a.append((s0.omega_at(zj) ** 2,
                        (l0.kappa * l2.phi0 / (l1.kappa * l1.phi0)) * zj *
                        s0.theta_at(zj) * s1.theta_at(zj) + Vz ** 2))
        pairs_b.append((s0.omegastar_at(zj) ** 2,
                        (l0.kappa * l2.phibar0 / (l1.kappa * l1.phibar0)) * zj *
                        s0.thetastar_at(zj) * s1.thetastar_at(zj) + Vz ** 2))
        pairs_e.append(((l1.phi0 * l1.phibar0 / l0.kappa ** 2) * zj *
                        s0.theta_at(zj) * s0.thetastar_at(zj),
                        (s0.omega_at(zj) + Vz - kr * zj * s0.theta_at(zj)) *
                        (s0.omegastar_at(zj) - Vz - kr * s0.thetastar_at(zj))))
    addcheck("OTeq:a", pairs_a)
    addcheck("OTeq:b", pairs_b)

    if n >= 1:
        sm1 = ws.data(n - 1)
        lm1 = ws.level(n - 1)
        pairs_c, pairs_d = [], []
        for zj in zs:
            Vz = peval(ws.V(), zj)
            # the coupling constant carries kappa_{n-1}/kappa_n (required for
            # gauge invariance, confirmed numerically against the oracle)
            lhs_c = (sm1.omega_at(zj) -
                     (lm1.kappa ** 2 / l0.kappa ** 2) * (l1.phi0 / l0.phi0) *
                     s0.theta_at(zj)) ** 2
            rhs_c = (lm1.kappa * l1.phi0 * l0.phibar0 / l0.kappa ** 3) * \
                s0.theta_at(zj) * sm1.thetastar_at(zj) + Vz ** 2
            pairs_c.append((lhs_c, rhs_c))
            lhs_d = (sm1.omegastar_at(zj) -
                     (lm1.kappa ** 2 / l0.kappa ** 2) * (l1.phibar0 / l0.phibar0) *
                     zj * s0.thetastar_at(zj)) ** 2
            rhs_d = (lm1.kappa * l1.phibar0 * l0.phi0 / l0.kappa ** 3) * \
                zj ** 2 * s0.thetastar_at(zj) * sm1.theta_at(zj) + Vz ** 2
            pairs_d.append((lhs_d, rhs_d))
        addcheck("OTeq:c", pairs_c)
        addcheck("OTeq:d", pairs_d)
    addcheck("OTeq:e", pairs_e)
    return out


# ---------------------------------------------------------------------------
# summation identities
# ---------------------------------------------------------------------------

def _sum_residual(lhs_terms, rhs) -> mpf:
    """Relative residual of sum(lhs) = rhs.

    ``rhs`` may be a list of additive parts; the scale then includes each
    part separately, which keeps the measure meaningful when the right side
    cancels to zero (e.g. single-coordinate cases of the pairwise sums).
    """
    rhs_parts = rhs if isinstance(rhs, (list, tuple)) else [rhs]
    terms = [to_mpc(t) for t in lhs_terms] + \
        [-to_mpc(p) for p in rhs_parts]
    scale = max((abs(t) for t in terms), default=mpf(0))
    if scale == 0:
        return mpf(0)
    return abs(sum(terms)) / scale


def check_summation_identities(ws: SpectralWorkspace, n: int, tol,
                               garnier_point=None) -> list:
    """All summation identities available at this level.

    Without canonical coordinates only the singularity sums are checked; when
    a coordinate set is supplied the coordinate-sum families (including the
    logarithmic-derivative identity at the roots) are added.
    """
    sd = ws.data(n)
    l0, l1 = ws.level(n), ws.level(n + 1)
    kr = l1.kappa / l0.kappa
    zs = ws.singularities()
    rhos = ws.residues()
    rho_sum = sum(rhos)
    out = []

    wp = [ws.wprime_at(z) for z in zs]
    V = ws.V()

    out.append(CheckResult.make(
        "sum2:a",
        _sum_residual([sd.theta_at(z) / w for z, w in zip(zs, wp)], 0),
        tol, n))
    # leading coefficient of Thetastar via the residue sum; the z_j weight
    # restores consistency with the infinity residue matrix
    out.append(CheckResult.make(
        "sum2:b",
        _sum_residual([z * sd.thetastar_at(z) / w for z, w in zip(zs, wp)],
                      -(n + rho_sum) * l0.phibar0 / l1.phibar0),
        tol, n, note="with z_j weight"))
    out.append(CheckResult.make(
        "sum2:c",
        _sum_residual([(sd.omega_at(z) - peval(V, z) - kr * z * sd.theta_at(z)) / w
                       for z, w in zip(zs, wp)], -(n + rho_sum)),
        tol, n))
    out.append(CheckResult.make(
        "sum2:d",
        _sum_residual([(sd.omegastar_at(z) - peval(V, z) - kr * sd.thetastar_at(z)) / w
                       for z, w in zip(zs, wp)], -rho_sum),
        tol, n))

    # singularity-only sums
    Wpp = pdiff(ws.Wp())
    V2p = pdiff(ws.V2())
    thp = pdiff(sd.theta)
    worst_a = worst_b = worst_c = mpf(0)
    for j in range(1, len(zs) - 1):
        zj = zs[j]
        lhs = [1 / (zj - zk) for k, zk in enumerate(zs) if k != j]
        worst_a = max(worst_a, _sum_residual(
            lhs, peval(Wpp, zj) / (2 * wp[j])))
        lhs = [rhos[k] / (zj - zk) for k, zk in enumerate(zs) if k != j]
        rhs = peval(V2p, zj) / wp[j] - \
            peval(V, zj) * peval(Wpp, zj) / wp[j] ** 2
        worst_b = max(worst_b, _sum_residual(lhs, rhs))
        lhs = [sd.theta_at(zk) / wp[k] / (zj - zk)
               for k, zk in enumerate(zs) if k != j]
        rhs = peval(thp, zj) / wp[j] - \
            sd.theta_at(zj) * peval(Wpp, zj) / (2 * wp[j] ** 2)
        worst_c = max(worst_c, _sum_residual(lhs, rhs))
    out.append(CheckResult.make("Ssum:a", worst_a, tol, n))
    out.append(CheckResult.make("Ssum:b", worst_b, tol, n))
    out.append(CheckResult.make("Ssum:c", worst_c, tol, n))

    theta_inf = sd.theta[-1]
    zsum = sum(zs[1:-1])
    qsum_coeff = -sd.theta[-2] / sd.theta[-1]
    vals = {0: mpc(0), 1: theta_inf,
            2: theta_inf * (1 + zsum - qsum_coeff)}
    worst = mpf(0)
    for sigma, want in vals.items():
        worst = max(worst, _sum_residual(
            [sd.theta_at(z) * z ** sigma / w for z, w in zip(zs, wp)], want))
    out.append(CheckResult.make("Ssum:d", worst, tol, n))

    if garnier_point is not None:
        out.extend(_coordinate_sums(ws, n, tol, garnier_point))
    return out


def _coordinate_sums(ws: SpectralWorkspace, n: int, tol, point) -> list:
    """The coordinate-sum families needing the roots of Theta_n."""
    sd = ws.data(n)
    zs = ws.singularities()
    q = list(point.q)
    N = len(q)
    wp = [ws.wprime_at(z) for z in zs]
    theta_inf = sd.theta[-1]
    thp = pdiff(sd.theta)
    thpp = pdiff(thp)
    W = ws.W()
    V2 = ws.V2()
    V2p = pdiff(V2)
    rho0 = ws.residues()[0]
    rho1 = ws.residues()[-1]
    zsum = sum(zs[1:-1])
    qsum = sum(q)
    out = []

    def theta_at(z):
        return sd.theta_at(z)

    # Ssum:e
    worst = mpf(0)
    for r in range(N):
        for sigma in range(4):
            lhs = [theta_at(z) * z ** sigma / (w * (z - q[r]))
                   for z, w in zip(zs, wp)]
            if sigma <= 1:
                want = mpc(0)
            elif sigma == 2:
                want = theta_inf
            else:
                want = theta_inf * (1 + zsum - (qsum - q[r]))
            worst = max(worst, _sum_residual(lhs, want))
    out.append(CheckResult.make("Ssum:e", worst, tol, n))

    # Ssum:f over index pairs
    worst = mpf(0)
    for r in range(N):
        for s in range(N):
            for sigma in range(5):
                lhs = [theta_at(z) * z ** sigma / (w * (z - q[r]) * (z - q[s]))
                       for z, w in zip(zs, wp)]
                want = mpc(0)
                if r == s:
                    want -= q[r] ** sigma * peval(thp, q[r]) / peval(W, q[r])
                if sigma == 3:
                    want += theta_inf
                elif sigma == 4:
                    want += theta_inf * (1 + zsum - qsum + q[r] + q[s])
                worst = max(worst, _sum_residual(lhs, want))
    out.append(CheckResult.make("Ssum:f", worst, tol, n))

    # Ssum:g over index triples, sigma <= 3
    worst = mpf(0)
    for r in range(N):
        for s in range(N):
            for t in range(N):
                for sigma in range(4):
                    lhs = [theta_at(z) * z ** sigma /
                           (w * (z - q[r]) * (z - q[s]) * (z - q[t]))
                           for z, w in zip(zs, wp)]
                    want = mpc(0)
                    if r == s and s != t:
                        want -= q[s] ** sigma * peval(thp, q[s]) / \
                            ((q[r] - q[t]) * peval(W, q[s]))
                    if t == r and s != r:
                        want -= q[r] ** sigma * peval(thp, q[r]) / \
                            ((q[t] - q[s]) * peval(W, q[r]))
                    if s == t and r != t:
                        want -= q[t] ** sigma * peval(thp, q[t]) / \
                            ((q[s] - q[r]) * peval(W, q[t]))
                    if r == s and s == t:
                        want += q[r] ** sigma * peval(thp, q[r]) / peval(W, q[r]) * \
                            (peval(pdiff(W), q[r]) / peval(W, q[r]) -
                             peval(thpp, q[r]) / (2 * peval(thp, q[r])) -
                             sigma / q[r])
                    worst = max(worst, _sum_residual(lhs, want))
    out.append(CheckResult.make("Ssum:g", worst, tol, n))

    # Tsum family
    thq = [peval(thp, qr) for qr in q]
    th0 = theta_at(mpc(0))
    th1 = theta_at(mpc(1))
    wp0 = peval(pdiff(W), mpc(0))
    wp1 = peval(pdiff(W), mpc(1))
    m0 = ws.pair.m_mpc()[0]

    worst = mpf(0)
    for r in range(N):
        lhs = [1 / (q[r] - q[s]) for s in range(N) if s != r]
        worst = max(worst, _sum_residual(
            lhs, peval(thpp, q[r]) / (2 * thq[r])))
    out.append(CheckResult.make("Tsum:a", worst, tol, n))

    res = _sum_residual(
        [peval(V2, qr) / (qr * (qr - 1) * tq) for qr, tq in zip(q, thq)],
        [m0 / theta_inf, rho0 * wp0 / th0, -rho1 * wp1 / th1])
    out.append(CheckResult.make("Tsum:b", res, tol, n))

    worst_c = worst_d = worst_h = mpf(0)
    for j in range(1, len(zs) - 1):
        zj = zs[j]
        thzj = theta_at(zj)
        lhs = [peval(V2, qr) / ((zj - qr) ** 2 * tq) for qr, tq in zip(q, thq)]
        rhs = [m0 / theta_inf, -peval(V2p, zj) / thzj,
               peval(V2, zj) * peval(thp, zj) / thzj ** 2]
        worst_c = max(worst_c, _sum_residual(lhs, rhs))
        lhs = [peval(V2, qr) / ((zj - qr) * qr * tq) for qr, tq in zip(q, thq)]
        rhs = [-m0 / theta_inf, -peval(V2, mpc(0)) / (zj * th0),
               peval(V2, zj) / (zj * thzj)]
        worst_d = max(worst_d, _sum_residual(lhs, rhs))
        lhs = [zj * (zj - 1) * peval(V2, qr) / (qr * (qr - 1) * tq * (zj - qr))
               for qr, tq in zip(q, thq)]
        rhs = [rho0 * (wp0 / th0) * (zj - 1), -rho1 * (wp1 / th1) * zj,
               peval(V2, zj) / thzj]
        worst_h = max(worst_h, _sum_residual(lhs, rhs))
    out.append(CheckResult.make("Tsum:c", worst_c, tol, n))
    out.append(CheckResult.make(
        "Tsum:d", worst_d, tol, n,
        note="constant term uses 2V(0), from the residue computation"))
    out.append(CheckResult.make("Tsum:h", worst_h, tol, n))

    worst = mpf(0)
    for r in range(N):
        qr = q[r]
        lhs = [qr * (qr - 1) * peval(V2, q[s]) /
               (q[s] * (q[s] - 1) * thq[s] * (qr - q[s]))
               for s in range(N) if s != r]
        v2q = peval(V2, qr)
        rhs = [rho0 * (wp0 / th0) * (qr - 1), -rho1 * (wp1 / th1) * qr,
               peval(V2p, qr) / thq[r],
               -v2q * peval(thpp, qr) / (2 * thq[r] ** 2),
               -v2q * (2 * qr - 1) / (qr * (qr - 1) * thq[r])]
        worst = max(worst, _sum_residual(lhs, rhs))
    out.append(CheckResult.make("Tsum:e", worst, tol, n))

    worst = mpf(0)
    for j in range(1, len(zs) - 1):
        zj = zs[j]
        lhs = [peval(W, qr) / ((zj - qr) * qr * (qr - 1) * tq)
               for qr, tq in zip(q, thq)]
        worst = max(worst, _sum_residual(lhs, -1 / theta_inf))
    out.append(CheckResult.make("Tsum:f", worst, tol, n))

    worst = mpf(0)
    for r in range(N):
        qr = q[r]
        lhs = [peval(W, q[s]) / (q[s] * (q[s] - 1) * thq[s] * (qr - q[s]))
               for s in range(N) if s != r]
        wq = peval(W, qr)
        cr = wq / (qr * (qr - 1) * thq[r])
        rhs = [-1 / theta_inf, cr * peval(pdiff(W), qr) / wq,
               -cr * peval(thpp, qr) / (2 * thq[r]),
               -cr * (2 * qr - 1) / (qr * (qr - 1))]
        worst = max(worst, _sum_residual(lhs, rhs))
    out.append(CheckResult.make("Tsum:g", worst, tol, n))
    return out


# ---------------------------------------------------------------------------
# scalar ODE data
# ---------------------------------------------------------------------------

def scalar_ode_data(ws: SpectralWorkspace, n: int, z):
    """ODE coefficients plus the magnitude scales of their additive pieces.

    The second coefficients are alternating sums that can cancel completely
    (they vanish identically at level zero), so residuals must be judged
    against the pieces, not the sum.
    """
    z = to_mpc(z)
    sd = ws.data(n)
    l0, l1 = ws.level(n), ws.level(n + 1)
    kr = l1.kappa / l0.kappa
    W, V2 = ws.W(), ws.V2()
    Wz = peval(W, z)
    if Wz == 0 or z == 0:
        raise SamplePointOnSingularity("ODE coefficients at a singular point")
    th = sd.theta_at(z)
    ts = sd.thetastar_at(z)
    zfac = max(abs(z), mpf(1)) ** len(sd.theta)
    if abs(th) <= mpf(2) ** (-mp.prec + 12) * pmax_abs(sd.theta) * zfac or \
       abs(ts) <= mpf(2) ** (-mp.prec + 12) * pmax_abs(sd.thetastar) * zfac:
        raise EvaluationAtRootOfTheta("z is a root of a spectral polynomial")
    thp = peval(pdiff(sd.theta), z)
    tsp = peval(pdiff(sd.thetastar), z)
    om, os_ = sd.omega_at(z), sd.omegastar_at(z)
    omp = peval(pdiff(sd.omega), z)
    osp = peval(pdiff(sd.omegastar), z)
    Vz = peval(V2, z) / 2
    Vp = peval(pdiff(V2), z) / 2
    Wp = peval(pdiff(W), z)

    p1 = Wp / Wz - thp / th + 2 * Vz / Wz - mpf(n) / z
    cross = ((om + Vz - kr * z * th) * (os_ - Vz - kr * ts)) / Wz ** 2
    tail = (l1.phi0 * l1.phibar0 / l0.kappa ** 2) * z * th * ts / Wz ** 2
    p2_parts = [(th * (omp + Vp) - thp * (om + Vz)) / (Wz * th),
                -kr * th / Wz, -cross, tail]
    p2 = sum(p2_parts)
    p1s = Wp / Wz - tsp / ts + 2 * Vz / Wz - mpf(n + 1) / z
    p2s_parts = [((ts / z + tsp) * (os_ - Vz) - ts * (osp - Vp)) / (Wz * ts),
                 -kr * ts / (z * Wz), -cross, tail]
    p2s = sum(p2s_parts)
    return {"p1": p1, "p2": p2, "p1s": p1s, "p2s": p2s,
            "p2_scale": max(abs(t) for t in p2_parts),
            "p2s_scale": max(abs(t) for t in p2s_parts)}


def scalar_ode_coeffs(ws: SpectralWorkspace, n: int, z):
    """(p1, p2, p1*, p2*) of the two second-order scalar equations at z."""
    d = scalar_ode_data(ws, n, z)
    return d["p1"], d["p2"], d["p1s"], d["p2s"]


def scalar_ode_residuals(ws: SpectralWorkspace, n: int, tol, npoints: int = 10,
                         seed: int = 41) -> list:
    """|phi'' + p1 phi' + p2 phi| (and starred) at sample points, relative."""
    l0 = ws.level(n)
    sd = ws.data(n)
    avoid = list(ws.singularities())
    pts = sample_points(npoints, avoid=avoid, seed=seed + n)
    phi, phis = l0.phi, l0.phistar
    dphi, dphis = pdiff(phi), pdiff(phis)
    ddphi, ddphis = pdiff(dphi), pdiff(dphis)
    worst = mpf(0)
    worst_s = mpf(0)
    for z in pts:
        if abs(sd.theta_at(z)) < mpf(10) ** (-mp.prec // 4) or \
           abs(sd.thetastar_at(z)) < mpf(10) ** (-mp.prec // 4):
            continue
        d = scalar_ode_data(ws, n, z)
        terms = [peval(ddphi, z), d["p1"] * peval(dphi, z),
                 d["p2"] * peval(phi, z)]
        scale = max(abs(terms[0]), abs(terms[1]),
                    d["p2_scale"] * abs(peval(phi, z)))
        if scale > 0:
            worst = max(worst, abs(sum(terms)) / scale)
        terms = [peval(ddphis, z), d["p1s"] * peval(dphis, z),
                 d["p2s"] * peval(phis, z)]
        scale = max(abs(terms[0]), abs(terms[1]),
                    d["p2s_scale"] * abs(peval(phis, z)))
        if scale > 0:
            worst_s = max(worst_s, abs(sum(terms)) / scale)
    return [CheckResult.make("2ODE:a", worst, tol, n),
            CheckResult.make("2ODE:b", worst_s, tol, n)]


def p2_asymptotic_constant(ws: SpectralWorkspace, n: int) -> mpc:
    """Exact limit of z(z-1) p_2 as z -> infinity, by polynomial algebra."""
    sd = ws.data(n)
    l0, l1 = ws.level(n), ws.level(n + 1)
    kr = l1.kappa / l0.kappa
    W, V2 = ws.W(), ws.V2()
    V = pscale(V2, mpf("0.5"))
    th, om = sd.theta, sd.omega
    ts, os_ = sd.thetastar, sd.omegastar
    omV = padd(om, V)
    osV = psub(os_, V)
    # common denominator W^2 * Theta
    num = pmul(psub(pmul(th, pdiff(omV)), pmul(pdiff(th), omV)), W)
    num = psub(num, pscale(pmul(pmul(th, th), W), kr))
    num = psub(num, pmul(psub(omV, pscale(pshift(th, 1), kr)),
                         pmul(psub(osV, pscale(ts, kr)), th)))
    num = padd(num, pscale(pmul(pshift(pmul(th, ts), 1), th),
                           l1.phi0 * l1.phibar0 / l0.kappa ** 2))
    den = pmul(pmul(W, W), th)
    num = ptrim(num)
    den = ptrim(den)
    if pdeg(num) > pdeg(den) - 2:
        extra = pmax_abs(num[pdeg(den) - 1:]) / pmax_abs(num)
        if extra > band_tolerance():
            raise DegreeBoundViolated("p2 does not decay like z^-2")
        num = num[:pdeg(den) - 1]
    return num[-1] / den[-1] if pdeg(num) == pdeg(den) - 2 else mpc(0)
