"""Canonical coordinates and Hamiltonians of the deformation dynamics.

The roots q_r of the off-diagonal spectral polynomial Theta_n are the
coordinates; the momenta are the diagonal entry of the spectral matrix at the
roots,

    p_r = -(Omega_n(q_r) + V(q_r)) / W(q_r),

and each free singularity z_j carries a Hamiltonian K_j rational in (q, p).
This module extracts the coordinates (companion-matrix eigenvalues plus one
Newton polish, deterministically ordered), evaluates K_j both from its
closed form and from the residue-matrix trace formula, provides the closed
forms of dq_r/dz_j and dp_r/dz_j used by the finite-difference flow checks,
and the canonical transformation to the polynomial chart.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf, mpc

from .errors import (CoordinateOnSingularity, MultipleRoot, SingularTransform)
from .mputil import to_mpc
from .polys import (padd, pdiff, peval, pmul, pscale, pshift, psub, ptrim,
                    pmax_abs, pdiv_exact_linear)
from .report import CheckResult
from .spectral import SpectralWorkspace, residue_matrices


def polynomial_roots(coeffs):
    """Roots by companion-matrix eigenvalues with one Newton polish.

    Deterministic ordering is left to the caller; the eigensolver output
    order is already deterministic for fixed input but not meaningful.
    """
    coeffs = ptrim([to_mpc(c) for c in coeffs])
    deg = len(coeffs) - 1
    if deg <= 0:
        return []
    if deg == 1:
        return [-coeffs[0] / coeffs[1]]
    if deg == 2:
        c, b, a = coeffs
        disc = mpmath.sqrt(b * b - 4 * a * c)
        if abs(-b + disc) < abs(-b - disc):
            disc = -disc
        r1 = (-b + disc) / (2 * a)        # the larger root, stably
        r2 = c / (a * r1)
        return [r1, r2]
    monic = [c / coeffs[-1] for c in coeffs]
    A = mpmath.zeros(deg, deg)
    for i in range(deg):
        A[i, deg - 1] = -monic[i]
        if i + 1 < deg:
            A[i + 1, i] = mpc(1)
    eigvals, _ = mpmath.eig(mpmath.matrix(A))
    dp = pdiff(coeffs)
    out = []
    for ev in eigvals:
        z = mpc(ev)
        dz = peval(dp, z)
        if dz != 0:
            z = z - peval(coeffs, z) / dz
        out.append(z)
    return out


def _sorted_roots(roots):
    return sorted(roots, key=lambda z: (mpmath.re(z), mpmath.im(z)))


@dataclass
class GarnierPoint:
    """Coordinates, momenta and Hamiltonian values at one level."""

    n: int
    q: list
    p: list
    K: list
    theta_inf: mpc


def degeneracy_floor() -> mpf:
    return mpf(10) ** (-(mp.prec // 3))


def coordinates_from_spectral(ws: SpectralWorkspace, n: int,
                              with_hamiltonians: bool = True) -> GarnierPoint:
    """Extract (q, p, K) from the spectral data at level n."""
    sd = ws.data(n)
    theta = sd.theta
    N = ws.pair.N
    roots = _sorted_roots(polynomial_roots(theta))
    if len(roots) != N:
        raise MultipleRoot(f"degree of the coordinate polynomial dropped "
                           f"below {N} at level {n}")
    dtheta = pdiff(theta)
    floor = degeneracy_floor() * pmax_abs(theta)
    zs = ws.singularities()
    for qr in roots:
        if abs(peval(dtheta, qr)) < floor:
            raise MultipleRoot(f"near-multiple root at {mpmath.nstr(qr, 8)}")
        if min(abs(qr - z) for z in zs) < degeneracy_floor():
            raise CoordinateOnSingularity(
                f"coordinate {mpmath.nstr(qr, 8)} hit a singularity")
    W, V = ws.W(), ws.V()
    p = [-(sd.omega_at(qr) + peval(V, qr)) / peval(W, qr) for qr in roots]
    point = GarnierPoint(n=n, q=roots, p=p, K=[], theta_inf=sd.theta[-1])
    if with_hamiltonians:
        point.K = hamiltonian(ws, n, point)
    return point


def hamiltonian(ws: SpectralWorkspace, n: int, point: GarnierPoint) -> list:
    """K_j for each free singularity, from the closed form."""
    sd = ws.data(n)
    W, V2 = ws.W(), ws.V2()
    dtheta = pdiff(sd.theta)
    m0 = ws.pair.m_mpc()[0]
    out = []
    for zj in ws.singularities()[1:-1]:
        pref = sd.theta_at(zj) / ws.wprime_at(zj)
        total = mpc(0)
        for qr, pr in zip(point.q, point.p):
            Wq = peval(W, qr)
            bracket = pr ** 2 + pr * (peval(V2, qr) / Wq - mpf(n) / qr -
                                      1 / (zj - qr)) - \
                mpf(n) * (1 + m0) / (qr * (qr - 1))
            total += (Wq / peval(dtheta, qr)) / (zj - qr) * bracket
        out.append(pref * total)
    return out


def hamiltonian_from_residues(ws: SpectralWorkspace, n: int,
                              point: GarnierPoint) -> list:
    """K_j from the residue matrices: the independent route.

    K_j = -A_{j,11} sum_r 1/(z_j - q_r)
          - sum_{k != j} [Tr A_j Tr A_k - Tr(A_j A_k) - A_{j,11} - A_{k,11}]
            / (z_j - z_k).
    """
    mats = residue_matrices(ws, n)
    zs = ws.singularities()
    out = []
    for j in range(1, len(zs) - 1):
        zj = zs[j]
        Aj = mats[j]
        total = -Aj[0][0] * sum(1 / (zj - qr) for qr in point.q)
        for k in range(len(zs)):
            if k == j:
                continue
            Ak = mats[k]
            tr_j = Aj[0][0] + Aj[1][1]
            tr_k = Ak[0][0] + Ak[1][1]
            tr_jk = (Aj[0][0] * Ak[0][0] + Aj[0][1] * Ak[1][0] +
                     Aj[1][0] * Ak[0][1] + Aj[1][1] * Ak[1][1])
            total -= (tr_j * tr_k - tr_jk - Aj[0][0] - Ak[0][0]) / (zj - zs[k])
        out.append(total)
    return out


def riemann_exponents(ws: SpectralWorkspace, n: int) -> dict:
    """Indicial exponent table of the scalar equation and the accessory
    constant (vanishing for the seed level)."""
    rhos = ws.residues()
    m0 = ws.pair.m_mpc()[0]
    table = {"origin": mpf(n) - rhos[0], "one": -rhos[-1],
             "free": [-r for r in rhos[1:-1]],
             "infinity": mpf(n) + 1 + sum(rhos)}
    return {"exponents": table, "accessory": -mpf(n) * (1 + m0)}


# ---------------------------------------------------------------------------
# reconstruction residuals (the Lagrange representations)
# ---------------------------------------------------------------------------

def omega_rep_residual(ws: SpectralWorkspace, n: int, point: GarnierPoint) -> mpf:
    """Coefficient-wise residual of the interpolation representation of
    Omega_n + V - (kappa ratio) z Theta_n in terms of (q, p)."""
    sd = ws.data(n)
    kr = ws.kappa_ratio(n)
    V = ws.V()
    W = ws.W()
    theta = sd.theta
    dtheta = pdiff(theta)
    e = ws.pair.e_mpc()
    N = ws.pair.N
    rho0 = ws.residues()[0]
    theta_inf = theta[-1]
    # target polynomial
    lhs = psub(padd(sd.omega, V), pscale(pshift(theta, 1), kr))
    # bracket: -n z / theta_inf + const - sum_r z/(z-q_r) * w_r
    const = (-1) ** N * (mpf(n) - rho0) * e[N + 1] / peval(theta, mpc(0))
    rhs = padd(pscale(pshift(theta, 1), -mpf(n) / theta_inf),
               pscale(theta, const))
    for qr, pr in zip(point.q, point.p):
        wr = pr * peval(W, qr) / (qr * peval(dtheta, qr))
        quot = pdiv_exact_linear(theta, qr)       # theta/(z - q_r)
        rhs = psub(rhs, pscale(pshift(quot, 1), wr))
    diff = psub(lhs, rhs)
    scale = max(pmax_abs(lhs), pmax_abs(rhs))
    return pmax_abs(diff) / scale if scale > 0 else pmax_abs(diff)


def v2_rep_residual(ws: SpectralWorkspace, n: int, point: GarnierPoint) -> mpf:
    """Residual of the interpolation representation of 2V at the nodes
    {0, q_r, 1}."""
    sd = ws.data(n)
    theta = sd.theta
    dtheta = pdiff(theta)
    V2 = ws.V2()
    W = ws.W()
    rho0, rho1 = ws.residues()[0], ws.residues()[-1]
    wp0 = peval(pdiff(W), mpc(0))
    wp1 = peval(pdiff(W), mpc(1))
    th0 = peval(theta, mpc(0))
    th1 = peval(theta, mpc(1))
    rhs = padd(pscale(pmul(theta, [-1, 1]), -rho0 * wp0 / th0),
               pscale(pshift(theta, 1), rho1 * wp1 / th1))
    for qr in point.q:
        cr = peval(V2, qr) / (qr * (qr - 1) * peval(dtheta, qr))
        quot = pdiv_exact_linear(theta, qr)
        rhs = padd(rhs, pscale(pmul(quot, [0, -1, 1]), cr))
    diff = psub(V2, rhs)
    scale = max(pmax_abs(V2), pmax_abs(rhs))
    return pmax_abs(diff) / scale if scale > 0 else pmax_abs(diff)


def w_rep_residual(ws: SpectralWorkspace, n: int, point: GarnierPoint) -> mpf:
    """Residual of the interpolation representation of W."""
    sd = ws.data(n)
    theta = sd.theta
    dtheta = pdiff(theta)
    W = ws.W()
    theta_inf = theta[-1]
    rhs = pscale(pmul(theta, [0, -1, 1]), 1 / theta_inf)
    for qr in point.q:
        cr = peval(W, qr) / (qr * (qr - 1) * peval(dtheta, qr))
        quot = pdiv_exact_linear(theta, qr)
        rhs = padd(rhs, pscale(pmul(quot, [0, -1, 1]), cr))
    diff = psub(W, rhs)
    scale = max(pmax_abs(W), pmax_abs(rhs))
    return pmax_abs(diff) / scale if scale > 0 else pmax_abs(diff)


# ---------------------------------------------------------------------------
# Hamiltonian as an explicit function of (q, p) and the flow closed forms
# ---------------------------------------------------------------------------

def k_value(q, p, zs, v2, w, n: int, m0, j: int) -> mpc:
    """K_j evaluated as a rational function of coordinate/momentum lists.

    The leading-coefficient normalisation of the coordinate polynomial
    cancels between numerator and denominator, so only the root set enters.
    """
    zj = to_mpc(zs[j])
    wp = peval(pdiff(w), zj)
    theta_zj = mpmath.fprod(zj - to_mpc(qs) for qs in q)
    total = mpc(0)
    for r, (qr, pr) in enumerate(zip(q, p)):
        qr = to_mpc(qr)
        pr = to_mpc(pr)
        dth = mpmath.fprod(qr - to_mpc(q[s]) for s in range(len(q)) if s != r)
        Wq = peval(w, qr)
        bracket = pr ** 2 + pr * (peval(v2, qr) / Wq - mpf(n) / qr -
                                  1 / (zj - qr)) - \
            mpf(n) * (1 + m0) / (qr * (qr - 1))
        total += (Wq / dth) / (zj - qr) * bracket
    return (theta_zj / wp) * total


def flow_q_closed(ws: SpectralWorkspace, n: int, point: GarnierPoint,
                  j: int, r: int) -> mpc:
    """Closed form of dq_r/dz_j (j indexes the free singularities from 1)."""
    sd = ws.data(n)
    zj = ws.singularities()[j]
    qr, pr = point.q[r], point.p[r]
    W, V2 = ws.W(), ws.V2()
    dtheta = pdiff(sd.theta)
    Wq = peval(W, qr)
    lead = sd.theta_at(zj) * Wq / (peval(dtheta, qr) * ws.wprime_at(zj))
    bracket = 2 * pr + peval(V2, qr) / Wq - mpf(n) / qr - 1 / (zj - qr)
    return lead * bracket / (zj - qr)


def flow_p_closed(ws: SpectralWorkspace, n: int, point: GarnierPoint,
                  j: int, r: int) -> mpc:
    """Closed form of dp_r/dz_j."""
    sd = ws.data(n)
    zj = ws.singularities()[j]
    W, V2 = ws.W(), ws.V2()
    dW = pdiff(W)
    dV2 = pdiff(V2)
    theta = sd.theta
    dtheta = pdiff(theta)
    ddtheta = pdiff(dtheta)
    m0 = ws.pair.m_mpc()[0]
    qr, pr = point.q[r], point.p[r]
    Wq = peval(W, qr)
    V2q = peval(V2, qr)
    thp = peval(dtheta, qr)
    half_lder = peval(ddtheta, qr) / (2 * thp)
    wl = peval(dW, qr) / Wq

    main = pr ** 2 * (wl - half_lder)
    main += pr * (V2q / Wq) * (peval(dV2, qr) / V2q - half_lder)
    main -= mpf(n) * (pr / qr) * (wl - half_lder - 1 / qr)
    main -= (pr / (zj - qr)) * (wl - half_lder + 1 / (zj - qr))
    main += mpf(n) * (1 + m0) / (qr * (qr - 1) * (zj - qr))
    total = -(Wq / thp) * main
    for s, (qs, ps) in enumerate(zip(point.q, point.p)):
        if s == r:
            continue
        Ws = peval(W, qs)
        br = ps ** 2 + ps * peval(V2, qs) / Ws - mpf(n) * ps / qs \
            - ps / (zj - qs) + mpf(n) * (1 + m0) * (qs - qr) / \
            (qs * (qs - 1) * (zj - qs))
        total -= (Ws / peval(dtheta, qs)) / (qs - qr) * br
    return total * sd.theta_at(zj) / ((zj - qr) * ws.wprime_at(zj))


def fd_pass(res_h: mpf, res_h2: mpf, min_order: float = 1.9):
    """Judge a central-difference comparison by convergence order.

    Returns (passed, order).  When the difference quotient is exact (the
    function is polynomial of degree <= 2 along the probed direction) both
    residuals sit at the roundoff-over-step floor and halving the step cannot
    show an order; such comparisons pass through the deep-floor branch, which
    is a stronger statement than order two.
    """
    floor = mpf(2) ** (-(3 * mp.prec // 4) + 24)
    if res_h2 <= floor:
        return True, None
    if res_h <= 0 or res_h2 <= 0:
        return True, None
    order = mpmath.log(res_h / res_h2) / mpmath.log(2)
    return bool(order >= min_order), order


def flow_step_default() -> mpf:
    """Step for order-measuring central differences.

    Chosen above the truncation/roundoff balance point so that halving the
    step moves the truncation error visibly.
    """
    return mpf(2) ** (-(mp.prec // 4))


def hamilton_equations_check(ws: SpectralWorkspace, n: int,
                             point: GarnierPoint, tol=None, h=None) -> list:
    """Central differences of K_j in (q, p) against the flow closed forms.

    Verifies dK_j/dp_r = dq_r/dz_j and -dK_j/dq_r = dp_r/dz_j; each
    comparison must either converge at order >= 1.9 under step halving or be
    exact up to the roundoff floor (the p-direction is, K being quadratic in
    the momenta).
    """
    if h is None:
        h = flow_step_default()
    if tol is None:
        tol = mpf(10) ** (-(mp.prec // 8))
    zs = ws.singularities()
    v2, w = ws.V2(), ws.W()
    m0 = ws.pair.m_mpc()[0]
    N = ws.pair.N
    out = []

    def kfun(q, p, j):
        return k_value(q, p, zs, v2, w, n, m0, j)

    for j in range(1, N + 1):
        for r in range(N):
            want_q = flow_q_closed(ws, n, point, j, r)
            want_p = flow_p_closed(ws, n, point, j, r)
            res_q, res_p = [], []
            for step in (h, h / 2):
                pp = list(point.p)
                pp[r] = point.p[r] + step
                pm = list(point.p)
                pm[r] = point.p[r] - step
                dKdp = (kfun(point.q, pp, j) - kfun(point.q, pm, j)) / (2 * step)
                qp = list(point.q)
                qp[r] = point.q[r] + step
                qm = list(point.q)
                qm[r] = point.q[r] - step
                dKdq = (kfun(qp, point.p, j) - kfun(qm, point.p, j)) / (2 * step)
                res_q.append(abs(dKdp - want_q) / max(abs(want_q), mpf(1)))
                res_p.append(abs(-dKdq - want_p) / max(abs(want_p), mpf(1)))
            ok_q, ord_q = fd_pass(res_q[0], res_q[1])
            ok_p, ord_p = fd_pass(res_p[0], res_p[1])
            rq = CheckResult.make(f"Ham:dK/dp@z{j},q{r}", res_q[1], tol, n,
                                  note="exact in p" if ord_q is None
                                  else f"order {mpmath.nstr(ord_q, 4)}")
            rq.passed = ok_q and res_q[1] < tol
            rp = CheckResult.make(f"Ham:dK/dq@z{j},q{r}", res_p[1], tol, n,
                                  note="deep floor" if ord_p is None
                                  else f"order {mpmath.nstr(ord_p, 4)}")
            rp.passed = ok_p and res_p[1] < tol
            out.extend([rq, rp])
    return out


# ---------------------------------------------------------------------------
# canonical transformation to the polynomial chart
# ---------------------------------------------------------------------------

def canonical_transform(ws: SpectralWorkspace, n: int, point: GarnierPoint):
    """(t_j, Q_j, P_j) per free singularity; undefined if some z_j = 1."""
    sd = ws.data(n)
    theta = sd.theta
    dtheta = pdiff(theta)
    theta_inf = theta[-1]
    W = ws.W()
    out = []
    for zj in ws.singularities()[1:-1]:
        if zj == 1:
            raise SingularTransform("free singularity at 1")
        tj = zj / (zj - 1)
        Qj = zj * sd.theta_at(zj) / (theta_inf * ws.wprime_at(zj))
        Pj = mpc(0)
        for qr, pr in zip(point.q, point.p):
            Pj += pr / (qr * (qr - 1)) * \
                (theta_inf * peval(W, qr)) / ((qr - zj) * peval(dtheta, qr))
        Pj *= -(zj - 1)
        out.append((tj, Qj, Pj))
    return out
