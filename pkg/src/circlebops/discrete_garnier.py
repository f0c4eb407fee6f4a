"""The coupled first-order recurrences in the level index.

State at level n is the pair of N-vectors

    f^j_n     = Theta_n(t_j) / (t_j Theta_n(1)),
    omega^j_n = (-1)^N [z^j] Omega_n - (-1)^j m_{N+1-j} / 2,

built on the canonical placement {0, t_1..t_N, 1}.  The f-update is a ratio
of four bracket evaluations of Omega_n +- V at t_j and 1; the omega-update
inverts the coordinate-polynomial parameterisation through Vandermonde data
of the deformation variables.  The update order (f first, then omega at the
advanced level) is what the equations determine; it is validated against the
determinant oracle by the trajectory-equivalence tests.

Initial data at n = 0 comes from the generating-function polynomial U.  The
omega initialisation used here is the one consistent with the level-zero
spectral coefficients (dual-path validated):

    (-1)^N omega^j_0 = (1/2) [z^j](2V - k0^2 U)
                       - (w_0 / (2 w_{-1})) [z^{j-1}](2V - k0^2 U),

with k0^2 = 1/w_0.

Tau recovery walks the reflection-coefficient ratio out of the inversion,
reconstructs the sub-leading polynomial coefficients along two independent
recurrences (cross-checked), and rebuilds the determinant sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf, mpc

from .errors import (InconsistentLambdaPaths, SingularStep,
                     ThetaVanishesAtOne, ZeroDenominator, ZeroRNRatio)
from .moments import MomentSequence, UPoly
from .mputil import to_mpc
from .polys import elementary_symmetric, peval, pscale, psub
from .spectral import SpectralWorkspace
from .weights import PolyPair


@dataclass
class DGState:
    """Recurrence variables at one level, plus cached inversion data."""

    n: int
    f: list
    omega: list
    r_ratio: mpc = None        # (n - rho_0) r_n / r_{n+1}, set by dg_invert
    vartheta: list = None      # interior coordinate-polynomial coefficients

    # two-variable aliases
    @property
    def g(self):
        return self.f[1]

    @property
    def varpi(self):
        return self.omega[1]


def denominator_floor() -> mpf:
    return mpf(10) ** (-(mp.prec // 2))


# ---------------------------------------------------------------------------
# Vandermonde helpers
# ---------------------------------------------------------------------------

def vandermonde(values) -> mpc:
    """prod_{i<j} (v_j - v_i) in the given order; empty/singleton give 1."""
    out = mpc(1)
    vals = [to_mpc(v) for v in values]
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            out *= vals[j] - vals[i]
    return out


def esym(values, l: int) -> mpc:
    if l < 0 or l > len(values):
        return mpc(0)
    return to_mpc(elementary_symmetric([to_mpc(v) for v in values])[l])


def _t_replaced(T, l):
    """T with t_l removed and the fixed point 1 appended last."""
    return [T[i] for i in range(len(T)) if i != l] + [mpc(1)]


def _free_points(pair: PolyPair):
    if pair.weight.placement != "canonical":
        raise ValueError("the recurrences assume canonical placement")
    return [z.to_mpc() for z in pair.weight.free_singularities]


def _inversion_sums(pair: PolyPair, f, weights_e=None):
    """The three Vandermonde combinations entering the inversion.

    Returns (plain, t-weighted, per-coefficient numerators) where the last is
    a dict l -> (numerator with e_{N-l} weights, numerator with the t factor).
    """
    T = _free_points(pair)
    N = len(T)
    dT = vandermonde(T)
    num_plain = dT
    den_t = dT
    for l in range(N):
        repl = _t_replaced(T, l)
        dl = vandermonde(repl)
        sgn = (-1) ** (N + l)        # list index l is one below the label
        num_plain += sgn * dl * to_mpc(f[l])
        den_t += sgn * T[l] * dl * to_mpc(f[l])
    return num_plain, den_t


def _weighted_sum(pair: PolyPair, f, weight_index: int) -> mpc:
    """Delta(T) e_w(T) + sum_l (+-) t_l Delta(T_l u {1}) e_w(T_l u {1}) f^l."""
    T = _free_points(pair)
    N = len(T)
    total = vandermonde(T) * esym(T, weight_index)
    for l in range(N):
        repl = _t_replaced(T, l)
        sgn = (-1) ** (N + l)        # list index l is one below the label
        total += sgn * T[l] * vandermonde(repl) * esym(repl, weight_index) * \
            to_mpc(f[l])
    return total


# ---------------------------------------------------------------------------
# state constructors
# ---------------------------------------------------------------------------

def dg_from_spectral(ws: SpectralWorkspace, n: int) -> DGState:
    """Read (f, omega) off the spectral data: the oracle route."""
    pair = ws.pair
    N = pair.N
    sd = ws.data(n)
    m = pair.m_mpc()
    th1 = sd.theta_at(mpc(1))
    if abs(th1) < denominator_floor() * max(abs(c) for c in sd.theta):
        raise ThetaVanishesAtOne(f"coordinate polynomial vanished at 1, n={n}")
    f = []
    for t in _free_points(pair):
        f.append(sd.theta_at(t) / (t * th1))
    omega = [(-1) ** N * sd.omega[j] - (-1) ** j * m[N + 1 - j] / 2
             for j in range(1, N + 1)]
    return DGState(n=n, f=f, omega=omega)


def dg_initial(pair: PolyPair, upoly: UPoly, moments: MomentSequence) -> DGState:
    """Level-zero state from the generating-function polynomial."""
    N = pair.N
    w0 = to_mpc(moments.w(0))
    wm1 = to_mpc(moments.w(-1))
    k02 = 1 / w0
    V2 = pair.V2_mpc()
    U = [to_mpc(u) for u in upoly.u]
    minus = psub(V2, pscale(U, k02))          # 2V - k0^2 U
    den = peval(minus, mpc(1))
    if abs(den) < denominator_floor():
        raise ZeroDenominator("2V(1) = k0^2 U(1): initial f undefined")
    f = [peval(minus, t) / (t * den) for t in _free_points(pair)]
    sign = mpf((-1) ** N)
    omega = []
    for j in range(1, N + 1):
        mj = minus[j] if j < len(minus) else mpc(0)
        mjm1 = minus[j - 1]
        omega.append(sign * (mj / 2 - w0 / (2 * wm1) * mjm1))
    return DGState(n=0, f=f, omega=omega)


# ---------------------------------------------------------------------------
# the coupled step
# ---------------------------------------------------------------------------

def _omega_brackets(pair: PolyPair, state: DGState, n: int):
    """Evaluations of the two Omega_n -+ V bracket families at t_j and at 1."""
    N = pair.N
    m = pair.m_mpc()
    rho0 = pair.weight.residues_mpc()[0]
    m0 = m[0]
    T = _free_points(pair)
    prod_all = mpc(1)
    for t in T:
        prod_all *= t
    sgn = mpf((-1) ** N)

    def bracket_plus(x, at_one):
        base = (n - rho0) * (prod_all if at_one else prod_all / x)
        s = mpc(0)
        for l in range(1, N + 1):
            s += (mpc(1) if at_one else x ** (l - 1)) * state.omega[l - 1]
        return base + s + sgn * (1 + m0) * (mpc(1) if at_one else x ** N)

    def bracket_minus(x, at_one):
        base = mpf(n) * (prod_all if at_one else prod_all / x)
        s = mpc(0)
        for l in range(1, N + 1):
            wl = state.omega[l - 1] + (-1) ** l * m[N + 1 - l]
            s += (mpc(1) if at_one else x ** (l - 1)) * wl
        return base + s + sgn * (mpc(1) if at_one else x ** N)

    return bracket_plus, bracket_minus


def dg_step(state: DGState, pair: PolyPair) -> DGState:
    """Advance (f, omega) one level.

    f first: t_j f^j_n f^j_{n+1} equals the bracket ratio at level n; then
    omega at level n+1 from the inverted coordinate-polynomial sums.  A
    vanishing denominator is a movable singularity of the trajectory and
    aborts with a structured report naming the factor.
    """
    n = state.n
    N = pair.N
    T = _free_points(pair)
    floor = denominator_floor()
    bplus, bminus = _omega_brackets(pair, state, n)
    A1 = bplus(mpc(1), True)
    B1 = bminus(mpc(1), True)
    scale = max(abs(A1), abs(B1), mpf(1))
    for label, val in (("bracket_plus@1", A1), ("bracket_minus@1", B1)):
        if abs(val) < floor * scale:
            raise SingularStep(f"movable singularity at n={n}: {label} vanished",
                               index=n, factor=label, value=val)
    f_next = []
    for j, t in enumerate(T):
        Aj = bplus(t, False)
        Bj = bminus(t, False)
        fj = to_mpc(state.f[j])
        if abs(fj) < floor:
            raise SingularStep(f"movable singularity at n={n}: f^{j + 1} = 0",
                               index=n, factor=f"f^{j + 1}", value=fj)
        f_next.append(Aj * Bj / (A1 * B1 * t * fj))

    m = pair.m_mpc()
    rho0 = pair.weight.residues_mpc()[0]
    m0 = m[0]
    TU = T + [mpc(1)]
    np1 = n + 1
    num_plain, den_t = _inversion_sums(pair, f_next)
    if abs(den_t) < floor * max(abs(num_plain), mpf(1)):
        raise SingularStep(f"inversion denominator vanished at n={np1}",
                           index=np1, factor="den_t", value=den_t)
    omega_next = []
    for j in range(1, N + 1):
        # both numerators carry the t_l weights; only the second denominator does
        s1 = _weighted_sum(pair, f_next, N - j) / num_plain
        s2 = _weighted_sum(pair, f_next, N + 1 - j) / den_t
        sgn = mpf((-1) ** j)
        rhs = sgn * mpf(np1 - 1) * esym(TU, N + 1 - j) \
            + sgn * (np1 - rho0) * s1 \
            - sgn * (np1 + 1 + m0) * s2
        omega_next.append(rhs - state.omega[j - 1] - sgn * m[N + 1 - j])
    return DGState(n=np1, f=f_next, omega=omega_next)


def dg_invert(state: DGState, pair: PolyPair, n: int = None):
    """Reflection-ratio and interior coordinate coefficients from (f, omega).

    Returns ((n - rho_0) r_n/r_{n+1}, [vartheta^1 .. vartheta^{N-1}]) and
    caches them on the state.
    """
    if n is None:
        n = state.n
    N = pair.N
    m0 = pair.m_mpc()[0]
    num_plain, den_t = _inversion_sums(pair, state.f)
    if abs(den_t) < denominator_floor() * max(abs(num_plain), mpf(1)):
        raise ZeroDenominator("inversion denominator vanished")
    scaled_ratio = (n + 1 + m0) * num_plain / den_t
    vartheta = []
    for j in range(1, N):
        numj = _weighted_sum(pair, state.f, N - j)
        vartheta.append((-1) ** (N + j) * (n + 1 + m0) * numj / den_t)
    state.r_ratio = scaled_ratio
    state.vartheta = vartheta
    return scaled_ratio, vartheta


def dg_trajectory(initial: DGState, pair: PolyPair, nmax: int) -> list:
    out = [initial]
    while out[-1].n < nmax:
        out.append(dg_step(out[-1], pair))
    return out


# ---------------------------------------------------------------------------
# recovering the determinant sequence
# ---------------------------------------------------------------------------

def tau_recovery(states: list, pair: PolyPair, moments: MomentSequence,
                 lambda_tol=None) -> dict:
    """Determinants from the recurrence variables alone.

    The reflection coefficients come from the inversion ratio, the sub-leading
    coefficients along two independent recurrences (which must agree), the
    second-family reflections via the difference identity, and the
    determinants from the product identity.  Needs the trajectory up to some
    n_max; returns determinants up to index n_max - 1.
    """
    N = pair.N
    m = pair.m_mpc()
    m0, m1 = m[0], m[1]
    e = pair.e_mpc()
    e1 = e[1]
    rho0 = pair.weight.residues_mpc()[0]
    nmax = states[-1].n
    if lambda_tol is None:
        lambda_tol = mpf(10) ** (-(mp.prec // 8))

    r = [mpc(1)]
    for st in states:
        ratio, _ = dg_invert(st, pair, st.n)
        if abs(ratio) == 0:
            raise ZeroRNRatio(f"reflection ratio vanished at n={st.n}")
        # (n - rho0) r_n / r_{n+1} = ratio
        r.append((st.n - rho0) * r[-1] / ratio)

    lam = [mpc(0), r[1]]            # lambda_0, lambda_1
    lam_alt = [mpc(0), r[1]]
    for st in states:
        n = st.n
        if n + 2 >= len(r):
            break
        # route one: the top interior coordinate coefficient
        if N >= 2:
            vt = st.vartheta[N - 2]
        else:
            vt = (-1) ** N * (n * e[N + 1] - m[N + 1]) * r[n] / r[n + 1]
        nxt = (-(n + 1) * e1 - m1 + (n + 2 + m0) * r[n + 2] / r[n + 1] +
               (n + m0) * lam[n] - vt) / (n + 2 + m0)
        lam.append(nxt)
        # route two: the top omega coefficient
        wN = st.omega[N - 1]
        nxt2 = (-e1 - m1 + (n + 1 + m0) * lam_alt[n + 1] +
                (n + 2 + m0) * r[n + 2] / r[n + 1] -
                (-1) ** N * wN) / (n + 2 + m0)
        lam_alt.append(nxt2)

    npts = min(len(lam), len(lam_alt))
    scale = max(max(abs(x) for x in lam[:npts]), mpf(1))
    delta = max(abs(a - b) for a, b in zip(lam[:npts], lam_alt[:npts])) / scale
    if delta > lambda_tol:
        raise InconsistentLambdaPaths(
            f"the two recovery recurrences disagree: {mpmath.nstr(delta, 6)}")

    # lambda_{k+1} - lambda_k = r_{k+1} rbar_k
    rbar = [mpc(1)]
    for k in range(1, npts - 1):
        if abs(r[k + 1]) == 0:
            raise ZeroRNRatio(f"r_{k + 1} = 0 during recovery")
        rbar.append((lam[k + 1] - lam[k]) / r[k + 1])
    rbar0_defect = abs((lam[1] - lam[0]) / r[1] - 1)

    w0 = to_mpc(moments.w(0))
    dets = [mpc(1), w0]
    for n in range(1, len(rbar)):
        dets.append(dets[n] ** 2 * (1 - r[n] * rbar[n]) / dets[n - 1])
    return {"I": dets, "r": r, "rbar": rbar, "lam": lam, "lam_alt": lam_alt,
            "lambda_delta": delta, "rbar0_defect": rbar0_defect}


# ---------------------------------------------------------------------------
# Hamiltonian-coordinate form of the level recurrence
# ---------------------------------------------------------------------------

def dg_hamiltonian_form(ws: SpectralWorkspace, n: int) -> mpf:
    """Residual of the phase-space form of the level recurrence.

    Evaluated at the advanced-level roots, the reading the oracle validates
    (see `dg_hamiltonian_residuals` for both readings).
    """
    return dg_hamiltonian_residuals(ws, n)["advanced"]


def dg_hamiltonian_residuals(ws: SpectralWorkspace, n: int) -> dict:
    """Residual of p_{n+1} + p_n = n/q - 2V(q)/W(q) under both level readings.

    The momentum functions p_m(z) = -(Omega_m(z) + V(z))/W(z) of levels n and
    n+1 are summed at the roots of either level's coordinate polynomial.  The
    advanced-level roots satisfy the identity (this follows from the coupled
    recurrences); the lagging-level reading is reported alongside for the
    record.
    """
    from .garnier import polynomial_roots, _sorted_roots
    from .polys import peval

    W, V = ws.W(), ws.V()
    V2 = ws.V2()
    sd_n, sd_n1 = ws.data(n), ws.data(n + 1)

    def p_fun(sd, z):
        return -(peval(sd.omega, z) + peval(V, z)) / peval(W, z)

    out = {}
    for tag, sd_roots in (("advanced", sd_n1), ("lagging", sd_n)):
        roots = _sorted_roots(polynomial_roots(sd_roots.theta))
        worst = mpf(0)
        for q in roots:
            lhs = p_fun(sd_n1, q) + p_fun(sd_n, q)
            rhs = mpf(n) / q - peval(V2, q) / peval(W, q)
            scale = max(abs(lhs), abs(rhs), mpf(1))
            worst = max(worst, abs(lhs - rhs) / scale)
        out[tag] = worst
    return out


# ---------------------------------------------------------------------------
# parameter bookkeeping for the one-variable specialisation
# ---------------------------------------------------------------------------

def dpv_parameters(pair: PolyPair, n: int) -> dict:
    """Parameter tuple of the standard one-variable discrete system (N = 1).

    Pure bookkeeping: the affine change of the omega variable and the
    five-parameter tuple the M = 3 recurrence maps onto.
    """
    if pair.N != 1:
        raise ValueError("parameter map defined for one deformation variable")
    rho = pair.weight.residues_mpc()
    rho0, rho_t, rho1 = rho[0], rho[1], rho[2]
    t = pair.weight.free_singularities[0].to_mpc()
    alphas = (rho_t, n - rho0, -n - rho_t - rho1, rho1,
              n + 1 + rho0 + rho_t + rho1)
    # omega -> (1-t) omega - n t + 1 + rho0 (t+1) + rho_t + rho1,  t -> 1/t
    omega_map = ((1 - t), -n * t + 1 + rho0 * (t + 1) + rho_t + rho1)
    return {"alpha": alphas, "t_image": 1 / t, "omega_scale": omega_map[0],
            "omega_shift": omega_map[1]}
