"""Two-sided moment sequences of semi-classical circle weights.

The Fourier coefficients w_k of a weight with logarithmic derivative 2V/W
satisfy the linear difference equation

    sum_k g_k(j) w_{j-k} = 0,      g_k(j) = (k - j) W_k + (2V)_{k-1},

obtained from exactness of d/dz [ z^{-j} W w ] under the contour integral
(W_k, (2V)_k are ascending coefficients; the (2V) term is absent at k = 0).
When the origin is singular W_0 = 0 and the equation shortens by one order,
leaving M - 1 free seed values; otherwise the order is M.

Three ways to populate a sequence:

* ``from_seeds``       - formal mode, arbitrary seed values, recurrence both
                         directions (the primary test mode);
* ``from_quadrature``  - contour integrals of an honest single-valued weight;
* ``from_rational_weight`` - closed-form Laurent coefficients for weights all
                         of whose residues are negative integers, expanded in
                         the annulus between interior and exterior poles.
                         These are exact functions of the singularity
                         positions, which makes them the right family for
                         finite-difference deformation checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf, mpc

from .errors import (NonConvergent, SingularStep, WindowTooSmall,
                     NotSingleValued)
from .exact import QC
from .mputil import guarded, to_mpc
from .polys import padd, pdiff, peval, pmul, pscale
from .weights import PolyPair, WeightData, build_poly_pair, \
    eval_weight_on_circle, seam_shielded, single_valuedness_defect

# relative pivot floors for recurrence steps
BACKWARD_PIVOT_FLOOR = 1e-3
FORWARD_PIVOT_FLOOR = 1e-12


def recurrence_row(pair: PolyPair, j, exact: bool = False):
    """Coefficients g_0..g_M of the difference equation at index j.

    Works over mpc (default) or exactly over Gaussian rationals.
    """
    W = list(pair.W) if exact else pair.W_mpc()
    V2 = list(pair.V2) if exact else pair.V2_mpc()
    M = pair.M
    row = []
    for k in range(M + 1):
        g = (k - j) * W[k]
        if k >= 1:
            g = g + V2[k - 1]
        row.append(g)
    return row


def _is_canonical_origin(pair: PolyPair) -> bool:
    return not pair.W[0]


def _solve_step(row, known, pivot_index, j, floor_rel):
    """Solve the equation sum_k row[k] * w_{j-k} = 0 for the pivot moment."""
    exact = isinstance(row[pivot_index], QC)
    if exact:
        if row[pivot_index].is_zero():
            raise SingularStep("exact resonance: pivot vanished", index=j,
                               factor=f"g_{pivot_index}", value=0)
    else:
        scale = max(abs(g) for g in row)
        if abs(row[pivot_index]) <= floor_rel * scale:
            raise SingularStep(
                f"resonant step at j={j}: pivot g_{pivot_index} below floor",
                index=j, factor=f"g_{pivot_index}",
                value=row[pivot_index])
    acc = None
    for k, g in enumerate(row):
        if k == pivot_index or not g:
            continue
        term = g * known[k]
        acc = term if acc is None else acc + term
    if acc is None:
        acc = 0 * row[pivot_index]
    return -acc / row[pivot_index]


@dataclass
class MomentSequence:
    """Contiguous window of moments with its generating recurrence."""

    pair: PolyPair
    values: dict
    seed_lo: int
    seed_hi: int
    provenance: str = "seeded"
    exact: bool = False

    @property
    def k_min(self) -> int:
        return min(self.values)

    @property
    def k_max(self) -> int:
        return max(self.values)

    @property
    def order(self) -> int:
        """Number of free seed values of the difference equation."""
        return self.pair.M - 1 if _is_canonical_origin(self.pair) else self.pair.M

    # -- construction --------------------------------------------------------

    @classmethod
    def from_seeds(cls, pair: PolyPair, start: int, seeds,
                   exact: bool = False) -> "MomentSequence":
        conv = (lambda v: v) if exact else to_mpc
        order = pair.M - 1 if _is_canonical_origin(pair) else pair.M
        if len(seeds) != order:
            raise WindowTooSmall(
                f"the difference equation leaves exactly {order} consecutive "
                f"moments free, got {len(seeds)} seeds")
        values = {start + i: conv(v) for i, v in enumerate(seeds)}
        return cls(pair, values, start, start + len(seeds) - 1,
                   provenance="seeded", exact=exact)

    @classmethod
    def from_quadrature(cls, weight: WeightData, kmin: int, kmax: int,
                        rel_tol=None) -> "MomentSequence":
        pair = build_poly_pair(weight)
        values = {k: moment_quadrature(weight, k, rel_tol=rel_tol)
                  for k in range(kmin, kmax + 1)}
        return cls(pair, values, kmin, kmax, provenance="quadrature")

    @classmethod
    def from_rational_weight(cls, weight: WeightData, kmin: int,
                             kmax: int) -> "MomentSequence":
        pair = build_poly_pair(weight)
        values = rational_weight_moments(weight, kmin, kmax)
        return cls(pair, values, kmin, kmax, provenance="rational")

    # -- access / extension --------------------------------------------------

    def w(self, k: int):
        if k not in self.values:
            self.extend(k, k)
        return self.values[k]

    def extend(self, kmin: int, kmax: int) -> None:
        """Grow the window by recurrence steps (never recomputes seeds)."""
        if self.exact:
            while self.k_max < kmax:
                self._step_forward()
            while self.k_min > kmin:
                self._step_backward()
            return
        with guarded():
            while self.k_max < kmax:
                self._step_forward()
            while self.k_min > kmin:
                self._step_backward()

    def window(self, kmin: int, kmax: int):
        self.extend(kmin, kmax)
        return [self.values[k] for k in range(kmin, kmax + 1)]

    def _step_forward(self) -> None:
        top = self.k_max + 1
        canonical = _is_canonical_origin(self.pair)
        j = top + 1 if canonical else top
        pivot = 1 if canonical else 0
        row = recurrence_row(self.pair, j, exact=self.exact)
        known = {}
        for k in range(len(row)):
            if k == pivot or not row[k]:
                continue
            idx = j - k
            if idx not in self.values:
                raise WindowTooSmall(f"moment {idx} unavailable for step")
            known[k] = self.values[idx]
        self.values[top] = _solve_step(row, known, pivot, j,
                                       FORWARD_PIVOT_FLOOR)

    def _step_backward(self) -> None:
        bot = self.k_min - 1
        M = self.pair.M
        j = bot + M
        row = recurrence_row(self.pair, j, exact=self.exact)
        known = {}
        for k in range(len(row)):
            if k == M or not row[k]:
                continue
            idx = j - k
            if idx not in self.values:
                raise WindowTooSmall(f"moment {idx} unavailable for step")
            known[k] = self.values[idx]
        self.values[bot] = _solve_step(row, known, M, j, BACKWARD_PIVOT_FLOOR)

    # -- diagnostics ----------------------------------------------------------

    def equation_residual(self, j: int) -> mpf:
        """Relative residual of the difference equation at index j."""
        row = recurrence_row(self.pair, j)
        terms = []
        for k, g in enumerate(row):
            if not g:
                continue
            idx = j - k
            if idx not in self.values:
                raise WindowTooSmall(f"moment {idx} not in window")
            terms.append(g * to_mpc(self.values[idx]))
        scale = max((abs(t) for t in terms), default=mpf(0))
        if scale == 0:
            return mpf(0)
        return abs(sum(terms)) / scale

    def max_residual(self) -> mpf:
        lo = self.k_min + self.pair.M
        out = mpf(0)
        for j in range(lo, self.k_max + 1):
            out = max(out, self.equation_residual(j))
        return out


def moment_step(pair: PolyPair, moments: MomentSequence, j: int,
                direction: str = "forward"):
    """One recurrence step producing the moment at index j.

    Forward solves for w_j from the window below it, backward from the window
    above; the sequence itself is not modified.
    """
    probe = MomentSequence(pair, dict(moments.values), moments.seed_lo,
                           moments.seed_hi, moments.provenance, moments.exact)
    if direction == "forward":
        if j != moments.k_max + 1:
            probe.values = {k: v for k, v in probe.values.items() if k < j}
        probe._step_forward()
    elif direction == "backward":
        if j != moments.k_min - 1:
            probe.values = {k: v for k, v in probe.values.items() if k > j}
        probe._step_backward()
    else:
        raise ValueError("direction must be 'forward' or 'backward'")
    return probe.values[j]


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def moment_quadrature(weight: WeightData, k: int, rel_tol=None,
                      max_level: int = 16) -> mpc:
    """w_k by contour quadrature of a single-valued weight.

    Smooth weights (no singularity on the circle) use the periodic trapezoid
    rule with grid doubling until two successive grids agree; weights with
    circle singularities are integrated by tanh-sinh panels split at the
    singular angles.
    """
    if rel_tol is None:
        rel_tol = mpf(2) ** (-mp.prec + 12)
    # a singular point at 1 shields the contour seam; otherwise the interior
    # windings must close up for the moments to be well defined
    if not seam_shielded(weight):
        defect = single_valuedness_defect(weight)
        if defect > mpf(2) ** (-mp.prec // 2):
            raise NotSingleValued(
                f"weight not single-valued (defect {mpmath.nstr(defect, 6)})")

    circle_angles = sorted(
        mpmath.arg(z) % (2 * mp.pi)
        for z in weight.singularities_mpc() if abs(z) == 1)

    def f(theta):
        return eval_weight_on_circle(weight, theta) * \
            mpmath.exp(-mpc(0, 1) * k * theta)

    if not circle_angles:
        prev = None
        npts = 16
        for _ in range(max_level):
            h = 2 * mp.pi / npts
            total = mpc(0)
            for i in range(npts):
                total += f(i * h)
            total /= npts
            if prev is not None:
                scale = max(abs(total), mpf(1))
                if abs(total - prev) <= rel_tol * scale:
                    return total
            prev = total
            npts *= 2
        raise NonConvergent(f"trapezoid stalled for moment {k}")

    # graded panels: tanh-sinh nodes cluster at panel endpoints, which we
    # place at the singular angles
    pts = []
    for a in circle_angles:
        if not pts or a > pts[-1]:
            pts.append(a)
    if pts[0] > 0:
        pts = [mpf(0)] + pts
    pts = pts + [2 * mp.pi]
    mids = []
    for i in range(len(pts) - 1):
        mids.extend([pts[i], (pts[i] + pts[i + 1]) / 2])
    mids.append(pts[-1])
    val, err = mpmath.quad(f, mids, error=True)
    val /= 2 * mp.pi
    err /= 2 * mp.pi
    if err > mpf(10) ** 6 * rel_tol * max(abs(val), mpf(1)):
        raise NonConvergent(
            f"tanh-sinh error estimate too large for moment {k}")
    return val


# ---------------------------------------------------------------------------
# closed-form moments for integer-pole weights
# ---------------------------------------------------------------------------

def _product_series(factors, nterms: int):
    """Taylor coefficients of prod (1 - x_i u)^(-q_i) up to u^(nterms-1).

    The product solves P' D = P S with D = prod (1 - x_i u) and
    S = sum_i q_i x_i prod_{j != i} (1 - x_j u), giving an order-len(factors)
    coefficient recurrence: linear cost instead of repeated convolutions.
    """
    if not factors:
        return [mpc(1)] * 1 + [mpc(0)] * (nterms - 1)
    D = [mpc(1)]
    for x, _ in factors:
        D = pmul(D, [mpc(1), -x])
    S = [mpc(0)]
    for i, (x, q) in enumerate(factors):
        part = [mpc(q) * x]
        for jj, (xj, _) in enumerate(factors):
            if jj != i:
                part = pmul(part, [mpc(1), -xj])
        S = padd(S, part)
    p = [mpc(1)]
    for m1 in range(1, nterms):
        acc = mpc(0)
        for k, s in enumerate(S):
            if k <= m1 - 1:
                acc += s * p[m1 - 1 - k]
        for k in range(1, len(D)):
            if k <= m1:
                acc -= D[k] * (m1 - k) * p[m1 - k]
        p.append(acc / m1)
    return p


def rational_weight_moments(weight: WeightData, kmin: int, kmax: int) -> dict:
    """Laurent coefficients of a weight whose residues are all negative ints.

    Such a weight is a rational function; its expansion in the annulus
    between the interior poles and the unit circle is a convergent two-sided
    series whose coefficients are smooth functions of the singularity
    positions.  Truncation is doubled until the requested window stabilises
    at working precision.
    """
    zs = weight.singularities_mpc()
    rhos = []
    for r in weight.residues:
        if r.im != 0 or r.re.denominator != 1 or r.re >= 0:
            raise ValueError("closed-form moments need negative integer residues")
        rhos.append(int(r.re))
    inside = [(z, -q) for z, q in zip(zs, rhos) if abs(z) < 1]
    outside = [(z, -q) for z, q in zip(zs, rhos) if abs(z) >= 1]
    A = sum(-q for _, q in inside)

    tol = mpf(2) ** (-mp.prec + 6)
    # geometric decay ratio of the cross terms sets the truncation length;
    # a short extension then certifies it
    rmax = max((abs(z) for z, _ in inside if z != 0), default=mpf("0.5"))
    rmax = min(max(rmax, mpf("0.05")), mpf("0.98"))
    base = int((mp.prec + 60) / -mpmath.log(rmax, 2)) + 32
    sizes = [base, base + 64, 2 * base, 4 * base, 8 * base]

    def evaluate(nterms):
        P = _product_series([(z, q) for z, q in inside if z != 0], nterms)
        qlen = kmax - A + nterms + 1
        const = mpc(1)
        for z, q in outside:
            const *= (-z) ** (-q)
        Q = _product_series([(1 / z, q) for z, q in outside], qlen)
        Q = [const * c for c in Q]
        vals = {}
        for k in range(kmin, kmax + 1):
            s = mpc(0)
            for m_i in range(len(P)):
                qi = k - A + m_i
                if 0 <= qi < len(Q):
                    s += P[m_i] * Q[qi]
            vals[k] = s
        return vals

    prev = evaluate(sizes[0])
    for nterms in sizes[1:]:
        vals = evaluate(nterms)
        scale = max(max(abs(v) for v in vals.values()), mpf(1))
        if all(abs(vals[k] - prev[k]) <= tol * scale for k in vals):
            return vals
        prev = vals
    raise NonConvergent("rational-weight moment series did not stabilise")


# ---------------------------------------------------------------------------
# the U polynomial and the moment generating function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UPoly:
    """Coefficients u_0..u_{N+1} of U = W F' - 2V F."""

    u: tuple

    def coeffs(self):
        return list(self.u)


def build_U(pair: PolyPair, moments: MomentSequence) -> UPoly:
    """U from the seed window, canonical placement.

    The endpoints collapse to u_0 = (-1)^N w_0 m_{N+1} and u_{N+1} = w_0 m_0;
    interior coefficients combine the seed moments with the recurrence
    weights.
    """
    if not _is_canonical_origin(pair):
        raise ValueError("closed-form U needs the origin among singularities")
    N = pair.N
    e = pair.e_mpc()
    m = pair.m_mpc()
    w = [to_mpc(moments.w(k)) for k in range(0, N + 1)]
    u = [mpc(0)] * (N + 2)
    u[0] = (-1) ** N * w[0] * m[N + 1]
    u[N + 1] = w[0] * m[0]
    for j in range(1, N + 1):
        s = (-1) ** (N - j) * w[0] * m[N + 1 - j]
        for l in range(0, j):
            s += 2 * (-1) ** (N + 1 - l) * \
                ((j - l) * e[N + 1 - l] - m[N + 1 - l]) * w[j - l]
        u[j] = s
    return UPoly(tuple(u))


def u_from_series(pair: PolyPair, moments: MomentSequence) -> UPoly:
    """U extracted coefficient-by-coefficient from W F' - 2V F.

    Works in either placement; used as the independent route for testing the
    closed-form construction.
    """
    M = pair.M
    T = 2 * M + 4
    F = caratheodory_series(moments, T)
    W = pair.W_mpc()
    V2 = pair.V2_mpc()
    Fp = pdiff(F)
    lhs = padd(pmul(W, Fp), pscale(pmul(V2, F), mpc(-1)))
    return UPoly(tuple(lhs[:M]))


def caratheodory_series(moments: MomentSequence, nterms: int):
    """Taylor coefficients of F about 0:  F = w_0 + 2 sum_{k>=1} w_k z^k.

    The sign/index convention is pinned by the normalisation of the
    associated functions at level zero (their expansions must lead with
    coefficient one), which the test suite checks explicitly.
    """
    out = [to_mpc(moments.w(0))]
    for k in range(1, nterms):
        out.append(2 * to_mpc(moments.w(k)))
    return out


def caratheodory(moments: MomentSequence, z, truncation: int):
    """Truncated F(z) for |z| < 1, plus a geometric tail estimate."""
    z = to_mpc(z)
    if abs(z) >= 1:
        raise ValueError("series evaluation needs |z| < 1")
    coeffs = caratheodory_series(moments, truncation + 1)
    val = peval(coeffs, z)
    last = abs(coeffs[-1] * z ** truncation)
    prev = abs(coeffs[-2] * z ** (truncation - 1)) if truncation >= 2 else last
    ratio = last / prev if prev > 0 else abs(z)
    if ratio >= 1:
        tail = mpf("inf")
    else:
        tail = last * ratio / (1 - ratio)
    return val, tail


def caratheodory_ode_residual(pair: PolyPair, moments: MomentSequence,
                              upoly: UPoly, z, truncation: int = 80) -> mpf:
    """Relative residual of W F' = 2V F + U at an interior point."""
    z = to_mpc(z)
    coeffs = caratheodory_series(moments, truncation)
    F = peval(coeffs, z)
    Fp = peval(pdiff(coeffs), z)
    W = peval(pair.W_mpc(), z)
    V2 = peval(pair.V2_mpc(), z)
    U = peval(list(upoly.u), z)
    terms = [W * Fp, -V2 * F, -U]
    scale = max(abs(t) for t in terms)
    if scale == 0:
        return mpf(0)
    return abs(sum(terms)) / scale
