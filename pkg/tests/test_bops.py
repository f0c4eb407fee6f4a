"""Determinant oracle: existence, identities, expansions, recurrence route."""

import pytest
from mpmath import mpc, mpf

from conftest import make_workspace, standard_case_m3, standard_case_m4
from circlebops.bops import (ToeplitzOracle, casoratian_residuals,
                             geronimus_step, kappa_from_dets,
                             phi_from_determinant, phibar_from_determinant,
                             toeplitz_det)
from circlebops.errors import DegenerateDeterminant
from circlebops.exact import det_cofactor, qc
from circlebops.moments import MomentSequence
from circlebops.polys import pmax_abs, psub
from circlebops.weights import build_poly_pair, build_weight


def _oracle_m3():
    weight, seeds = standard_case_m3()
    pair = build_poly_pair(weight)
    ms = MomentSequence.from_seeds(pair, -1, seeds)
    return ToeplitzOracle(ms), ms, pair


def test_unit_weight_determinants_and_polynomials():
    w = build_weight([0, "1/3", 1], [0, 0, 0], validate=False)
    pair = build_poly_pair(w)
    ms = MomentSequence.from_seeds(pair, -1, [mpc(0), mpc(1)])
    o = ToeplitzOracle(ms)
    for n in range(6):
        assert abs(o.det(n) - 1) < mpf(1e-35)
        lev = o.level(n)
        assert abs(lev.kappa - 1) < mpf(1e-35)
        # phi_n = z^n
        for k, c in enumerate(lev.phi):
            want = mpc(1) if k == n else mpc(0)
            assert abs(c - want) < mpf(1e-34)


def test_det_level_one_is_w0():
    o, ms, _ = _oracle_m3()
    assert abs(o.det(1) - ms.w(0)) == 0


def test_level_one_polynomials_hand_expansion():
    """The bordered determinant at level one: phi uses w_{-1}, the second
    family uses w_{+1}."""
    o, ms, _ = _oracle_m3()
    phi1 = phi_from_determinant(ms, 1)
    assert abs(phi1[0] + ms.w(-1) / ms.w(0)) < mpf(1e-35)
    phibar1 = phibar_from_determinant(ms, 1)
    assert abs(phibar1[0] + ms.w(1) / ms.w(0)) < mpf(1e-35)


def test_lu_determinant_vs_exact_cofactor_n6():
    weight, _ = standard_case_m3()
    pair = build_poly_pair(weight)
    seeds = [qc("31/100", "17/100"), qc(1)]
    msx = MomentSequence.from_seeds(pair, -1, seeds, exact=True)
    msx.extend(-5, 5)
    n = 6
    exact = det_cofactor([[msx.values[i - j] for j in range(n)]
                          for i in range(n)])
    ms = MomentSequence.from_seeds(pair, -1,
                                   [s.to_mpc() for s in seeds])
    approx = toeplitz_det(ms, n)
    assert abs(exact.to_mpc() - approx) < mpf(1e-32) * abs(approx)


def test_orthogonality_and_orthonormality():
    o, _, _ = _oracle_m3()
    for n in (1, 3, 5, 7):
        assert o.orthogonality_residual(n) < mpf(1e-34)
        assert o.orthogonality_residual_second(n) < mpf(1e-34)
        assert o.orthonormality_residual(n) < mpf(1e-32)


def test_determinant_ratio_identity():
    o, _, _ = _oracle_m3()
    for n in range(1, 9):
        lev = o.level(n)
        lhs = o.det(n + 1) * o.det(n - 1) / o.det(n) ** 2
        rhs = 1 - lev.r * lev.rbar
        assert abs(lhs - rhs) < mpf(1e-33) * max(abs(lhs), mpf(1))


def test_coefficient_difference_identities():
    o, _, _ = _oracle_m3()
    for n in range(1, 9):
        a, b = o.level(n), o.level(n - 1)
        assert abs(a.kappa ** 2 - b.kappa ** 2 - a.phi0 * a.phibar0) \
            < mpf(1e-32) * max(abs(a.kappa) ** 2, mpf(1))
        assert abs(a.lam - b.lam - a.r * b.rbar) < mpf(1e-33)


def test_kappa_square_matches_det_ratio_and_gauge():
    o, ms, _ = _oracle_m3()
    for n in (0, 2, 5):
        k = kappa_from_dets(ms, n)
        assert abs(k ** 2 - o.det(n) / o.det(n + 1)) < mpf(1e-33) * abs(k) ** 2
    flipped = ToeplitzOracle(ms, gauge={2: -1})
    base = ToeplitzOracle(ms)
    # r, lambda are gauge invariant; kappa and the raw coefficients flip
    assert abs(flipped.level(2).r - base.level(2).r) < mpf(1e-33)
    assert abs(flipped.level(2).lam - base.level(2).lam) < mpf(1e-33)
    assert abs(flipped.level(2).kappa + base.level(2).kappa) < mpf(1e-33)
    # the coefficient-difference identity is insensitive to the flip
    a, b = flipped.level(2), flipped.level(1)
    assert abs(a.kappa ** 2 - b.kappa ** 2 - a.phi0 * a.phibar0) < mpf(1e-32)


def test_degenerate_determinant_raises():
    weight, _ = standard_case_m3()
    pair = build_poly_pair(weight)
    ms = MomentSequence.from_seeds(pair, -1, [mpc("0.3"), mpc(0)])
    o = ToeplitzOracle(ms)    # w_0 = 0 kills I_1
    with pytest.raises(DegenerateDeterminant):
        o.level(1)


def test_associated_function_leading_coefficients():
    """Interior expansions lead exactly as the closed forms state."""
    o, _, _ = _oracle_m3()
    for n in (0, 2, 4, 6):
        lev = o.level(n)
        nxt = o.level(n + 1)
        eps = o.eps_series(n, n + 3)
        est = o.epsstar_series(n, n + 3)
        assert abs(lev.kappa / 2 * eps.coeff(n) - 1) < mpf(1e-32)
        assert abs(lev.kappa / 2 * eps.coeff(n + 1) + nxt.lambar) < mpf(1e-31)
        assert abs(lev.kappa / 2 * est.coeff(n + 1) - nxt.rbar) < mpf(1e-31)
        # one order deeper in the starred family
        nxt2 = o.level(n + 2)
        want = nxt2.rbar - nxt.rbar * nxt2.lambar
        assert abs(lev.kappa / 2 * est.coeff(n + 2) - want) < mpf(1e-30)
        # and in the plain one
        want = nxt.lambar * nxt2.lambar - nxt2.mubar
        assert abs(lev.kappa / 2 * eps.coeff(n + 2) - want) < mpf(1e-30)


def test_polynomial_interior_coefficients_couple_levels():
    """Low coefficients of each family combine reflections and subleading
    data of neighbouring levels."""
    o, _, _ = _oracle_m3()
    for n in (2, 4, 6):
        lev = o.level(n)
        lm1, lm2 = o.level(n - 1), o.level(n - 2)
        c1 = lev.phi[1] / lev.kappa
        want = lm1.r + lev.r * lm1.lambar
        assert abs(c1 - want) < mpf(1e-31)
        c2 = lev.phi[2] / lev.kappa
        want = lm2.r + lm1.r * lm2.lambar + lev.r * lm1.mubar
        assert abs(c2 - want) < mpf(1e-31)
        # second family mirrors with the unbarred data
        cs1 = lev.phibar[1] / lev.kappa
        want = lm1.rbar + lev.rbar * lm1.lam
        assert abs(cs1 - want) < mpf(1e-31)


def test_casoratian_residuals_small():
    o, _, _ = _oracle_m3()
    for n in range(0, 8):
        res = casoratian_residuals(o, n)
        for label in ("Cas:a", "Cas:b", "Cas:c"):
            assert res[label] < mpf(1e-25), (label, n)


def test_geronimus_step_matches_oracle():
    weight, seeds = standard_case_m4()
    ws = make_workspace(weight, seeds)
    o = ws.oracle
    for n in (0, 2, 5):
        lev, nxt = o.level(n), o.level(n + 1)
        phi_next, phistar_next = geronimus_step(lev, nxt.kappa, nxt.phi0,
                                                nxt.phibar0)
        rel = pmax_abs(psub(phi_next, nxt.phi)) / pmax_abs(nxt.phi)
        assert rel < mpf(1e-32)
        rel = pmax_abs(psub(phistar_next, nxt.phistar)) / pmax_abs(nxt.phistar)
        assert rel < mpf(1e-32)
