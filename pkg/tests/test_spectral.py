"""Spectral extraction and the identity lattice."""

import pytest
from mpmath import mpc, mpf

from conftest import (make_workspace, random_canonical_case,
                      standard_case_m3, standard_case_m4)
from circlebops.bops import ToeplitzOracle
from circlebops.errors import DegreeBoundViolated, SamplePointOnSingularity
from circlebops.moments import MomentSequence, build_U
from circlebops.polys import padd, pmax_abs, pscale, pshift, psub
from circlebops.report import all_passed, failures
from circlebops.spectral import (SpectralWorkspace, a_matrix, check_bilinear,
                                 check_linear_recurrences,
                                 check_summation_identities, check_transitions,
                                 p2_asymptotic_constant,
                                 residue_structure_checks, scalar_ode_coeffs,
                                 scalar_ode_residuals)
from circlebops.weights import build_poly_pair, build_weight

TOL = mpf(1e-25)


def _ws(case=standard_case_m3):
    weight, seeds = case()
    return make_workspace(weight, seeds)


def test_band_residual_is_tiny():
    ws = _ws()
    for n in range(0, 8):
        assert ws.data(n).band_residual < mpf(1e-30)


def test_degree_alarm_on_corrupted_moments():
    weight, seeds = standard_case_m3()
    pair = build_poly_pair(weight)
    ms = MomentSequence.from_seeds(pair, -1, seeds)
    ms.extend(-10, 10)
    ms.values[6] += mpf("1e-6")      # break the recurrence silently
    ws = SpectralWorkspace(ToeplitzOracle(ms), pair)
    with pytest.raises(DegreeBoundViolated):
        ws.data(3)


def test_initial_spectral_data_closed_forms():
    """Level-zero spectral polynomials against the generating polynomial."""
    ws = _ws()
    pair = ws.pair
    ms = ws.oracle.moments
    sd = ws.data(0)
    l0, l1 = ws.level(0), ws.level(1)
    U = [u for u in build_U(pair, ms).u]
    k02 = 1 / ms.w(0)
    V2 = pair.V2_mpc()
    minus = psub(V2, pscale(U, k02))
    plus = padd(V2, pscale(U, k02))

    lhs = pscale(sd.theta, 2 * l1.phi0 / l0.kappa)
    assert pmax_abs(psub(lhs, minus)) / pmax_abs(minus) < TOL

    lhs = pshift(pscale(sd.thetastar, 2 * l1.phibar0 / l0.kappa), 1)
    assert pmax_abs(psub(lhs, pscale(plus, -1))) / pmax_abs(plus) < TOL

    lhs = pscale(sd.omega, 2 * l1.phi0)
    rhs = psub(pscale(pshift(minus, 1), l1.kappa), pscale(U, k02 * l1.phi0))
    assert pmax_abs(psub(lhs, rhs)) / pmax_abs(rhs) < TOL

    lhs = pshift(pscale(sd.omegastar, 2 * l1.phibar0), 1)
    rhs = psub(pscale(plus, -l1.kappa), pscale(pshift(U, 1), k02 * l1.phibar0))
    assert pmax_abs(psub(lhs, rhs)) / pmax_abs(rhs) < TOL


def test_parameterisation_endpoints():
    ws = _ws(standard_case_m4)
    pair = ws.pair
    e, m = pair.e_mpc(), pair.m_mpc()
    N = pair.N
    for n in (0, 2, 4):
        sd = ws.data(n)
        l0, l1 = ws.level(n), ws.level(n + 1)
        kr = l1.kappa / l0.kappa
        assert abs(kr * sd.theta[-1] - (n + 1 + m[0])) < TOL
        want = (-1) ** N * (n * e[N + 1] - m[N + 1]) * l0.r / l1.r
        assert abs(kr * sd.theta[0] - want) < TOL
        assert abs(sd.omega[-1] - (1 + m[0] / 2)) < TOL
        want = (-1) ** N * (n * e[N + 1] - m[N + 1] / 2)
        assert abs(sd.omega[0] - want) < TOL


def test_linear_recurrences_and_transitions():
    ws = _ws()
    for n in (1, 3, 5):
        assert all_passed(check_linear_recurrences(ws, n, TOL))
        assert all_passed(check_transitions(ws, n, TOL))


def test_recurrence_residual_gauge_invariant():
    weight, seeds = standard_case_m3()
    pair = build_poly_pair(weight)
    ms = MomentSequence.from_seeds(pair, -1, seeds)
    base = SpectralWorkspace(ToeplitzOracle(ms), pair)
    flip = SpectralWorkspace(ToeplitzOracle(ms, gauge={2: -1, 4: -1}), pair)
    for wsx in (base, flip):
        res = check_linear_recurrences(wsx, 3, TOL)
        assert all_passed(res), failures(res)


def test_zero_residue_weight_is_excluded_input():
    from circlebops.errors import NonnegativeIntegerResidue
    with pytest.raises(NonnegativeIntegerResidue):
        build_weight([0, "1/3", 1], [0, 0, 0])


def test_bilinear_relations():
    for case in (standard_case_m3, standard_case_m4):
        ws = _ws(case)
        for n in (0, 1, 3):
            res = check_bilinear(ws, n, TOL)
            assert all_passed(res), [(r.label, r.residual) for r in
                                     failures(res)]


def test_summation_identities_with_coordinates():
    from circlebops.garnier import coordinates_from_spectral
    ws = _ws(standard_case_m4)
    for n in (1, 3):
        pt = coordinates_from_spectral(ws, n, with_hamiltonians=False)
        res = check_summation_identities(ws, n, TOL, garnier_point=pt)
        assert all_passed(res), [(r.label, r.residual) for r in
                                 failures(res)]


def test_residue_matrices_structure():
    ws = _ws(standard_case_m4)
    for n in (0, 2):
        res = residue_structure_checks(ws, n, TOL)
        assert all_passed(res)
    from circlebops.spectral import residue_matrices
    mats0 = residue_matrices(ws, 1)
    # upper-triangular origin residue: second row identically zero
    assert abs(mats0[0][1][0]) < TOL and abs(mats0[0][1][1]) < TOL


def test_a_matrix_rejects_singularities():
    ws = _ws()
    with pytest.raises(SamplePointOnSingularity):
        a_matrix(ws, 1, mpc(1))


def test_scalar_ode_residuals_and_structure():
    ws = _ws(standard_case_m4)
    from circlebops.garnier import coordinates_from_spectral
    for n in (1, 4):
        res = scalar_ode_residuals(ws, n, mpf(1e-22))
        assert all_passed(res)
        # first coefficient has the displayed partial-fraction structure
        pt = coordinates_from_spectral(ws, n, with_hamiltonians=False)
        zs = ws.singularities()
        rhos = ws.residues()
        for z in (mpc("1.37", "0.41"), mpc("-0.9", "1.1")):
            p1, _, _, _ = scalar_ode_coeffs(ws, n, z)
            want = (rhos[0] + 1 - n) / z + (rhos[-1] + 1) / (z - 1)
            for zj, rj in zip(zs[1:-1], rhos[1:-1]):
                want += (rj + 1) / (z - zj)
            for qr in pt.q:
                want -= 1 / (z - qr)
            assert abs(p1 - want) < TOL * max(abs(p1), mpf(1))
        # z(z-1) p2 settles at the accessory constant
        m0 = ws.pair.m_mpc()[0]
        got = p2_asymptotic_constant(ws, n)
        assert abs(got + n * (1 + m0)) < TOL * max(abs(got), mpf(1))


def test_lattice_on_random_weights():
    for seed, N in ((11, 1), (12, 2)):
        weight, seeds = random_canonical_case(seed, N)
        ws = make_workspace(weight, seeds)
        for n in (1, 2):
            assert all_passed(check_linear_recurrences(ws, n, mpf(1e-22)))
            assert all_passed(check_bilinear(ws, n, mpf(1e-22)))


def test_pipeline_runs_at_minimum_precision():
    """Everything holds at 53 bits, with proportionately relaxed bounds."""
    from circlebops.mputil import working_precision
    with working_precision(53):
        ws = make_workspace(*standard_case_m3())
        assert all_passed(check_linear_recurrences(ws, 2, mpf(1e-9)))
        assert all_passed(check_bilinear(ws, 2, mpf(1e-9)))
        assert ws.data(3).band_residual < mpf(1e-11)


def test_ode_coeffs_refuse_coordinate_roots():
    from circlebops.errors import EvaluationAtRootOfTheta
    from circlebops.garnier import coordinates_from_spectral
    ws = make_workspace(*standard_case_m3())
    pt = coordinates_from_spectral(ws, 2, with_hamiltonians=False)
    with pytest.raises(EvaluationAtRootOfTheta):
        scalar_ode_coeffs(ws, 2, pt.q[0])
