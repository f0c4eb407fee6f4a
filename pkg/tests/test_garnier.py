"""Canonical coordinates, Hamiltonians, flow closed forms, transform."""

import mpmath
import pytest
from mpmath import mp, mpc, mpf

from conftest import make_workspace, standard_case_m3, standard_case_m4
from circlebops.errors import MultipleRoot, RootMatchingAmbiguous
from circlebops.garnier import (canonical_transform,
                                coordinates_from_spectral, fd_pass,
                                hamilton_equations_check,
                                hamiltonian_from_residues, omega_rep_residual,
                                polynomial_roots, riemann_exponents,
                                v2_rep_residual, w_rep_residual)
from circlebops.mputil import match_roots
from circlebops.report import all_passed, failures
from circlebops.spectral import residue_matrices

TOL = mpf(1e-25)


def test_polynomial_roots_small_degrees():
    r = polynomial_roots([mpc(-6), mpc(1)])
    assert abs(r[0] - 6) < mpf(1e-35)
    r = sorted(polynomial_roots([mpc(6), mpc(-5), mpc(1)]),
               key=lambda z: mpmath.re(z))
    assert abs(r[0] - 2) < mpf(1e-33) and abs(r[1] - 3) < mpf(1e-33)
    r = polynomial_roots([mpc(-1), mpc(0), mpc(0), mpc(1)])
    assert min(abs(x - 1) for x in r) < mpf(1e-30)


def test_linear_coordinate_case():
    ws = make_workspace(*standard_case_m3())
    pt = coordinates_from_spectral(ws, 2)
    sd = ws.data(2)
    assert len(pt.q) == 1
    assert abs(pt.q[0] + sd.theta[0] / sd.theta[1]) < mpf(1e-33)


def test_reconstruction_representations():
    ws = make_workspace(*standard_case_m4())
    for n in (0, 2, 4):
        pt = coordinates_from_spectral(ws, n, with_hamiltonians=False)
        assert omega_rep_residual(ws, n, pt) < TOL
        assert v2_rep_residual(ws, n, pt) < TOL
        assert w_rep_residual(ws, n, pt) < TOL


def test_momentum_equals_matrix_entry_at_roots():
    ws = make_workspace(*standard_case_m4())
    n = 2
    pt = coordinates_from_spectral(ws, n, with_hamiltonians=False)
    mats = residue_matrices(ws, n)
    zs = ws.singularities()
    for qr, pr in zip(pt.q, pt.p):
        a11 = sum(m[0][0] / (qr - zj) for m, zj in zip(mats, zs))
        assert abs(a11 - pr) < TOL * max(abs(pr), mpf(1))


def test_hamiltonian_dual_formula():
    for case in (standard_case_m3, standard_case_m4):
        ws = make_workspace(*case())
        for n in (1, 3):
            pt = coordinates_from_spectral(ws, n)
            dual = hamiltonian_from_residues(ws, n, pt)
            for a, b in zip(pt.K, dual):
                assert abs(a - b) < TOL * max(abs(a), mpf(1))


def test_exponent_table_and_accessory():
    ws = make_workspace(*standard_case_m3())
    rhos = ws.residues()
    m0 = ws.pair.m_mpc()[0]
    info = riemann_exponents(ws, 3)
    assert abs(info["exponents"]["origin"] - (3 - rhos[0])) == 0
    assert abs(info["exponents"]["one"] + rhos[-1]) == 0
    assert abs(info["exponents"]["infinity"] - (3 + 1 + sum(rhos))) < mpf(1e-33)
    assert abs(info["accessory"] + 3 * (1 + m0)) < mpf(1e-33)
    # the accessory constant vanishes for the seed level
    assert abs(riemann_exponents(ws, 0)["accessory"]) == 0


def test_hamilton_equations_fd():
    ws = make_workspace(*standard_case_m4())
    pt = coordinates_from_spectral(ws, 2)
    res = hamilton_equations_check(ws, 2, pt, tol=mpf(1e-10))
    assert all_passed(res), [(r.label, r.note) for r in failures(res)]
    # q-direction comparisons must state a genuine order
    orders = [r.note for r in res if "dK/dq" in r.label]
    assert all("order" in o for o in orders)


def test_hamilton_equations_fd_three_coordinates():
    from conftest import standard_case_m5
    ws = make_workspace(*standard_case_m5())
    pt = coordinates_from_spectral(ws, 2)
    res = hamilton_equations_check(ws, 2, pt, tol=mpf(1e-10))
    assert all_passed(res), [(r.label, r.note) for r in failures(res)]


def test_fd_pass_logic():
    ok, order = fd_pass(mpf(1e-10), mpf("2.5e-11"))
    assert ok and abs(order - 2) < 0.1
    ok, order = fd_pass(mpf(1e-10), mpf("0.9e-10"))
    assert not ok
    ok, order = fd_pass(mpf(1e-50), mpf(2) ** (-(3 * mp.prec // 4)))
    assert ok and order is None


def test_canonical_transform_roundtrip_and_gauge():
    weight, seeds = standard_case_m4()
    ws = make_workspace(weight, seeds)
    n = 2
    pt = coordinates_from_spectral(ws, n, with_hamiltonians=False)
    triples = canonical_transform(ws, n, pt)
    for (tj, Qj, Pj), zj in zip(triples, ws.singularities()[1:-1]):
        # Moebius inverse recovers the singularity
        assert abs(tj / (tj - 1) - zj) < mpf(1e-30)
    # gauge flip leaves the transform unchanged
    from circlebops.bops import ToeplitzOracle
    from circlebops.moments import MomentSequence
    from circlebops.spectral import SpectralWorkspace
    from circlebops.weights import build_poly_pair
    pair = build_poly_pair(weight)
    ms = MomentSequence.from_seeds(pair, -1, seeds)
    flip = SpectralWorkspace(ToeplitzOracle(ms, gauge={2: -1}), pair)
    pt2 = coordinates_from_spectral(flip, n, with_hamiltonians=False)
    triples2 = canonical_transform(flip, n, pt2)
    for (a, b, c), (a2, b2, c2) in zip(triples, triples2):
        assert abs(a - a2) < mpf(1e-30)
        assert abs(b - b2) < mpf(1e-28) * max(abs(b), mpf(1))
        assert abs(c - c2) < mpf(1e-28) * max(abs(c), mpf(1))


def test_deterministic_ordering_and_matching():
    ws = make_workspace(*standard_case_m4())
    a = coordinates_from_spectral(ws, 3, with_hamiltonians=False)
    b = coordinates_from_spectral(ws, 3, with_hamiltonians=False)
    assert all(abs(x - y) == 0 for x, y in zip(a.q, b.q))
    # nearest-neighbour matching keeps labels under tiny perturbations
    perturbed = [q + mpf("1e-20") for q in reversed(a.q)]
    matched = match_roots(a.q, perturbed)
    for qm, q in zip(matched, a.q):
        assert abs(qm - q) < mpf("1e-19")
    with pytest.raises(RootMatchingAmbiguous):
        match_roots([mpc(0), mpc(1)], [mpc("0.5"), mpc("0.5001")])


def test_multiple_root_guard():
    """A coordinate polynomial with a double root must be refused."""
    from types import SimpleNamespace
    ws = make_workspace(*standard_case_m4())

    class Stub:
        pair = ws.pair

        def data(self, n):
            # (z - 1/3)^2 has a double root
            return SimpleNamespace(
                theta=[mpc(1) / 9, mpc(-2) / 3, mpc(1)],
                omega_at=lambda z: mpc(0))

        def singularities(self):
            return ws.singularities()

        def W(self):
            return ws.W()

        def V(self):
            return ws.V()

    with pytest.raises(MultipleRoot):
        coordinates_from_spectral(Stub(), 1, with_hamiltonians=False)
