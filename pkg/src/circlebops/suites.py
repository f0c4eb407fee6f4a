"""Named verification suites over one workspace.

Each suite walks a level range and returns CheckResults tagged with the
identity codes the CLI report and the acceptance tests print.  Level ranges
are chosen so that nothing above ``n_max + 2`` determinant levels is ever
required.
"""

from __future__ import annotations

from mpmath import mp, mpf

from .bops import casoratian_residuals
from .discrete_garnier import (dg_from_spectral, dg_hamiltonian_residuals,
                               dg_initial, dg_trajectory, tau_recovery)
from .garnier import (coordinates_from_spectral, hamilton_equations_check,
                      hamiltonian_from_residues, omega_rep_residual,
                      v2_rep_residual, w_rep_residual)
from .moments import build_U
from .report import CheckResult
from .spectral import (SpectralWorkspace, check_bilinear,
                       check_linear_recurrences, check_summation_identities,
                       check_transitions, p2_asymptotic_constant,
                       residue_structure_checks, scalar_ode_residuals)


def toeplitz_suite(ws: SpectralWorkspace, n_max: int, tol) -> list:
    """Determinant-ratio and coefficient-difference identities, level by level."""
    out = []
    o = ws.oracle
    for n in range(1, n_max + 1):
        lev, prev = o.level(n), o.level(n - 1)
        lhs = o.det(n + 1) * o.det(n - 1) / o.det(n) ** 2
        rhs = 1 - lev.r * lev.rbar
        out.append(CheckResult.make(
            "I0", abs(lhs - rhs) / max(abs(lhs), abs(rhs), mpf(1)), tol, n))
        terms = [lev.kappa ** 2, -prev.kappa ** 2, -lev.phi0 * lev.phibar0]
        scale = max(abs(t) for t in terms)
        out.append(CheckResult.make("l:kappa", abs(sum(terms)) / scale, tol, n))
        terms = [lev.lam, -prev.lam, -lev.r * prev.rbar]
        scale = max(max(abs(t) for t in terms), mpf(1))
        out.append(CheckResult.make("l:lambda", abs(sum(terms)) / scale, tol, n))
    return out


def casoratian_suite(ws: SpectralWorkspace, n_max: int, tol) -> list:
    out = []
    for n in range(0, n_max + 1):
        for label, resid in casoratian_residuals(ws.oracle, n).items():
            out.append(CheckResult.make(label, resid, tol, n))
    return out


def degree_suite(ws: SpectralWorkspace, n_max: int, tol) -> list:
    """The out-of-band series mass of every extraction (degree bounds)."""
    return [CheckResult.make("degree", ws.data(n).band_residual, tol, n,
                             note="out-of-band series mass")
            for n in range(0, n_max + 1)]


def endpoint_suite(ws: SpectralWorkspace, n_max: int, tol) -> list:
    """Leading and trailing coefficients of all four spectral polynomials
    against their closed forms in the canonical placement."""
    out = []
    pair = ws.pair
    N = pair.N
    e = pair.e_mpc()
    m = pair.m_mpc()
    m0 = m[0]
    rho0 = ws.residues()[0]
    sgn = mpf((-1) ** N)
    for n in range(0, n_max + 1):
        sd = ws.data(n)
        l0, l1 = ws.level(n), ws.level(n + 1)
        kk = l0.kappa / l1.kappa
        pairs = [
            ("Thexp:lead", sd.theta[-1], (n + 1 + m0) * kk),
            ("Thexp:trail", sd.theta[0],
             sgn * e[N + 1] * (n - rho0) * (l0.r / l1.r) * kk),
            ("ThSexp:lead", sd.thetastar[-1],
             -(n + m0) * (l0.rbar / l1.rbar) * kk),
            ("ThSexp:trail", sd.thetastar[0],
             -sgn * e[N + 1] * (n + 1 - rho0) * kk),
            ("Omexp:lead", sd.omega[-1], 1 + m0 / 2),
            ("Omexp:trail", sd.omega[0], sgn * (n * e[N + 1] - m[N + 1] / 2)),
            ("OmSexp:lead", sd.omegastar[-1], -m0 / 2),
            ("OmSexp:trail", sd.omegastar[0],
             -sgn * (m[N + 1] / 2 + (n + 1 - rho0) * e[N + 1])),
        ]
        for label, got, want in pairs:
            scale = max(abs(got), abs(want), mpf(1))
            out.append(CheckResult.make(label, abs(got - want) / scale, tol, n))
    return out


def lattice_suite(ws: SpectralWorkspace, n_max: int, tol, seed: int = 23) -> list:
    """Linear recurrences and transition identities."""
    out = []
    for n in range(1, n_max + 1):
        out.extend(check_linear_recurrences(ws, n, tol))
    for n in range(0, n_max + 1):
        out.extend(check_transitions(ws, n, tol, seed=seed))
    for n in range(0, n_max + 1):
        out.extend(residue_structure_checks(ws, n, tol))
    return out


def bilinear_suite(ws: SpectralWorkspace, n_max: int, tol) -> list:
    out = []
    for n in range(0, n_max + 1):
        out.extend(check_bilinear(ws, n, tol))
    return out


def summation_suite(ws: SpectralWorkspace, n_max: int, tol) -> list:
    out = []
    for n in range(0, n_max + 1):
        point = coordinates_from_spectral(ws, n, with_hamiltonians=False)
        out.extend(check_summation_identities(ws, n, tol, garnier_point=point))
    return out


def ode_suite(ws: SpectralWorkspace, n_max: int, tol, seed: int = 41) -> list:
    out = []
    m0 = ws.pair.m_mpc()[0]
    for n in range(0, n_max + 1):
        out.extend(scalar_ode_residuals(ws, n, tol, seed=seed))
        got = p2_asymptotic_constant(ws, n)
        want = -mpf(n) * (1 + m0)
        scale = max(abs(want), mpf(1))
        out.append(CheckResult.make("2ODE:p2asym", abs(got - want) / scale,
                                    tol, n))
    return out


def garnier_suite(ws: SpectralWorkspace, n_max: int, tol) -> list:
    """Coordinate extraction, reconstructions, Hamiltonian dual route."""
    out = []
    for n in range(0, n_max + 1):
        point = coordinates_from_spectral(ws, n)
        out.append(CheckResult.make("OmegaRep", omega_rep_residual(ws, n, point),
                                    tol, n))
        out.append(CheckResult.make("2VRep", v2_rep_residual(ws, n, point),
                                    tol, n))
        out.append(CheckResult.make("WRep", w_rep_residual(ws, n, point),
                                    tol, n))
        dual = hamiltonian_from_residues(ws, n, point)
        worst = mpf(0)
        for a, b in zip(point.K, dual):
            worst = max(worst, abs(a - b) / max(abs(a), abs(b), mpf(1)))
        out.append(CheckResult.make("Ham:dual", worst, tol, n))
    return out


def oracle_suite(ws: SpectralWorkspace, n_max: int, tol) -> list:
    """Trajectory of the coupled recurrences against spectral values."""
    pair = ws.pair
    ms = ws.oracle.moments
    st0 = dg_initial(pair, build_U(pair, ms), ms)
    out = []
    spec0 = dg_from_spectral(ws, 0)
    d0 = _state_delta(st0, spec0)
    out.append(CheckResult.make("dGarnier:init", d0, tol, 0))
    traj = dg_trajectory(st0, pair, n_max)
    for st in traj[1:]:
        oracle_state = dg_from_spectral(ws, st.n)
        out.append(CheckResult.make("dGarnier:ab", _state_delta(st, oracle_state),
                                    tol, st.n))
    hres = dg_hamiltonian_residuals(ws, max(1, n_max // 2))
    out.append(CheckResult.make("dGarnier:ham", hres["advanced"], tol,
                                max(1, n_max // 2),
                                note="advanced-level roots"))
    return out


def _state_delta(a, b) -> mpf:
    scale = max(max(abs(x) for x in b.f), max(abs(x) for x in b.omega), mpf(1))
    return max(max(abs(x - y) for x, y in zip(a.f, b.f)),
               max(abs(x - y) for x, y in zip(a.omega, b.omega))) / scale


def tau_suite(ws: SpectralWorkspace, n_max: int, tol) -> list:
    pair = ws.pair
    ms = ws.oracle.moments
    st0 = dg_initial(pair, build_U(pair, ms), ms)
    traj = dg_trajectory(st0, pair, n_max + 2)
    rec = tau_recovery(traj, pair, ms)
    out = [CheckResult.make("tau:lambda-paths", rec["lambda_delta"], tol,
                            note="two recovery recurrences"),
           CheckResult.make("tau:rbar0", rec["rbar0_defect"], tol)]
    worst = mpf(0)
    top = min(n_max, len(rec["I"]) - 1)
    for n in range(top + 1):
        In = ws.oracle.det(n)
        worst = max(worst, abs(rec["I"][n] - In) / max(abs(In), mpf(1e-30)))
    out.append(CheckResult.make("tau:I", worst, tol, top,
                                note=f"levels 0..{top}"))
    return out


def flow_suite(weight, n: int, tol, directions=None) -> list:
    """Deformation and flow checks; needs a closed-form moment family."""
    from .deform import (deformation_residuals, hamilton_flow_pipeline_check,
                         rational_workspace)
    from .exact import QC
    ws = rational_workspace(weight)
    N = ws.pair.N
    out = []
    zdot = [QC(0)] * weight.M
    zdot[1] = QC(1)
    out.extend(deformation_residuals(weight, zdot, n, tol=tol))
    for j in range(1, N + 1):
        out.extend(hamilton_flow_pipeline_check(weight, n, j, tol=tol))
    point = coordinates_from_spectral(ws, n)
    out.extend(hamilton_equations_check(ws, n, point, tol=tol))
    return out


SUITE_BUILDERS = {
    "identities": lambda ws, nmax, tol, seed: (
        toeplitz_suite(ws, nmax, tol) + casoratian_suite(ws, min(nmax, 8), tol)
        + degree_suite(ws, nmax, tol) + endpoint_suite(ws, nmax, tol)
        + lattice_suite(ws, nmax, tol, seed) + ode_suite(ws, min(nmax, 6), tol, seed)),
    "bilinear": lambda ws, nmax, tol, seed: bilinear_suite(ws, nmax, tol),
    "summation": lambda ws, nmax, tol, seed: (
        summation_suite(ws, nmax, tol) + garnier_suite(ws, nmax, tol)),
    "oracle": lambda ws, nmax, tol, seed: oracle_suite(ws, nmax, tol),
    "tau": lambda ws, nmax, tol, seed: tau_suite(ws, nmax, tol),
}


def run_verification(ws: SpectralWorkspace, checks, n_max: int, tol,
                     seed: int = 1, weight=None) -> list:
    results = []
    for name in checks:
        if name == "flow":
            if weight is None:
                raise ValueError("flow checks need the weight data")
            results.extend(flow_suite(weight, max(1, min(n_max, 3)),
                                      mpf(10) ** (-(mp.prec // 8))))
            continue
        builder = SUITE_BUILDERS[name]
        results.extend(builder(ws, n_max, tol, seed))
    return results
