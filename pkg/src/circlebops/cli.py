"""Command-line front end.

    circlebops --config run.yaml verify
    circlebops --config run.yaml moments --range -8:8 --out moments.json
    circlebops --config run.yaml bops --nmax 6 --out levels.json
    circlebops --config run.yaml spectral --nmax 6 --checks all --out spectral.json
    circlebops --config run.yaml garnier --nmax 4 [--flow-check] --out garnier.json
    circlebops --config run.yaml dgarnier --nmax 8 --compare-oracle --tau --out dg.json
    circlebops --config run.yaml sweep --param t1 --grid 0.2:0.8:13 --out sweep.csv

Exit codes: 0 all residuals below tolerance, 1 residual failure, 2 config
error, 3 singular or degenerate abort.
"""

from __future__ import annotations

import argparse
import sys
import time

import mpmath
from mpmath import mp, mpf

from . import jsonout
from .config import (RunConfig, build_weight_from_config, build_workspace,
                     load_config)
from .discrete_garnier import (dg_from_spectral, dg_initial, dg_trajectory,
                               tau_recovery)
from .errors import CircleBopsError, ConfigInvalid, SingularStep
from .garnier import coordinates_from_spectral, riemann_exponents
from .moments import build_U
from .mputil import working_precision
from .report import failures
from .spectral import residue_matrices, a_infinity
from .suites import run_verification
from .weights import build_weight, build_poly_pair

EXIT_OK = 0
EXIT_RESIDUAL = 1
EXIT_CONFIG = 2
EXIT_SINGULAR = 3

# quantities whose sign flips under a kappa gauge flip
GAUGE_DEPENDENT = ("kappa", "phi", "phibar", "theta", "thetastar", "eps")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="circlebops",
        description="bi-orthogonal systems on the unit circle: pipelines "
                    "and identity verification")
    ap.add_argument("--config", required=True, help="YAML run configuration")
    ap.add_argument("--precision", type=int, help="override precision bits")
    ap.add_argument("--tol", type=float, help="override relative tolerance")
    ap.add_argument("--seed", type=int, help="override sample-point seed")
    ap.add_argument("--out", help="override output path", default=None)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", dest="sub_out", default=None,
                        help="output path")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("verify", parents=[common],
                   help="run the configured check suites")

    p = sub.add_parser("moments", parents=[common],
                       help="emit a window of moments")
    p.add_argument("--range", default="-8:8",
                   help="kmin:kmax (use --range=-8:8 for negative bounds)")

    p = sub.add_parser("bops", parents=[common], help="emit level data")
    p.add_argument("--nmax", type=int, default=None)

    p = sub.add_parser("spectral", parents=[common],
                       help="emit spectral data and residuals")
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--checks", default="all")

    p = sub.add_parser("garnier", parents=[common],
                       help="emit canonical coordinates")
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--flow-check", action="store_true")

    p = sub.add_parser("dgarnier", parents=[common],
                       help="iterate the coupled recurrences")
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--compare-oracle", action="store_true")
    p.add_argument("--tau", action="store_true")

    p = sub.add_parser("sweep", parents=[common],
                       help="vary one parameter, record first singular level")
    p.add_argument("--param", required=True,
                   help="t<j> or rho<j> (j indexes singularities)")
    p.add_argument("--grid", required=True, help="start:stop:count (real)")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.precision is not None:
            if args.precision < 53:
                raise ConfigInvalid("precision below 53 bits")
            cfg.precision_bits = args.precision
        if args.tol is not None:
            cfg.tolerance = args.tol
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out:
            cfg.out = args.out
        if getattr(args, "sub_out", None):
            cfg.out = args.sub_out
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with working_precision(cfg.precision_bits):
            return _dispatch(args, cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularStep as exc:
        print(f"singular abort: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except CircleBopsError as exc:
        print(f"degenerate abort: {exc}", file=sys.stderr)
        return EXIT_SINGULAR


def _out_path(cfg: RunConfig, default: str) -> str:
    return cfg.out if cfg.out else default


def _emit(payload: dict, path: str, started: float) -> None:
    # timing lives beside the numeric payload; comparisons strip it
    payload = dict(payload)
    payload["timing_s"] = round(time.time() - started, 6)
    jsonout.dump(payload, path)
    print(f"wrote {path} ({payload['timing_s']:.2f}s)")


def _dispatch(args, cfg: RunConfig) -> int:
    started = time.time()
    cmd = args.command
    if cmd == "verify":
        return _cmd_verify(cfg, started)
    if cmd == "moments":
        return _cmd_moments(cfg, args, started)
    if cmd == "bops":
        return _cmd_bops(cfg, args, started)
    if cmd == "spectral":
        return _cmd_spectral(cfg, args, started)
    if cmd == "garnier":
        return _cmd_garnier(cfg, args, started)
    if cmd == "dgarnier":
        return _cmd_dgarnier(cfg, args, started)
    if cmd == "sweep":
        return _cmd_sweep(cfg, args, started)
    raise ConfigInvalid(f"unknown command {cmd!r}")


def _cmd_verify(cfg: RunConfig, started: float) -> int:
    if not cfg.checks:
        raise ConfigInvalid("verify needs a nonempty checks list")
    if "flow" in cfg.checks and cfg.mode != "rational":
        raise ConfigInvalid("flow checks need mode: rational "
                            "(a closed-form deformation family)")
    ws = build_workspace(cfg)
    weight = ws.pair.weight
    tol = cfg.tolerance_mpf()
    results = run_verification(ws, cfg.checks, cfg.n_max, tol,
                               seed=cfg.seed, weight=weight)
    for r in results:
        status = "pass" if r.passed else "FAIL"
        level = f" n={r.n}" if r.n is not None else ""
        print(f"[{status}] {r.label}{level}: {mpmath.nstr(r.residual, 6)}"
              f" < {mpmath.nstr(r.tol, 3)}")
    bad = failures(results)
    payload = {
        "checks": [jsonout.check_field(r) for r in results],
        "summary": {"total": len(results), "failed": len(bad),
                    "tolerance": jsonout.real_field(tol),
                    "n_max": cfg.n_max, "mode": cfg.mode,
                    "precision_bits": cfg.precision_bits},
    }
    path = _out_path(cfg, "verify.json")
    _emit(payload, path, started)
    print(f"{len(results) - len(bad)}/{len(results)} checks passed")
    return EXIT_OK if not bad else EXIT_RESIDUAL


def _cmd_moments(cfg: RunConfig, args, started: float) -> int:
    try:
        lo, hi = (int(x) for x in args.range.split(":"))
    except ValueError as exc:
        raise ConfigInvalid(f"bad --range {args.range!r}") from exc
    ws = build_workspace(cfg)
    ms = ws.oracle.moments
    ms.extend(lo, hi)
    rows = []
    for k in range(lo, hi + 1):
        entry = {"k": k}
        entry.update(jsonout.complex_field(ms.w(k)))
        in_window = k - ms.pair.M >= ms.k_min and k <= ms.k_max
        entry["residual"] = (jsonout.real_field(ms.equation_residual(k))
                             if in_window else jsonout.real_field(0))
        rows.append(entry)
    _emit({"moments": rows, "provenance": ms.provenance},
          _out_path(cfg, "moments.json"), started)
    return EXIT_OK


def _cmd_bops(cfg: RunConfig, args, started: float) -> int:
    nmax = args.nmax if args.nmax is not None else cfg.n_max
    ws = build_workspace(cfg)
    o = ws.oracle
    tol = cfg.tolerance_mpf()
    levels = []
    for n in range(nmax + 1):
        lev = o.level(n)
        rec = {
            "n": n, "I": jsonout.complex_field(lev.I),
            "kappa": jsonout.complex_field(lev.kappa),
            "gauge": lev.gauge,
            "r": jsonout.complex_field(lev.r),
            "rbar": jsonout.complex_field(lev.rbar),
            "lambda": jsonout.complex_field(lev.lam),
            "lambdabar": jsonout.complex_field(lev.lambar),
            "mu": jsonout.complex_field(lev.mu),
            "mubar": jsonout.complex_field(lev.mubar),
            "nu": jsonout.complex_field(lev.nu),
            "nubar": jsonout.complex_field(lev.nubar),
            "phi": jsonout.complex_list(lev.phi),
            "phibar": jsonout.complex_list(lev.phibar),
            "gauge_dependent_fields": list(GAUGE_DEPENDENT),
        }
        if n >= 1:
            prev = o.level(n - 1)
            i0 = o.det(n + 1) * o.det(n - 1) / o.det(n) ** 2 - \
                (1 - lev.r * lev.rbar)
            rec["residual_I0"] = jsonout.real_field(abs(i0))
            lres = lev.kappa ** 2 - prev.kappa ** 2 - lev.phi0 * lev.phibar0
            rec["residual_l"] = jsonout.real_field(abs(lres))
        levels.append(rec)
    _emit({"levels": levels, "tolerance": jsonout.real_field(tol)},
          _out_path(cfg, "levels.json"), started)
    return EXIT_OK


def _cmd_spectral(cfg: RunConfig, args, started: float) -> int:
    nmax = args.nmax if args.nmax is not None else cfg.n_max
    ws = build_workspace(cfg)
    tol = cfg.tolerance_mpf()
    which = args.checks
    records = []
    results = []
    for n in range(nmax + 1):
        sd = ws.data(n)
        mats = residue_matrices(ws, n)
        rec = {
            "n": n,
            "theta": jsonout.complex_list(sd.theta),
            "omega": jsonout.complex_list(sd.omega),
            "thetastar": jsonout.complex_list(sd.thetastar),
            "omegastar": jsonout.complex_list(sd.omegastar),
            "band_residual": jsonout.real_field(sd.band_residual),
            "residues": [jsonout.matrix_field(m) for m in mats],
            "residue_infinity": jsonout.matrix_field(a_infinity(mats)),
        }
        records.append(rec)
    if which in ("all", "identities"):
        results = run_verification(ws, ["identities", "bilinear", "summation"],
                                   nmax, tol, seed=cfg.seed)
    payload = {"levels": records,
               "residuals": [jsonout.check_field(r) for r in results]}
    _emit(payload, _out_path(cfg, "spectral.json"), started)
    return EXIT_OK if all(r.passed for r in results) else EXIT_RESIDUAL


def _cmd_garnier(cfg: RunConfig, args, started: float) -> int:
    nmax = args.nmax if args.nmax is not None else cfg.n_max
    ws = build_workspace(cfg)
    tol = cfg.tolerance_mpf()
    recs = []
    flow_results = []
    for n in range(nmax + 1):
        pt = coordinates_from_spectral(ws, n)
        info = riemann_exponents(ws, n)
        recs.append({
            "n": n,
            "q": jsonout.complex_list(pt.q),
            "p": jsonout.complex_list(pt.p),
            "K": jsonout.complex_list(pt.K),
            "theta_inf": jsonout.complex_field(pt.theta_inf),
            "exponents": {
                "origin": jsonout.complex_field(info["exponents"]["origin"]),
                "one": jsonout.complex_field(info["exponents"]["one"]),
                "free": jsonout.complex_list(info["exponents"]["free"]),
                "infinity": jsonout.complex_field(
                    info["exponents"]["infinity"]),
            },
            "accessory": jsonout.complex_field(info["accessory"]),
        })
    if args.flow_check:
        if cfg.mode != "rational":
            raise ConfigInvalid("--flow-check needs mode: rational")
        from .suites import flow_suite
        flow_results = flow_suite(ws.pair.weight, max(1, min(nmax, 3)),
                                  mpf(10) ** (-(mp.prec // 8)))
    payload = {"levels": recs,
               "flow": [jsonout.check_field(r) for r in flow_results]}
    _emit(payload, _out_path(cfg, "garnier.json"), started)
    return EXIT_OK if all(r.passed for r in flow_results) else EXIT_RESIDUAL


def _cmd_dgarnier(cfg: RunConfig, args, started: float) -> int:
    nmax = args.nmax if args.nmax is not None else cfg.n_max
    ws = build_workspace(cfg)
    pair = ws.pair
    ms = ws.oracle.moments
    tol = cfg.tolerance_mpf()
    singular_report = None
    try:
        st0 = dg_initial(pair, build_U(pair, ms), ms)
        traj = dg_trajectory(st0, pair, nmax)
    except SingularStep as exc:
        singular_report = {"index": exc.index, "factor": exc.factor,
                           "message": str(exc)}
        traj = []
    recs = []
    worst = mpf(0)
    for st in traj:
        rec = {"n": st.n,
               "f": jsonout.complex_list(st.f),
               "omega": jsonout.complex_list(st.omega)}
        if args.compare_oracle:
            oracle_state = dg_from_spectral(ws, st.n)
            scale = max(max(abs(x) for x in oracle_state.f),
                        max(abs(x) for x in oracle_state.omega), mpf(1))
            delta = max(
                max(abs(a - b) for a, b in zip(st.f, oracle_state.f)),
                max(abs(a - b) for a, b in zip(st.omega, oracle_state.omega))) / scale
            rec["oracle_delta"] = jsonout.real_field(delta)
            worst = max(worst, delta)
        recs.append(rec)
    payload = {"levels": recs, "singular": singular_report}
    if args.compare_oracle:
        payload["max_oracle_delta"] = jsonout.real_field(worst)
    if args.tau and traj:
        rec = tau_recovery(traj, pair, ms)
        tau_rows = []
        worst_tau = mpf(0)
        for n in range(min(nmax, len(rec["I"]) - 1) + 1):
            In = ws.oracle.det(n)
            delta = abs(rec["I"][n] - In) / max(abs(In), mpf(1e-30))
            worst_tau = max(worst_tau, delta)
            row = {"n": n, "delta": jsonout.real_field(delta)}
            row.update(jsonout.complex_field(rec["I"][n]))
            tau_rows.append(row)
        payload["tau"] = {"I": tau_rows,
                          "lambda_paths": jsonout.real_field(
                              rec["lambda_delta"]),
                          "max_delta": jsonout.real_field(worst_tau)}
    _emit(payload, _out_path(cfg, "dg.json"), started)
    if singular_report is not None:
        return EXIT_SINGULAR
    ok = (not args.compare_oracle) or worst < tol
    return EXIT_OK if ok else EXIT_RESIDUAL


def _parse_param(param: str, weight):
    if param.startswith("rho"):
        idx = int(param[3:])
        return "rho", idx
    if param.startswith("t"):
        idx = int(param[1:])
        if not 1 <= idx <= weight.M - 2:
            raise ConfigInvalid(f"t index out of range in {param!r}")
        return "t", idx
    raise ConfigInvalid(f"cannot parse sweep parameter {param!r}")


def _cmd_sweep(cfg: RunConfig, args, started: float) -> int:
    try:
        a, b, count = args.grid.split(":")
        a, b, count = float(a), float(b), int(count)
    except ValueError as exc:
        raise ConfigInvalid(f"bad --grid {args.grid!r}") from exc
    if count < 1:
        raise ConfigInvalid("grid count must be >= 1")
    base = build_weight_from_config(cfg)
    kind, idx = _parse_param(args.param, base)
    rows = []
    from .discrete_garnier import dg_step
    from .moments import MomentSequence
    from .mputil import to_mpc
    for i in range(count):
        val = a + (b - a) * i / max(count - 1, 1)
        sing = [list(map(str, (s.re, s.im))) for s in base.singularities]
        res = [list(map(str, (r.re, r.im))) for r in base.residues]
        if kind == "t":
            sing[idx] = [repr(val), "0"]
        else:
            res[idx] = [repr(val), "0"]
        try:
            weight = build_weight(sing, res, base.placement)
            pair = build_poly_pair(weight)
            seeds = [to_mpc(v) for v in cfg.seed_values]
            ms = MomentSequence.from_seeds(pair, cfg.seed_start, seeds)
            st = dg_initial(pair, build_U(pair, ms), ms)
            first_singular = -1
            while st.n < cfg.n_max:
                st = dg_step(st, pair)
        except SingularStep as exc:
            first_singular = exc.index if exc.index is not None else -2
        except CircleBopsError:
            first_singular = -2
        rows.append((val, first_singular))
    path = _out_path(cfg, "sweep.csv")
    with open(path, "w") as fh:
        fh.write(f"{args.param}, first_singular_n\n")
        for val, fs in rows:
            fh.write(f"{val!r}, {fs}\n")
    print(f"wrote {path} ({time.time() - started:.2f}s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
