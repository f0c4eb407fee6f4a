"""Run configuration: a YAML file drives every pipeline entry point.

Complex scalars are written as [re, im] pairs whose parts may be integers,
decimal floats or exact fraction strings ('3/8'); fractions survive exactly
into the weight data.  A minimal example:

    mode: formal
    precision_bits: 128
    tolerance: 1.0e-20
    n_max: 8
    seed: 1
    checks: [identities, bilinear, summation, oracle, tau]
    weight:
      placement: canonical
      singularities: [[0, 0], ["2/5", 0], [1, 0]]
      residues: [["1/3", 0], ["-1/2", 0], ["1/4", 0]]
    seeds:
      start: -1
      values: [[0.31, 0.17], [1, 0]]
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml
from mpmath import mpf

from .bops import ToeplitzOracle
from .errors import ConfigInvalid
from .moments import MomentSequence
from .mputil import to_mpc
from .spectral import SpectralWorkspace
from .weights import WeightData, build_poly_pair, build_weight

KNOWN_CHECKS = ("identities", "bilinear", "summation", "flow", "oracle", "tau")
MODES = ("formal", "quadrature", "rational")


@dataclass
class RunConfig:
    mode: str
    precision_bits: int
    tolerance: float
    n_max: int
    seed: int
    checks: list
    weight_placement: str
    weight_singularities: list
    weight_residues: list
    seed_start: int = -1
    seed_values: list = field(default_factory=list)
    out: str = ""

    def tolerance_mpf(self) -> mpf:
        return mpf(self.tolerance)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"malformed config: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigInvalid("config must be a mapping")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    mode = raw.get("mode", "formal")
    if mode not in MODES:
        raise ConfigInvalid(f"mode must be one of {MODES}, got {mode!r}")
    bits = raw.get("precision_bits", 128)
    if not isinstance(bits, int) or bits < 53:
        raise ConfigInvalid("precision_bits must be an integer >= 53")
    tol = raw.get("tolerance", 1e-20)
    if not isinstance(tol, (int, float)) or tol < 0:
        raise ConfigInvalid("tolerance must be a nonnegative number")
    n_max = raw.get("n_max", 8)
    if not isinstance(n_max, int) or n_max < 1:
        raise ConfigInvalid("n_max must be an integer >= 1")
    seed = raw.get("seed", 1)
    if not isinstance(seed, int):
        raise ConfigInvalid("seed must be an integer")
    checks = raw.get("checks", ["identities", "bilinear", "summation",
                                "oracle", "tau"])
    if not isinstance(checks, list) or \
            any(c not in KNOWN_CHECKS for c in checks):
        raise ConfigInvalid(f"checks must be a subset of {KNOWN_CHECKS}")
    wblock = raw.get("weight")
    if not isinstance(wblock, dict):
        raise ConfigInvalid("missing weight block")
    placement = wblock.get("placement", "canonical")
    sing = wblock.get("singularities")
    res = wblock.get("residues")
    if not isinstance(sing, list) or not isinstance(res, list) or \
            len(sing) != len(res) or len(sing) < 2:
        raise ConfigInvalid("weight needs matching singularity/residue lists")
    sblock = raw.get("seeds") or {}
    seed_start = sblock.get("start", -1)
    seed_values = sblock.get("values", [])
    if mode == "formal" and not seed_values:
        raise ConfigInvalid("formal mode needs seed moments")
    return RunConfig(mode=mode, precision_bits=bits, tolerance=float(tol),
                     n_max=n_max, seed=seed, checks=list(checks),
                     weight_placement=placement,
                     weight_singularities=sing, weight_residues=res,
                     seed_start=int(seed_start), seed_values=seed_values,
                     out=str(raw.get("out", "")))


def build_weight_from_config(cfg: RunConfig) -> WeightData:
    return build_weight(cfg.weight_singularities, cfg.weight_residues,
                        cfg.weight_placement)


def build_workspace(cfg: RunConfig) -> SpectralWorkspace:
    """Weight + moments + oracle assembled per the configured mode."""
    weight = build_weight_from_config(cfg)
    pair = build_poly_pair(weight)
    if cfg.mode == "formal":
        seeds = [to_mpc(v) for v in cfg.seed_values]
        ms = MomentSequence.from_seeds(pair, cfg.seed_start, seeds)
    elif cfg.mode == "rational":
        from .deform import rational_workspace
        return rational_workspace(weight)
    else:
        order = pair.M - 1 if not pair.W[0] else pair.M
        kmin = cfg.seed_start
        ms_quad = MomentSequence.from_quadrature(weight, kmin,
                                                 kmin + order - 1)
        ms = MomentSequence.from_seeds(
            pair, kmin, [ms_quad.w(k) for k in range(kmin, kmin + order)])
        ms.provenance = "quadrature"
    return SpectralWorkspace(ToeplitzOracle(ms), pair)
