"""Command-line harness: configuration, suite orchestration and reports.

Usage::

    qhtlab --suite all --config run.ini --out results/

The configuration is an INI file; every key is optional. Output files are
written with fixed formatting (``repr`` floats, sorted JSON keys, no
timestamps), so identical configurations give byte-identical output.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .oscillator import ModeParams
from .suites import SUITES

OUT_ENV = "QHTLAB_OUT"
SUITE_ORDER = ("car", "spectrum", "holonomy", "sobolev", "ccr", "continuity", "fock", "commutator-profile")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # lattice
    N: int = 8
    L: float = 1.0
    # gauge
    rep_dim: int = 2
    # sobolev
    tau1: float = 1.0
    sigma: float = 2.0
    basis_size: int = 60
    # modes
    tau2: float = 1.0
    s: str = "unit"
    K: int = 16
    # truncations
    bosonic_n: int = 1
    fermionic_n: int = 6
    k_max: int = 6
    car_modes: int = 12
    # quadrature (0: one node per Hermite level)
    quad_order: int = 0
    # spectrum
    spectrum_count: int = 8
    spectrum_sweep: bool = True
    # ccr / continuity
    ccr_omega: float = 0.4
    ccr_probes: int = 3
    ccr_tau1: float = 1e-2
    continuity_omega: float = 1.0
    # fock
    algebra: str = "global"
    # commutator profile
    profile_N: int = 8
    profile_tau1: float = 1.0
    profile_sigmas: tuple = (2.0, 3.0)
    profile_n_max: int = 4608
    # run
    seed: int = 0
    tolerance_scale: float = 1.0

    def __post_init__(self):
        checks = [
            (self.N >= 2, f"lattice N must be >= 2, got {self.N}"),
            (self.L > 0, f"lattice L must be positive, got {self.L}"),
            (self.rep_dim >= 2, f"gauge n must be >= 2, got {self.rep_dim}"),
            (self.tau1 > 0 and self.sigma > 0, "sobolev tau1 and sigma must be positive"),
            (self.basis_size >= 1, "sobolev size must be positive"),
            (self.tau2 > 0, "modes tau2 must be positive"),
            (self.K >= 2, f"modes K must be >= 2, got {self.K}"),
            (self.bosonic_n >= 1, "truncations bosonic_n must be >= 1"),
            (1 <= self.fermionic_n <= 12, "truncations fermionic_n must lie in 1..12"),
            (0 <= self.k_max <= 6, "truncations k_max must lie in 0..6"),
            (1 <= self.car_modes <= 12, "truncations car_modes must lie in 1..12"),
            (self.quad_order == 0 or self.quad_order >= self.K, "quadrature order must be 0 or >= modes K"),
            (self.spectrum_count >= 1, "spectrum count must be positive"),
            (self.ccr_probes >= 1, "ccr probes must be positive"),
            (self.algebra in ("global", "local"), f"fock algebra must be 'global' or 'local', got {self.algebra!r}"),
            (self.tolerance_scale > 0, "tolerance scale must be positive"),
            (all(v > 0 for v in self.profile_sigmas), "commutator sigmas must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        self.mode_params(self.bosonic_n + 1)

    def mode_params(self, n: int) -> ModeParams:
        """Oscillator parameters for ``n`` modes from the ``s`` setting."""
        try:
            if self.s in ("unit", "linear"):
                return ModeParams.preset(self.s, n, self.tau2, self.K)
            vals = tuple(float(v) for v in self.s.replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"modes s: {exc}") from None
        if len(vals) == 1:
            vals = vals * n
        if len(vals) < n:
            raise ConfigError(f"modes s lists {len(vals)} scales but {n} are needed (bosonic_n + 1)")
        try:
            return ModeParams(self.tau2, vals[:n], self.K)
        except ValueError as exc:
            raise ConfigError(f"modes s: {exc}") from None


# INI section/key -> config field.
_KEYS = {
    ("lattice", "n"): "N",
    ("lattice", "l"): "L",
    ("gauge", "n"): "rep_dim",
    ("sobolev", "tau1"): "tau1",
    ("sobolev", "sigma"): "sigma",
    ("sobolev", "size"): "basis_size",
    ("modes", "tau2"): "tau2",
    ("modes", "s"): "s",
    ("modes", "k"): "K",
    ("truncations", "bosonic_n"): "bosonic_n",
    ("truncations", "fermionic_n"): "fermionic_n",
    ("truncations", "k_max"): "k_max",
    ("truncations", "car_modes"): "car_modes",
    ("quadrature", "order"): "quad_order",
    ("spectrum", "count"): "spectrum_count",
    ("spectrum", "sweep"): "spectrum_sweep",
    ("ccr", "omega"): "ccr_omega",
    ("ccr", "probes"): "ccr_probes",
    ("ccr", "tau1"): "ccr_tau1",
    ("continuity", "omega"): "continuity_omega",
    ("fock", "algebra"): "algebra",
    ("commutator", "n"): "profile_N",
    ("commutator", "tau1"): "profile_tau1",
    ("commutator", "sigmas"): "profile_sigmas",
    ("commutator", "n_max"): "profile_n_max",
    ("run", "seed"): "seed",
    ("run", "tolerance_scale"): "tolerance_scale",
}
_OUTPUT_KEY = ("run", "out")


def _convert(name: str, raw: str):
    default = next(f.default for f in fields(ExperimentConfig) if f.name == name)
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(f"not a boolean: {raw!r}")
            return low in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.replace(",", " ").split())
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def load_config(path=None, **overrides) -> tuple[ExperimentConfig, str | None]:
    """Read an INI file; returns the config and the output directory it names (if any)."""
    values, out = {}, None
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        if not parser.read(path):
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            for key, raw in parser.items(section):
                if (section.lower(), key) == _OUTPUT_KEY:
                    out = raw.strip()
                    continue
                name = _KEYS.get((section.lower(), key))
                if name is None:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                values[name] = _convert(name, raw)
    values.update(overrides)
    return ExperimentConfig(**values), out


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_table(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        if header is None:
            fh.writelines(" ".join(_fmt(v) for v in row) + "\n" for row in rows)
            return
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([_fmt(v) for v in row] for row in rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def run(suite: str, cfg: ExperimentConfig, out_dir) -> dict:
    """Run one suite (or ``all``) and write its CSV files and ``summary.json``."""
    names = SUITE_ORDER if suite == "all" else (suite,)
    for name in names:
        if name not in SUITES:
            raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITE_ORDER + ('all',))}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"config": _jsonable({f.name: getattr(cfg, f.name) for f in fields(cfg)}), "suites": {}}
    for name in names:
        rng = np.random.default_rng([cfg.seed, SUITE_ORDER.index(name)])
        result = SUITES[name](cfg, rng)
        for fname, (header, rows) in result.tables.items():
            write_table(out / fname, header, rows)
        summary["suites"][name] = {"pass": result.passed, "records": _jsonable(result.records), "files": sorted(result.tables)}
    summary["pass"] = all(s["pass"] for s in summary["suites"].values())
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qhtlab", description="Verification suites for lattice holonomy-diffeomorphisms, translations and the Bott-Dirac operator")
    p.add_argument("--config", metavar="PATH", help="INI configuration file")
    p.add_argument("--out", metavar="DIR", help=f"output directory (default: ${OUT_ENV}, then [run] out, then ./qhtlab-out)")
    p.add_argument("--suite", metavar="NAME", default="all", help="one of: " + ", ".join(SUITE_ORDER + ("all",)))
    p.add_argument("--tolerance-scale", metavar="FLOAT", type=float, default=None, help="multiply every upper-bound tolerance")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {} if args.tolerance_scale is None else {"tolerance_scale": args.tolerance_scale}
    try:
        cfg, cfg_out = load_config(args.config, **overrides)
        out = args.out or os.environ.get(OUT_ENV) or cfg_out or "qhtlab-out"
        summary = run(args.suite, cfg, out)
    except (ConfigError, ValueError) as exc:
        print(f"qhtlab: error: {exc}", file=sys.stderr)
        return 2
    for name, s in summary["suites"].items():
        failed = [r["operation"] for r in s["records"] if not r["pass"]]
        status = "PASS" if s["pass"] else "FAIL (" + ", ".join(sorted(set(failed))) + ")"
        print(f"{name:20s} {status}")
    print(f"summary written to {Path(out) / 'summary.json'}")
    return 0 if summary["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
