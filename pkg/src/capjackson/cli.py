"""Command-line front end: configure, run a pipeline, write CSV/JSON artifacts.

Exit status: 0 when every gated check passes, 1 on a failed check,
2 on a configuration error, 3 on numerical non-convergence (including
expansions whose coefficients have not decayed by j_max).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import analysis
from .corpus import BAND_COEFFICIENTS, band_limited_expansion, bump, degree_component
from .harmonic import CapGeometry, expand
from .kernel import kernel_moment, kernel_normalize
from .operators import cached_multiplier_table
from .quadrature import ConvergenceError

log = logging.getLogger("capjackson")

COMMANDS = ("multipliers", "moments", "approx", "probe-direct", "probe-converse",
            "probe-saturation", "probe-equivalence")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
MOMENT_TOL = 0.15
XI0_TOL = 1e-9
XI_BOUND_TOL = 1e-12


class ConfigError(ValueError):
    pass


class TruncationError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    n: int = 3
    gamma: float = math.pi / 2
    s: int = 3
    m: int | None = None
    k_list: list = field(default_factory=lambda: [16, 32, 64, 128, 256])
    j_max: int = 768
    p: str = "2"
    bump_rhos: list = field(default_factory=lambda: [math.pi / 4, 3 * math.pi / 8])
    band_coefficients: list = field(default_factory=lambda: list(BAND_COEFFICIENTS))
    degrees: list = field(default_factory=list)
    betas: list = field(default_factory=lambda: [1, 2, 3])
    v_max_factor: int = 4
    tol: float = 1e-10
    out: str = "out"
    format: str = "csv"
    workers: int = 1

    def validate(self, command: str | None = None) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(isinstance(self.n, int) and self.n >= 3, "n must be an integer >= 3")
        need(0 < self.gamma <= math.pi / 2 + 1e-15, "gamma must lie in (0, pi/2]")
        need(isinstance(self.s, int) and self.s >= 1, "s must be a positive integer")
        need(self.m is None or (isinstance(self.m, int) and self.m >= 1), "m must be a positive integer")
        need(len(self.k_list) >= 1 and all(isinstance(k, int) and k >= 1 for k in self.k_list),
             "k_list must hold positive integers")
        need(isinstance(self.j_max, int) and self.j_max >= 1, "j_max must be a positive integer")
        need(self.p in ("1", "2", "inf"), "p must be one of 1, 2, inf")
        need(all(0 < r <= self.gamma for r in self.bump_rhos), "bump radii must lie in (0, gamma]")
        need(all(isinstance(j, int) and j >= 1 for j in self.degrees), "degrees must be integers >= 1")
        need(all(b >= -2 for b in self.betas), "moment exponents must be >= -2")
        need(isinstance(self.v_max_factor, int) and self.v_max_factor >= 1, "v_max_factor must be >= 1")
        need(self.tol > 0, "tol must be positive")
        need(self.format in ("csv", "json"), "format must be csv or json")
        need(isinstance(self.workers, int) and self.workers >= 1, "workers must be >= 1")
        if command is not None:
            need(command in COMMANDS, f"unknown command {command!r}")
            if command.startswith("probe") or command == "moments":
                need(len(self.k_list) >= 3, "fits need at least 3 values of k")
            if command == "probe-converse":
                thr = analysis.converse_threshold(self.n)
                need(self.m_for(command) > thr, f"probe-converse needs m > {thr:g} for n = {self.n}")

    def m_for(self, command: str) -> int:
        if self.m is not None:
            return self.m
        return 9 if command == "probe-converse" else 1

    @property
    def p_value(self):
        return math.inf if self.p == "inf" else int(self.p)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.p = str(cfg.p)
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def geometry(self) -> CapGeometry:
        return CapGeometry.north(self.n, self.gamma)

    def corpus_names(self) -> list:
        names = [f"bump_rho{r:.6f}" for r in self.bump_rhos]
        if self.band_coefficients:
            names.append("band_limited")
        names += [f"degree_{j}" for j in self.degrees]
        return names

    def corpus_entry(self, name: str):
        geom = self.geometry()
        if name.startswith("bump_rho"):
            rho = self.bump_rhos[[f"bump_rho{r:.6f}" for r in self.bump_rhos].index(name)]
            return bump(geom, rho)
        if name == "band_limited":
            return band_limited_expansion(geom, self.band_coefficients)
        if name.startswith("degree_"):
            return degree_component(geom, int(name.split("_")[1]))
        raise ConfigError(f"unknown corpus entry {name}")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


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
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


class ArtifactWriter:
    """Stages artifacts in memory; commit() writes each to a temp name and renames."""

    def __init__(self, out: Path):
        self.out = out
        self.staged: dict[str, tuple[str, dict]] = {}

    def add(self, name: str, text: str, parameters: dict):
        self.staged[name] = (text, parameters)

    def add_json(self, name: str, obj, parameters: dict):
        self.add(name, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", parameters)

    def commit(self, command: str, config: ExperimentConfig):
        self.out.mkdir(parents=True, exist_ok=True)
        manifest = {
            "command": command,
            "config": json.loads(config.to_json()),
            "artifacts": [{"file": k, "parameters": _jsonable(v[1])} for k, v in sorted(self.staged.items())],
        }
        self.add_json(f"manifest_{command}.json", manifest, {})
        for name, (text, _) in sorted(self.staged.items()):
            fd, tmp = tempfile.mkstemp(dir=self.out, prefix=f".{name}.", suffix=".tmp")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, self.out / name)


def _check_decay(cfg: ExperimentConfig, name: str, f):
    if name.startswith("bump"):
        e = expand(f, cfg.j_max, warn=False)
        if e.insufficient:
            raise TruncationError(
                f"{name}: coefficients not below 1e-10 of peak at j_max = {cfg.j_max} "
                f"(expansion decay invariant); raise --jmax")
        return e
    return f


def _run_multipliers(cfg, writer):
    geom = cfg.geometry()
    m = cfg.m_for("multipliers")
    ok = True
    msgs = []
    for k in cfg.k_list:
        tab = cached_multiplier_table(k, cfg.s, geom.gamma, cfg.n, m, cfg.j_max, cfg.tol)
        params = {"k": k, "s": cfg.s, "m": m, "gamma": cfg.gamma, "n": cfg.n, "j_max": cfg.j_max}
        stem = f"multipliers_n{cfg.n}_k{k}_s{cfg.s}_m{m}_g{cfg.gamma:.6f}"
        if cfg.format == "csv":
            writer.add(stem + ".csv", csv_text(["j", "xi"], tab.rows()), params)
        else:
            writer.add_json(stem + ".json", {"parameters": params, "j": list(range(tab.j_max + 1)),
                                             "xi": tab.values.tolist()}, params)
        if abs(tab.values[0] - 1.0) > XI0_TOL:
            ok = False
            msgs.append(f"k={k}: xi(0) = {tab.values[0]!r} violates |xi(0) - 1| <= {XI0_TOL}")
        if np.max(np.abs(tab.values)) > 1.0 + XI_BOUND_TOL:
            ok = False
            msgs.append(f"k={k}: max |xi| = {np.max(np.abs(tab.values))!r} exceeds 1 + {XI_BOUND_TOL}")
    return ok, msgs


def _run_moments(cfg, writer):
    lam = (cfg.n - 2) / 2.0
    rows, summary, ok, msgs = [], [], True, []
    specs = {k: kernel_normalize(k, cfg.s, cfg.gamma, lam, cfg.tol) for k in cfg.k_list}
    for beta in cfg.betas:
        vals = [kernel_moment(specs[k], beta, cfg.tol) for k in cfg.k_list]
        rows += [(beta, k, v) for k, v in zip(cfg.k_list, vals)]
        rep = analysis.fit_order(list(zip(cfg.k_list, vals)))
        passed = abs(rep.slope + beta) <= MOMENT_TOL
        summary.append({"name": f"moment_beta{beta}", "slope": rep.slope, "r_squared": rep.r_squared,
                        "pass": passed, "tolerance": MOMENT_TOL,
                        "parameters": {"beta": beta, "s": cfg.s, "n": cfg.n, "gamma": cfg.gamma,
                                       "k_list": cfg.k_list}})
        if not passed:
            ok = False
            msgs.append(f"moment beta={beta}: slope {rep.slope:.4f} not within {MOMENT_TOL} of {-beta}")
    params = {"s": cfg.s, "n": cfg.n, "gamma": cfg.gamma, "k_list": cfg.k_list, "betas": cfg.betas}
    if cfg.format == "csv":
        writer.add("moments.csv", csv_text(["beta", "k", "value"], rows), params)
    writer.add_json("moments.json", summary, params)
    return ok, msgs


PROBES = {
    "probe-direct": analysis.probe_direct,
    "probe-converse": analysis.probe_converse,
    "probe-saturation": analysis.probe_saturation,
    "probe-equivalence": analysis.probe_equivalence,
}


def run_cell(cfg_dict: dict, command: str, name: str):
    """One (command, corpus entry) cell; module-level so worker processes can run it."""
    cfg = ExperimentConfig.from_dict(cfg_dict)
    f = _check_decay(cfg, name, cfg.corpus_entry(name))
    m = cfg.m_for(command)
    p = cfg.p_value
    if command == "approx":
        errs = analysis.approximation_errors(f, cfg.k_list, cfg.s, m, p, cfg.j_max, cfg.tol)
        mods = analysis.moduli_at(f, [1.0 / k for k in cfg.k_list], p, cfg.j_max)
        rows = [(k, e, md, e / md if md > 0 else float("nan")) for k, e, md in zip(cfg.k_list, errs, mods)]
        return {"kind": "approx", "rows": rows}
    kwargs = dict(ks=cfg.k_list, s=cfg.s, m=m, p=p, j_max=cfg.j_max, name=f"{command}:{name}")
    if command == "probe-converse":
        kwargs["v_max_factor"] = cfg.v_max_factor
    res = PROBES[command](f, **kwargs)
    return {"kind": "probe", "result": res}


def _run_corpus(cfg, command, writer):
    names = cfg.corpus_names()
    cfg_dict = asdict(cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            futures = {nm: pool.submit(run_cell, cfg_dict, command, nm) for nm in names}
            results = {nm: futures[nm].result() for nm in names}
    else:
        results = {nm: run_cell(cfg_dict, command, nm) for nm in names}
    ok, msgs, summaries = True, [], []
    base = {"s": cfg.s, "m": cfg.m_for(command), "n": cfg.n, "gamma": cfg.gamma, "p": cfg.p,
            "j_max": cfg.j_max, "k_list": cfg.k_list}
    for nm in names:
        out = results[nm]
        params = dict(base, function=nm)
        if out["kind"] == "approx":
            header = ["k", "error", "modulus", "ratio"]
            if cfg.format == "csv":
                writer.add(f"errors_{nm}.csv", csv_text(header, out["rows"]), params)
            else:
                writer.add_json(f"errors_{nm}.json", {"columns": header, "rows": out["rows"]}, params)
            continue
        res: analysis.ProbeResult = out["result"]
        stem = f"{command.replace('-', '_')}_{nm}"
        if cfg.format == "csv" and res.rows:
            extra = [c for c in res.rows[0] if c not in ("k", "ratio")]
            first = "error" if "error" in res.rows[0] else extra[0]
            extra.remove(first)
            header = ["k", "value", "ratio"] + extra
            rows = [[r["k"], r[first], r["ratio"]] + [r[c] for c in extra] for r in res.rows]
            writer.add(stem + ".csv", csv_text(header, rows), params)
        summary = res.summary()
        if cfg.format == "json":
            summary["rows"] = res.rows
        writer.add_json(stem + ".json", summary, params)
        summaries.append(summary)
        if not res.passed:
            ok = False
            why = "skipped: " + res.notes if res.skipped else (
                f"slopes {res.slopes} outside tolerance {res.tolerance}; {res.notes}")
            msgs.append(f"{res.name}: {why}")
    if summaries:
        writer.add_json(f"{command.replace('-', '_')}_summary.json", summaries, base)
    return ok, msgs


def execute(config: ExperimentConfig, command: str) -> int:
    try:
        config.validate(command)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    writer = ArtifactWriter(Path(config.out))
    try:
        if command == "multipliers":
            ok, msgs = _run_multipliers(config, writer)
        elif command == "moments":
            ok, msgs = _run_moments(config, writer)
        else:
            ok, msgs = _run_corpus(config, command, writer)
    except (ConvergenceError, TruncationError) as exc:
        log.error("numerical non-convergence: %s", exc)
        return EXIT_NUMERIC
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    writer.commit(command, config)
    for msg in msgs:
        log.error("check failed: %s", msg)
    if ok:
        log.info("%s: all checks passed (%d artifacts in %s)", command, len(writer.staged), config.out)
    return EXIT_OK if ok else EXIT_FAIL


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="capjackson", description=__doc__.splitlines()[0])
    ap.add_argument("command_pos", nargs="?", choices=COMMANDS, metavar="COMMAND",
                    help=f"one of {', '.join(COMMANDS)}")
    ap.add_argument("--command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--out")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--k-list", type=_int_list)
    ap.add_argument("--gamma", type=float)
    ap.add_argument("--n", type=int)
    ap.add_argument("--s", type=int)
    ap.add_argument("--m", type=int)
    ap.add_argument("--jmax", type=int, dest="j_max")
    ap.add_argument("--p", choices=("1", "2", "inf"))
    ap.add_argument("--tol", type=float)
    ap.add_argument("--betas", type=_float_list)
    ap.add_argument("--bump-rhos", type=_float_list)
    ap.add_argument("--degrees", type=_int_list)
    ap.add_argument("--v-max-factor", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        for key in ("out", "format", "k_list", "gamma", "n", "s", "m", "j_max", "p", "tol",
                    "bump_rhos", "degrees", "v_max_factor", "workers"):
            val = getattr(args, key)
            if val is not None:
                setattr(cfg, key, val)
        if args.betas is not None:
            cfg.betas = [int(b) if float(b).is_integer() else b for b in args.betas]
    except (ConfigError, TypeError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    if args.dump_config:
        print(cfg.to_json())
        return EXIT_OK
    command = args.command or args.command_pos
    if command is None:
        log.error("configuration error: no command given")
        return EXIT_CONFIG
    return execute(cfg, command)


if __name__ == "__main__":
    sys.exit(main())
