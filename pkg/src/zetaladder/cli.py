"""Command-line front end.

Subcommands::

    zeta-eval        Z(t), theta(t), |zeta(1/2 + it)|^2 at given ordinates
    ladder-build     tabulate the surrogate ladder over --range LO HI
    verify-gram      transformed Gram matrices at window positions --T
    scan-asymptotic  |zeta|^2-weighted window integrals against norm * ln T_bar
    window-check     T_bar / T and preimage-length columns

Every run writes ``manifest.json`` into the output directory (also on
failure), plus ``result.json`` and ``result.csv`` when a result exists.
A ``--config`` file of ``key = value`` lines supplies defaults; flags win.
The cache directory comes from ``--cache-dir``, then the
``ZETALADDER_CACHE_DIR`` environment variable, then the config file.

Exit status: 0 success, 2 configuration error, 3 numerical tolerance
failure or degraded result, 4 cache / IO error.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, OutOfRangeError, ResolutionError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

COMMANDS = ("zeta-eval", "ladder-build", "verify-gram", "scan-asymptotic", "window-check")
FAMILIES = ("legendre", "chebyshev_t", "chebyshev_u", "general")
CACHE_ENV = "ZETALADDER_CACHE_DIR"
MANIFEST_VERSION = 1
ZETA_CSV_HEADER = ("t", "theta", "Z", "zeta_sq", "method")
LADDER_MIN_T = 50.0


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


@dataclass
class RunConfig:
    command: str
    t: list = field(default_factory=list)
    T: list = field(default_factory=list)
    range: list = field(default_factory=list)
    family: str = "legendre"
    alpha: float | None = None
    beta: float | None = None
    nmax: int = 5
    n: list = field(default_factory=lambda: [0, 1, 2])
    tol: float = 1e-8
    output: str = "zl_out"
    cache_dir: str | None = None
    seed: int = 0
    random: int = 0
    samples_per_gap: int = 16

    _LISTS = {"t": _floats, "T": _floats, "range": _floats, "n": _ints}

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}")
        if self.family not in FAMILIES:
            raise ConfigError("family", f"must be one of {', '.join(FAMILIES)}")
        if self.family == "general":
            if self.alpha is None or self.beta is None:
                raise ConfigError("alpha", "general family needs --alpha and --beta")
            if not (self.alpha > -1 and self.beta > -1):
                raise ConfigError("alpha", "exponents must exceed -1")
        if not 0 <= self.nmax <= 12:
            raise ConfigError("nmax", "must lie in [0, 12]")
        if any(k < 0 or k > 12 for k in self.n):
            raise ConfigError("n", "degrees must lie in [0, 12]")
        if not self.tol > 0:
            raise ConfigError("tol", "must be positive")
        if self.samples_per_gap < 8:
            raise ConfigError("samples_per_gap", "must be at least 8")
        if self.random < 0:
            raise ConfigError("random", "must be non-negative")
        if any(not v > 0 for v in self.t):
            raise ConfigError("t", "ordinates must be positive")
        if self.command == "zeta-eval" and not self.t and not self.random:
            raise ConfigError("t", "give --t values or --random with --range")
        if self.command == "ladder-build" or (self.command == "zeta-eval" and self.random):
            if len(self.range) != 2 or not self.range[0] < self.range[1]:
                raise ConfigError("range", "needs LO HI with LO < HI")
        if self.command == "ladder-build" and self.range[0] < LADDER_MIN_T:
            raise ConfigError("range", f"ladder needs LO >= {LADDER_MIN_T:g}")
        if self.command in ("verify-gram", "scan-asymptotic", "window-check"):
            if not self.T:
                raise ConfigError("T", "at least one window position is required")
            if any(v < 100 for v in self.T):
                raise ConfigError("T", "window positions must be >= 100")
        if self.command == "scan-asymptotic" and any(b <= a for a, b in zip(self.T, self.T[1:])):
            raise ConfigError("T", "scan positions must be increasing")
        return self

    # textual form: one key = value per line, lists comma separated
    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ",".join(repr(x) for x in v)
            elif v is None:
                v = ""
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        raw = parse_pairs(text)
        if "command" not in raw:
            raise ConfigError("command", "missing")
        return cls(**coerce(raw)).validate()

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_pairs(text: str) -> dict[str, str]:
    out = {}
    for num, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}", "expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(key, "unknown configuration key")
        out[key] = value
    return out


def coerce(raw: dict[str, str]) -> dict:
    out = {}
    for key, value in raw.items():
        try:
            if key in RunConfig._LISTS:
                out[key] = RunConfig._LISTS[key](value)
            elif key in ("alpha", "beta"):
                out[key] = float(value) if value else None
            elif key == "cache_dir":
                out[key] = value or None
            elif key in ("nmax", "seed", "random", "samples_per_gap"):
                out[key] = int(value)
            elif key == "tol":
                out[key] = float(value)
            else:
                out[key] = value
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {value!r} ({exc})") from None
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="zetaladder", description="Ladder-transformed Jacobi orthogonality workbench.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value file supplying defaults")
    p.add_argument("--t", nargs="+", type=float, help="ordinates for zeta-eval")
    p.add_argument("--T", nargs="+", type=float, help="window positions")
    p.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"))
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--nmax", type=int)
    p.add_argument("--n", nargs="+", type=int, help="degrees for scan-asymptotic")
    p.add_argument("--tol", type=float)
    p.add_argument("--output", "-o", help="output directory")
    p.add_argument("--cache-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--random", type=int, help="zeta-eval: number of random ordinates in --range")
    p.add_argument("--samples-per-gap", type=int)
    return p


def config_from_args(argv: Sequence[str] | None, environ: dict | None = None) -> RunConfig:
    environ = os.environ if environ is None else environ
    ns = build_parser().parse_args(argv)
    values: dict = {}
    if ns.config:
        try:
            text = Path(ns.config).read_text()
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
        values.update(coerce(parse_pairs(text)))
        values.pop("command", None)
    if environ.get(CACHE_ENV):
        values["cache_dir"] = environ[CACHE_ENV]
    for key in ("t", "T", "range", "family", "alpha", "beta", "nmax", "n", "tol", "output",
                "cache_dir", "seed", "random", "samples_per_gap"):
        v = getattr(ns, key)
        if v is not None:
            values[key] = list(v) if isinstance(v, list) else v
    if values.get("family", "legendre") == "general":
        values.setdefault("alpha", 0.3)
        values.setdefault("beta", -0.4)
    return RunConfig(command=ns.command, **values).validate()


# ---------------------------------------------------------------------------
# commands

def _policy(cfg: RunConfig):
    from .zeta_engine import GridPolicy
    return GridPolicy(samples_per_gap=cfg.samples_per_gap)


def _cached_table(cfg: RunConfig, name: str, build):
    from .ladder import load_ladder, save_ladder
    if not cfg.cache_dir:
        return build()
    path = Path(cfg.cache_dir) / name
    if path.exists():
        return load_ladder(path)
    table = build()
    save_ladder(table, path)
    return table


def _window_table(cfg: RunConfig, T: float):
    from .ladder import ladder_for_window
    policy = _policy(cfg)
    name = f"window_{T!r}_s{policy.samples_per_gap}_k{policy.terms}.zll"
    return _cached_table(cfg, name, lambda: ladder_for_window(T, grid=policy))


def cmd_zeta_eval(cfg: RunConfig):
    from .special_fn import theta_exact
    from .zeta_engine import CROSSOVER_T, hardy_z_em, hardy_z_rs
    ts = list(cfg.t)
    if cfg.random:
        rng = np.random.default_rng(cfg.seed)
        ts += sorted(rng.uniform(cfg.range[0], cfg.range[1], cfg.random).tolist())
    rows = []
    for t in ts:
        ev = hardy_z_em(t) if t < CROSSOVER_T else hardy_z_rs(t)
        rows.append((t, float(theta_exact(t)), ev.z, ev.zeta_sq, ev.method))
        print(f"t = {t!r}  theta = {rows[-1][1]:.15g}  Z = {ev.z:.15g}  |Z| = {abs(ev.z):.3e}  [{ev.method}]")
    payload = {"kind": "zeta_eval", "records": [dict(zip(ZETA_CSV_HEADER, r)) for r in rows]}
    return payload, ZETA_CSV_HEADER, rows, []


def cmd_ladder_build(cfg: RunConfig):
    from .ladder import LADDER_CSV_HEADER, build_ladder
    lo, hi = cfg.range
    policy = _policy(cfg)
    name = f"ladder_{lo!r}_{hi!r}_s{policy.samples_per_gap}_k{policy.terms}.zll"
    table = _cached_table(cfg, name, lambda: build_ladder(lo, hi, policy))
    report = table.invariant_report()
    flags = [k for k in ("strictly_increasing", "dphi1_nonnegative", "below_diagonal") if not report[k]]
    payload = {"kind": "ladder", "t_lo": table.t_lo, "t_hi": table.t_hi, "knots": len(table),
               "anchor": list(table.anchor), "total_rise": table.total_rise, "invariants": report}
    print(f"ladder on [{table.t_lo:g}, {table.t_hi:g}]: {len(table)} knots, rise {table.total_rise:.12g}, "
          f"gap ratio in [{report['gap_ratio_min']:.4f}, {report['gap_ratio_max']:.4f}]")
    rows = [tuple(float(v) for v in r) for r in table.knots]
    return payload, LADDER_CSV_HEADER, rows, flags


def cmd_verify_gram(cfg: RunConfig):
    from .verify_harness import GramReport, gram_transformed
    reports = []
    for T in cfg.T:
        rep = gram_transformed(_window_table(cfg, T), cfg.family, cfg.alpha, cfg.beta, T, cfg.nmax, tol=cfg.tol)
        reports.append(rep)
        print(f"{rep.family} T={T:g}: max_offdiag {rep.max_offdiag:.2e}  diag dev {rep.max_diag_reldev:.2e}  "
              f"routes {rep.route_disagreement:.2e}  {'ok' if rep.passed else 'FAIL'}")
    flags = [f"T={r.T!r}" for r in reports if not r.passed]
    rows = [row for r in reports for row in r.csv_rows()]
    return {"kind": "gram_reports", "reports": [r.to_dict() for r in reports]}, GramReport.CSV_HEADER, rows, flags


def cmd_scan(cfg: RunConfig):
    from .verify_harness import AsymptoticScan, asymptotic_scan, default_spec
    scans = []
    for n in cfg.n:
        spec = default_spec(cfg.family, n, cfg.alpha, cfg.beta)
        s = asymptotic_scan(lambda T: _window_table(cfg, T), spec, cfg.T)
        scans.append(s)
        print(f"{spec.family.value} n={n}: reldev " + " ".join(f"{d:.3e}" for d in s.reldev)
              + f"  envelope {'ok' if s.within_envelope else 'FAIL'}  monotone {'ok' if s.non_increasing else 'no'}")
    flags = [f"n={s.spec.n}" for s in scans if not s.within_envelope or any(s.flagged)]
    rows = [row for s in scans for row in s.csv_rows()]
    return {"kind": "asymptotic_scans", "scans": [s.to_dict() for s in scans]}, AsymptoticScan.CSV_HEADER, rows, flags


def cmd_window_check(cfg: RunConfig):
    from .verify_harness import WINDOW_CSV_HEADER, window_distance_check
    rows = window_distance_check(lambda T: _window_table(cfg, T), cfg.T)
    for T, tb, ratio, length in rows:
        print(f"T={T:g}: T_bar={tb:.10g}  T_bar/T={ratio:.6f}  length*lnT/T={length:.4e}")
    flags = [f"T={r[0]!r}" for r in rows if not r[1] > r[0]]
    return {"kind": "window_check", "rows": [dict(zip(WINDOW_CSV_HEADER, r)) for r in rows]}, WINDOW_CSV_HEADER, rows, flags


_DISPATCH = {
    "zeta-eval": cmd_zeta_eval,
    "ladder-build": cmd_ladder_build,
    "verify-gram": cmd_verify_gram,
    "scan-asymptotic": cmd_scan,
    "window-check": cmd_window_check,
}


def _versions() -> dict:
    import mpmath
    import scipy
    from importlib import metadata
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"package": pkg, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "mpmath": mpmath.__version__}


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")
    os.replace(tmp, path)


def run(cfg: RunConfig) -> int:
    """Execute one validated config; always leaves a manifest behind."""
    from .verify_harness import SCHEMA_VERSION, write_csv
    out = Path(cfg.output)
    started = time.time()
    status, flags, error = EXIT_OK, [], None
    try:
        out.mkdir(parents=True, exist_ok=True)
        payload, header, rows, flags = _DISPATCH[cfg.command](cfg)
        payload["schema_version"] = SCHEMA_VERSION
        payload["command"] = cfg.command
        _write_json(out / "result.json", payload)
        with open(out / "result.csv", "w", newline="") as fh:
            write_csv(("csv_version",) + tuple(header), ((SCHEMA_VERSION,) + tuple(r) for r in rows), fh)
        if flags:
            status = EXIT_NUMERIC
    except (DomainError, OutOfRangeError, ValueError) as exc:
        status, error = EXIT_CONFIG, f"{type(exc).__name__}: {exc}"
    except (ConvergenceError, ResolutionError, ArithmeticError) as exc:
        status, error = EXIT_NUMERIC, f"{type(exc).__name__}: {exc}"
    except OSError as exc:
        status, error = EXIT_IO, f"{type(exc).__name__}: {exc}"
    finally:
        manifest = {
            "manifest_version": MANIFEST_VERSION,
            "config": cfg.to_dict(),
            "config_text": cfg.to_text(),
            "versions": _versions(),
            "timings": {"started": started, "elapsed_s": time.time() - started},
            "flags": flags,
            "error": error,
            "exit_status": status,
        }
        try:
            out.mkdir(parents=True, exist_ok=True)
            _write_json(out / "manifest.json", manifest)
        except OSError as exc:
            print(f"cannot write manifest: {exc}", file=sys.stderr)
            status = EXIT_IO
    if error:
        print(error, file=sys.stderr)
    return status


def _fallback_output(argv: Sequence[str]) -> str:
    argv = list(argv)
    for i, a in enumerate(argv):
        if a in ("--output", "-o") and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--output="):
            return a.split("=", 1)[1]
    return "zl_out"


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        out = Path(_fallback_output(argv))
        try:
            out.mkdir(parents=True, exist_ok=True)
            _write_json(out / "manifest.json", {
                "manifest_version": MANIFEST_VERSION, "argv": argv, "error": str(exc),
                "field": exc.field, "versions": _versions(), "exit_status": EXIT_CONFIG,
            })
        except OSError:
            pass
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
