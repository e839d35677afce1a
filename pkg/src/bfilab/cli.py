"""Command-line front end: ``bfilab <command> --config run.json --out DIR``.

Every command reads a JSON config whose ``schema`` field names the command,
writes CSV/JSON artifacts into ``--out`` and prints a run manifest to stdout.
Failures print an error object instead and exit with 2 (bad input),
3 (resource budget) or 4 (failed invariant).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .bfi_experiments import ExperimentConfig, deviation_table, nu_measurement
from .cache import SieveCache
from .constants import DEFAULT_CUTOFF, KINDS, constant
from .errors import BfiLabError, DomainError, InvariantError, ResourceError
from .progressions import METHODS, delta_sum, divisor_switch_check
from .sieve import preload_tables
from .titchmarsh import DEFAULT_LAMBDA_GUARD, bv_titchmarsh_table
from .totient_sums import VARIANTS, fit_error_exponent, partial_sum, weighted_sum

EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_INVARIANT = 4

COMMANDS = ("constants", "lemma-check", "switch-check", "delta", "titchmarsh", "bfi-average", "cache")
CACHE_ACTIONS = ("build", "verify", "purge")

CSV_COLUMNS = {
    "lemma-check": ["kind", "a", "r", "M", "lhs", "main_term", "residual"],
    "delta": ["x", "r", "q_max", "a", "method", "value"],
    "titchmarsh": ["x", "q", "a", "sum", "main_term", "error", "rel_error"],
    "bfi-average": ["r", "inner", "prediction", "abs_dev"],
}

# key -> (type check, required)
_INT = (int,)
_NUM = (int, float)
SCHEMAS: dict[str, dict[str, tuple[tuple, bool]]] = {
    "constants": {"a": (_INT, False), "r": (_INT, False), "cutoff": (_INT, False), "kinds": ((list,), False)},
    "lemma-check": {
        "kind": ((int, str), True),
        "a": (_INT, True),
        "r": (_INT, False),
        "Ms": ((list,), True),
        "variant": ((str,), False),
        "cutoff": (_INT, False),
    },
    "switch-check": {"x": (_INT, True), "r": (_INT, True), "P": (_NUM, True), "a": (_INT, True)},
    "delta": {
        "x": (_INT, True),
        "r": (_INT, True),
        "q_max": (_INT, True),
        "a": (_INT, True),
        "method": ((str, list), False),
    },
    "titchmarsh": {
        "x": (_INT, True),
        "Q": (_INT, True),
        "a": (_INT, True),
        "lambda_guard": (_NUM, False),
        "cutoff": (_INT, False),
    },
    "bfi-average": {
        "x": (_INT, True),
        "R": (_NUM, True),
        "M": (_NUM, True),
        "a": (_INT, True),
        "mode": ((str,), False),
        "lambda_guard": (_NUM, False),
        "cutoff": (_INT, False),
    },
    "cache": {"lo": (_INT, True), "hi": (_INT, True)},
}


class UsageError(BfiLabError):
    """Invalid command line or config file."""


@dataclass
class RunManifest:
    command: str
    config: dict
    artifact_version: str
    outputs: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    checksums: dict[str, str] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# config and output helpers


def load_config(path: str | Path, command: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return validate_config(raw, command)


def validate_config(raw: Any, command: str) -> dict:
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    if raw.get("schema") != command:
        raise UsageError(f"config schema must be {command!r}, got {raw.get('schema')!r}")
    spec = SCHEMAS[command]
    unknown = sorted(set(raw) - set(spec) - {"schema"})
    if unknown:
        raise UsageError(f"unknown config keys: {unknown}")
    for key, (types, required) in spec.items():
        if key not in raw:
            if required:
                raise UsageError(f"missing config key {key!r}")
            continue
        value = raw[key]
        if isinstance(value, bool) or not isinstance(value, types):
            raise UsageError(f"config key {key!r} has invalid value {value!r}")
    return dict(raw)


def _cell(value: Any) -> str:
    # repr is the shortest string that round-trips the double
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(columns: list[str], rows: list[dict]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf)  # RFC 4180: CRLF line ends, minimal quoting
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue().encode("utf-8")


def _json_default(obj: Any) -> Any:
    if hasattr(obj, "as_dict"):
        return obj.as_dict()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def render_json(obj: Any) -> bytes:
    text = json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, default=_json_default, allow_nan=False)
    return (text + "\n").encode("utf-8")


class _Writer:
    def __init__(self, out: Path, manifest: RunManifest):
        self.out = out
        self.manifest = manifest

    def write(self, name: str, data: bytes) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_bytes(data)
        self.manifest.outputs.append(str(path))
        self.manifest.checksums[str(path)] = hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------------------
# commands


def _cmd_constants(cfg: dict, args, w: _Writer) -> None:
    a, r = cfg.get("a", 1), cfg.get("r", 1)
    cutoff = cfg.get("cutoff", DEFAULT_CUTOFF)
    kinds = cfg.get("kinds", ["C1", "C2", "C3", "C5", "C6"])
    bad = [k for k in kinds if k not in KINDS]
    if bad:
        raise UsageError(f"unknown constant kinds {bad}; expected a subset of {list(KINDS)}")
    values = [constant(k, a, r, cutoff).as_dict() for k in kinds]
    w.write("constants.json", render_json({"constants": values}))


def _cmd_lemma_check(cfg: dict, args, w: _Writer) -> None:
    kind, a, r = cfg["kind"], cfg["a"], cfg.get("r", 1)
    cutoff = cfg.get("cutoff", DEFAULT_CUTOFF)
    Ms = cfg["Ms"]
    if not Ms or any(isinstance(M, bool) or not isinstance(M, (int, float)) for M in Ms):
        raise UsageError("Ms must be a nonempty list of numbers")
    if kind == "weighted":
        variant = cfg.get("variant")
        if variant is not None and variant not in VARIANTS:
            raise UsageError(f"variant must be one of {VARIANTS}")
        rows = [weighted_sum(a, r, M, variant, cutoff) for M in Ms]
    elif kind in (1, 2, 3, 4):
        rows = [partial_sum(kind, a, r, M, cutoff) for M in Ms]
    else:
        raise UsageError("kind must be 1, 2, 3, 4 or 'weighted'")
    w.write(
        "lemma_check.csv",
        render_csv(CSV_COLUMNS["lemma-check"], [dict(row.as_dict(), kind=kind, a=a, r=r) for row in rows]),
    )
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = asdict(fit_error_exponent(rows))
        summary = {"fit": fit, "reason": None}
    except DomainError as exc:
        summary = {"fit": None, "reason": str(exc)}
    w.write("lemma_check.json", render_json(summary))


def _cmd_switch_check(cfg: dict, args, w: _Writer) -> None:
    report = divisor_switch_check(cfg["x"], cfg["r"], cfg["P"], cfg["a"])
    w.write("switch_report.json", render_json(report.as_dict()))


def _cmd_delta(cfg: dict, args, w: _Writer) -> None:
    methods = cfg.get("method", "stepping")
    methods = [methods] if isinstance(methods, str) else methods
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UsageError(f"method must be drawn from {METHODS}")
    rows = []
    for m in methods:
        value = delta_sum(cfg["x"], cfg["r"], cfg["q_max"], cfg["a"], method=m, threads=args.threads)
        rows.append({"x": cfg["x"], "r": cfg["r"], "q_max": cfg["q_max"], "a": cfg["a"], "method": m, "value": value})
    if len(rows) > 1:
        ref = rows[0]["value"]
        for row in rows[1:]:
            if not math.isclose(row["value"], ref, rel_tol=1e-9, abs_tol=1e-9):
                raise InvariantError("delta method agreement", f"{row['method']} = {row['value']} vs {ref}")
    w.write("delta.csv", render_csv(CSV_COLUMNS["delta"], rows))


def _cmd_titchmarsh(cfg: dict, args, w: _Writer) -> None:
    table = bv_titchmarsh_table(
        cfg["x"],
        cfg["Q"],
        cfg["a"],
        lambda_guard=cfg.get("lambda_guard", DEFAULT_LAMBDA_GUARD),
        override_guard=args.override_lambda_guard,
        threads=args.threads,
        cutoff=cfg.get("cutoff", DEFAULT_CUTOFF),
    )
    w.write("titchmarsh.csv", render_csv(CSV_COLUMNS["titchmarsh"], [row.as_dict() for row in table.rows]))
    w.write("titchmarsh.json", render_json(table.summary()))


def _cmd_bfi_average(cfg: dict, args, w: _Writer) -> None:
    ec = ExperimentConfig(
        cfg["x"],
        cfg["R"],
        cfg["M"],
        cfg["a"],
        cfg.get("mode", "dyadic"),
        cfg.get("lambda_guard", DEFAULT_LAMBDA_GUARD),
        args.override_lambda_guard,
    )
    cutoff = cfg.get("cutoff", DEFAULT_CUTOFF)
    table = deviation_table(ec, threads=args.threads, cutoff=cutoff)
    summary = table.summary()
    if ec.mode == "full":
        summary["nu"] = nu_measurement(ec, threads=args.threads, cutoff=cutoff)
    w.write("bfi_average.csv", render_csv(CSV_COLUMNS["bfi-average"], [row.as_dict() for row in table.rows]))
    w.write("bfi_average.json", render_json(summary))


_SIEVE_EXTENT: dict[str, Callable[[dict], int]] = {
    "switch-check": lambda c: c["x"],
    "delta": lambda c: c["x"],
    "titchmarsh": lambda c: c["x"] + max(c["a"], 0),
    "bfi-average": lambda c: c["x"],
}

_HANDLERS = {
    "constants": _cmd_constants,
    "lemma-check": _cmd_lemma_check,
    "switch-check": _cmd_switch_check,
    "delta": _cmd_delta,
    "titchmarsh": _cmd_titchmarsh,
    "bfi-average": _cmd_bfi_average,
}


def cache_manage(action: str, lo: int, hi: int, directory: str | Path) -> dict:
    """Build, verify or purge the cached sieve segment for [lo, hi)."""
    if action not in CACHE_ACTIONS:
        raise UsageError(f"cache action must be one of {CACHE_ACTIONS}")
    cache = SieveCache(directory)
    return getattr(cache, action)(lo, hi)


def run(command: str, cfg: dict, args: argparse.Namespace) -> RunManifest:
    manifest = RunManifest(command, cfg, __version__)
    start = time.perf_counter()
    if args.cache and command in _SIEVE_EXTENT:
        n = _SIEVE_EXTENT[command](cfg)
        if n >= 2:
            preload_tables(n, SieveCache(args.cache))
    _HANDLERS[command](cfg, args, _Writer(Path(args.out), manifest))
    manifest.wall_time = time.perf_counter() - start
    return manifest


# ---------------------------------------------------------------------------
# entry point


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--cache", help="sieve cache directory")
    p.add_argument("--override-lambda-guard", action="store_true", help="allow moduli beyond x^lambda")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bfilab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "cache":
            p.add_argument("action", choices=CACHE_ACTIONS)
            p.add_argument("--range", nargs=2, type=int, metavar=("LO", "HI"), help="interval [LO, HI)")
        _common(p)
    return parser


def _emit_error(kind: str, message: str, **extra: Any) -> None:
    sys.stdout.write(render_json({"error": kind, "message": message, **extra}).decode("utf-8"))


def _config_for(args: argparse.Namespace) -> dict:
    if args.command == "cache":
        if args.config:
            return load_config(args.config, "cache")
        if args.range is None:
            raise UsageError("cache needs --range LO HI or --config")
        return {"schema": "cache", "lo": args.range[0], "hi": args.range[1]}
    if not args.config:
        raise UsageError(f"{args.command} requires --config")
    return load_config(args.config, args.command)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        cfg = _config_for(args)
        if args.command == "cache":
            report = cache_manage(args.action, cfg["lo"], cfg["hi"], args.cache or ".bfilab-cache")
            sys.stdout.write(render_json(report).decode("utf-8"))
            return 0
        manifest = run(args.command, cfg, args)
    except (UsageError, DomainError) as exc:
        _emit_error("usage", str(exc))
        return EXIT_USAGE
    except (ResourceError, MemoryError) as exc:
        _emit_error("resource", str(exc) or type(exc).__name__)
        return EXIT_RESOURCE
    except InvariantError as exc:
        _emit_error("invariant", str(exc), invariant=exc.invariant, detail=exc.detail)
        return EXIT_INVARIANT
    except OSError as exc:
        _emit_error("io", str(exc), path=exc.filename, action=getattr(args, "action", args.command))
        return EXIT_RESOURCE
    sys.stdout.write(render_json(asdict(manifest)).decode("utf-8"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
