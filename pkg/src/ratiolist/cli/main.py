"""Argument parsing, dispatch and output for the ``ratiolist`` command."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .. import __version__
from ..rng import RNG_ALGORITHM
from .commands import COMMAND_FUNCS, SKIPPED_COLUMNS, SWEEP_COLUMNS, sweep_rows
from .config import COMMANDS, FORMATS, ConfigError, build_config, coerce, load_config_file
from .records import csv_text, flatten, fmt_float, records_text

# flag name -> (type, help); every flag defaults to None so a config file can fill it
_FLAGS = {
    "channel": (str, "bsc:p, bec:e, noiseless:k, useless:AxB, or a channel file"),
    "metric": (str, "matched, matched:<channel>, hamming, erasures, or table:<file>"),
    "code": (str, "'random' or a codebook file"),
    "M": (int, "number of messages of a random code (default ceil(2^(n R)))"),
    "n": (int, "block length"),
    "ratio": (str, "full, list:L, exponent[:bits], iterated_log, or power:alpha"),
    "rate-bits": (float, "rate R in bits per channel use"),
    "theta-bits": (float, "list exponent theta in bits per channel use"),
    "list-size": (int, "permitted list size L (overrides --ratio)"),
    "decoder": (str, "top_l, threshold or classic"),
    "tie-policy": (str, "lowest_index or reject_ties"),
    "tau": (str, "threshold for the threshold decoder (a number or -inf)"),
    "trials": (int, "Monte Carlo trials"),
    "seed": (int, "top-level seed"),
    "out": (str, "output file (default standard output)"),
    "format": (str, "text, csv or records"),
    "workers": (int, "worker processes for Monte Carlo chunks"),
    "n-grid": (str, "sweep block lengths, e.g. '8,12,16'"),
    "rate-grid-bits": (str, "sweep rates in bits"),
    "theta-grid-bits": (str, "sweep list exponents in bits"),
    "capacity-bits": (float, "capacity in bits (idbound; computed from --channel if absent)"),
    "eps": (float, "identification error parameter"),
    "delta": (float, "identification rate slack, same units as the capacity"),
    "max-M": (int, "largest codebook a sweep point may use"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ratiolist", description="Ratio list decoding experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({RNG_ALGORITHM})")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="key = value file, or a records line to replay")
        for flag, (typ, help_) in _FLAGS.items():
            dest = flag.replace("-", "_")
            s.add_argument(f"--{flag}", dest=dest, type=typ, default=None, help=help_,
                           choices=FORMATS if flag == "format" else None)
        s.add_argument("--spectrum", action="store_true", default=None,
                       help="also sample the Phi and information-density spectra (simulate)")
    return p


def _flag_values(ns: argparse.Namespace) -> dict:
    out = {}
    for flag in _FLAGS:
        dest = flag.replace("-", "_")
        v = getattr(ns, dest)
        if v is not None:
            out[dest] = coerce(dest, v)
    if ns.spectrum:
        out["spectrum"] = True
    return out


def _text(records, elapsed: float) -> str:
    lines = []
    for rec in records:
        head = f"[{rec.command}]"
        if rec.point is not None:
            head += " " + " ".join(f"{k}={v}" for k, v in rec.point.items())
        lines.append(head + ("" if rec.status == "ok" else f" skipped: {rec.reason}"))
        for k, v in flatten(rec.results).items():
            if isinstance(v, float):
                v = fmt_float(v).strip('"')
            lines.append(f"  {k}: {v}")
    lines.append(f"wall-clock: {elapsed:.3f} s")
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def render(cfg, records, elapsed: float) -> None:
    if cfg.format == "text":
        _emit(_text(records, elapsed), cfg.out)
    elif cfg.format == "records":
        _emit(records_text(records), cfg.out)
    elif cfg.command == "sweep":
        rows, skipped = sweep_rows(records)
        _emit(csv_text(SWEEP_COLUMNS, rows), cfg.out)
        if cfg.out is not None:
            Path(cfg.out + ".skipped.csv").write_text(csv_text(SKIPPED_COLUMNS, skipped))
    else:
        flat = [flatten({"results": r.results}) for r in records]
        columns = sorted({k for row in flat for k in row})
        _emit(csv_text(columns, flat), cfg.out)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        file_values = load_config_file(ns.config, ns.command) if ns.config else {}
        cfg = build_config(ns.command, file_values, _flag_values(ns))
        start = time.perf_counter()
        records = COMMAND_FUNCS[cfg.command](cfg)
        elapsed = time.perf_counter() - start
        for rec in records:
            rec.wall_clock = elapsed
    except ConfigError as exc:
        print(f"ratiolist {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    render(cfg, records, elapsed)
    return 0
