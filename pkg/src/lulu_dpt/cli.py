"""Batch front end: ``lulu-dpt {decompose,reconstruct,filter,verify,bench}``.

Exit codes: 0 ok, 1 assertion failure, 2 usage, 3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import resource
import sys
import time
from pathlib import Path

import numpy as np

from . import dpt, verify
from .field import ScalarField
from .formats import GridFormatError, atomic_write, load_result, read_grid, write_grid, write_result
from .lattice import DOMAIN_ONLY, FACET, FULL, ZERO_PADDED, Lattice

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3

DEFAULT_MAX_CELLS = 1 << 22

log = logging.getLogger("lulu_dpt")


class UsageError(Exception):
    pass


_CONNECTIVITY = {"4": FACET, "facet": FACET, "8": FULL}
_BOUNDARY = {"zero": ZERO_PADDED, "domain": DOMAIN_ONLY}


def parse_scales(text: str) -> tuple[int, int | None]:
    """``LO:HI`` with HI optional (``LO:`` runs to the largest scale)."""
    try:
        lo_s, hi_s = text.split(":")
        lo = int(lo_s)
        hi = int(hi_s) if hi_s.strip() else None
    except ValueError:
        raise UsageError(f"--scales expects LO:HI, got {text!r}") from None
    if lo < 1 or (hi is not None and hi < lo):
        raise UsageError(f"invalid scale band {text!r}: need 1 <= LO <= HI")
    return lo, hi


def _load_field(args) -> tuple[ScalarField, dict]:
    arr, meta = read_grid(args.input)
    if arr.size > args.max_cells:
        raise UsageError(f"input has {arr.size} cells, above --max-cells {args.max_cells}")
    conn = _CONNECTIVITY[args.connectivity]
    if conn == FULL and arr.ndim != 2:
        raise UsageError("8-connectivity needs a 2D input")
    lat = Lattice(arr.shape, conn, _BOUNDARY[args.boundary])
    return ScalarField(lat, arr), meta


def cmd_decompose(args) -> int:
    f, meta = _load_field(args)
    r = dpt.decompose(f)
    write_result(args.output, r, {"input": meta, "config": {"engine": "graph"}})
    print(f"{sum(1 for _ in r.pulses())} pulses over {r.N} scales -> {args.output}")
    return EXIT_OK


def _emit(r: dpt.DptResult, lo: int, hi: int | None, output, maxval: int) -> int:
    hi = max(r.N, lo) if hi is None else hi
    out = dpt.reconstruct(r, lo, hi)
    clamps = write_grid(output, out.values, maxval)
    msg = f"scales {lo}:{hi} -> {output}"
    if Path(output).suffix.lower() == ".pgm":
        msg += f" ({clamps} values clamped)"
    print(msg)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    lo, hi = parse_scales(args.scales)
    r, summary = load_result(args.input)
    maxval = summary.get("input", {}).get("maxval", 255)
    return _emit(r, lo, hi, args.output, maxval)


def cmd_filter(args) -> int:
    lo, hi = parse_scales(args.scales)
    f, meta = _load_field(args)
    r = dpt.decompose(f)
    return _emit(r, lo, hi, args.output, meta.get("maxval", 255))


def cmd_verify(args) -> int:
    if args.config:
        cfg = verify.SuiteConfig.parse(Path(args.config).read_text())
    else:
        cfg = verify.SuiteConfig.default()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    if args.inject_fault:
        cfg.inject_fault = True
    report = verify.run_suite(cfg)
    text = json.dumps(report, sort_keys=True, indent=1) + "\n"
    if args.output:
        atomic_write(args.output, text)
    t = report["totals"]
    print(
        f"{report['verdict']}: {t['assertions']} assertions, {t['failures']} failures, "
        f"{t['inapplicable_trials']} inapplicable trials"
    )
    for fail in report["failed"][:3]:
        print("witness:", json.dumps(fail, sort_keys=True)[:400], file=sys.stderr)
    return EXIT_OK if report["verdict"] == verify.PASS else EXIT_FAIL


def smoothed_random_image(size: int, seed: int, sigma: float = 2.0) -> np.ndarray:
    from scipy.ndimage import gaussian_filter

    rng = np.random.default_rng(seed)
    img = gaussian_filter(rng.integers(0, 256, (size, size)).astype(float), sigma)
    img = (img - img.min()) / max(img.max() - img.min(), 1e-12) * 255
    return np.round(img).astype(np.int64)


def cmd_bench(args) -> int:
    img = smoothed_random_image(args.size, args.seed)
    f = ScalarField(Lattice(img.shape, _CONNECTIVITY[args.connectivity], _BOUNDARY[args.boundary]), img)
    t0 = time.perf_counter()
    r = dpt.decompose(f)
    elapsed = time.perf_counter() - t0
    exact = dpt.reconstruct(r) == f
    peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    print(json.dumps({
        "size": args.size,
        "seconds": round(elapsed, 3),
        "peak_rss_mb": round(peak_mb, 1),
        "pulses": sum(1 for _ in r.pulses()),
        "N": r.N,
        "exact": exact,
    }))
    return EXIT_OK if exact else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lulu-dpt", description="Discrete pulse transform tools")
    sub = p.add_subparsers(dest="command", required=True)

    def lattice_opts(sp):
        sp.add_argument("--connectivity", choices=sorted(_CONNECTIVITY), default="facet")
        sp.add_argument("--boundary", choices=sorted(_BOUNDARY), default="zero",
                        help="zero: field is zero outside the window (default); domain: window only")
        sp.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)

    sp = sub.add_parser("decompose", help="write pulses.jsonl, summary.json, spectrum.csv")
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", required=True, help="output directory")
    lattice_opts(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("reconstruct", help="sum pulses of a decomposition over a scale band")
    sp.add_argument("--input", required=True, help="directory written by decompose")
    sp.add_argument("--output", required=True)
    sp.add_argument("--scales", default="1:")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("filter", help="DPT band-pass: decompose then reconstruct LO:HI")
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", required=True)
    sp.add_argument("--scales", required=True)
    lattice_opts(sp)
    sp.set_defaults(func=cmd_filter)

    sp = sub.add_parser("verify", help="run the lemma verification suite")
    sp.add_argument("--config", help="key = value suite config (default: built-in suite)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--output", help="report JSON path")
    sp.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="decompose a smoothed random image and time it")
    sp.add_argument("--size", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--connectivity", choices=sorted(_CONNECTIVITY), default="facet")
    sp.add_argument("--boundary", choices=sorted(_BOUNDARY), default="zero")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GridFormatError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
