"""Command-line interface.

Subcommands: compile (emit C sources), test (verify generated code
against the reference), tune (measure variants and select), report
(summarize a tune file).  Exit status: 0 success, 1 tolerance or
selection failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from ..cir import dump as dump_cir
from ..frontend import CheckError, ParseError, check, parse
from ..tiling import format_tiled
from .measure import (
    DEFAULT_PEAK,
    DEFAULT_REPS,
    TuneError,
    load_report,
    run_tune,
    save_report,
)
from .pipeline import compile_variant, emit_variant
from .variants import Limits, VariantConfig, enumerate_variants
from .verify import verify_variant
from ..backend import write_sources


class UsageError(Exception):
    pass


def read_config(path) -> dict[str, str]:
    """key = value defaults file (toml-style scalars only)."""
    out: dict[str, str] = {}
    if path is None or not os.path.exists(path):
        return out
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"bad config line: {raw.strip()!r}")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip().strip('"').strip("'")
    return out


def parse_bindings(pairs: list[str]) -> dict[str, int]:
    out: dict[str, int] = {}
    for p in pairs:
        if "=" not in p:
            raise UsageError(f"--bind expects name=value, got {p!r}")
        k, v = p.split("=", 1)
        try:
            out[k.strip()] = int(v)
        except ValueError:
            raise UsageError(f"binding {k!r} must be an integer") from None
    return out


def load_program(path: str, bindings: dict[str, int]):
    name = os.path.splitext(os.path.basename(path))[0]
    with open(path) as f:
        text = f.read()
    return check(parse(text, name=name), bindings), text


def default_config(cp, args) -> VariantConfig:
    space = enumerate_variants(cp, isa=args.isa, nu=args.nu)
    chosen = space.variants[0]
    if getattr(args, "choices", None):
        inv = tuple(int(x) for x in args.choices.split(","))
        chosen = VariantConfig(inv, chosen.blocksize, chosen.unroll,
                               args.isa, args.nu)
    if getattr(args, "blocksize", None):
        chosen = VariantConfig(chosen.invariants, args.blocksize,
                               chosen.unroll, args.isa, args.nu)
    return chosen


def cmd_compile(args) -> int:
    cp, text = load_program(args.program, parse_bindings(args.bind))
    cfg = default_config(cp, args)
    cv = compile_variant(cp, cfg)
    if args.dump_tiled:
        os.makedirs(args.dump_tiled, exist_ok=True)
        with open(os.path.join(args.dump_tiled, f"{cp.name}.tiled"),
                  "w") as f:
            f.write(format_tiled(cv.tiled))
    if args.dump_cir:
        os.makedirs(args.dump_cir, exist_ok=True)
        with open(os.path.join(args.dump_cir, f"{cp.name}.pre.cir"),
                  "w") as f:
            f.write(dump_cir(cv.raw))
        with open(os.path.join(args.dump_cir, f"{cp.name}.post.cir"),
                  "w") as f:
            f.write(dump_cir(cv.optimized))
    src = emit_variant(cv, text)
    paths = write_sources(src, args.out)
    for p in paths:
        print(p)
    return 0


def cmd_test(args) -> int:
    cp, _ = load_program(args.program, parse_bindings(args.bind))
    cfg = default_config(cp, args)
    result = verify_variant(cp, cfg, range(args.seeds))
    for f in result.failures:
        print(f"FAIL {f}")
    print(f"{result.checks - len(result.failures)}/{result.checks} "
          "checks passed")
    return 0 if result.ok else 1


def cmd_tune(args) -> int:
    cfg_file = read_config(args.config)
    reps = args.reps or int(cfg_file.get("reps", DEFAULT_REPS))
    cp, _ = load_program(args.program, parse_bindings(args.bind))
    space = enumerate_variants(cp, isa=args.isa, nu=args.nu,
                               limits=Limits(args.max_variants))
    try:
        report = run_tune(cp, space.variants, reps=reps)
    except TuneError as exc:
        print(f"tune failed: {exc}", file=sys.stderr)
        return 1
    report.notes.extend(space.notes)
    save_report(report, args.out)
    print(f"selected {report.selected} ({args.out})")
    return 0


def cmd_report(args) -> int:
    cfg_file = read_config(args.config)
    peak = float(cfg_file.get("peak_f_per_c", DEFAULT_PEAK))
    rep = load_report(args.tunefile)
    print(f"program {rep.program}  isa {rep.isa}  nu {rep.nu}  "
          f"timing {rep.timing_source}")
    print(f"{'id':18s} {'median':>12s} {'q1':>12s} {'q3':>12s} "
          f"{'flops':>10s} {'f/c':>8s}")
    status = 0
    for m in rep.variants:
        mark = " *" if m.variant_id == rep.selected else ""
        print(f"{m.variant_id:18s} {m.median_cycles:12.1f} {m.q1:12.1f} "
              f"{m.q3:12.1f} {m.flops:10d} {m.f_per_c:8.3f}{mark}")
        if m.f_per_c > peak:
            print(f"  f/c {m.f_per_c:.3f} exceeds machine peak {peak}")
            status = 1
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slingen")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("program")
        p.add_argument("--bind", action="append", default=[],
                       metavar="name=value")
        p.add_argument("--isa", default="scalar",
                       choices=("scalar", "vec256"))
        p.add_argument("--nu", type=int, default=4)
        p.add_argument("--config", default="slingen.toml")

    c = sub.add_parser("compile", help="emit C sources")
    common(c)
    c.add_argument("--out", required=True)
    c.add_argument("--choices", help="invariant index per equation, "
                   "comma separated")
    c.add_argument("--blocksize", type=int)
    c.add_argument("--dump-tiled", metavar="DIR")
    c.add_argument("--dump-cir", metavar="DIR")
    c.set_defaults(fn=cmd_compile)

    t = sub.add_parser("test", help="verify against the reference")
    common(t)
    t.add_argument("--seeds", type=int, default=30)
    t.add_argument("--choices")
    t.add_argument("--blocksize", type=int)
    t.set_defaults(fn=cmd_test)

    u = sub.add_parser("tune", help="measure variants and select")
    common(u)
    u.add_argument("--reps", type=int)
    u.add_argument("--max-variants", type=int, default=256)
    u.add_argument("--out", default="tune.json")
    u.set_defaults(fn=cmd_tune)

    r = sub.add_parser("report", help="summarize a tune file")
    r.add_argument("tunefile")
    r.add_argument("--config", default="slingen.toml")
    r.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (UsageError, ParseError, CheckError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
