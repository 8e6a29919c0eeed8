"""``barnacle`` command line: assemble, simulate, report, compare.

Exit codes: 0 success, 1 input error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import asdict, fields
from typing import Optional, Sequence

from . import __version__
from .ingest import ParseError, bundle_paths, load_bundle, parse_clone_table
from .model import PipelineParams
from .pipeline import run_pipeline
from .report import (
    ArtifactError,
    clone_spans_from_layout,
    load_artifacts,
    read_layout,
    summary_rows,
    warp_report,
    write_artifacts,
    write_summary,
    write_warp_text,
    write_warp_tsv,
    ARTIFACTS,
)
from .resolve import ResolutionError
from .simulator import GroundTruth, SimParams, score_assembly, simulate

log = logging.getLogger("barnacle")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


class InputError(Exception):
    """Bad user input: missing files, malformed config, invalid parameters."""


def read_config(path: str) -> dict[str, str]:
    """Flat ``key=value`` text; blank lines and ``#`` comments are skipped."""
    if not os.path.exists(path):
        raise InputError(f"params file not found: {path}")
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _overrides(args) -> dict[str, str]:
    values = read_config(args.params) if args.params else {}
    for item in args.set or ():
        if "=" not in item:
            raise InputError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    if args.seed is not None:
        values["random_seed" if args.command != "simulate" else "seed"] = str(args.seed)
    return values


def pipeline_params(args) -> PipelineParams:
    try:
        return PipelineParams().with_overrides(_overrides(args))
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad parameter: {exc}") from None


def _require(path: Optional[str], what: str) -> str:
    if not path or not os.path.exists(path):
        raise InputError(f"{what} not found: {path}")
    return path


# --------------------------------------------------------------------------
# subcommands


def cmd_assemble(args) -> int:
    params = pipeline_params(args)
    paths = bundle_paths(args.bundle) if args.bundle else {}
    for key in ("clones", "alignments", "orientation", "nt_pairs", "sequences"):
        given = getattr(args, key, None)
        if given:
            paths[key] = given
    if not paths.get("clones") or not os.path.exists(paths["clones"]):
        raise InputError(f"clone table not found: {paths.get('clones')}")
    t0 = time.perf_counter()
    load_stats: dict = {}
    inp = load_bundle(paths, params, load_stats)
    log.info("loaded %d clones, %d fragments, %d overlaps", len(inp.clones), len(inp.fragments), len(inp.overlaps))
    res = run_pipeline(inp, params)
    for key in ("subcontigs", "components", "non_interval_components", "vertices_removed", "fragments_removed_fn", "contigs"):
        log.info("%s: %s", key, res.stats.get(key))
    res.stats.update({f"load_{k}": v for k, v in sorted(load_stats.items())})
    out = args.out or "assembly"
    paths_out = write_artifacts(res, inp, out, params)
    with open(os.path.join(out, "params.txt"), "w", encoding="utf-8", newline="\n") as fh:
        for k, v in asdict(params).items():
            fh.write(f"{k}={v}\n")
    log.info("wrote %d artifacts to %s in %.2fs", len(paths_out), out, time.perf_counter() - t0)
    return EXIT_OK


def cmd_simulate(args) -> int:
    values = _overrides(args)
    try:
        sp = SimParams.from_mapping(values)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"invalid simulation parameters: {exc}") from None
    for f in fields(sp):
        print(f"{f.name}={_fmt(getattr(sp, f.name))}")
    res = simulate(sp)
    out = args.out or "bundle"
    paths = res.write_bundle(out)
    log.info("wrote %d clones, %d fragments to %s", len(res.clones), len(res.fragments), out)
    for k in sorted(paths):
        log.debug("%s -> %s", k, paths[k])
    return EXIT_OK


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return getattr(v, "value", v) if not isinstance(v, (int, float, str)) else str(v)


def _load_layout(directory: str):
    path = os.path.join(directory, ARTIFACTS["layout"])
    if not os.path.exists(path):
        raise InputError(f"missing artifact: {path}")
    with open(path, encoding="utf-8") as fh:
        return read_layout(fh)


def _load_clones(path: str):
    _require(path, "clone table")
    with open(path, encoding="utf-8") as fh:
        clones, frags = parse_clone_table(fh)
    return {c.id: c for c in clones}, {f.id: f.length for f in frags}


def cmd_report(args) -> int:
    params = pipeline_params(args)
    contigs = _load_layout(args.assembly)
    clones, lengths = _load_clones(args.clones)
    _check_universe(contigs, lengths, args.assembly)
    spans = clone_spans_from_layout(contigs, lengths)
    rep = warp_report(spans, {c: cl.estimated_length for c, cl in clones.items()}, params)
    out = args.out or args.assembly
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "warp_report.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        write_warp_tsv({"assembly": rep}, fh)
    with open(os.path.join(out, "warp_report.txt"), "w", encoding="utf-8", newline="\n") as fh:
        write_warp_text(rep, fh, params)
    rows = summary_rows(contigs, clones)
    with open(os.path.join(out, "assembly_summary.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        write_summary(rows, fh)
    with open(os.path.join(out, "assembly_summary.txt"), "w", encoding="utf-8", newline="\n") as fh:
        _write_table(rows, fh)
    write_warp_text(rep, sys.stdout, params)
    return EXIT_OK


def _write_table(rows, fh) -> None:
    from .report import SUMMARY_COLUMNS

    table = [SUMMARY_COLUMNS] + [tuple(str(x) for x in r) for r in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(SUMMARY_COLUMNS))]
    for r in table:
        fh.write("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() + "\n")


def _check_universe(contigs, lengths, where) -> None:
    unknown = sorted({f for c in contigs for f, *_ in c.rows if f not in lengths})
    if unknown:
        raise InputError(f"{where}: fragments absent from the clone table: {unknown[:5]}")


def cmd_compare(args) -> int:
    params = pipeline_params(args)
    clones, lengths = _load_clones(args.clones)
    layouts = {}
    for name, d in (("A", args.assembly_a), ("B", args.assembly_b)):
        layouts[name] = _load_layout(d)
        _check_universe(layouts[name], lengths, d)
    est = {c: cl.estimated_length for c, cl in clones.items()}
    spans = {n: clone_spans_from_layout(ly, lengths) for n, ly in layouts.items()}
    common = set(spans["A"]) & set(spans["B"])
    if set(spans["A"]) != set(spans["B"]):
        print(f"warning: clone sets differ (A {len(spans['A'])}, B {len(spans['B'])}, shared {len(common)}); "
              "comparing the intersection", file=sys.stderr)
    reports = {n: warp_report({c: spans[n][c] for c in sorted(common)}, est, params) for n in ("A", "B")}
    out = sys.stdout
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        out = open(os.path.join(args.out, "comparison.tsv"), "w", encoding="utf-8", newline="\n")
    try:
        write_warp_tsv(reports, out)
        out.write("\n")
        out.write("metric\tA\tB\n")
        for n_label, fn in (("contigs", lambda ly: len(ly)),
                            ("fragments_used", lambda ly: sum(len(c.rows) for c in ly)),
                            ("clones_placed", lambda ly: len({r[1] for c in ly for r in c.rows}))):
            out.write(f"{n_label}\t{fn(layouts['A'])}\t{fn(layouts['B'])}\n")
        out.write(f"fragments\t{len(lengths)}\t{len(lengths)}\n")
        if args.truth:
            _require(args.truth, "truth file")
            with open(args.truth, encoding="utf-8") as fh:
                truth = GroundTruth.read(fh)
            bundle = args.bundle or os.path.dirname(os.path.abspath(args.truth))
            inp = load_bundle(bundle_paths(bundle), params)
            scores = {}
            for name, d in (("A", args.assembly_a), ("B", args.assembly_b)):
                scores[name] = dict(score_assembly(load_artifacts(d, inp, params), truth).as_rows())
            for k in scores["A"]:
                out.write(f"{k}\t{scores['A'][k]}\t{scores['B'][k]}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", metavar="FILE", help="flat key=value parameter file")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--verbose", "-v", action="count", default=0, help="per-step counts on stderr")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one parameter")

    p = argparse.ArgumentParser(prog="barnacle", description="Clone-based genome assembly.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("assemble", parents=[common], help="run the assembly pipeline on an input bundle")
    a.add_argument("bundle", nargs="?", help="bundle directory with the standard file names")
    a.add_argument("--clones", help="clone table")
    a.add_argument("--alignments", help="raw alignments TSV")
    a.add_argument("--orientation", help="orientation pairs TSV")
    a.add_argument("--nt-pairs", dest="nt_pairs", help="nt-pairs TSV")
    a.add_argument("--sequences", help="fragment sequences")
    a.set_defaults(func=cmd_assemble)

    s = sub.add_parser("simulate", parents=[common], help="write a synthetic bundle with ground truth")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", parents=[common], help="warp histogram and summary for an assembly")
    r.add_argument("assembly", help="assembly output directory")
    r.add_argument("--clones", required=True, help="clone table of the input")
    r.set_defaults(func=cmd_report)

    c = sub.add_parser("compare", parents=[common], help="compare two assemblies")
    c.add_argument("assembly_a")
    c.add_argument("assembly_b")
    c.add_argument("--clones", required=True, help="clone table shared by both")
    c.add_argument("--truth", help="truth.tsv from the simulator")
    c.add_argument("--bundle", help="input bundle (defaults to the truth file's directory)")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if not args.verbose else (logging.INFO if args.verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except (InputError, ParseError, ArtifactError, FileNotFoundError) as exc:
        print(f"barnacle {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"barnacle {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ResolutionError, AssertionError, RuntimeError) as exc:
        print(f"barnacle {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # a bug, not bad input
        log.debug("unexpected failure", exc_info=True)
        print(f"barnacle {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
