"""Command-line front end.

Subcommands mirror the pipeline stages (encode, fold, synth, load,
u-intro, run) plus the design-check and query utilities.  Exit codes
are stable: 0 ok, 2 input contract violation, 3 integrity violation,
4 capacity overrun.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import PipelineError
from .fd import parse_fds
from .pipeline import (
    DEFAULT_CAP_ATTRS,
    DEFAULT_CAP_WORLDS,
    check_schema,
    format_fd,
    load_store,
    stage_encode,
    stage_fold,
    stage_load,
    stage_run,
    stage_synth,
    stage_u_intro,
)
from .queries import run_query
from .synthesis import schema_from_json
from .urelations import URelation, WorldTable, confidence, enumerate_worlds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypc",
        description="Compile equation-system hypotheses into FDs, schemas, "
        "and uncertain relational data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="structure JSON -> FD file + classification")
    p.add_argument("structure")
    p.add_argument("--out", default=".")

    p = sub.add_parser("fold", help="FD file -> folded FD file")
    p.add_argument("fds")
    p.add_argument("--out", default=".")

    p = sub.add_parser("synth", help="FD file -> schema JSON + check report")
    p.add_argument("fds")
    p.add_argument("--out", default=".")
    p.add_argument("--force-lossless", action="store_true")
    p.add_argument("--cap-attrs", type=int, default=DEFAULT_CAP_ATTRS)

    p = sub.add_parser("load", help="trial CSVs -> integrity-checked store")
    p.add_argument("csvs", nargs="+")
    p.add_argument("--schema", required=True)
    p.add_argument("--hypothesis", required=True)
    p.add_argument("--out", default=".")

    p = sub.add_parser("u-intro", help="store + H0 -> U-relation CSVs + world table")
    p.add_argument("--store", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--h0", required=True)
    p.add_argument("--out", default=".")

    p = sub.add_parser("check", help="print design verdicts for a schema")
    p.add_argument("schema")
    p.add_argument("fds")
    p.add_argument("--cap-attrs", type=int, default=DEFAULT_CAP_ATTRS)

    p = sub.add_parser("query", help="evaluate a query file over a U-relation dir")
    p.add_argument("dbdir")
    p.add_argument("queryfile")
    p.add_argument("--conf", action="store_true")
    p.add_argument("--worlds", action="store_true")
    p.add_argument("--cap-worlds", type=int, default=DEFAULT_CAP_WORLDS)
    p.add_argument("--out")

    p = sub.add_parser("run", help="whole pipeline from a config JSON")
    p.add_argument("config")
    p.add_argument("--out", default=".")
    p.add_argument("--force-lossless", action="store_true")
    p.add_argument("--cap-attrs", type=int, default=DEFAULT_CAP_ATTRS)

    return parser


def _cmd_encode(args) -> int:
    result = stage_encode(args.structure, args.out)
    print(result["fds"])
    print(result["classification"])
    return 0


def _cmd_fold(args) -> int:
    result = stage_fold(args.fds, args.out)
    print(result["fds"])
    return 0


def _cmd_synth(args) -> int:
    result = stage_synth(args.fds, args.out, args.force_lossless, args.cap_attrs)
    print(result["schema_path"])
    print(result["check_path"])
    _print_verdicts(result["verdicts"])
    return 0


def _cmd_load(args) -> int:
    result = stage_load(args.schema, args.csvs, args.hypothesis, args.out)
    print(result["store_path"])
    return 0


def _cmd_u_intro(args) -> int:
    store = load_store(args.store)
    sigma = parse_fds(Path(args.sigma).read_text(encoding="utf-8"))
    result = stage_u_intro(store, sigma, args.h0, args.out)
    for path in result["files"]:
        print(path)
    return 0


def _print_verdicts(verdicts: dict) -> None:
    for key in ("bcnf", "3nf", "preserves", "lossless"):
        value = verdicts[key]
        shown = "unknown" if value is None else str(value).lower()
        witness = verdicts.get(f"{key}_witness")
        if witness:
            shown += f" (witness: {witness['scheme']}, {witness['fd']})"
        print(f"{key}: {shown}")


def _cmd_check(args) -> int:
    sigma = parse_fds(Path(args.fds).read_text(encoding="utf-8"))
    schema = schema_from_json(
        Path(args.schema).read_text(encoding="utf-8"), sigma
    )
    _print_verdicts(check_schema(schema, sigma, args.cap_attrs))
    return 0


def _load_udb(dbdir: Path) -> tuple[dict[str, URelation], WorldTable]:
    relations = {}
    world = WorldTable()
    for path in sorted(dbdir.glob("*.csv")):
        if path.name == "W.csv":
            world = WorldTable.from_csv(path.read_text(encoding="utf-8"))
            continue
        rel = URelation.from_csv(path.stem, path.read_text(encoding="utf-8"))
        relations[rel.name] = rel
    return relations, world


def _cmd_query(args) -> int:
    dbdir = Path(args.dbdir)
    relations, world = _load_udb(dbdir)
    result = run_query(Path(args.queryfile).read_text(encoding="utf-8"), relations)
    text = result.to_csv()
    if args.conf:
        lines = text.splitlines()
        out_lines = [lines[0] + ",conf"]
        for (conds, data), line in zip(result.rows, lines[1:]):
            row_rel = URelation(result.name, result.data_cols, ((conds, data),))
            c = confidence(row_rel, data, world, cap=args.cap_worlds)
            out_lines.append(f"{line},{repr(c)}")
        text = "\n".join(out_lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(args.out)
    else:
        sys.stdout.write(text)
    if args.worlds:
        for w in enumerate_worlds([result], world, cap=args.cap_worlds):
            theta = " ".join(f"{v}={d}" for v, d in w.assignment.items())
            print(f"# world {theta} Pr={w.probability!r}")
            for tup in sorted(w.relations[result.name]):
                print(",".join(tup))
    return 0


def _cmd_run(args) -> int:
    result = stage_run(args.config, args.out, args.force_lossless, args.cap_attrs)
    print(result["manifest_path"])
    return 0


_COMMANDS = {
    "encode": _cmd_encode,
    "fold": _cmd_fold,
    "synth": _cmd_synth,
    "load": _cmd_load,
    "u-intro": _cmd_u_intro,
    "check": _cmd_check,
    "query": _cmd_query,
    "run": _cmd_run,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
