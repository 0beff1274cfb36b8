"""``enfcheck`` command line.

Exit codes: 0 no interference (or success), 1 interference found (or a
catalog mismatch), 2 usage, parse, validation or bound errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import catalog, kernels
from .compose import DEFAULT_MAX_STATES, ExplorationBoundExceeded, explore
from .dot import export_dot
from .dsl import load, print_document
from .edit2io import CompletionPolicy, transform
from .mcheck import verify
from .model import ModelError, state_label
from .report import emit_report_json, emit_report_text, report_dict
from .simulate import run_network_random

EXIT_OK, EXIT_INTERFERENCE, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text.rstrip("\n"))


def _io_text(ioa) -> str:
    lines = [f"io_automaton {ioa.name}"]
    lines.append(f"  start {', '.join(state_label(s) for s in ioa.start)}")
    lines.append(f"  inputs {', '.join(sorted(ioa.inputs))}")
    lines.append(f"  outputs {', '.join(sorted(ioa.outputs))}")
    for s in ioa.states:
        mark = " (committed)" if ioa.is_committed(s) else ""
        lines.append(f"  state {state_label(s)}{mark}")
    for t in ioa.transitions:
        lines.append(f"  {state_label(t.source)} --{t.action}--> {state_label(t.target)}")
    lines.append(f"  {len(ioa.states)} states, {len(ioa.committed)} committed, {len(ioa.transitions)} transitions")
    return "\n".join(lines)


def cmd_transform(args) -> int:
    doc = load(args.file)
    ioa = transform(doc.automaton(args.name), args.completion)
    for w in ioa.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(export_dot(ioa) if args.format == "dot" else _io_text(ioa), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = load(args.file)
    net = doc.build(args.network, args.completion)
    report = verify(net, doc.policies_of(args.network), max_states=args.max_states)
    if args.format == "json":
        _emit(emit_report_json(report, include_runtime=not args.no_timing), args.output)
    else:
        _emit(emit_report_text(report), args.output)
    return EXIT_INTERFERENCE if report.interference else EXIT_OK


def cmd_simulate(args) -> int:
    if args.steps < 0:
        raise UsageError("--steps must be non-negative")
    doc = load(args.file)
    net = doc.build(args.network, args.completion)
    walk = run_network_random(net, args.seed, args.steps)
    if args.format == "json":
        _emit(json.dumps({"seed": args.seed, "outcome": walk.outcome, "trace": list(walk.trace),
                          "delivered": list(walk.delivered)}, separators=(",", ":")), args.output)
    else:
        lines = [f"seed {args.seed}, {len(walk.trace)} steps, outcome {walk.outcome}"]
        lines += [f"  {i:>4}  {label}" for i, label in enumerate(walk.trace, start=1)]
        _emit("\n".join(lines), args.output)
    return EXIT_OK


def cmd_catalog(args) -> int:
    if args.list:
        if args.format == "json":
            cases = [{"api": c.api, "package": c.package, "expected": c.expected,
                      "policies": [str(t) for t in c.templates]} for c in catalog.list_cases()]
            _emit(json.dumps(cases, separators=(",", ":")), args.output)
        else:
            _emit(catalog.format_list(), args.output)
        return EXIT_OK
    if args.emit:
        _emit(print_document(catalog.case_document(catalog.case(args.emit))), args.output)
        return EXIT_OK
    if args.run_table1:
        table = catalog.run_table1(max_states=args.max_states)
        if args.format == "json":
            rows = [{"api": r.api, "package": r.package, "expected": r.expected, "verdict": r.verdict,
                     "evidence": r.evidence,
                     "report": report_dict(r.report, not args.no_timing) if r.report else None}
                    for r in table.rows]
            checks = [{"check": c.description, "expected": c.expected, "verdict": c.verdict,
                       "evidence": c.evidence} for c in table.checks]
            summary = f"{table.interferences}/{len(table.rows)} interferences"
            _emit(json.dumps({"rows": rows, "checks": checks, "summary": summary}, separators=(",", ":")),
                  args.output)
        else:
            _emit(catalog.format_table(table), args.output)
        if any(r.verdict == "inconclusive" for r in table.rows):
            return EXIT_ERROR
        return EXIT_OK if table.all_match else EXIT_INTERFERENCE
    raise UsageError("catalog needs one of --list, --run-table1 or --emit API")


def cmd_export_dot(args) -> int:
    doc = load(args.file)
    name = args.name
    if name in doc.networks:
        net = doc.build(name, args.completion)
        target = explore(net, args.max_states)
    elif name in doc.edit_automata:
        ea = doc.edit_automata[name]
        target = transform(ea, args.completion or CompletionPolicy.IDENTITY) if args.io else ea
    elif name in doc.frameworks:
        target = doc.frameworks[name]
    else:
        raise ModelError(f"no edit automaton, lts or network named {name!r}")
    _emit(export_dot(target), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enfcheck", description="Detect interference between runtime enforcers.")
    parser.add_argument("--backend", choices=kernels.available(), help="kernel implementation (default: fastest)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p, network=True):
        p.add_argument("-o", "--output", help="write to this file instead of standard output")
        p.add_argument("--completion", type=CompletionPolicy.parse, default=None if network else CompletionPolicy.IDENTITY,
                       choices=list(CompletionPolicy), metavar="{identity,strict}",
                       help="input completion of enforcers" + (" (default: the network's)" if network else ""))

    p = sub.add_parser("transform", help="turn an edit automaton into an I/O automaton")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--format", choices=["text", "dot"], default="text")
    common(p, network=False)
    p.set_defaults(func=cmd_transform, usage=p.format_usage)

    p = sub.add_parser("verify", help="check a network for interference")
    p.add_argument("file")
    p.add_argument("network")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.add_argument("--no-timing", action="store_true", help="omit runtimeMs from JSON output")
    common(p)
    p.set_defaults(func=cmd_verify, usage=p.format_usage)

    p = sub.add_parser("simulate", help="random walk over a network")
    p.add_argument("file")
    p.add_argument("network")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--format", choices=["text", "json"], default="text")
    common(p)
    p.set_defaults(func=cmd_simulate, usage=p.format_usage)

    p = sub.add_parser("catalog", help="the bundled Android case study")
    p.add_argument("--list", action="store_true", help="list the cases and their policies")
    p.add_argument("--run-table1", action="store_true", help="verify every case against its expected verdict")
    p.add_argument("--emit", metavar="API", help="print a self-contained .enf document for one case")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.add_argument("--no-timing", action="store_true", help="omit runtimeMs from JSON output")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_catalog, usage=p.format_usage)

    p = sub.add_parser("export-dot", help="render an automaton or a network's state graph as DOT")
    p.add_argument("file")
    p.add_argument("name", help="edit automaton, lts or network")
    p.add_argument("--io", action="store_true", help="render an edit automaton after transformation")
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    common(p)
    p.set_defaults(func=cmd_export_dot, usage=p.format_usage)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    if args.command == "transform" and args.completion is None:
        args.completion = CompletionPolicy.IDENTITY
    try:
        if args.backend:
            kernels.set_backend(args.backend)
        return args.func(args)
    except UsageError as exc:
        print(args.usage(), end="", file=sys.stderr)
        print(f"enfcheck {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ExplorationBoundExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ModelError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
