"""Command line front end.

All rational parameters cross this boundary as exact strings ("p/q" or
decimals); no floating point is parsed or printed. Exit codes: 0 for
pass/holds, 1 when a checked property fails, 2 for input errors, 3 when
exploration hit the state cap before a verdict.
"""

from __future__ import annotations

import argparse
import json
import sys

from .chain import (
    build_delta_graph,
    decompose,
    decomposition_dot,
    decomposition_report,
    refine_ladder,
)
from .errors import ChainShadowError, Inconclusive
from .rational import format_rational, parse_nonnegative
from .shadow import check_shadowing_property, check_slimit_property
from .system import generator_names, load_system, parse_generator_string
from .verify import GridEntry, default_grid, run_harness

DEFAULT_STATE_CAP = 1_000_000


def _rational_arg(text: str):
    try:
        return parse_nonnegative(text)
    except ChainShadowError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _rational_list_arg(text: str):
    return tuple(_rational_arg(part) for part in text.split(","))


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _add_common(sub: argparse.ArgumentParser, formats=("json", "table")) -> None:
    source = sub.add_mutually_exclusive_group(required=True)
    source.add_argument("--file", help="system description file (JSON)")
    source.add_argument(
        "--gen",
        help="generator shorthand name:arg:... ; known generators: "
        + ", ".join(generator_names()),
    )
    sub.add_argument("--format", choices=formats, default="json")
    sub.add_argument("--out", help="write the report here instead of stdout")
    sub.add_argument("--state-cap", type=_positive_int, default=DEFAULT_STATE_CAP)
    sub.add_argument("--workers", type=_positive_int, default=1)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainshadow",
        description="Exact chain-recurrence and shadowing analysis of finite systems.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    analyze = subs.add_parser(
        "analyze", help="chain components, flags, and the class order at one delta"
    )
    _add_common(analyze, formats=("json", "table", "dot"))
    analyze.add_argument("--delta", type=_rational_arg, required=True)
    analyze.set_defaults(handler=_cmd_analyze)

    shadow = subs.add_parser(
        "shadow", help="decide the shadowing or slimit property at (delta, eps)"
    )
    _add_common(shadow)
    shadow.add_argument("--property", choices=("shadowing", "slimit"), default="shadowing")
    shadow.add_argument("--delta", type=_rational_arg, required=True)
    shadow.add_argument("--eps", type=_rational_arg, required=True)
    shadow.set_defaults(handler=_cmd_shadow)

    ladder = subs.add_parser(
        "ladder", help="decompositions along a strictly decreasing delta list"
    )
    _add_common(ladder)
    ladder.add_argument(
        "--deltas", type=_rational_list_arg, required=True, help="comma separated, decreasing"
    )
    ladder.set_defaults(handler=_cmd_ladder)

    verify = subs.add_parser(
        "verify", help="run the theorem harness over a parameter grid"
    )
    _add_common(verify)
    verify.add_argument(
        "--deltas", type=_rational_list_arg, help="fine deltas (decreasing); default derived"
    )
    verify.add_argument("--eps", type=_rational_arg, help="fixed eps for every entry")
    verify.set_defaults(handler=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.handler(args)
    except Inconclusive as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return 3
    except ChainShadowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_entry() -> None:
    sys.exit(main())


# ---------------------------------------------------------------------------
# commands


def _cmd_analyze(args) -> int:
    system = _load(args)
    _warn_below_quantization(system, [args.delta])
    dec = decompose(build_delta_graph(system, args.delta))
    if args.format == "dot":
        radius = args.delta if args.delta > 0 else None
        text = decomposition_dot(dec, isolation_radius=radius)
    elif args.format == "table":
        text = _analyze_table(dec)
    else:
        text = _dumps(decomposition_report(dec))
    _emit(text, args.out)
    return 0


def _cmd_shadow(args) -> int:
    system = _load(args)
    _warn_below_quantization(system, [args.delta])
    check = check_slimit_property if args.property == "slimit" else check_shadowing_property
    verdict = check(
        system, args.delta, args.eps, state_cap=args.state_cap, workers=args.workers
    )
    text = _dumps(verdict.to_json()) if args.format == "json" else _shadow_table(verdict)
    _emit(text, args.out)
    return 0 if verdict.passed else 1


def _cmd_ladder(args) -> int:
    system = _load(args)
    _warn_below_quantization(system, args.deltas)
    ladder = refine_ladder(system, args.deltas)
    report = {
        "deltas": [format_rational(d) for d in ladder.deltas],
        "functional_threshold": (
            None if ladder.threshold is None else format_rational(ladder.threshold)
        ),
        "stabilized_at_level": ladder.stabilized_at,
        "levels": [
            {
                "delta": format_rational(level.delta),
                "cr_size": len(level.cr),
                "class_count": len(level.classes),
                "classes": [sorted(cls) for cls in level.classes],
            }
            for level in ladder.levels
        ],
        "refinement": [list(mapping) for mapping in ladder.refinement],
    }
    text = _dumps(report) if args.format == "json" else _ladder_table(report)
    _emit(text, args.out)
    return 0


def _cmd_verify(args) -> int:
    system = _load(args)
    if args.deltas:
        _warn_below_quantization(system, args.deltas)
        coarse = args.deltas[0]
        grid = [GridEntry(coarse, d, args.eps if args.eps is not None else d) for d in args.deltas]
    elif args.eps is not None:
        grid = [GridEntry(e.delta_coarse, e.delta_fine, args.eps) for e in default_grid(system)]
    else:
        grid = None
    report = run_harness(
        system,
        name=args.gen or args.file,
        grid=grid,
        state_cap=args.state_cap,
        workers=args.workers,
    )
    text = _dumps(report.to_json()) if args.format == "json" else _verify_table(report)
    _emit(text, args.out)
    return 0 if report.nonvacuous_failures == 0 else 1


# ---------------------------------------------------------------------------
# helpers


def _load(args):
    if args.gen:
        return parse_generator_string(args.gen)
    return load_system(args.file)


def _warn_below_quantization(system, deltas) -> None:
    bound = system.quantization
    if bound is None:
        return
    for delta in deltas:
        if delta < bound:
            print(
                f"warning: delta {format_rational(delta)} is below the grid "
                f"quantization bound {format_rational(bound)}",
                file=sys.stderr,
            )


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _analyze_table(dec) -> str:
    report = decomposition_report(dec)
    lines = [
        f"delta: {report['delta']}",
        f"chain recurrent points: {report['cr_size']}",
        f"classes: {len(report['classes'])}",
    ]
    for cls in report["classes"]:
        flags = [
            name
            for name in ("terminal", "initial")
            if cls[name]
        ]
        sep = cls["separation"] if cls["separation"] is not None else "-"
        lines.append(
            f"  C{cls['id']}: points={cls['points']} flags={','.join(flags) or '-'} sep={sep}"
        )
    for low, high in report["order"]:
        lines.append(f"  C{low} <= C{high}")
    return "\n".join(lines) + "\n"


def _shadow_table(verdict) -> str:
    data = verdict.to_json()
    lines = [
        f"property: {data['property']}",
        f"delta: {data['delta']}  eps: {data['eps']}",
        f"pass: {'yes' if data['pass'] else 'no'}",
        f"states explored: {data['states_explored']}",
    ]
    if data["witness"] is not None:
        w = data["witness"]
        tail = f" tail_start={w['tail_start']}" if "tail_start" in w else ""
        lines.append(f"witness: points={w['points']} kind={w['kind']}{tail}")
    return "\n".join(lines) + "\n"


def _ladder_table(report) -> str:
    lines = [f"deltas: {', '.join(report['deltas'])}"]
    for level in report["levels"]:
        lines.append(
            f"  delta={level['delta']}: {level['class_count']} classes, "
            f"{level['cr_size']} recurrent points"
        )
    threshold = report["functional_threshold"]
    lines.append(f"functional threshold: {threshold if threshold is not None else '-'}")
    stabilized = report["stabilized_at_level"]
    lines.append(
        "stabilized at level: " + (str(stabilized) if stabilized is not None else "never")
    )
    return "\n".join(lines) + "\n"


def _verify_table(report) -> str:
    data = report.to_json()
    lines = [f"system: {data['system']}"]
    for entry in data["entries"]:
        header = (
            f"[dc={entry['delta_coarse']} df={entry['delta_fine']} eps={entry['eps']}]"
        )
        for result in entry["results"]:
            lines.append(f"  {header} {result['theorem']}: {result['status']}")
    lines.append(f"nonvacuous failures: {data['nonvacuous_failures']}")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    console_entry()
