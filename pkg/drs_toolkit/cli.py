"""Command-line entry point of the DRS toolkit."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any, NoReturn

from .config import RunConfig
from .const import (
    CONF_INVENTORY,
    CONF_JOBS,
    CONF_LANGUAGES,
    CONF_MASK_RATE,
    CONF_RESTARTS,
    CONF_SEED,
    CONF_STRICT_SCOPE,
    CROSS_DRS_BOTH,
    DEFAULT_ANNOTATION_SAMPLE,
    DEFAULT_POOL_TIERS,
    DOMAIN,
    EXIT_DATA,
    EXIT_OK,
    EXIT_USAGE,
    LANGUAGES,
    NAME,
    PAIR_BPT,
    PAIR_FT_BOTH,
    PAIR_FT_GENERATE,
    PAIR_FT_PARSE,
    PAIR_SPT_CROSS,
    PAIR_SPT_MONO,
    STAGE_TIERS,
    TIERS,
    VERSION,
)
from .coordinator import DrsToolkitCoordinator, read_lines
from .exceptions import ConfigError, DrsToolkitError
from .graph import Drg, IllFormedReport
from .penman_codec import PenmanGraph, write_penman
from .pretrain_data import CROSS_DRS_MODES

_LOGGER = logging.getLogger(__name__)

PROG = DOMAIN.replace("_", "-")

_VERBOSITY = {0: logging.WARNING, 1: logging.INFO, 2: logging.DEBUG}

EMIT_STAGE_NAMES = {
    "bpt": PAIR_BPT,
    "spt-mono": PAIR_SPT_MONO,
    "spt-cross": PAIR_SPT_CROSS,
    "ft-parse": PAIR_FT_PARSE,
    "ft-generate": PAIR_FT_GENERATE,
    "ft-both": PAIR_FT_BOTH,
}

Handler = Callable[[DrsToolkitCoordinator, argparse.Namespace], int]


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser that exits with the usage error code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _language_target(value: str) -> tuple[str, int]:
    """Parse LANG=N."""
    lang, sep, count = value.partition("=")
    if not sep or lang not in LANGUAGES or not count.isdigit():
        raise argparse.ArgumentTypeError(
            f"expected LANG=N with LANG in {LANGUAGES}, got {value!r}"
        )
    return lang, int(count)


def _print_json(data: Any) -> None:
    print(json.dumps(data, indent=2, ensure_ascii=False))


def _table(rows: Sequence[Sequence[str]]) -> str:
    """Left-align the first column and right-align the rest."""
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(
            [row[0].ljust(widths[0]), *(cell.rjust(w) for cell, w in zip(row[1:], widths[1:]))]
        ).rstrip()
        for row in rows
    )


def _cmd_check(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    result = coordinator.check(read_lines(args.file))
    if args.json:
        _print_json(result.to_dict())
        return EXIT_OK
    for line, report in result.failures:
        print(f"{args.file}:{line}: {report.category} at {report.position}: {report.detail}")
    print(f"{result.n_lines} lines, {len(result.failures)} ill-formed (ERR {result.err:.1f})")
    return EXIT_OK


def _cmd_err(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    lines = read_lines(args.file)
    value = coordinator.err(lines)
    if args.json:
        _print_json({"err": value, "n_lines": len(lines)})
    else:
        print(f"ERR: {value:.1f}")
    return EXIT_OK


def _cmd_penman(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    if args.drg_json:
        return _write_drg_json(coordinator, args)
    graphs = coordinator.penman(read_lines(args.file))
    converted: list[tuple[str, PenmanGraph]] = [
        (graph_id, graph) for graph_id, graph in graphs if isinstance(graph, PenmanGraph)
    ]
    if args.output:
        count = write_penman(converted, Path(args.output), one_line=args.one_line)
        if not args.json:
            print(f"Wrote {count} graphs to {args.output} ({len(graphs) - count} ill-formed)")
    if args.json:
        _print_json(
            [
                {"id": graph_id, "ill_formed": graph.to_dict()}
                if isinstance(graph, IllFormedReport)
                else {"id": graph_id, "penman": graph.to_text(one_line=True)}
                for graph_id, graph in graphs
            ]
        )
    elif not args.output:
        for graph_id, graph in converted:
            if args.one_line:
                print(graph.to_text(one_line=True))
            else:
                print(f"# ::id {graph_id}\n{graph.to_text(one_line=False)}\n")
    return EXIT_OK


def _write_drg_json(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    exported = [
        graph.to_json()
        for _, graph in coordinator.graphs(read_lines(args.file))
        if isinstance(graph, Drg)
    ]
    if args.output:
        Path(args.output).write_text("".join(f"{line}\n" for line in exported), encoding="utf-8")
        print(f"Wrote {len(exported)} graphs to {args.output}")
    else:
        for line in exported:
            print(line)
    return EXIT_OK


def _cmd_smatch(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    result = coordinator.smatch(args.system, args.gold)
    if args.json:
        _print_json(result.to_dict(per_doc=args.per_doc))
        return EXIT_OK
    if args.per_doc:
        rows = [["Line", "Matched", "System", "Gold", "F1"]]
        for doc in result.documents:
            f1 = doc.report.category if doc.report else f"{100 * doc.f1:.2f}"
            counts = (doc.index + 1, doc.matched, doc.total_system, doc.total_gold)
            rows.append([*map(str, counts), f1])
        print(_table(rows))
        print()
    print(
        _table(
            [
                ["Documents", f"{result.n_docs} ({result.n_ill_formed} ill-formed)"],
                ["Precision", f"{100 * result.score.precision:.2f}"],
                ["Recall", f"{100 * result.score.recall:.2f}"],
                ["F1", f"{100 * result.score.f1:.2f}"],
                ["ERR", f"{result.err:.1f}"],
            ]
        )
    )
    return EXIT_OK


def _cmd_diff(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    results = coordinator.diff_files(args.system, args.gold)
    if args.json:
        _print_json(
            [
                {"line": line, "ill_formed": result.to_dict()}
                if isinstance(result, IllFormedReport)
                else {"line": line, **result.to_dict()}
                for line, result in results
            ]
        )
        return EXIT_OK
    for line, result in results:
        if isinstance(result, IllFormedReport):
            print(f"Line {line}: ill-formed ({result.category})")
            continue
        for finding in result:
            system, gold = finding.system or "-", finding.gold or "-"
            print(f"Line {line}: {finding.category}  {system} -> {gold}")
    return EXIT_OK


def _cmd_repair(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    results = coordinator.repair(read_lines(args.file))
    repaired = sum(1 for _, fixes in results if fixes)
    for line, (_, fixes) in enumerate(results, start=1):
        for fix in fixes:
            _LOGGER.info("Line %d: %s", line, fix)
    if args.output:
        Path(args.output).write_text(
            "".join(f"{line}\n" for line, _ in results), encoding="utf-8"
        )
    if args.json:
        _print_json(
            {
                "n_lines": len(results),
                "n_repaired": repaired,
                "lines": [
                    {"line": number, "repaired": line, "fixes": fixes}
                    for number, (line, fixes) in enumerate(results, start=1)
                ],
            }
        )
    elif args.output:
        print(f"Repaired {repaired} of {len(results)} lines")
    else:
        for line, _ in results:
            print(line)
    return EXIT_OK


def _cmd_bleu(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    result = coordinator.bleu(args.hypotheses, args.references)
    if args.json:
        _print_json(result.to_dict())
        return EXIT_OK
    precisions = "/".join(f"{100 * p:.1f}" for p in result.precisions)
    print(
        f"BLEU = {result.score:.2f} {precisions} (BP = {result.brevity_penalty:.3f}, "
        f"hyp_len = {result.hyp_len}, ref_len = {result.ref_len})"
    )
    return EXIT_OK


def _cmd_correlate(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    results = coordinator.correlate(args.tsv)
    if args.json:
        _print_json({name: result.to_dict() for name, result in results.items()})
        return EXIT_OK
    rows = [["Metric", "r", "p", "n1", "n0"]]
    rows.extend(
        [name, f"{result.r:.4f}", f"{result.p_value:.3g}", str(result.n1), str(result.n0)]
        for name, result in results.items()
    )
    print(_table(rows))
    return EXIT_OK


def _cmd_sample(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    rows, perfect = coordinator.sample(args.tsv, args.n)
    if args.json:
        _print_json(
            {
                "perfect_rate": perfect,
                "sample": [
                    {"id": row.id, "hypothesis": row.hypothesis, "reference": row.reference}
                    for row in rows
                ],
            }
        )
        return EXIT_OK
    print(f"Perfect outputs: {perfect:.1f}%")
    for row in rows:
        print(f"{row.id}\t{row.hypothesis}\t{row.reference}")
    return EXIT_OK


def _cmd_stats(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    result = coordinator.stats(args.root)
    if args.json:
        _print_json(result.to_dict())
    else:
        print(result.render_table())
    return EXIT_OK


def _cmd_filter(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    corpus, removed = coordinator.filter(args.root, args.output)
    if args.json:
        _print_json({"kept": len(corpus), "removed": [doc.to_dict() for doc in removed]})
        return EXIT_OK
    for item in removed:
        doc = item.document
        print(f"{doc.lang}/{doc.tier}/{doc.split} {doc.id}: {item.report.category}")
    print(f"Kept {len(corpus)} documents, removed {len(removed)}")
    return EXIT_OK


def _cmd_upsample(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    written = coordinator.upsample(
        args.root, args.output, args.stage, dict(args.target or ()), args.pool_tiers
    )
    if args.json:
        counts = {"/".join(key): n for key, n in written.counts().items()}
        _print_json({"documents": len(written), "counts": counts})
    else:
        print(f"Wrote {len(written)} documents to {args.output}")
    return EXIT_OK


def _cmd_emit(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    count = coordinator.emit(
        args.root,
        args.output,
        EMIT_STAGE_NAMES[args.stage],
        span_masking=args.span_masking,
        cross_drs=args.cross_drs,
    )
    if args.json:
        _print_json({"stage": EMIT_STAGE_NAMES[args.stage], "pairs": count})
    else:
        print(f"Wrote {count} pairs to {args.output}")
    return EXIT_OK


def _cmd_vocab(coordinator: DrsToolkitCoordinator, args: argparse.Namespace) -> int:
    tokens = coordinator.vocab(args.vocab, args.corpora, args.special or ())
    if args.output:
        Path(args.output).write_text("".join(f"{token}\n" for token in tokens), encoding="utf-8")
    if args.json:
        _print_json({"size": len(tokens), "tokens": tokens})
    elif args.output:
        print(f"Kept {len(tokens)} tokens")
    else:
        for token in tokens:
            print(token)
    return EXIT_OK


def _common_options() -> argparse.ArgumentParser:
    """Return the options shared by every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("common options")
    group.add_argument("--json", action="store_true", help="Write JSON to stdout")
    group.add_argument(
        "-v", "--verbose", action="count", default=0, help="Log more (-v info, -vv debug)"
    )
    group.add_argument(
        "--config", metavar="FILE", help="YAML symbol inventory (operators and relations)"
    )
    group.add_argument("--seed", type=int, help="Random seed (default 0)")
    group.add_argument("--restarts", type=int, help="Smatch hill-climbing restarts (default 4)")
    group.add_argument("--jobs", type=int, metavar="N", help="Worker processes (default 1)")
    group.add_argument(
        "--mask-rate", type=float, metavar="RATE", help="Masking rate (default 0.35)"
    )
    group.add_argument(
        "--lang",
        action="append",
        choices=LANGUAGES,
        help="Restrict to a language; repeat for several",
    )
    group.add_argument(
        "--strict-scope",
        action="store_true",
        default=None,
        help="Reject a discourse relation with no following entity",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per pipeline step."""
    parser = _ArgumentParser(
        prog=PROG, description=f"{NAME}: validate, convert, score and prepare DRS training data."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    common = _common_options()

    def _add(name: str, handler: Handler, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        return sub

    sub = _add("check", _cmd_check, "Report lines that cannot be converted into graphs")
    sub.add_argument("file", help="DRS file, one sequence per line")

    sub = _add("err", _cmd_err, "Print the ill-formed rate of a DRS file")
    sub.add_argument("file", help="DRS file, one sequence per line")

    sub = _add("penman", _cmd_penman, "Convert DRS lines to Penman graphs")
    sub.add_argument("file", help="DRS file, one sequence per line")
    sub.add_argument("-o", "--output", metavar="FILE", help="Write graphs to FILE")
    sub.add_argument("--one-line", action="store_true", help="One graph per line")
    sub.add_argument(
        "--drg-json", action="store_true", help="Export the graphs as JSON, one per line"
    )

    sub = _add("smatch", _cmd_smatch, "Score system DRSs against gold DRSs")
    sub.add_argument("system", help="System DRS file")
    sub.add_argument("gold", help="Gold DRS file")
    sub.add_argument("--per-doc", action="store_true", help="Also report each line pair")

    sub = _add("diff", _cmd_diff, "Classify the differences of aligned DRS lines")
    sub.add_argument("system", help="System DRS file")
    sub.add_argument("gold", help="Gold DRS file")

    sub = _add("repair", _cmd_repair, "Fix whitespace errors in DRS lines")
    sub.add_argument("file", help="DRS file, one sequence per line")
    sub.add_argument("-o", "--output", metavar="FILE", help="Write repaired lines to FILE")

    sub = _add("bleu", _cmd_bleu, "Corpus BLEU of generated text")
    sub.add_argument("hypotheses", help="Generated text, one sentence per line")
    sub.add_argument("references", help="Reference text, one sentence per line")

    sub = _add("correlate", _cmd_correlate, "Correlate metrics with human labels")
    sub.add_argument("tsv", help="id, hypothesis, reference, label[, metrics...] rows")

    sub = _add("sample", _cmd_sample, "Sample imperfect outputs for annotation")
    sub.add_argument("tsv", help="id, hypothesis, reference rows")
    sub.add_argument("-n", type=int, default=DEFAULT_ANNOTATION_SAMPLE, help="Sample size")

    sub = _add("stats", _cmd_stats, "Count documents by language, tier and split")
    sub.add_argument("root", help="Corpus root directory")

    sub = _add("filter", _cmd_filter, "Drop documents whose DRS cannot become a graph")
    sub.add_argument("root", help="Corpus root directory")
    sub.add_argument("output", help="Output corpus root")

    sub = _add("upsample", _cmd_upsample, "Write a stage's documents with upsampling")
    sub.add_argument("root", help="Corpus root directory")
    sub.add_argument("output", help="Output corpus root")
    sub.add_argument("--stage", required=True, choices=sorted(STAGE_TIERS), help="Training stage")
    sub.add_argument(
        "--target",
        action="append",
        type=_language_target,
        metavar="LANG=N",
        help="Upsample LANG to N documents; repeat for several",
    )
    sub.add_argument(
        "--pool-tiers",
        nargs="+",
        choices=TIERS,
        default=list(DEFAULT_POOL_TIERS),
        help="Tiers replicated when upsampling",
    )

    sub = _add("emit", _cmd_emit, "Write the training pairs of one stage as TSV")
    sub.add_argument("root", help="Corpus root directory")
    sub.add_argument("output", help="Output TSV file")
    sub.add_argument("--stage", required=True, choices=list(EMIT_STAGE_NAMES), help="Pair type")
    sub.add_argument("--span-masking", action="store_true", help="Mask Poisson-length spans")
    sub.add_argument(
        "--cross-drs",
        choices=CROSS_DRS_MODES,
        default=CROSS_DRS_BOTH,
        help="DRS-side cross-lingual pairs",
    )

    sub = _add("vocab", _cmd_vocab, "Filter a vocabulary by tokenized corpora")
    sub.add_argument("vocab", help="Base vocabulary, token first on each line")
    sub.add_argument("corpora", nargs="+", help="Tokenized corpus files")
    sub.add_argument(
        "--special", action="append", metavar="TOKEN", help="Always keep TOKEN; repeatable"
    )
    sub.add_argument("-o", "--output", metavar="FILE", help="Write the vocabulary to FILE")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        format="%(levelname)s: %(message)s",
        level=_VERBOSITY[min(args.verbose, 2)],
        stream=sys.stderr,
    )

    flags = {
        CONF_SEED: args.seed,
        CONF_RESTARTS: args.restarts,
        CONF_MASK_RATE: args.mask_rate,
        CONF_JOBS: args.jobs,
        CONF_LANGUAGES: args.lang,
        CONF_INVENTORY: args.config,
        CONF_STRICT_SCOPE: args.strict_scope,
    }
    try:
        config = RunConfig.from_sources(flags)
        return args.handler(DrsToolkitCoordinator(config), args)
    except ConfigError as err:
        print(f"{PROG}: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DrsToolkitError as err:
        _LOGGER.debug("%s failed", args.command, exc_info=True)
        print(f"{PROG}: {err}", file=sys.stderr)
        return EXIT_DATA
