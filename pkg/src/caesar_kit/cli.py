"""``caesar`` command-line front end.

Exit status: 0 on success (warnings allowed), 1 on parse or validation
errors, 2 on usage, I/O or unknown-acronym errors.  Diagnostics go to
standard error; payloads go to standard output or ``--out``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from caesar_kit import __version__
from caesar_kit.analysis import evolution, series_to_csv, series_to_dict, stats
from caesar_kit.chart import evolution_svg
from caesar_kit.diagnostics import Diagnostic, has_errors, sort_diagnostics, use_color
from caesar_kit.interchange import emit_dsl, from_json, to_json
from caesar_kit.model import Corpus
from caesar_kit.parser import parse_corpus
from caesar_kit.render import render_family_report, render_study
from caesar_kit.validation import validate

EXIT_OK = 0
EXIT_ERRORS = 1
EXIT_USAGE = 2


class _Abort(Exception):
    def __init__(self, status: int, message: str | None = None) -> None:
        super().__init__(message)
        self.status = status
        self.message = message


def _print_diagnostics(diags: list[Diagnostic]) -> None:
    color = use_color(sys.stderr)
    for d in sort_diagnostics(diags):
        print(d.render(color), file=sys.stderr)


def _load(files, require_valid: bool = True) -> Corpus:
    corpus, diags = parse_corpus(files)
    if any(d.code == "E010" for d in diags):
        _print_diagnostics(diags)
        raise _Abort(EXIT_USAGE)
    if not has_errors(diags):
        diags = diags + validate(corpus)
    _print_diagnostics(diags)
    if has_errors(diags) and require_valid:
        raise _Abort(EXIT_ERRORS)
    return corpus


def write_atomic(path: str | None, payload: str) -> None:
    """Write ``payload`` to ``path`` via a temp file and rename, or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(payload)
        sys.stdout.flush()
        return
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _family(corpus: Corpus, acronym: str):
    fam = corpus.family(acronym)
    if fam is None:
        raise _Abort(EXIT_USAGE, f"unknown family acronym {acronym!r}")
    return fam


def cmd_check(args) -> str | None:
    _load(args.files)
    return None


def cmd_stats(args) -> str:
    result = stats(_load(args.files))
    if args.format == "json":
        return json.dumps(result.as_dict(), indent=2) + "\n"
    return result.to_table()


def cmd_render(args) -> str:
    corpus = _load(args.files)
    found = corpus.locate(args.study)
    if found is None:
        raise _Abort(EXIT_USAGE, f"unknown study acronym {args.study!r}")
    family, _ = found
    return render_study(family, args.study, args.format)


def cmd_report(args) -> str:
    corpus = _load(args.files)
    return render_family_report(_family(corpus, args.family), args.format)


def cmd_evolution(args) -> str:
    corpus = _load(args.files)
    series = evolution(_family(corpus, args.family))
    if args.format == "csv":
        return series_to_csv(series)
    if args.format == "json":
        return json.dumps(series_to_dict(series), indent=2) + "\n"
    return evolution_svg(series, args.width, args.height)


def cmd_export(args) -> str:
    return to_json(_load(args.files))


def cmd_import(args) -> str:
    try:
        text = Path(args.file).read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _Abort(EXIT_USAGE, f"{args.file}: cannot read file: {exc}") from None
    corpus, diags = from_json(text, args.file)
    _print_diagnostics(diags)
    if corpus is None or has_errors(diags):
        raise _Abort(EXIT_ERRORS)
    return emit_dsl(corpus)


def _positive_size(text: str) -> int:
    value = int(text)
    if value < 200:
        raise argparse.ArgumentTypeError("must be at least 200")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caesar",
        description="Specify, validate, report and chart replication changes in families of experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def files(p):
        p.add_argument("files", nargs="+", metavar="FILE", help="family specification files")

    def out(p):
        p.add_argument("--out", metavar="PATH", help="write the payload here instead of standard output")

    p = sub.add_parser("check", help="parse and validate")
    files(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("stats", help="count replications, changes, dimensions and impacts")
    files(p)
    p.add_argument("--format", choices=("table", "json"), default="table")
    out(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("render", help="render the templates of one study")
    files(p)
    p.add_argument("--study", required=True, metavar="ACRONYM")
    p.add_argument("--format", choices=("text", "md", "latex", "html"), default="md")
    out(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="render a whole family")
    files(p)
    p.add_argument("--family", required=True, metavar="ACRONYM")
    p.add_argument("--format", choices=("md", "latex", "html"), default="md")
    out(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("evolution", help="validity evolution of a family")
    files(p)
    p.add_argument("--family", required=True, metavar="ACRONYM")
    p.add_argument("--format", choices=("svg", "csv", "json"), default="svg")
    p.add_argument("--width", type=_positive_size, default=800)
    p.add_argument("--height", type=_positive_size, default=480)
    out(p)
    p.set_defaults(func=cmd_evolution)

    p = sub.add_parser("export", help="export a corpus as canonical JSON")
    files(p)
    out(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="convert a JSON export back to the specification language")
    p.add_argument("file", metavar="FILE")
    out(p)
    p.set_defaults(func=cmd_import)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        payload = args.func(args)
        if payload is not None:
            write_atomic(getattr(args, "out", None), payload)
    except _Abort as exc:
        if exc.message:
            print(f"caesar: error: {exc.message}", file=sys.stderr)
        return exc.status
    except OSError as exc:
        print(f"caesar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
