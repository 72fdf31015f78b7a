"""Context and change templates, filled with their linguistic patterns.

Every template is first built as a list of rows (a label plus lines and
bullets) and then laid out by one of four writers: plain text, Markdown,
a LaTeX fragment, or a standalone HTML5 document.

LaTeX output is a fragment.  It compiles with::

    \\documentclass{article}
    \\usepackage[T1]{fontenc}
    \\usepackage[utf8]{inputenc}
    \\usepackage{textcomp}
    \\begin{document}
    ... fragment ...
    \\end{document}

which :func:`latex_document` produces.
"""

from __future__ import annotations

import html
from dataclasses import dataclass

from caesar_kit.analysis import CSV_HEADER, evolution
from caesar_kit.model import (
    VALIDITIES,
    Change,
    Context,
    Experimenter,
    Family,
    Goal,
    Operationalization,
    OriginalStudy,
    Population,
    Protocol,
    Purpose,
    Replication,
    ReplicationKind,
    net_effect,
    resolve_base,
)

FORMATS = ("text", "markdown", "latex", "html")
_ALIASES = {"md": "markdown", "txt": "text", "tex": "latex"}

LATEX_PREAMBLE = (
    "\\documentclass{article}\n"
    "\\usepackage[T1]{fontenc}\n"
    "\\usepackage[utf8]{inputenc}\n"
    "\\usepackage{textcomp}\n"
)

NONE_RECORDED = "none recorded"

_MAGNITUDES = {1: "slightly", 2: "moderately", 3: "substantially"}

PURPOSE_TEXT = {
    Purpose.CONFIRM_RESULTS: "Confirm results",
    Purpose.GENERALIZE_RESULTS: "Generalize results",
    Purpose.OVERCOME_LIMITATIONS: "Overcome limitations of previous studies",
}


def normalize_format(fmt: str) -> str:
    fmt = _ALIASES.get(fmt, fmt)
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r} (expected one of {', '.join(FORMATS)})")
    return fmt


def signed(n: int) -> str:
    return f"{n:+d}" if n else "0"


def effect_phrase(effect: int) -> str:
    """``+1`` -> ``"slightly increases (+1)"``, ``0`` -> ``"does not affect (0)"``."""
    if effect not in range(-3, 4):
        raise ValueError(f"effect {effect} outside -3..+3")
    if effect == 0:
        return "does not affect (0)"
    direction = "increases" if effect > 0 else "decreases"
    return f"{_MAGNITUDES[abs(effect)]} {direction} ({signed(effect)})"


def dimension_text(dimension) -> str:
    if isinstance(dimension, Operationalization):
        return f"Operationalization, specifically, the {dimension.element.value.replace('_', ' ')}"
    if isinstance(dimension, Population):
        return f"Population, specifically, the {dimension.property}"
    if isinstance(dimension, Protocol):
        return f"Protocol, specifically, the {dimension.element.value.replace('_', ' ')}"
    if isinstance(dimension, Experimenter):
        return f"Experimenter, specifically, the role of {dimension.role.value}"
    if isinstance(dimension, Context):
        return f"Context, specifically, the {dimension.variable}"
    raise TypeError(f"not a dimension: {dimension!r}")


def goal_text(goal: Goal) -> str:
    if goal.is_structured:
        return f"cause: {goal.cause}; effect: {goal.effect}; population: {goal.population}"
    return goal.gqm


def _titled(acronym: str, url: str | None) -> str:
    return f"{acronym} ({url})" if url else acronym


# -- rows ---------------------------------------------------------------


@dataclass(frozen=True)
class Row:
    label: str
    lines: tuple[str, ...] = ()
    bullets: tuple[str, ...] = ()


def change_rows(change: Change, replication_acronym: str) -> list[Row]:
    rows = [
        Row(f"Change #{change.ordinal}", (f"{change.name} ({replication_acronym})",)),
        Row(
            "Description",
            (
                f"Originally, {change.base_situation}.",
                f"In this replication, {change.replication_situation}.",
                f"With the purpose of {change.purpose}",
            ),
        ),
        Row("Dimension", (dimension_text(change.dimension),)),
    ]
    if change.impacts:
        bullets = []
        for impact in change.impacts:
            text = f"This change {effect_phrase(impact.effect)} {impact.validity.value} validity"
            if impact.rationale:
                text += f" because {impact.rationale}"
            bullets.append(text)
        rows.append(Row("Effects on Validity", bullets=tuple(bullets)))
    else:
        rows.append(Row("Effects on Validity", (NONE_RECORDED,)))
    if change.comments:
        rows.append(Row("Comments", (change.comments,)))
    return rows


def context_rows(replication: Replication, family: Family) -> list[Row]:
    base = resolve_base(family, replication.base_acronym)
    kind = "Internal" if replication.kind is ReplicationKind.INTERNAL else "External"
    original = family.original
    net = net_effect(replication)
    series = evolution(family)
    cumulative = next(p.scores for p in series.points if p.acronym == replication.acronym)
    rows = [
        Row(
            "Replication",
            (
                _titled(replication.acronym, replication.core.report_url),
                f"{kind} replication based on {base.study.acronym} {base.label}",
            ),
        ),
        Row("Original Study", (f"Goal: {goal_text(original.goal)}", f"Description: {original.description}")),
        Row(
            "Site and Date",
            (
                f"The base experiment was carried out at {base.study.core.site} in {base.study.date}",
                f"This replication was carried out at {replication.core.site} in {replication.date}",
            ),
        ),
        Row("Purposes", bullets=tuple(PURPOSE_TEXT[p] for p in replication.purposes)),
        Row(
            "Effects on Validity",
            tuple(
                f"{v.value} validity: net {signed(net[v])}, cumulative {signed(cumulative[v])}"
                for v in VALIDITIES
            ),
        ),
    ]
    if replication.core.comments:
        rows.append(Row("Comments", (replication.core.comments,)))
    return rows


def original_rows(original: OriginalStudy) -> list[Row]:
    rows = [
        Row("Original Study", (_titled(original.acronym, original.core.report_url),)),
        Row("Goal", (goal_text(original.goal),)),
        Row("Description", (original.description,)),
        Row("Site and Date", (f"This study was carried out at {original.core.site} in {original.date}",)),
    ]
    if original.core.comments:
        rows.append(Row("Comments", (original.core.comments,)))
    return rows


# -- writers ------------------------------------------------------------


class _Text:
    label_width = 20
    rule = "-" * label_width + "+" + "-" * 59

    def template(self, rows: list[Row]) -> str:
        out = [self.rule]
        for row in rows:
            lines = [ln for text in row.lines for ln in text.split("\n")]
            for b in row.bullets:
                first, *rest = b.split("\n")
                lines.append(f"* {first}")
                lines.extend(f"  {ln}" for ln in rest)
            for i, ln in enumerate(lines):
                label = row.label if i == 0 else ""
                prefix = f"{label:<{self.label_width}}|"
                out.append(f"{prefix} {ln}" if ln else prefix)
            out.append(self.rule)
        return "\n".join(out) + "\n"

    def heading(self, text: str) -> str:
        return f"{text}\n{'=' * len(text)}\n"

    def grid(self, header, rows) -> str:
        table = [list(header), *[list(map(str, r)) for r in rows]]
        widths = [max(len(r[i]) for r in table) for i in range(len(header))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def document(self, title: str, parts: list[str]) -> str:
        return "\n".join(parts)


_MD_SPECIAL = str.maketrans(
    {
        "\\": "\\\\",
        "|": "\\|",
        "*": "\\*",
        "_": "\\_",
        "`": "\\`",
        "[": "\\[",
        "]": "\\]",
        "&": "&amp;",
        "<": "&lt;",
        ">": "&gt;",
        "\n": "<br>",
    }
)


def md_escape(text: str) -> str:
    return text.translate(_MD_SPECIAL)


class _Markdown:
    def template(self, rows: list[Row]) -> str:
        def cell(row: Row) -> str:
            parts = [md_escape(t) for t in row.lines]
            parts += [f"• {md_escape(b)}" for b in row.bullets]
            return "<br>".join(parts)

        head, *body = rows
        out = [f"| {md_escape(head.label)} | {cell(head)} |", "| --- | --- |"]
        out += [f"| **{md_escape(r.label)}** | {cell(r)} |" for r in body]
        return "\n".join(out) + "\n"

    def heading(self, text: str) -> str:
        return f"## {md_escape(text)}\n"

    def grid(self, header, rows) -> str:
        out = ["| " + " | ".join(header) + " |", "|" + "|".join(" --- " for _ in header) + "|"]
        out += ["| " + " | ".join(md_escape(str(c)) for c in r) + " |" for r in rows]
        return "\n".join(out) + "\n"

    def document(self, title: str, parts: list[str]) -> str:
        return "\n".join(parts)


_LATEX_SPECIAL = str.maketrans(
    {
        "&": "\\&",
        "%": "\\%",
        "$": "\\$",
        "#": "\\#",
        "_": "\\_",
        "{": "\\{",
        "}": "\\}",
        "~": "\\textasciitilde{}",
        "^": "\\textasciicircum{}",
        "\\": "\\textbackslash{}",
        "\n": "\\newline ",
    }
)


def latex_escape(text: str) -> str:
    return text.translate(_LATEX_SPECIAL)


def latex_document(fragment: str) -> str:
    """Wrap a LaTeX fragment into a standalone document."""
    return f"{LATEX_PREAMBLE}\\begin{{document}}\n{fragment}\\end{{document}}\n"


class _Latex:
    def template(self, rows: list[Row]) -> str:
        out = ["\\noindent", "\\begin{tabular}{|l|p{0.68\\linewidth}|}", "\\hline"]
        for row in rows:
            parts = [latex_escape(t) for t in row.lines]
            parts += [f"\\textbullet~{latex_escape(b)}" for b in row.bullets]
            cell = " \\newline ".join(parts)
            out.append(f"\\textbf{{{latex_escape(row.label)}}} & {cell} \\\\")
            out.append("\\hline")
        out.append("\\end{tabular}")
        out.append("")
        out.append("\\bigskip")
        return "\n".join(out) + "\n"

    def heading(self, text: str) -> str:
        return f"\\section*{{{latex_escape(text)}}}\n"

    def grid(self, header, rows) -> str:
        out = ["\\noindent", "\\begin{tabular}{|l|l|" + "r|" * (len(header) - 2) + "}", "\\hline"]
        out.append(" & ".join(f"\\textbf{{{latex_escape(h)}}}" for h in header) + " \\\\")
        out.append("\\hline")
        for r in rows:
            out.append(" & ".join(latex_escape(str(c)) for c in r) + " \\\\")
        out.append("\\hline")
        out.append("\\end{tabular}")
        return "\n".join(out) + "\n"

    def document(self, title: str, parts: list[str]) -> str:
        return "\n".join(parts)


_HTML_STYLE = (
    "body { font-family: sans-serif; margin: 2em; }\n"
    "table { border-collapse: collapse; margin-bottom: 1.5em; }\n"
    "th, td { border: 1px solid #444; padding: 0.3em 0.6em; text-align: left; vertical-align: top; }\n"
    "table.template th { white-space: nowrap; }\n"
    "ul { margin: 0; padding-left: 1.2em; }\n"
)


def _h(text: str) -> str:
    return html.escape(text, quote=True).replace("\n", "<br>")


class _Html:
    def template(self, rows: list[Row]) -> str:
        out = ['<table class="template">']
        for row in rows:
            cell = "<br>".join(_h(t) for t in row.lines)
            if row.bullets:
                cell += "<ul>" + "".join(f"<li>{_h(b)}</li>" for b in row.bullets) + "</ul>"
            out.append(f"<tr><th>{_h(row.label)}</th><td>{cell}</td></tr>")
        out.append("</table>")
        return "\n".join(out) + "\n"

    def heading(self, text: str) -> str:
        return f"<h2>{_h(text)}</h2>\n"

    def grid(self, header, rows) -> str:
        out = ['<table class="evolution">']
        out.append("<tr>" + "".join(f"<th>{_h(h)}</th>" for h in header) + "</tr>")
        for r in rows:
            out.append("<tr>" + "".join(f"<td>{_h(str(c))}</td>" for c in r) + "</tr>")
        out.append("</table>")
        return "\n".join(out) + "\n"

    def document(self, title: str, parts: list[str]) -> str:
        return (
            "<!DOCTYPE html>\n"
            '<html lang="en">\n'
            "<head>\n"
            '<meta charset="utf-8">\n'
            f"<title>{_h(title)}</title>\n"
            f"<style>\n{_HTML_STYLE}</style>\n"
            "</head>\n"
            "<body>\n"
            + "".join(parts)
            + "</body>\n"
            "</html>\n"
        )


_WRITERS = {"text": _Text(), "markdown": _Markdown(), "latex": _Latex(), "html": _Html()}


def _writer(fmt: str):
    return _WRITERS[normalize_format(fmt)]


# -- public entry points ------------------------------------------------


def render_change(change: Change, replication_acronym: str, format: str = "markdown") -> str:
    w = _writer(format)
    return w.document(f"Change #{change.ordinal} ({replication_acronym})", [w.template(change_rows(change, replication_acronym))])


def render_context(replication: Replication, family: Family, format: str = "markdown") -> str:
    w = _writer(format)
    return w.document(f"Replication {replication.acronym}", [w.template(context_rows(replication, family))])


def _replication_parts(w, replication: Replication, family: Family) -> list[str]:
    parts = [w.template(context_rows(replication, family))]
    parts += [w.template(change_rows(c, replication.acronym)) for c in replication.changes]
    return parts


def render_study(family: Family, acronym: str, format: str = "markdown") -> str:
    """Context plus change templates for a replication, or the header of an original."""
    w = _writer(format)
    study = resolve_base(family, acronym).study
    if isinstance(study, OriginalStudy):
        return w.document(f"Original study {study.acronym}", [w.template(original_rows(study))])
    return w.document(f"Replication {study.acronym}", _replication_parts(w, study, family))


def evolution_rows(family: Family) -> list[list[str]]:
    return [
        [p.acronym, p.date.isoformat(), *(str(p.scores[v]) for v in VALIDITIES)]
        for p in evolution(family).points
    ]


def render_family_report(family: Family, format: str = "markdown") -> str:
    """Original header, every replication in canonical order, then the evolution table."""
    w = _writer(format)
    parts = [w.heading(f"Family {family.acronym}"), w.template(original_rows(family.original))]
    for repl in family.replications:
        parts.append(w.heading(f"Replication {repl.acronym}"))
        parts.extend(_replication_parts(w, repl, family))
    parts.append(w.heading("Validity evolution"))
    parts.append(w.grid(CSV_HEADER, evolution_rows(family)))
    return w.document(f"Family {family.acronym}", parts)
