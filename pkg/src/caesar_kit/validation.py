"""Semantic checks on a parsed corpus.

Errors
  E101 duplicate acronym (studies across the corpus, or family names)
  E102 base study does not resolve within the family
  E103 base references form a cycle (never reach the original)
  E104 duplicate validity type among one change's impacts
  E105 effect outside -3..+3
  E106 non-zero effect without a rationale
  E107 replication without purposes
  E108 required text field is empty
  E109 malformed acronym or change numbering

Warnings
  W201 replication dated before its base study
  W202 change records no impacts
  W203 replication records no changes
"""

from __future__ import annotations

from caesar_kit.diagnostics import Diagnostic, SourceSpan, error, sort_diagnostics, warning
from caesar_kit.model import (
    ACRONYM_RE,
    Change,
    Context,
    Corpus,
    Family,
    OriginalStudy,
    Population,
    Replication,
    base_depths,
)


def _blank(text: str | None) -> bool:
    return text is None or not text.strip()


class _Checker:
    def __init__(self) -> None:
        self.diags: list[Diagnostic] = []

    def err(self, code: str, message: str, span: SourceSpan | None) -> None:
        self.diags.append(error(code, message, span))

    def warn(self, code: str, message: str, span: SourceSpan | None) -> None:
        self.diags.append(warning(code, message, span))

    def require_text(self, value: str | None, what: str, span: SourceSpan | None) -> None:
        if _blank(value):
            self.err("E108", f"{what} must not be empty", span)

    def acronym(self, acronym: str, what: str, span: SourceSpan | None) -> None:
        if not ACRONYM_RE.fullmatch(acronym or ""):
            self.err("E109", f"{what} acronym {acronym!r} is not a valid identifier", span)

    # ------------------------------------------------------------------
    def corpus(self, corpus: Corpus) -> None:
        seen_studies: dict[str, SourceSpan | None] = {}
        seen_families: dict[str, SourceSpan | None] = {}
        for fam in corpus.families:
            if fam.acronym in seen_families:
                self.err("E101", f"duplicate family acronym {fam.acronym!r}", fam.span)
            else:
                seen_families[fam.acronym] = fam.span
            for study in fam.studies:
                if study.acronym in seen_studies:
                    self.err("E101", f"duplicate study acronym {study.acronym!r}", study.span)
                else:
                    seen_studies[study.acronym] = study.span
            self.family(fam)

    def family(self, fam: Family) -> None:
        self.acronym(fam.acronym, "family", fam.span)
        self.original(fam.original)
        members = {s.acronym: s for s in fam.studies}
        depths = base_depths(fam.original.acronym, fam.replications)
        for repl in fam.replications:
            self.replication(repl)
            if repl.base_acronym not in members:
                self.err(
                    "E102",
                    f"replication {repl.acronym} is based on {repl.base_acronym!r}, "
                    f"which is not a study of family {fam.acronym}",
                    repl.span,
                )
                continue
            if depths.get(repl.acronym) is None and not self._dangling(repl, fam, members):
                self.err(
                    "E103",
                    f"base references of replication {repl.acronym} form a cycle and never reach "
                    f"original study {fam.original.acronym}",
                    repl.span,
                )
                continue
            base = members[repl.base_acronym]
            if repl.date.definitely_before(base.date):
                self.warn(
                    "W201",
                    f"replication {repl.acronym} ({repl.date}) is dated before its base study "
                    f"{base.acronym} ({base.date})",
                    repl.span,
                )

    @staticmethod
    def _dangling(repl: Replication, fam: Family, members) -> bool:
        """Whether the base chain of ``repl`` stops at an unknown acronym."""
        seen = set()
        node = repl
        while node.acronym not in seen:
            seen.add(node.acronym)
            if node.base_acronym == fam.original.acronym:
                return False
            nxt = members.get(node.base_acronym)
            if nxt is None:
                return True
            node = nxt
        return False

    def core(self, study, what: str) -> None:
        self.acronym(study.acronym, what, study.span)
        self.require_text(study.core.site, f"site of {what} {study.acronym}", study.span)

    def original(self, study: OriginalStudy) -> None:
        self.core(study, "original study")
        self.require_text(study.description, f"description of original study {study.acronym}", study.span)
        goal = study.goal
        if goal.is_structured:
            for part in ("cause", "effect", "population"):
                self.require_text(getattr(goal, part), f"goal {part} of {study.acronym}", study.span)
        else:
            self.require_text(goal.gqm, f"goal of {study.acronym}", study.span)

    def replication(self, repl: Replication) -> None:
        self.core(repl, "replication")
        self.acronym(repl.base_acronym, "base study", repl.span)
        if not repl.purposes:
            self.err("E107", f"replication {repl.acronym} declares no purposes", repl.span)
        if not repl.changes:
            self.warn("W203", f"replication {repl.acronym} records no changes", repl.span)
        for index, change in enumerate(repl.changes, start=1):
            if change.ordinal != index:
                self.err(
                    "E109",
                    f"change {change.name!r} of {repl.acronym} is numbered {change.ordinal}, expected {index}",
                    change.span,
                )
            self.change(change, repl)

    def change(self, change: Change, repl: Replication) -> None:
        label = f"change #{change.ordinal} of {repl.acronym}"
        self.require_text(change.name, f"name of {label}", change.span)
        self.require_text(change.base_situation, f"base situation of {label}", change.span)
        self.require_text(change.replication_situation, f"replication situation of {label}", change.span)
        self.require_text(change.purpose, f"purpose of {label}", change.span)
        dim = change.dimension
        if isinstance(dim, Population):
            self.require_text(dim.property, f"population property of {label}", change.span)
        elif isinstance(dim, Context):
            self.require_text(dim.variable, f"context variable of {label}", change.span)
        if not change.impacts:
            self.warn("W202", f"{label} records no impacts on validity", change.span)
        seen = set()
        for impact in change.impacts:
            span = impact.span or change.span
            if impact.validity in seen:
                self.err("E104", f"{label} lists {impact.validity.value} validity more than once", span)
            seen.add(impact.validity)
            if not -3 <= impact.effect <= 3:
                self.err("E105", f"effect {impact.effect:+d} in {label} is outside the scale -3..+3", span)
            if impact.effect != 0 and _blank(impact.rationale):
                self.err(
                    "E106",
                    f"{label} changes {impact.validity.value} validity without giving a rationale",
                    span,
                )


def validate(corpus: Corpus) -> list[Diagnostic]:
    """All rule violations in ``corpus``, ordered by file, span and code."""
    checker = _Checker()
    checker.corpus(corpus)
    return sort_diagnostics(checker.diags)
