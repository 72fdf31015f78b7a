"""Canonical JSON export/import and DSL re-emission.

JSON documents carry ``"schema": "caesar-kit/1"`` and follow
``schemas/caesar-kit-1.json``.  Keys are written in a fixed order (the order
used by the builders below), enumerations as lowercase snake_case strings,
optional fields as ``null``, two-space indentation and a trailing newline.
Spans are not serialised.
"""

from __future__ import annotations

import json

from caesar_kit.diagnostics import Diagnostic, SourceSpan, error
from caesar_kit.model import (
    Change,
    ChangeImpact,
    Context,
    Corpus,
    DatePrecision,
    Experimenter,
    ExperimenterRole,
    Family,
    Goal,
    Operationalization,
    OperationalizationElement,
    OriginalStudy,
    Population,
    Protocol,
    ProtocolElement,
    Purpose,
    Replication,
    ReplicationKind,
    StudyCore,
    StudyDate,
    Validity,
)
from caesar_kit.parser import PURPOSE_KEYWORDS
from caesar_kit.validation import validate

SCHEMA_ID = "caesar-kit/1"

# -- export -------------------------------------------------------------


def _date(d: StudyDate) -> dict:
    return {"iso": d.isoformat(), "precision": d.precision.value}


def _core(core: StudyCore) -> dict:
    return {
        "acronym": core.acronym,
        "site": core.site,
        "date": _date(core.date),
        "report": core.report_url,
        "comments": core.comments,
    }


def _goal(goal: Goal) -> dict:
    if goal.is_structured:
        return {"cause": goal.cause, "effect": goal.effect, "population": goal.population}
    return {"gqm": goal.gqm}


def _dimension(dim) -> dict:
    if isinstance(dim, Operationalization):
        return {"kind": dim.kind, "element": dim.element.value}
    if isinstance(dim, Protocol):
        return {"kind": dim.kind, "element": dim.element.value}
    if isinstance(dim, Experimenter):
        return {"kind": dim.kind, "role": dim.role.value}
    if isinstance(dim, Population):
        return {"kind": dim.kind, "property": dim.property}
    return {"kind": dim.kind, "variable": dim.variable}


def _change(change: Change) -> dict:
    return {
        "ordinal": change.ordinal,
        "name": change.name,
        "base_situation": change.base_situation,
        "replication_situation": change.replication_situation,
        "purpose": change.purpose,
        "dimension": _dimension(change.dimension),
        "impacts": [
            {"validity": i.validity.value, "effect": i.effect, "rationale": i.rationale} for i in change.impacts
        ],
        "comments": change.comments,
    }


def corpus_to_dict(corpus: Corpus) -> dict:
    families = []
    for fam in corpus.families:
        original = {
            **_core(fam.original.core),
            "goal": _goal(fam.original.goal),
            "description": fam.original.description,
        }
        replications = [
            {
                **_core(r.core),
                "kind": r.kind.value,
                "purposes": [p.value for p in r.purposes],
                "base": r.base_acronym,
                "changes": [_change(c) for c in r.changes],
            }
            for r in fam.replications
        ]
        families.append({"acronym": fam.acronym, "original": original, "replications": replications})
    return {"schema": SCHEMA_ID, "families": families}


def to_json(corpus: Corpus) -> str:
    return json.dumps(corpus_to_dict(corpus), indent=2, ensure_ascii=False) + "\n"


# -- import -------------------------------------------------------------


class _Bad(Exception):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


_MISSING = object()


class _Reader:
    def __init__(self, file_name: str) -> None:
        self.span = SourceSpan(file_name, 1, 1, 1, 1)

    def obj(self, value, path: str, keys: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
        if not isinstance(value, dict):
            raise _Bad("E303", f"{path}: expected an object")
        extra = sorted(set(value) - set(keys) - set(optional))
        if extra:
            raise _Bad("E303", f"{path}.{extra[0]}: unexpected field")
        for k in keys:
            if k not in value:
                raise _Bad("E303", f"{path}.{k}: missing field")
        return value

    def str_(self, value, path: str, nullable: bool = False) -> str | None:
        if value is None and nullable:
            return None
        if not isinstance(value, str):
            raise _Bad("E303", f"{path}: expected a string{' or null' if nullable else ''}")
        return value

    def int_(self, value, path: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise _Bad("E303", f"{path}: expected an integer")
        return value

    def list_(self, value, path: str) -> list:
        if not isinstance(value, list):
            raise _Bad("E303", f"{path}: expected an array")
        return value

    def enum(self, enum_cls, value, path: str):
        text = self.str_(value, path)
        try:
            return enum_cls(text)
        except ValueError:
            choices = ", ".join(e.value for e in enum_cls)
            raise _Bad("E303", f"{path}: {text!r} is not one of {choices}") from None

    def date(self, value, path: str) -> StudyDate:
        d = self.obj(value, path, ("iso", "precision"))
        iso = self.str_(d["iso"], f"{path}.iso")
        precision = self.enum(DatePrecision, d["precision"], f"{path}.precision")
        try:
            parsed = StudyDate.parse(iso)
        except ValueError as exc:
            raise _Bad("E303", f"{path}.iso: {exc}") from None
        if parsed.precision is not precision:
            raise _Bad("E303", f"{path}.precision: {precision.value!r} does not match {iso!r}")
        return parsed

    def core(self, d: dict, path: str) -> StudyCore:
        return StudyCore(
            acronym=self.str_(d["acronym"], f"{path}.acronym"),
            site=self.str_(d["site"], f"{path}.site"),
            date=self.date(d["date"], f"{path}.date"),
            report_url=self.str_(d.get("report"), f"{path}.report", nullable=True),
            comments=self.str_(d.get("comments"), f"{path}.comments", nullable=True),
        )

    def goal(self, value, path: str) -> Goal:
        if isinstance(value, dict) and "gqm" in value:
            d = self.obj(value, path, ("gqm",))
            return Goal.statement(self.str_(d["gqm"], f"{path}.gqm"))
        d = self.obj(value, path, ("cause", "effect", "population"))
        return Goal.structured(*(self.str_(d[k], f"{path}.{k}") for k in ("cause", "effect", "population")))

    def dimension(self, value, path: str):
        if not isinstance(value, dict) or "kind" not in value:
            raise _Bad("E303", f"{path}.kind: missing field")
        kind = value["kind"]
        if kind == "operationalization":
            d = self.obj(value, path, ("kind", "element"))
            return Operationalization(self.enum(OperationalizationElement, d["element"], f"{path}.element"))
        if kind == "protocol":
            d = self.obj(value, path, ("kind", "element"))
            return Protocol(self.enum(ProtocolElement, d["element"], f"{path}.element"))
        if kind == "experimenter":
            d = self.obj(value, path, ("kind", "role"))
            return Experimenter(self.enum(ExperimenterRole, d["role"], f"{path}.role"))
        if kind == "population":
            d = self.obj(value, path, ("kind", "property"))
            return Population(self.str_(d["property"], f"{path}.property"))
        if kind == "context":
            d = self.obj(value, path, ("kind", "variable"))
            return Context(self.str_(d["variable"], f"{path}.variable"))
        raise _Bad("E303", f"{path}.kind: unknown dimension {kind!r}")

    def impact(self, value, path: str) -> ChangeImpact:
        d = self.obj(value, path, ("validity", "effect"), ("rationale",))
        return ChangeImpact(
            validity=self.enum(Validity, d["validity"], f"{path}.validity"),
            effect=self.int_(d["effect"], f"{path}.effect"),
            rationale=self.str_(d.get("rationale"), f"{path}.rationale", nullable=True),
            span=self.span,
        )

    def change(self, value, path: str) -> Change:
        d = self.obj(
            value,
            path,
            ("ordinal", "name", "base_situation", "replication_situation", "purpose", "dimension", "impacts"),
            ("comments",),
        )
        return Change(
            ordinal=self.int_(d["ordinal"], f"{path}.ordinal"),
            name=self.str_(d["name"], f"{path}.name"),
            base_situation=self.str_(d["base_situation"], f"{path}.base_situation"),
            replication_situation=self.str_(d["replication_situation"], f"{path}.replication_situation"),
            purpose=self.str_(d["purpose"], f"{path}.purpose"),
            dimension=self.dimension(d["dimension"], f"{path}.dimension"),
            impacts=tuple(
                self.impact(v, f"{path}.impacts[{k}]") for k, v in enumerate(self.list_(d["impacts"], f"{path}.impacts"))
            ),
            comments=self.str_(d.get("comments"), f"{path}.comments", nullable=True),
            span=self.span,
        )

    def replication(self, value, path: str) -> Replication:
        d = self.obj(
            value,
            path,
            ("acronym", "site", "date", "kind", "purposes", "base", "changes"),
            ("report", "comments"),
        )
        purposes = [
            self.enum(Purpose, v, f"{path}.purposes[{k}]") for k, v in enumerate(self.list_(d["purposes"], f"{path}.purposes"))
        ]
        changes = [
            self.change(v, f"{path}.changes[{k}]") for k, v in enumerate(self.list_(d["changes"], f"{path}.changes"))
        ]
        return Replication(
            core=self.core(d, path),
            kind=self.enum(ReplicationKind, d["kind"], f"{path}.kind"),
            purposes=tuple(purposes),
            base_acronym=self.str_(d["base"], f"{path}.base"),
            changes=tuple(changes),
            span=self.span,
        )

    def original(self, value, path: str) -> OriginalStudy:
        d = self.obj(value, path, ("acronym", "site", "date", "goal", "description"), ("report", "comments"))
        return OriginalStudy(
            core=self.core(d, path),
            goal=self.goal(d["goal"], f"{path}.goal"),
            description=self.str_(d["description"], f"{path}.description"),
            span=self.span,
        )

    def family(self, value, path: str) -> Family:
        d = self.obj(value, path, ("acronym", "original", "replications"))
        return Family(
            acronym=self.str_(d["acronym"], f"{path}.acronym"),
            original=self.original(d["original"], f"{path}.original"),
            replications=tuple(
                self.replication(v, f"{path}.replications[{k}]")
                for k, v in enumerate(self.list_(d["replications"], f"{path}.replications"))
            ),
            span=self.span,
        )

    def corpus(self, doc) -> Corpus:
        if not isinstance(doc, dict):
            raise _Bad("E301", "document root must be an object")
        schema = doc.get("schema", _MISSING)
        if schema is _MISSING:
            raise _Bad("E303", "$.schema: missing field")
        if schema != SCHEMA_ID:
            raise _Bad("E302", f"unsupported schema version {schema!r} (expected {SCHEMA_ID!r})")
        d = self.obj(doc, "$", ("schema", "families"))
        return Corpus(
            tuple(self.family(v, f"$.families[{k}]") for k, v in enumerate(self.list_(d["families"], "$.families")))
        )


def from_json(text: str, file_name: str = "<json>") -> tuple[Corpus | None, list[Diagnostic]]:
    """Inverse of :func:`to_json`.  Validation diagnostics are appended on success."""
    reader = _Reader(file_name)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        span = SourceSpan(file_name, exc.lineno, exc.colno, exc.lineno, exc.colno)
        return None, [error("E301", f"malformed JSON: {exc.msg}", span)]
    try:
        corpus = reader.corpus(doc)
    except _Bad as exc:
        return None, [error(exc.code, str(exc), reader.span)]
    return corpus, validate(corpus)


# -- DSL emission -------------------------------------------------------

_PURPOSE_WORDS = {v: k for k, v in PURPOSE_KEYWORDS.items()}


def dsl_string(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def _dsl_dimension(dim) -> str:
    if isinstance(dim, (Operationalization, Protocol)):
        return f"{dim.kind}({dim.element.value})"
    if isinstance(dim, Experimenter):
        return f"experimenter({dim.role.value})"
    if isinstance(dim, Population):
        return f"population({dsl_string(dim.property)})"
    return f"context({dsl_string(dim.variable)})"


def _dsl_effect(effect: int) -> str:
    return f"{effect:+d}" if effect else "0"


class _Emitter:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.depth = 0

    def line(self, text: str = "") -> None:
        self.lines.append("  " * self.depth + text if text else "")

    def open(self, head: str) -> None:
        self.line(head + " {")
        self.depth += 1

    def close(self) -> None:
        self.depth -= 1
        self.line("}")

    def core(self, core: StudyCore) -> None:
        self.line(f"site: {dsl_string(core.site)}")
        self.line(f"date: {core.date.isoformat()}")
        if core.report_url is not None:
            self.line(f"report: {dsl_string(core.report_url)}")
        if core.comments is not None:
            self.line(f"comments: {dsl_string(core.comments)}")

    def family(self, fam: Family) -> None:
        self.open(f"family {fam.acronym}")
        o = fam.original
        self.open(f"original study {o.acronym}")
        self.core(o.core)
        if o.goal.is_structured:
            self.open("goal")
            self.line(f"cause: {dsl_string(o.goal.cause)}")
            self.line(f"effect: {dsl_string(o.goal.effect)}")
            self.line(f"population: {dsl_string(o.goal.population)}")
            self.close()
        else:
            self.line(f"goal {{ gqm: {dsl_string(o.goal.gqm)} }}")
        self.line(f"description: {dsl_string(o.description)}")
        self.close()
        for r in fam.replications:
            self.line()
            self.open(f"replication {r.acronym} based on {r.base_acronym}")
            self.line(f"kind: {r.kind.value}")
            self.core(r.core)
            self.line("purposes: " + ", ".join(_PURPOSE_WORDS[p] for p in r.purposes))
            for c in r.changes:
                self.change(c)
            self.close()
        self.close()

    def change(self, c: Change) -> None:
        self.open(f"change {dsl_string(c.name)}")
        self.line(f"base: {dsl_string(c.base_situation)}")
        self.line(f"replication: {dsl_string(c.replication_situation)}")
        self.line(f"purpose: {dsl_string(c.purpose)}")
        self.line(f"dimension: {_dsl_dimension(c.dimension)}")
        for i in c.impacts:
            text = f"impact {i.validity.value}: {_dsl_effect(i.effect)}"
            if i.rationale is not None:
                text += f" because {dsl_string(i.rationale)}"
            self.line(text)
        if c.comments is not None:
            self.line(f"comments: {dsl_string(c.comments)}")
        self.close()


def emit_dsl(corpus: Corpus) -> str:
    """Pretty-print ``corpus`` in the specification language."""
    chunks = []
    for fam in corpus.families:
        em = _Emitter()
        em.family(fam)
        chunks.append("\n".join(em.lines) + "\n")
    return "\n".join(chunks)
