"""Lexer and recursive-descent parser for family specification files.

A file holds any number of ``family`` blocks::

    family Mind {
      original study MIND-0 {
        site: "Universidad de Sevilla"
        date: 2014-03
        goal { gqm: "Analyse mindfulness ..." }
        description: "..."
      }
      replication MIND-1 based on MIND-0 {
        kind: internal
        site: "Universidad de Sevilla"
        date: 2015
        purposes: confirm, generalize
        change "Shorter sessions" {
          base: "sessions lasted one hour"
          replication: "sessions lasted 30 minutes"
          purpose: "fit the course schedule"
          dimension: operationalization(treatments)
          impact internal: +1 because "fewer dropouts"
        }
      }
    }

Fields inside a block may come in any order.  Errors are collected rather
than raised; after an error the parser skips to the end of the enclosing
block (or to the next top-level ``family``) and carries on, so one run
reports every independent problem in a file.

Diagnostic codes: E001 lexical, E002 unexpected token, E003 duplicate field,
E004 missing field, E005 value out of domain, E010 unreadable file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from caesar_kit.diagnostics import Diagnostic, SourceSpan, error, has_errors
from caesar_kit.model import (
    Change,
    ChangeImpact,
    Context,
    Corpus,
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

__all__ = ["Token", "tokenize", "parse", "parse_file", "parse_corpus", "SourceSpan", "Diagnostic"]

WORD = "word"
STRING = "string"
NUMBER = "number"
PUNCT = "punct"
EOF = "eof"

_WORD_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*")
_NUMBER_RE = re.compile(r"[+-]?[0-9]+(?:-[0-9]+)*")
_INT_RE = re.compile(r"[+-]?[0-9]+")
_DATE_RE = re.compile(r"[0-9]{4}(?:-[0-9]{2}(?:-[0-9]{2})?)?")
_PUNCT = "{}():,"
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n"}

PURPOSE_KEYWORDS = {
    "confirm": Purpose.CONFIRM_RESULTS,
    "generalize": Purpose.GENERALIZE_RESULTS,
    "overcome": Purpose.OVERCOME_LIMITATIONS,
}
KIND_KEYWORDS = {k.value: k for k in ReplicationKind}
VALIDITY_KEYWORDS = {v.value: v for v in Validity}
OPERATIONALIZATION_KEYWORDS = {e.value: e for e in OperationalizationElement}
PROTOCOL_KEYWORDS = {e.value: e for e in ProtocolElement}
ROLE_KEYWORDS = {r.value: r for r in ExperimenterRole}


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    span: SourceSpan
    value: str | None = None  # decoded contents of a STRING

    def describe(self) -> str:
        if self.kind == EOF:
            return "end of file"
        if self.kind == STRING:
            return "string"
        return repr(self.text)


def tokenize(source: str, file_name: str = "<input>") -> tuple[list[Token], list[Diagnostic]]:
    """Split ``source`` into tokens.  Always ends with an EOF token."""
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    i = 0
    line = 1
    line_start = 0
    n = len(source)

    def span(a: int, b: int, a_line: int, a_start: int) -> SourceSpan:
        # callers never span a newline except strings, which stop at one
        return SourceSpan(file_name, a_line, a - a_start + 1, line, b - line_start + 1)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            line_start = i
            continue
        if ch in " \t\r\ufeff":
            i += 1
            continue
        if source.startswith("//", i):
            end = source.find("\n", i)
            i = n if end < 0 else end
            continue
        if ch in _PUNCT:
            tokens.append(Token(PUNCT, ch, span(i, i + 1, line, line_start)))
            i += 1
            continue
        if ch == '"':
            start = i
            i += 1
            chars: list[str] = []
            terminated = False
            while i < n:
                c = source[i]
                if c == '"':
                    i += 1
                    terminated = True
                    break
                if c == "\n":
                    break
                if c == "\\":
                    nxt = source[i + 1] if i + 1 < n else ""
                    if nxt in _ESCAPES and nxt:
                        chars.append(_ESCAPES[nxt])
                        i += 2
                        continue
                    esc_end = i + (2 if nxt and nxt != "\n" else 1)
                    diags.append(
                        error("E001", f"invalid escape sequence {source[i:esc_end]!r} in string",
                              SourceSpan(file_name, line, i - line_start + 1, line, esc_end - line_start + 1))
                    )
                    i = esc_end
                    continue
                chars.append(c)
                i += 1
            tok_span = span(start, i, line, line_start)
            if not terminated:
                diags.append(error("E001", "unterminated string literal", tok_span))
            tokens.append(Token(STRING, source[start:i], tok_span, "".join(chars)))
            continue
        m = _WORD_RE.match(source, i)
        if m:
            tokens.append(Token(WORD, m.group(), span(i, m.end(), line, line_start)))
            i = m.end()
            continue
        m = _NUMBER_RE.match(source, i)
        if m:
            tokens.append(Token(NUMBER, m.group(), span(i, m.end(), line, line_start)))
            i = m.end()
            continue
        diags.append(error("E001", f"unexpected character {ch!r}", span(i, i + 1, line, line_start)))
        i += 1
    tokens.append(Token(EOF, "", SourceSpan(file_name, line, i - line_start + 1, line, i - line_start + 1)))
    return tokens, diags


class _SyntaxError(Exception):
    def __init__(self, diagnostic: Diagnostic) -> None:
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


class _Fields:
    """Collects the ``name: value`` items of one block, flagging duplicates."""

    def __init__(self, parser: _Parser, owner: str) -> None:
        self.parser = parser
        self.owner = owner
        self.values: dict[str, object] = {}

    def put(self, name: str, value: object, tok: Token) -> None:
        if name in self.values:
            self.parser.report(error("E003", f"duplicate field '{name}' in {self.owner}", tok.span))
            return
        self.values[name] = value

    def require(self, name: str, at: SourceSpan) -> object:
        if name not in self.values:
            raise _SyntaxError(error("E004", f"missing required field '{name}' in {self.owner}", at))
        return self.values[name]

    def get(self, name: str) -> object:
        return self.values.get(name)


class _Parser:
    def __init__(self, tokens: list[Token], diags: list[Diagnostic]) -> None:
        self.tokens = tokens
        self.pos = 0
        self.diags = diags

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def report(self, diagnostic: Diagnostic) -> None:
        self.diags.append(diagnostic)

    def unexpected(self, expected: str) -> _SyntaxError:
        tok = self.tok
        return _SyntaxError(error("E002", f"expected {expected}, found {tok.describe()}", tok.span))

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.tok
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        if not self.at(kind, text):
            raise self.unexpected(what or (repr(text) if text else kind))
        return self.advance()

    def expect_word(self, text: str) -> Token:
        return self.expect(WORD, text, f"'{text}'")

    def expect_punct(self, text: str) -> Token:
        return self.expect(PUNCT, text, f"'{text}'")

    def string(self) -> str:
        return self.expect(STRING, what="a string").value

    def keyword(self, table: dict, what: str):
        tok = self.tok
        if tok.kind != WORD:
            raise self.unexpected(what)
        self.advance()
        if tok.text not in table:
            choices = ", ".join(table)
            raise _SyntaxError(error("E005", f"unknown {what} '{tok.text}' (expected one of: {choices})", tok.span))
        return table[tok.text]

    # -- recovery ------------------------------------------------------
    def skip_to_block_end(self) -> Token | None:
        """Skip past the ``}`` closing the current block, honouring nesting."""
        depth = 0
        while True:
            tok = self.tok
            if tok.kind == EOF:
                return None
            self.advance()
            if tok.kind == PUNCT and tok.text == "{":
                depth += 1
            elif tok.kind == PUNCT and tok.text == "}":
                if depth == 0:
                    return tok
                depth -= 1

    def skip_to_family(self) -> None:
        depth = 0
        while not self.at(EOF):
            tok = self.tok
            if depth <= 0 and tok.kind == WORD and tok.text == "family":
                return
            if tok.kind == PUNCT and tok.text == "{":
                depth += 1
            elif tok.kind == PUNCT and tok.text == "}":
                depth -= 1
            self.advance()

    def block(self, item, owner: str) -> tuple[bool, Token]:
        """Parse ``{ item* }``; the opening brace is already consumed.

        Returns (ok, closing token).  Errors inside an item are recorded and
        the rest of the block is skipped.
        """
        ok = True
        while not self.at(PUNCT, "}"):
            if self.at(EOF):
                raise _SyntaxError(error("E002", f"expected '}}' to close {owner}, found end of file", self.tok.span))
            try:
                item()
            except _SyntaxError as exc:
                self.report(exc.diagnostic)
                closing = self.skip_to_block_end()
                if closing is None:
                    raise _SyntaxError(
                        error("E002", f"expected '}}' to close {owner}, found end of file", self.tok.span)
                    ) from None
                return False, closing
        return ok, self.advance()

    # -- grammar -------------------------------------------------------
    def corpus(self) -> list[Family]:
        families = []
        while not self.at(EOF):
            if not self.at(WORD, "family"):
                self.report(self.unexpected("'family'").diagnostic)
                self.advance()
                self.skip_to_family()
                continue
            try:
                fam = self.family()
            except _SyntaxError as exc:
                self.report(exc.diagnostic)
                self.skip_to_family()
                continue
            if fam is not None:
                families.append(fam)
        return families

    def family(self) -> Family | None:
        start = self.expect_word("family")
        acronym = self.expect(WORD, what="a family acronym").text
        self.expect_punct("{")
        original: list[OriginalStudy | None] = []
        replications: list[Replication | None] = []

        def item() -> None:
            if self.at(WORD, "original"):
                tok = self.tok
                study = self.original()
                if original:
                    self.report(error("E003", f"family {acronym} declares more than one original study", tok.span))
                original.append(study)
            elif self.at(WORD, "replication"):
                replications.append(self.replication())
            else:
                raise self.unexpected("'original' or 'replication'")

        ok, closing = self.block(item, f"family {acronym}")
        span = start.span.to(closing.span)
        if not original:
            if ok:
                self.report(error("E004", f"family {acronym} has no original study", span))
            return None
        if not ok or original[0] is None or any(r is None for r in replications):
            return None
        return Family(acronym, original[0], tuple(replications), span=span)

    def study_field(self, fields: _Fields) -> bool:
        """Handle the fields shared by original studies and replications."""
        tok = self.tok
        if tok.kind != WORD or tok.text not in ("site", "date", "report", "comments"):
            return False
        self.advance()
        self.expect_punct(":")
        if tok.text == "date":
            fields.put("date", self.date(), tok)
        else:
            fields.put(tok.text, self.string(), tok)
        return True

    def date(self) -> StudyDate:
        tok = self.tok
        if tok.kind != NUMBER:
            raise self.unexpected("a date (YYYY, YYYY-MM or YYYY-MM-DD)")
        self.advance()
        if not _DATE_RE.fullmatch(tok.text):
            raise _SyntaxError(error("E005", f"malformed date '{tok.text}' (expected YYYY, YYYY-MM or YYYY-MM-DD)", tok.span))
        try:
            return StudyDate.parse(tok.text)
        except ValueError as exc:
            raise _SyntaxError(error("E005", f"invalid date '{tok.text}': {exc}", tok.span)) from None

    def core(self, acronym: str, fields: _Fields, at: SourceSpan) -> StudyCore:
        return StudyCore(
            acronym=acronym,
            site=fields.require("site", at),
            date=fields.require("date", at),
            report_url=fields.get("report"),
            comments=fields.get("comments"),
        )

    def original(self) -> OriginalStudy | None:
        start = self.expect_word("original")
        self.expect_word("study")
        acronym = self.expect(WORD, what="a study acronym").text
        self.expect_punct("{")
        owner = f"original study {acronym}"
        fields = _Fields(self, owner)

        def item() -> None:
            if self.study_field(fields):
                return
            tok = self.tok
            if self.at(WORD, "goal"):
                self.advance()
                fields.put("goal", self.goal(), tok)
            elif self.at(WORD, "description"):
                self.advance()
                self.expect_punct(":")
                fields.put("description", self.string(), tok)
            else:
                raise self.unexpected(f"a field of {owner}")

        ok, closing = self.block(item, owner)
        if not ok:
            return None
        span = start.span.to(closing.span)
        try:
            core = self.core(acronym, fields, span)
            goal = fields.require("goal", span)
            description = fields.require("description", span)
        except _SyntaxError as exc:
            self.report(exc.diagnostic)
            return None
        if goal is None:
            return None
        return OriginalStudy(core, goal, description, span=span)

    def goal(self) -> Goal | None:
        start = self.expect_punct("{")
        fields = _Fields(self, "goal")

        def item() -> None:
            tok = self.tok
            if tok.kind == WORD and tok.text in ("gqm", "cause", "effect", "population"):
                self.advance()
                self.expect_punct(":")
                fields.put(tok.text, self.string(), tok)
            else:
                raise self.unexpected("'gqm', 'cause', 'effect' or 'population'")

        ok, closing = self.block(item, "goal")
        if not ok:
            return None
        span = start.span.to(closing.span)
        values = fields.values
        if "gqm" in values and len(values) > 1:
            self.report(error("E005", "a goal is either 'gqm' or 'cause'/'effect'/'population', not both", span))
            return None
        if "gqm" in values:
            return Goal.statement(values["gqm"])
        if not values:
            self.report(error("E004", "goal needs 'gqm' or 'cause', 'effect' and 'population'", span))
            return None
        try:
            return Goal.structured(
                fields.require("cause", span), fields.require("effect", span), fields.require("population", span)
            )
        except _SyntaxError as exc:
            self.report(exc.diagnostic)
            return None

    def replication(self) -> Replication | None:
        start = self.expect_word("replication")
        acronym = self.expect(WORD, what="a replication acronym").text
        self.expect_word("based")
        self.expect_word("on")
        base = self.expect(WORD, what="a base study acronym").text
        self.expect_punct("{")
        owner = f"replication {acronym}"
        fields = _Fields(self, owner)
        changes: list[Change | None] = []

        def item() -> None:
            if self.study_field(fields):
                return
            tok = self.tok
            if self.at(WORD, "kind"):
                self.advance()
                self.expect_punct(":")
                fields.put("kind", self.keyword(KIND_KEYWORDS, "replication kind"), tok)
            elif self.at(WORD, "purposes"):
                self.advance()
                self.expect_punct(":")
                purposes = [self.keyword(PURPOSE_KEYWORDS, "purpose")]
                while self.at(PUNCT, ","):
                    self.advance()
                    purposes.append(self.keyword(PURPOSE_KEYWORDS, "purpose"))
                fields.put("purposes", purposes, tok)
            elif self.at(WORD, "change"):
                changes.append(self.change(len(changes) + 1))
            else:
                raise self.unexpected(f"a field of {owner}")

        ok, closing = self.block(item, owner)
        if not ok:
            return None
        span = start.span.to(closing.span)
        try:
            core = self.core(acronym, fields, span)
            kind = fields.require("kind", span)
            purposes = fields.require("purposes", span)
        except _SyntaxError as exc:
            self.report(exc.diagnostic)
            return None
        if any(c is None for c in changes):
            return None
        return Replication(core, kind, tuple(purposes), base, tuple(changes), span=span)

    def change(self, ordinal: int) -> Change | None:
        start = self.expect_word("change")
        name = self.string()
        self.expect_punct("{")
        owner = f"change {name!r}"
        fields = _Fields(self, owner)
        impacts: list[ChangeImpact] = []

        def item() -> None:
            tok = self.tok
            if tok.kind == WORD and tok.text in ("base", "replication", "purpose", "comments"):
                self.advance()
                self.expect_punct(":")
                fields.put(tok.text, self.string(), tok)
            elif self.at(WORD, "dimension"):
                self.advance()
                self.expect_punct(":")
                fields.put("dimension", self.dimension(), tok)
            elif self.at(WORD, "impact"):
                impacts.append(self.impact())
            else:
                raise self.unexpected(f"a field of {owner}")

        ok, closing = self.block(item, owner)
        if not ok:
            return None
        span = start.span.to(closing.span)
        try:
            return Change(
                ordinal=ordinal,
                name=name,
                base_situation=fields.require("base", span),
                replication_situation=fields.require("replication", span),
                purpose=fields.require("purpose", span),
                dimension=fields.require("dimension", span),
                impacts=tuple(impacts),
                comments=fields.get("comments"),
                span=span,
            )
        except _SyntaxError as exc:
            self.report(exc.diagnostic)
            return None

    def dimension(self):
        tok = self.tok
        if tok.kind != WORD:
            raise self.unexpected("a change dimension")
        self.advance()
        name = tok.text
        if name not in ("operationalization", "population", "protocol", "experimenter", "context"):
            raise _SyntaxError(
                error(
                    "E005",
                    f"unknown dimension '{name}' (expected operationalization, population, protocol, "
                    "experimenter or context)",
                    tok.span,
                )
            )
        self.expect_punct("(")
        if name == "operationalization":
            dim = Operationalization(self.keyword(OPERATIONALIZATION_KEYWORDS, "operationalization element"))
        elif name == "protocol":
            dim = Protocol(self.keyword(PROTOCOL_KEYWORDS, "protocol element"))
        elif name == "experimenter":
            dim = Experimenter(self.keyword(ROLE_KEYWORDS, "experimenter role"))
        elif name == "population":
            dim = Population(self.string())
        else:
            dim = Context(self.string())
        self.expect_punct(")")
        return dim

    def impact(self) -> ChangeImpact:
        start = self.expect_word("impact")
        validity = self.keyword(VALIDITY_KEYWORDS, "validity type")
        self.expect_punct(":")
        tok = self.tok
        if tok.kind != NUMBER or not _INT_RE.fullmatch(tok.text):
            raise self.unexpected("an integer effect between -3 and +3")
        self.advance()
        effect = int(tok.text)
        if not -3 <= effect <= 3:
            raise _SyntaxError(error("E005", f"effect {tok.text} is outside the scale -3..+3", tok.span))
        end = tok
        rationale = None
        if self.at(WORD, "because"):
            self.advance()
            end = self.expect(STRING, what="a rationale string")
            rationale = end.value
        return ChangeImpact(validity, effect, rationale, span=start.span.to(end.span))


def parse(source: str, file_name: str = "<input>") -> tuple[Corpus | None, list[Diagnostic]]:
    """Parse one file.  Returns ``(None, diagnostics)`` if any error was found."""
    tokens, diags = tokenize(source, file_name)
    parser = _Parser(tokens, diags)
    families = parser.corpus()
    diags.sort(key=Diagnostic.sort_key)
    if has_errors(diags):
        return None, diags
    return Corpus(tuple(families)), diags


def parse_file(path: str | Path) -> tuple[Corpus | None, list[Diagnostic]]:
    path = Path(path)
    name = str(path)
    try:
        source = path.read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        reason = exc.strerror if isinstance(exc, OSError) and exc.strerror else str(exc)
        return None, [error("E010", f"cannot read file: {reason}", SourceSpan(name, 1, 1, 1, 1))]
    return parse(source, name)


def parse_corpus(files) -> tuple[Corpus, list[Diagnostic]]:
    """Parse several files; families from files with errors are dropped."""
    corpus = Corpus()
    diags: list[Diagnostic] = []
    for f in files:
        part, file_diags = parse_file(f)
        diags.extend(file_diags)
        if part is not None:
            corpus = corpus + part
    return corpus, diags
