"""Domain types for families of empirical studies and their replication changes.

Values are immutable records. Constructors only normalise representation;
semantic constraints (acronym syntax, effect range, base references, ...) are
checked by :mod:`caesar_kit.validation` so that broken input can still be
represented and reported on.  Source spans are carried for diagnostics and
never take part in equality.
"""

from __future__ import annotations

import calendar
import enum
import re
from dataclasses import dataclass, field
from typing import Union

from caesar_kit.diagnostics import SourceSpan

ACRONYM_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*")


class Validity(str, enum.Enum):
    CONCLUSION = "conclusion"
    INTERNAL = "internal"
    CONSTRUCT = "construct"
    EXTERNAL = "external"


VALIDITIES: tuple[Validity, ...] = tuple(Validity)


class ReplicationKind(str, enum.Enum):
    INTERNAL = "internal"
    EXTERNAL = "external"


class Purpose(str, enum.Enum):
    CONFIRM_RESULTS = "confirm_results"
    GENERALIZE_RESULTS = "generalize_results"
    OVERCOME_LIMITATIONS = "overcome_limitations"


class OperationalizationElement(str, enum.Enum):
    TREATMENTS = "treatments"
    METRICS = "metrics"
    MEASUREMENT_PROCEDURES = "measurement_procedures"


class ProtocolElement(str, enum.Enum):
    EXPERIMENTAL_DESIGN = "experimental_design"
    EXPERIMENTAL_MATERIAL = "experimental_material"
    EXPERIMENTAL_GUIDES = "experimental_guides"
    MEASURING_INSTRUMENTS = "measuring_instruments"
    DATA_ANALYSIS_TECHNIQUES = "data_analysis_techniques"


class ExperimenterRole(str, enum.Enum):
    DESIGNER = "designer"
    TRAINER = "trainer"
    MONITOR = "monitor"
    MEASURER = "measurer"
    ANALYST = "analyst"


class DatePrecision(str, enum.Enum):
    YEAR = "year"
    YEAR_MONTH = "year_month"
    YEAR_MONTH_DAY = "year_month_day"


_DATE_RE = re.compile(r"(\d{4})(?:-(\d{2})(?:-(\d{2}))?)?")


@dataclass(frozen=True, slots=True)
class StudyDate:
    """A calendar date known to year, month or day precision."""

    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self) -> None:
        if self.day is not None and self.month is None:
            raise ValueError("a day requires a month")
        if not 1 <= self.year <= 9999:
            raise ValueError(f"year {self.year} out of range")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"month {self.month} out of range")
        if self.day is not None:
            last = calendar.monthrange(self.year, self.month)[1]
            if not 1 <= self.day <= last:
                raise ValueError(f"day {self.day} out of range for {self.year:04d}-{self.month:02d}")

    @classmethod
    def parse(cls, text: str) -> StudyDate:
        """Parse ``YYYY``, ``YYYY-MM`` or ``YYYY-MM-DD``; raises ValueError."""
        m = _DATE_RE.fullmatch(text)
        if m is None:
            raise ValueError(f"malformed date {text!r}")
        year, month, day = m.groups()
        return cls(int(year), None if month is None else int(month), None if day is None else int(day))

    @property
    def precision(self) -> DatePrecision:
        if self.month is None:
            return DatePrecision.YEAR
        if self.day is None:
            return DatePrecision.YEAR_MONTH
        return DatePrecision.YEAR_MONTH_DAY

    def isoformat(self) -> str:
        parts = [f"{self.year:04d}"]
        if self.month is not None:
            parts.append(f"{self.month:02d}")
        if self.day is not None:
            parts.append(f"{self.day:02d}")
        return "-".join(parts)

    def sort_key(self) -> tuple[int, int, int]:
        # Unknown parts sort first: 2015 < 2015-01 == ... < 2015-02.
        return (self.year, self.month or 0, self.day or 0)

    def definitely_before(self, other: StudyDate) -> bool:
        """True when ``self`` precedes ``other`` at their common precision."""
        mine = (self.year, self.month, self.day)
        theirs = (other.year, other.month, other.day)
        for a, b in zip(mine, theirs):
            if a is None or b is None:
                return False
            if a != b:
                return a < b
        return False

    def __str__(self) -> str:
        return self.isoformat()


@dataclass(frozen=True, slots=True)
class StudyCore:
    acronym: str
    site: str
    date: StudyDate
    report_url: str | None = None
    comments: str | None = None


@dataclass(frozen=True, slots=True)
class Goal:
    """Either a free GQM statement or a cause/effect/population triple."""

    gqm: str | None = None
    cause: str | None = None
    effect: str | None = None
    population: str | None = None

    def __post_init__(self) -> None:
        structured = (self.cause, self.effect, self.population)
        if self.gqm is not None and any(p is not None for p in structured):
            raise ValueError("a goal is either a GQM statement or a structured triple, not both")
        if self.gqm is None and any(p is None for p in structured):
            raise ValueError("a structured goal needs cause, effect and population")

    @classmethod
    def statement(cls, gqm: str) -> Goal:
        return cls(gqm=gqm)

    @classmethod
    def structured(cls, cause: str, effect: str, population: str) -> Goal:
        return cls(cause=cause, effect=effect, population=population)

    @property
    def is_structured(self) -> bool:
        return self.gqm is None


@dataclass(frozen=True, slots=True)
class Operationalization:
    element: OperationalizationElement
    kind = "operationalization"


@dataclass(frozen=True, slots=True)
class Population:
    property: str
    kind = "population"


@dataclass(frozen=True, slots=True)
class Protocol:
    element: ProtocolElement
    kind = "protocol"


@dataclass(frozen=True, slots=True)
class Experimenter:
    role: ExperimenterRole
    kind = "experimenter"


@dataclass(frozen=True, slots=True)
class Context:
    variable: str
    kind = "context"


Dimension = Union[Operationalization, Population, Protocol, Experimenter, Context]
DIMENSION_KINDS: tuple[str, ...] = ("operationalization", "population", "protocol", "experimenter", "context")


@dataclass(frozen=True, slots=True)
class ChangeImpact:
    validity: Validity
    effect: int
    rationale: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Change:
    ordinal: int
    name: str
    base_situation: str
    replication_situation: str
    purpose: str
    dimension: Dimension
    impacts: tuple[ChangeImpact, ...] = ()
    comments: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "impacts", tuple(self.impacts))


@dataclass(frozen=True, slots=True)
class OriginalStudy:
    core: StudyCore
    goal: Goal
    description: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    is_original = True

    @property
    def acronym(self) -> str:
        return self.core.acronym

    @property
    def date(self) -> StudyDate:
        return self.core.date


def _normalise_purposes(purposes) -> tuple[Purpose, ...]:
    wanted = set(purposes)
    return tuple(p for p in Purpose if p in wanted)


@dataclass(frozen=True, slots=True)
class Replication:
    core: StudyCore
    kind: ReplicationKind
    purposes: tuple[Purpose, ...]
    base_acronym: str
    changes: tuple[Change, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    is_original = False

    def __post_init__(self) -> None:
        # purposes form a set; keep them in declaration order of the enum
        object.__setattr__(self, "purposes", _normalise_purposes(self.purposes))
        object.__setattr__(self, "changes", tuple(self.changes))

    @property
    def acronym(self) -> str:
        return self.core.acronym

    @property
    def date(self) -> StudyDate:
        return self.core.date


EmpiricalStudy = Union[OriginalStudy, Replication]


def base_depths(original_acronym: str, replications) -> dict[str, int | None]:
    """Number of base links from each replication to the original.

    ``None`` marks replications whose base chain is dangling or cyclic.
    """
    by_acronym = {}
    for r in replications:
        by_acronym.setdefault(r.acronym, r)
    depths: dict[str, int | None] = {}

    def walk(start: Replication) -> None:
        path = []
        seen = set()
        node = start
        while True:
            if node.acronym in depths:
                result = depths[node.acronym]
                break
            if node.acronym in seen:
                result = None
                break
            seen.add(node.acronym)
            path.append(node)
            if node.base_acronym == original_acronym:
                result = 0
                break
            nxt = by_acronym.get(node.base_acronym)
            if nxt is None:
                result = None
                break
            node = nxt
        for n in reversed(path):
            if result is not None:
                result += 1
            depths[n.acronym] = result

    for r in by_acronym.values():
        walk(r)
    return depths


def canonical_replications(original_acronym: str, replications) -> tuple[Replication, ...]:
    """Chronological order, ties broken by depth from the original then acronym.

    Replications with unresolvable base chains sort after resolvable ones with
    the same date.
    """
    depths = base_depths(original_acronym, replications)

    def key(r: Replication):
        depth = depths.get(r.acronym)
        return (r.date.sort_key(), depth is None, depth or 0, r.acronym)

    return tuple(sorted(replications, key=key))


@dataclass(frozen=True, slots=True)
class Family:
    """An original study plus every replication that transitively builds on it.

    Replications are kept in canonical order regardless of the order they were
    declared in.
    """

    acronym: str
    original: OriginalStudy
    replications: tuple[Replication, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "replications", canonical_replications(self.original.acronym, self.replications)
        )

    @property
    def studies(self) -> tuple[EmpiricalStudy, ...]:
        return (self.original, *self.replications)

    def find(self, acronym: str) -> EmpiricalStudy | None:
        for study in self.studies:
            if study.acronym == acronym:
                return study
        return None


@dataclass(frozen=True, slots=True)
class Corpus:
    families: tuple[Family, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "families", tuple(self.families))

    def __add__(self, other: Corpus) -> Corpus:
        return Corpus(self.families + other.families)

    def family(self, acronym: str) -> Family | None:
        """Look a family up by its original study's acronym, or by its own name."""
        for fam in self.families:
            if fam.original.acronym == acronym:
                return fam
        for fam in self.families:
            if fam.acronym == acronym:
                return fam
        return None

    def locate(self, acronym: str) -> tuple[Family, EmpiricalStudy] | None:
        for fam in self.families:
            study = fam.find(acronym)
            if study is not None:
                return fam, study
        return None


class UnknownAcronymError(LookupError):
    def __init__(self, acronym: str, where: str | None = None) -> None:
        self.acronym = acronym
        msg = f"unknown acronym {acronym!r}"
        if where:
            msg += f" in {where}"
        super().__init__(msg)


@dataclass(frozen=True, slots=True)
class ResolvedStudy:
    study: EmpiricalStudy

    @property
    def is_original(self) -> bool:
        return self.study.is_original

    @property
    def label(self) -> str:
        return "original study" if self.is_original else "previous replication"


def resolve_base(family: Family, acronym: str) -> ResolvedStudy:
    """Find a study of ``family`` by acronym, tagged original or replication."""
    study = family.find(acronym)
    if study is None:
        raise UnknownAcronymError(acronym, f"family {family.acronym}")
    return ResolvedStudy(study)


def net_effect(replication: Replication) -> dict[Validity, int]:
    """Sum of impact effects per validity type over all changes."""
    totals = {v: 0 for v in VALIDITIES}
    for change in replication.changes:
        for impact in change.impacts:
            totals[impact.validity] += impact.effect
    return totals
