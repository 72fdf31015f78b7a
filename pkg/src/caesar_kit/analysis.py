"""Validity evolution along a family and corpus-level counts."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from caesar_kit.model import (
    DIMENSION_KINDS,
    VALIDITIES,
    Corpus,
    Family,
    StudyDate,
    Validity,
    canonical_replications,
    net_effect,
)

_DIMENSION_LABELS = ("Oper.", "Popul.", "Prot.", "Exper.", "Ctx.")

CSV_HEADER = ("acronym", "date", "conclusion", "internal", "construct", "external")


@dataclass(frozen=True)
class EvolutionPoint:
    acronym: str
    date: StudyDate
    scores: dict[Validity, int]


@dataclass(frozen=True)
class EvolutionSeries:
    family_acronym: str
    points: tuple[EvolutionPoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    def values(self, validity: Validity) -> list[int]:
        return [p.scores[validity] for p in self.points]

    @property
    def acronyms(self) -> list[str]:
        return [p.acronym for p in self.points]


def canonical_order(family: Family):
    """Original first, then replications by date, depth and acronym."""
    return (family.original, *canonical_replications(family.original.acronym, family.replications))


def evolution(family: Family) -> EvolutionSeries:
    """Cumulative net effects per validity, starting from zero at the original."""
    running = {v: 0 for v in VALIDITIES}
    original, *replications = canonical_order(family)
    points = [EvolutionPoint(original.acronym, original.date, dict(running))]
    for repl in replications:
        for v, delta in net_effect(repl).items():
            running[v] += delta
        points.append(EvolutionPoint(repl.acronym, repl.date, dict(running)))
    return EvolutionSeries(family.acronym, tuple(points))


def series_to_csv(series: EvolutionSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in series.points:
        writer.writerow([p.acronym, p.date.isoformat(), *(p.scores[v] for v in VALIDITIES)])
    return buf.getvalue()


def series_to_dict(series: EvolutionSeries) -> dict:
    return {
        "family": series.family_acronym,
        "points": [
            {
                "acronym": p.acronym,
                "date": p.date.isoformat(),
                "scores": {v.value: p.scores[v] for v in VALIDITIES},
            }
            for p in series.points
        ],
    }


def _zero_dimensions() -> dict[str, int]:
    return {k: 0 for k in DIMENSION_KINDS}


def _zero_validities() -> dict[Validity, int]:
    return {v: 0 for v in VALIDITIES}


@dataclass
class FamilyStats:
    family: str
    replications: int = 0
    changes: int = 0
    by_dimension: dict[str, int] = field(default_factory=_zero_dimensions)
    # number of impacts with a non-zero effect, per validity type
    by_validity: dict[Validity, int] = field(default_factory=_zero_validities)

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "replications": self.replications,
            "changes": self.changes,
            "dimensions": dict(self.by_dimension),
            "validities": {v.value: n for v, n in self.by_validity.items()},
        }


@dataclass
class CorpusStats:
    families: list[FamilyStats]

    @property
    def total(self) -> FamilyStats:
        total = FamilyStats("Total")
        for fs in self.families:
            total.replications += fs.replications
            total.changes += fs.changes
            for k, n in fs.by_dimension.items():
                total.by_dimension[k] += n
            for v, n in fs.by_validity.items():
                total.by_validity[v] += n
        return total

    def as_dict(self) -> dict:
        total = self.total.as_dict()
        del total["family"]
        total["families"] = len(self.families)
        return {"families": [fs.as_dict() for fs in self.families], "total": total}

    def to_table(self) -> str:
        """Fixed-width summary, one row per family plus a total row."""
        head = ["Family", "#Repl", "#Chng", *_DIMENSION_LABELS, *(f"{v.value[:5].title()}." for v in VALIDITIES)]
        rows = [head]
        for fs in [*self.families, self.total]:
            rows.append(
                [
                    fs.family,
                    str(fs.replications),
                    str(fs.changes),
                    *(str(fs.by_dimension[k]) for k in DIMENSION_KINDS),
                    *(str(fs.by_validity[v]) for v in VALIDITIES),
                ]
            )
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        lines = []
        for n, row in enumerate(rows):
            cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
            lines.append("  ".join(cells).rstrip())
            if n == 0 or (0 < n == len(rows) - 2):
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def stats(corpus: Corpus) -> CorpusStats:
    result = []
    for fam in corpus.families:
        fs = FamilyStats(fam.acronym, replications=len(fam.replications))
        for repl in fam.replications:
            fs.changes += len(repl.changes)
            for change in repl.changes:
                fs.by_dimension[change.dimension.kind] += 1
                for impact in change.impacts:
                    if impact.effect != 0:
                        fs.by_validity[impact.validity] += 1
        result.append(fs)
    return CorpusStats(result)
