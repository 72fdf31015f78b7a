"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines, or
``python tests/test_acceptance.py`` for the lines alone.
"""

from __future__ import annotations

import random
import sys
import time
import xml.etree.ElementTree as ET
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from caesar_kit import fixtures  # noqa: E402
from caesar_kit.analysis import evolution, stats  # noqa: E402
from caesar_kit.chart import evolution_svg  # noqa: E402
from caesar_kit.interchange import emit_dsl, from_json, to_json  # noqa: E402
from caesar_kit.model import VALIDITIES  # noqa: E402
from caesar_kit.parser import parse, parse_corpus  # noqa: E402
from caesar_kit.render import effect_phrase  # noqa: E402
from caesar_kit.validation import validate  # noqa: E402

import broken_cases  # noqa: E402
import golden_case  # noqa: E402
from cli_harness import caesar  # noqa: E402
from generators import random_corpus, random_family, unique_acronyms  # noqa: E402


def report(number: int, title: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})")
    assert ok, detail


def _load(*names):
    corpus, diags = parse_corpus([fixtures.path(n) for n in names])
    assert diags == [], diags
    return corpus


CASE_STUDY_ROWS = {
    "Mind": (2, 4), "Req": (8, 33), "Code": (4, 21), "Testing": (3, 3), "SPL": (1, 2),
    "Soil": (2, 16), "Harvest": (1, 1), "Olive": (1, 11), "Diet": (1, 1),
}


def test_criterion_1_fixture_corpus_counts():
    start = time.perf_counter()
    corpus, diags = parse_corpus([fixtures.path(fixtures.CASE_STUDY)])
    result = stats(corpus)
    elapsed = time.perf_counter() - start
    rows = {f.family: (f.replications, f.changes) for f in result.families}
    totals = (len(result.families), result.total.replications, result.total.changes)
    ok = not diags and rows == CASE_STUDY_ROWS and totals == (9, 23, 92) and elapsed < 1.0
    report(1, "fixture corpus counts", ok, f"families/replications/changes={totals}, {elapsed:.3f}s")


def test_criterion_2_zero_start():
    corpus = _load(fixtures.CASE_STUDY, fixtures.QUALITY)
    starts = [evolution(f).points[0] for f in corpus.families]
    bad = [p.acronym for p in starts if any(p.scores[v] != 0 for v in VALIDITIES) or len(p.scores) != 4]
    report(2, "zero-start evolution", not bad, f"{len(starts)} families, non-zero starts: {bad or 'none'}")


def _oracle_series(family):
    """Brute-force evolution: own ordering, own depth walk, own summation."""
    by_acronym = {r.core.acronym: r for r in family.replications}

    def depth(r):
        d = 0
        node = r
        while node is not None:
            d += 1
            if node.base_acronym == family.original.core.acronym:
                return d
            node = by_acronym.get(node.base_acronym)
        raise AssertionError("unreachable base in a valid family")

    def date_key(d):
        return (d.year, d.month or 0, d.day or 0)

    ordered = sorted(family.replications, key=lambda r: (date_key(r.core.date), depth(r), r.core.acronym))
    names = [v.value for v in VALIDITIES]
    running = dict.fromkeys(names, 0)
    out = [(family.original.core.acronym, dict(running))]
    for r in ordered:
        for c in r.changes:
            for i in c.impacts:
                running[i.validity.value] += i.effect
        out.append((r.core.acronym, dict(running)))
    return out


def test_criterion_3_evolution_oracle():
    rng = random.Random(20240301)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        fam = random_family(rng, unique_acronyms(rng, 12), max_replications=10, max_changes=5)
        got = [(p.acronym, {v.value: s for v, s in p.scores.items()}) for p in evolution(fam).points]
        if got != _oracle_series(fam):
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 10.0
    report(3, "evolution oracle equivalence", ok, f"200 families, {mismatches} mismatches, {elapsed:.2f}s")


def test_criterion_4_round_trip_laws():
    rng = random.Random(4242)
    start = time.perf_counter()
    failures = 0
    for _ in range(500):
        corpus = random_corpus(rng, max_families=3, max_replications=5, max_changes=4)
        text = to_json(corpus)
        reparsed, d1 = parse(emit_dsl(corpus))
        imported, d2 = from_json(text)
        ok = (
            reparsed == corpus
            and imported == corpus
            and not d1
            and not any(d.is_error for d in d2)
            and to_json(reparsed) == text
            and to_json(imported) == text
        )
        failures += not ok
    elapsed = time.perf_counter() - start
    report(4, "round-trip laws", failures == 0 and elapsed < 60.0, f"500 corpora, {failures} failures, {elapsed:.2f}s")


CONTEXT_ROWS = ("Replication", "Original Study", "Site and Date", "Purposes", "Comments")
SENTENCES = ("Originally, ", "In this replication, ", "With the purpose of ", "This change ", " because ")


def test_criterion_5_golden_templates():
    rendered = golden_case.rendered()
    differing = [n for n, text in rendered.items() if (golden_case.GOLDEN / n).read_bytes() != text.encode("utf-8")]
    context = (golden_case.GOLDEN / "context.txt").read_text()
    change = (golden_case.GOLDEN / "change.txt").read_text()
    missing = [r for r in CONTEXT_ROWS if f"\n{r.ljust(20)}|" not in context]
    missing += [s for s in SENTENCES if s not in change]
    ok = not differing and not missing and len(rendered) == 8
    report(5, "golden template files", ok, f"{len(rendered)} files, differing: {differing or 'none'}, missing: {missing or 'none'}")


def test_criterion_6_effect_phrases():
    phrases = {e: effect_phrase(e) for e in range(-3, 4)}
    words = {1: "slightly", 2: "moderately", 3: "substantially"}
    ok = len(set(phrases.values())) == 7 and phrases[0] == "does not affect (0)"
    for e, text in phrases.items():
        if e:
            direction = "increases" if e > 0 else "decreases"
            ok &= text == f"{words[abs(e)]} {direction} ({e:+d})"
    report(6, "effect-phrase table", ok, "; ".join(phrases[e] for e in range(-3, 4)))


def test_criterion_7_validator_fixtures():
    cases = broken_cases.cases()
    wrong = []
    codes = set()
    for name, (corpus, expected) in cases.items():
        got = broken_cases.observed(validate(corpus))
        codes |= {c for c, _, _ in got}
        if got != expected or {c for c, _, _ in got} != {name.upper()}:
            wrong.append(name)
    target = {f"E10{i}" for i in range(1, 8)} | {"W201", "W202", "W203"}
    ok = len(cases) == 10 and codes == target and not wrong
    report(7, "validator diagnostics", ok, f"{len(cases)} fixtures, codes {sorted(codes)}, wrong: {wrong or 'none'}")


def test_criterion_8_svg_structure():
    family = _load(fixtures.QUALITY).families[0]
    svg = evolution_svg(evolution(family))
    ns = {"svg": "http://www.w3.org/2000/svg"}
    root = ET.fromstring(svg.encode("utf-8"))
    polylines = root.findall(".//svg:polyline", ns)
    counts = [len(p.get("points").split()) for p in polylines]
    ticks = [t.text for t in root.iterfind(".//svg:text[@class='x-tick']", ns)]
    expected = [family.original.acronym, *(r.acronym for r in family.replications)]
    n = 1 + len(family.replications)
    ok = root.tag == "{http://www.w3.org/2000/svg}svg" and len(polylines) == 4 and counts == [n] * 4 and ticks == expected
    report(8, "SVG structure", ok, f"{len(polylines)} polylines with {counts} points, x ticks {ticks}")


def test_criterion_9_cli_contract():
    import tempfile

    corpus_file = fixtures.path(fixtures.CASE_STUDY)
    checks = {}
    run = caesar("check", corpus_file)
    checks["check exits 0 silently"] = (run.status, run.stdout, run.stderr) == (0, "", "")
    run = caesar("evolution", corpus_file, "--family", "REQ", "--format", "csv")
    checks["REQ csv has 1+8 rows"] = run.status == 0 and run.stderr == "" and len(run.stdout.splitlines()) == 1 + 1 + 8
    run = caesar("render", corpus_file, "--study", "NOPE")
    checks["unknown study exits 2"] = run.status == 2 and "NOPE" in run.stderr and run.stdout == ""
    run = caesar("check", broken_cases.BROKEN / "e101.fam")
    checks["errors exit 1 on stderr"] = run.status == 1 and "E101" in run.stderr and run.stdout == ""
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "report.md"
        out.write_text("keep\n")
        run = caesar("report", broken_cases.BROKEN / "e104.fam", "--family", "F", "--out", out)
        untouched = run.status == 1 and out.read_text() == "keep\n" and sorted(p.name for p in Path(tmp).iterdir()) == ["report.md"]
        run = caesar("report", corpus_file, "--family", "REQ", "--out", out)
        written = run.status == 0 and run.stdout == "" and out.read_text().startswith("## Family Req")
        checks["atomic --out"] = untouched and written
    failed = [k for k, v in checks.items() if not v]
    report(9, "CLI contract", not failed, f"{len(checks)} checks, failed: {failed or 'none'}")


if __name__ == "__main__":
    status = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                status = 1
    sys.exit(status)
