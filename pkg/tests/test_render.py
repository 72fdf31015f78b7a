import re
import shutil
import subprocess
from html.parser import HTMLParser

import pytest
from hypothesis import given, settings

from caesar_kit import fixtures
from caesar_kit.model import (
    Change,
    ChangeImpact,
    Context,
    Experimenter,
    ExperimenterRole,
    Family,
    Population,
    Validity,
)
from caesar_kit.parser import parse_corpus
from caesar_kit.render import (
    FORMATS,
    NONE_RECORDED,
    dimension_text,
    effect_phrase,
    latex_document,
    latex_escape,
    normalize_format,
    render_change,
    render_context,
    render_family_report,
    render_study,
)

import golden_case
from generators import random_family, rngs, unique_acronyms


@pytest.mark.parametrize("name", sorted(golden_case.rendered()))
def test_golden(name):
    expected = (golden_case.GOLDEN / name).read_bytes()
    assert golden_case.rendered()[name].encode("utf-8") == expected


def test_effect_phrases():
    assert effect_phrase(1) == "slightly increases (+1)"
    assert effect_phrase(0) == "does not affect (0)"
    assert effect_phrase(-3) == "substantially decreases (-3)"
    assert effect_phrase(2) == "moderately increases (+2)"
    phrases = [effect_phrase(e) for e in range(-3, 4)]
    assert len(set(phrases)) == 7
    with pytest.raises(ValueError):
        effect_phrase(4)


def test_dimension_rows():
    assert dimension_text(golden_case.NEW_TREATMENT.dimension) == "Operationalization, specifically, the treatments"
    assert dimension_text(Experimenter(ExperimenterRole.TRAINER)).startswith("Experimenter, specifically,")
    assert dimension_text(Population("experience")) == "Population, specifically, the experience"
    assert dimension_text(Context("time of day")) == "Context, specifically, the time of day"


def test_impact_bullet_sentence():
    text = render_change(golden_case.SHORTER_SESSIONS, "R", "text")
    assert "This change slightly increases (+1) internal validity because subjects were more homogeneous" in text


def test_change_heading_and_no_impacts():
    text = render_change(golden_case.NEW_TREATMENT, "ORT2012", "text")
    assert "Change #2" in text and "Card sorting added (ORT2012)" in text
    assert re.search(r"Effects on Validity \| " + NONE_RECORDED, text)
    assert "Comments" not in text


def test_context_branches():
    text = render_context(golden_case.REPLICATION, golden_case.FAMILY, "text")
    assert "External replication based on UPM2011 original study" in text
    assert "* Confirm results\n" in text and "* Generalize results\n" in text
    assert "internal validity: net +1" in text


def test_context_previous_replication_branch():
    corpus, _ = parse_corpus([fixtures.path(fixtures.QUALITY)])
    fam = corpus.families[0]
    repl = fam.find("Q2010")
    text = render_context(repl, fam, "text")
    assert "Internal replication based on Q2008 previous replication" in text


def test_net_row_matches_net_effect():
    from caesar_kit.model import net_effect

    corpus, _ = parse_corpus([fixtures.path(fixtures.CASE_STUDY)])
    for fam in corpus.families:
        for repl in fam.replications:
            text = render_context(repl, fam, "text")
            for v, n in net_effect(repl).items():
                shown = f"{n:+d}" if n else "0"
                assert f"{v.value} validity: net {shown}," in text


ROWS_CONTEXT = ["Replication", "Original Study", "Site and Date", "Purposes", "Effects on Validity"]
ROWS_CHANGE = ["Description", "Dimension", "Effects on Validity"]


def _labels(text_render: str) -> list[str]:
    return [ln.split("|")[0].strip() for ln in text_render.splitlines() if "|" in ln and ln.split("|")[0].strip()]


@given(rngs())
@settings(max_examples=60, deadline=None)
def test_rows_appear_once_and_texts_are_verbatim(rng):
    fam = random_family(rng, unique_acronyms(rng, 20), max_replications=4)
    for repl in fam.replications:
        labels = _labels(render_context(repl, fam, "text"))
        for row in ROWS_CONTEXT:
            assert labels.count(row) == 1
        assert labels.count("Comments") == (1 if repl.core.comments else 0)
        for change in repl.changes:
            text = render_change(change, repl.acronym, "text")
            labels = _labels(text)
            assert labels.count(f"Change #{change.ordinal}") == 1
            for row in ROWS_CHANGE:
                assert labels.count(row) == 1
            assert labels.count("Comments") == (1 if change.comments else 0)
            flat = re.sub(r"\n {20}\| ?", "\n", text)
            assert change.base_situation in flat and change.replication_situation in flat


@given(rngs())
@settings(max_examples=30, deadline=None)
def test_rendering_is_deterministic(rng):
    fam = random_family(rng, unique_acronyms(rng, 20), max_replications=3)
    for fmt in FORMATS:
        assert render_family_report(fam, fmt) == render_family_report(fam, fmt)


def test_format_aliases():
    assert normalize_format("md") == "markdown"
    assert normalize_format("tex") == "latex"
    with pytest.raises(ValueError):
        normalize_format("pdf")


def test_latex_escaping():
    assert latex_escape("a&b%c_d#e{f}g\\h$i^j~k") == (
        "a\\&b\\%c\\_d\\#e\\{f\\}g\\textbackslash{}h\\$i\\textasciicircum{}j\\textasciitilde{}k"
    )


def test_report_original_only():
    fam = Family("Solo", golden_case.ORIGINAL)
    text = render_family_report(fam, "markdown")
    assert "| Original Study | UPM2011 |" in text
    assert "| UPM2011 | 2011-03 | 0 | 0 | 0 | 0 |" in text
    assert text.count("**Site and Date**") == 1


def test_report_has_one_context_block_per_replication_in_order():
    corpus, _ = parse_corpus([fixtures.path(fixtures.QUALITY)])
    fam = corpus.families[0]
    text = render_family_report(fam, "markdown")
    blocks = re.findall(r"^\| Replication \| ([^<\s|]+)", text, flags=re.M)
    assert blocks == [r.acronym for r in fam.replications]


def test_render_study_original_header():
    text = render_study(golden_case.FAMILY, "UPM2011", "text")
    assert "Original Study" in text and "Replication " not in text


def test_render_study_unknown():
    from caesar_kit.model import UnknownAcronymError

    with pytest.raises(UnknownAcronymError):
        render_study(golden_case.FAMILY, "NOPE")


class _Checker(HTMLParser):
    VOID = {"meta", "br", "link", "img", "hr", "input"}

    def __init__(self):
        super().__init__()
        self.stack = []
        self.ok = True

    def handle_starttag(self, tag, attrs):
        if tag not in self.VOID:
            self.stack.append(tag)

    def handle_endtag(self, tag):
        if not self.stack or self.stack.pop() != tag:
            self.ok = False


def test_html_is_balanced_document():
    corpus, _ = parse_corpus([fixtures.path(fixtures.CASE_STUDY)])
    for fam in corpus.families:
        page = render_family_report(fam, "html")
        assert page.startswith("<!DOCTYPE html>\n")
        checker = _Checker()
        checker.feed(page)
        assert checker.ok and checker.stack == []


def _latex_balanced(src: str) -> bool:
    body = re.sub(r"\\[{}&%$#_]", "", src.replace("\\textbackslash{}", ""))
    depth = 0
    for ch in body:
        depth += {"{": 1, "}": -1}.get(ch, 0)
        if depth < 0:
            return False
    begins = re.findall(r"\\begin\{(\w+)\}", src)
    ends = re.findall(r"\\end\{(\w+)\}", src)
    return depth == 0 and sorted(begins) == sorted(ends)


@given(rngs())
@settings(max_examples=40, deadline=None)
def test_latex_structure(rng):
    fam = random_family(rng, unique_acronyms(rng, 20), max_replications=3)
    assert _latex_balanced(latex_document(render_family_report(fam, "latex")))


@pytest.mark.skipif(shutil.which("pdflatex") is None, reason="pdflatex not installed")
def test_latex_compiles(tmp_path):
    corpus, _ = parse_corpus([fixtures.path(fixtures.QUALITY)])
    src = tmp_path / "report.tex"
    src.write_text(latex_document(render_family_report(corpus.families[0], "latex")), encoding="utf-8")
    result = subprocess.run(
        ["pdflatex", "-interaction=nonstopmode", "-halt-on-error", src.name],
        cwd=tmp_path, capture_output=True, timeout=120,
    )
    assert result.returncode == 0, result.stdout[-2000:]
