import dataclasses
import random
import re

import pytest
from hypothesis import given, settings

from caesar_kit.diagnostics import Severity
from caesar_kit.model import VALIDITIES, ChangeImpact, Context, Corpus, Population, Validity
from caesar_kit.parser import parse
from caesar_kit.validation import validate

import broken_cases
from generators import random_corpus, rngs


@pytest.mark.parametrize("name", sorted(broken_cases.cases()))
def test_broken_fixture(name):
    corpus, expected = broken_cases.cases()[name]
    assert broken_cases.observed(validate(corpus)) == expected


def test_every_code_has_a_scenario():
    codes = {c for _, exp in broken_cases.cases().values() for c, _, _ in exp}
    assert codes == {f"E10{i}" for i in range(1, 8)} | {"W201", "W202", "W203"}


def test_base_fixture_is_clean():
    corpus, diags = parse(broken_cases.BASE.read_text(), str(broken_cases.BASE))
    assert diags == [] and validate(corpus) == []


def test_resolvable_base_has_no_e102():
    corpus, _ = parse(broken_cases.BASE.read_text())
    assert "E102" not in {d.code for d in validate(corpus)}


def test_cycle_reported_on_both_members():
    corpus, _ = broken_cases.cases()["e103"]
    diags = [d for d in validate(corpus) if d.code == "E103"]
    assert len(diags) == 2
    assert {m for d in diags for m in re.findall(r"R[12]", d.message.split(" form")[0])} == {"R1", "R2"}


def test_warnings_do_not_suppress_errors():
    corpus, _ = broken_cases.cases()["w203"]
    fam = corpus.families[0]
    (repl,) = fam.replications
    repl = dataclasses.replace(repl, purposes=())
    diags = validate(Corpus((dataclasses.replace(fam, replications=(repl,)),)))
    assert [d.code for d in diags] == ["E107", "W203"]


def test_diagnostics_sorted_by_file_span_code():
    text = (broken_cases.BROKEN / "e103.fam").read_text()
    first, _ = parse(text, "b.fam")
    second, _ = parse((broken_cases.BROKEN / "w202.fam").read_text(), "a.fam")
    diags = validate(second + first)
    keys = [d.sort_key() for d in diags]
    assert keys == sorted(keys)
    files = [d.span.file for d in diags]
    assert files[0] == "a.fam" and files == sorted(files)
    assert [d.code for d in diags if d.span.file == "a.fam"] == ["W202"]


def test_duplicate_family_name():
    corpus, _ = parse(broken_cases.BASE.read_text())
    fam = corpus.families[0]
    other = dataclasses.replace(
        fam,
        original=dataclasses.replace(fam.original, core=dataclasses.replace(fam.original.core, acronym="B")),
        replications=(),
    )
    diags = validate(Corpus((fam, other)))
    assert [d.code for d in diags] == ["E101"]
    assert "family" in diags[0].message


def test_empty_text_and_numbering_rules():
    corpus, _ = parse(broken_cases.BASE.read_text())
    fam = corpus.families[0]
    (repl,) = fam.replications
    change = dataclasses.replace(repl.changes[0], ordinal=2, purpose="  ", dimension=Context(""))
    fam = dataclasses.replace(fam, replications=(dataclasses.replace(repl, changes=(change,)),))
    assert sorted(d.code for d in validate(Corpus((fam,)))) == ["E108", "E108", "E109"]


def test_validate_is_deterministic():
    corpus, _ = broken_cases.cases()["e103"]
    assert validate(corpus) == validate(corpus)


def test_severity_matches_code_letter():
    for corpus, _ in broken_cases.cases().values():
        for d in validate(corpus):
            assert (d.severity is Severity.ERROR) == d.code.startswith("E")


# -- soundness -----------------------------------------------------------

ACRONYM = re.compile(r"[A-Za-z][A-Za-z0-9_-]*")


def invariant_violations(corpus: Corpus) -> list[str]:
    """Direct restatement of the model invariants, independent of the validator."""
    bad = []
    seen = set()
    for fam in corpus.families:
        studies = [fam.original, *fam.replications]
        for s in studies:
            if not ACRONYM.fullmatch(s.core.acronym) or not s.core.site.strip():
                bad.append("core")
            if s.core.acronym in seen:
                bad.append("unique")
            seen.add(s.core.acronym)
        g = fam.original.goal
        texts = [g.cause, g.effect, g.population] if g.is_structured else [g.gqm]
        if not all(t and t.strip() for t in texts) or not fam.original.description.strip():
            bad.append("original")
        by_acronym = {s.core.acronym: s for s in studies}
        for r in fam.replications:
            if not r.purposes or r.base_acronym == r.acronym:
                bad.append("replication")
            if [c.ordinal for c in r.changes] != list(range(1, len(r.changes) + 1)):
                bad.append("ordinals")
            # reachability of the original along base links
            node, hops = r, 0
            while node is not fam.original and hops <= len(studies):
                node = by_acronym.get(node.base_acronym)
                if node is None:
                    break
                hops += 1
            if node is not fam.original:
                bad.append("tree")
            for c in r.changes:
                if not all(t.strip() for t in (c.name, c.base_situation, c.replication_situation, c.purpose)):
                    bad.append("change text")
                if isinstance(c.dimension, Population) and not c.dimension.property.strip():
                    bad.append("population")
                if isinstance(c.dimension, Context) and not c.dimension.variable.strip():
                    bad.append("context")
                kinds = [i.validity for i in c.impacts]
                if len(kinds) != len(set(kinds)):
                    bad.append("dup validity")
                for i in c.impacts:
                    if not -3 <= i.effect <= 3:
                        bad.append("effect")
                    if i.effect and not (i.rationale and i.rationale.strip()):
                        bad.append("rationale")
    return bad


def mutate(rng: random.Random, corpus: Corpus) -> Corpus:
    """Apply one random, possibly invariant-breaking edit."""
    if not corpus.families:
        return corpus
    families = list(corpus.families)
    fi = rng.randrange(len(families))
    fam = families[fi]
    reps = list(fam.replications)
    choice = rng.randrange(8)
    if choice == 0 and len(families) > 1:
        other = families[(fi + 1) % len(families)]
        core = dataclasses.replace(fam.original.core, acronym=other.original.core.acronym)
        fam = dataclasses.replace(fam, original=dataclasses.replace(fam.original, core=core))
    elif reps:
        ri = rng.randrange(len(reps))
        r = reps[ri]
        if choice == 1:
            r = dataclasses.replace(r, base_acronym=rng.choice([r.acronym, "Nope", *(x.acronym for x in reps)]))
        elif choice == 2:
            r = dataclasses.replace(r, purposes=())
        elif choice == 3:
            r = dataclasses.replace(r, core=dataclasses.replace(r.core, site=" "))
        elif r.changes:
            ci = rng.randrange(len(r.changes))
            c = r.changes[ci]
            if choice == 4:
                c = dataclasses.replace(c, impacts=c.impacts + (ChangeImpact(rng.choice(VALIDITIES), 1, "dup"),))
            elif choice == 5:
                c = dataclasses.replace(c, impacts=(ChangeImpact(Validity.CONSTRUCT, rng.choice([-5, 4, 2]), None),))
            elif choice == 6:
                c = dataclasses.replace(c, ordinal=c.ordinal + 1)
            else:
                c = dataclasses.replace(c, name="")
            changes = list(r.changes)
            changes[ci] = c
            r = dataclasses.replace(r, changes=tuple(changes))
        reps[ri] = r
        fam = dataclasses.replace(fam, replications=tuple(reps))
    families[fi] = fam
    return Corpus(tuple(families))


@given(rngs())
@settings(max_examples=200, deadline=None)
def test_generated_corpora_are_valid(rng):
    corpus = random_corpus(rng)
    assert not any(d.is_error for d in validate(corpus))
    assert invariant_violations(corpus) == []


@given(rngs())
@settings(max_examples=400, deadline=None)
def test_no_errors_implies_invariants_hold(rng):
    corpus = random_corpus(rng)
    for _ in range(rng.randint(1, 3)):
        corpus = mutate(rng, corpus)
    errors = [d for d in validate(corpus) if d.is_error]
    violations = invariant_violations(corpus)
    if not errors:
        assert violations == []
    # and the converse for this rule set: every violation is reported
    if violations:
        assert errors
