"""Bundled example corpora.

``case_study.fam`` is a nine-family corpus with 23 replications and 92
changes in total; ``quality.fam`` is a single branching family used for the
evolution chart.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

CASE_STUDY = "case_study.fam"
QUALITY = "quality.fam"


def path(name: str) -> Path:
    return Path(str(resources.files("caesar_kit") / "data" / name))
