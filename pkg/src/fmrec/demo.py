"""Bundled demo dataset: the survey reference model plus matching session
logs, constraint-edit logs, utilities, interest profiles, and an
interaction matrix with two unobserved cells."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .dsl import parse_model
from .model import FeatureModel

__all__ = ["FILES", "read_text", "survey_source", "survey_model", "extract_all"]

FILES = (
    "survey.fm",
    "sessions.csv",
    "edits.csv",
    "utilities.csv",
    "profile_simplicity.csv",
    "profile_productivity.csv",
    "interactions.csv",
)


def read_text(name: str) -> str:
    if name not in FILES:
        raise KeyError(f"no bundled file {name!r}; available: {', '.join(FILES)}")
    return (resources.files("fmrec") / "data" / name).read_text()


def survey_source() -> str:
    return read_text("survey.fm")


def survey_model() -> FeatureModel:
    return parse_model(survey_source())


def extract_all(dest: str | Path) -> list[Path]:
    """Copy every bundled file into ``dest`` (created if missing)."""
    target = Path(dest)
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for name in FILES:
        path = target / name
        path.write_text(read_text(name))
        written.append(path)
    return written
