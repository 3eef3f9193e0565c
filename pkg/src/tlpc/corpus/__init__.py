"""Access to the bundled example programs."""
from __future__ import annotations

from importlib import resources

from ..core import Program
from ..parser import parse_program


def corpus_names() -> list[str]:
    root = resources.files(__name__)
    return sorted(e.name[:-4] for e in root.iterdir() if e.name.endswith(".tlp"))


def corpus_text(name: str) -> str:
    return (resources.files(__name__) / f"{name}.tlp").read_text(encoding="utf-8")


def load_corpus(name: str) -> Program:
    return parse_program(corpus_text(name))
