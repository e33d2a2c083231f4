from __future__ import annotations

from pathlib import Path

import pytest

from isoforge.parser import parse_text
from isoforge.pipeline import CORPUS_DIR, load_project
from isoforge.semantics import UnitSpec, resolve
from isoforge.syntax import Program

TESTS_DIR = Path(__file__).parent
GOLDEN_DIR = TESTS_DIR / "golden"
FIXTURES_DIR = TESTS_DIR / "fixtures"


def program_of(*sources: str) -> Program:
    """Build a program from inline sources, one file per source."""
    return Program([parse_text(src, f"f{i}.ul") for i, src in enumerate(sources)])


@pytest.fixture(scope="session")
def corpus():
    return load_project(CORPUS_DIR)


@pytest.fixture(scope="session")
def corpus_table(corpus):
    return resolve(corpus)


@pytest.fixture(scope="session")
def bank_unit():
    return UnitSpec.of("Bank")
