import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# Hand count of tests/fixtures/puzzle.sol (verbatim listing, 32 lines):
# blank lines 2, 8, 15; comment-only line 23; everything else is code.
PUZZLE_LINES = {"total_lines": 32, "blanks": 3, "comments": 1, "loc": 28}
PUZZLE_COUNTS = {
    "contracts": 1, "functions": 2, "payable": 0, "events": 0, "mappings": 0,
    "modifiers": 0, "address_uses": 1, "cyclomatic": 6,
}


@pytest.fixture
def puzzle_source():
    return (FIXTURES / "puzzle.sol").read_text(encoding="utf-8")


@pytest.fixture
def corpus_file():
    return FIXTURES / "corpus.jsonl"


@pytest.fixture
def fixture_records(corpus_file):
    return [json.loads(line) for line in corpus_file.read_text().splitlines()]


def addr(i: int) -> str:
    return f"{i:040x}"
