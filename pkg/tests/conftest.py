import json
import sys

import pytest
from hypothesis import settings

from yaharvest.corpus_io import Dataset, RawTweet, Task

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write((row if isinstance(row, str) else json.dumps(row, ensure_ascii=False)) + "\n")
    return path


def dataset(task, pairs, prefix="r"):
    """Dataset from (text, label) pairs with ids prefix0, prefix1, ..."""
    return Dataset(Task(task), [(RawTweet(f"{prefix}{i}", t), lab) for i, (t, lab) in enumerate(pairs)])


@pytest.fixture
def jsonl(tmp_path):
    def make(rows, name="corpus.jsonl"):
        return write_jsonl(tmp_path / name, rows)

    return make


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
