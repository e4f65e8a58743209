import os
import sys
from pathlib import Path

import pytest

from hdloa.core import TaskKind
from hdloa.data import DatasetManifest, load
from hdloa.llm import LLMClient, MockBackend, MockRule, MockScript, ResponseCache

FIXTURES = Path(__file__).parent / "fixtures"
GOLDENS = Path(__file__).parent / "goldens"

UPDATE_GOLDENS = os.environ.get("HDLOA_UPDATE_GOLDENS") == "1"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def fixture_data(task: str):
    task = TaskKind.parse(task)
    return load(DatasetManifest(task, FIXTURES / f"{task.value}_small.jsonl"))


def check_golden(name: str, text: str) -> None:
    path = GOLDENS / name
    if UPDATE_GOLDENS or not path.exists():
        if not UPDATE_GOLDENS:
            pytest.fail(f"golden {name} is missing; run with HDLOA_UPDATE_GOLDENS=1 to create it")
        path.write_text(text, encoding="utf-8")
    assert text == path.read_text(encoding="utf-8"), f"rendered text differs from golden {name}"


def mock_client(rules=(), default=None, cache_dir=None, **kwargs) -> LLMClient:
    script = MockScript(tuple(rules), default)
    cache = ResponseCache(cache_dir) if cache_dir else None
    return LLMClient(MockBackend(script), cache=cache, sleep=lambda s: None, **kwargs)


def substring_rule(substring: str, response: str) -> MockRule:
    return MockRule(response, substring=substring)


@pytest.fixture
def rams_data():
    return fixture_data("rams")


@pytest.fixture
def loa_output():
    return fixture_text("loa_output_rams.txt")


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title = results[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
