from pathlib import Path

import pytest

from gchase.fileio import parse_problem

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def demo():
    return parse_problem((FIXTURES / "demo_instance.cht").read_text())


@pytest.fixture
def sigma1(demo):
    return demo.dependencies[0]


# acceptance criterion number -> (title, passed)
ACCEPTANCE: dict[int, tuple[str, bool]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}")
