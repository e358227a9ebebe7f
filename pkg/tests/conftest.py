from __future__ import annotations

import pytest

_CRITERIA: dict[int, tuple[bool, str]] = {}


class CriterionRecorder:
    def __call__(self, number: int, passed: bool, detail: str) -> None:
        _CRITERIA[number] = (bool(passed), detail)


@pytest.fixture
def criterion() -> CriterionRecorder:
    return CriterionRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
