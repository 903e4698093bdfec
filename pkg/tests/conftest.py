import contextlib

import pytest

_LINES = []


class _Verdict:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.detail = ""


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def record(number, title):
        v = _Verdict(number, title)
        try:
            yield v
        except BaseException as exc:
            _LINES.append((number, f"FAIL  criterion {number:>2}: {title}  ({type(exc).__name__}: {str(exc)[:160]})"))
            print(_LINES[-1][1])
            raise
        _LINES.append((number, f"PASS  criterion {number:>2}: {title}  {v.detail}".rstrip()))
        print(_LINES[-1][1])

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
