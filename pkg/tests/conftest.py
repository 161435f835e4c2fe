import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA: dict[str, tuple[str, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome line of an acceptance criterion."""

    def record(label: str, passed: bool, detail: str):
        _CRITERIA[label] = ("PASS" if passed else "FAIL", detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda k: (int(k.rstrip("abcdef")), k)):
        status, detail = _CRITERIA[label]
        terminalreporter.write_line(f"criterion {label:>3s}: {status}  {detail}")
