import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_RESULTS = {}


def record_criterion(number, title, passed, detail=""):
    """Store one acceptance part; the terminal summary prints one line per criterion."""
    ACCEPTANCE_RESULTS.setdefault(number, {"title": title, "parts": []})
    ACCEPTANCE_RESULTS[number]["parts"].append((bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        entry = ACCEPTANCE_RESULTS[number]
        ok = all(p for p, _ in entry["parts"])
        detail = "; ".join(d for _, d in entry["parts"] if d)
        terminalreporter.write_line(
            f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {entry['title']}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Recorder for acceptance results; also prints the part immediately."""
    def record(number, title, passed, detail=""):
        record_criterion(number, title, passed, detail)
        print(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
        return passed
    return record
