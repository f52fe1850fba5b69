import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "ugrowth",
    max_examples=40,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("ugrowth")


# --- acceptance report ------------------------------------------------------
_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    name = item.name
    if not name.startswith("test_criterion_"):
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        n = int(name.split("_")[2])
        doc = (item.function.__doc__ or "").strip()
        _ACCEPTANCE[n] = ("PASS" if rep.passed else "FAIL", doc, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, doc, dur = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  ({dur:6.1f}s)  {doc}")
