import os

from hypothesis import HealthCheck, settings

settings.register_profile("lab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "lab"))

_ACCEPTANCE = []


def record_acceptance(number, passed, detail, seconds):
    _ACCEPTANCE.append((number, passed, detail, seconds))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail, seconds in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  ({seconds:.1f} s)  {detail}")
