import numpy as np
import pytest

from leopnt.signal_model import DOWNLINK, UPLINK

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def uplink_eps():
    return UPLINK.sync_sequence(1)


@pytest.fixture(scope="session")
def downlink_eps():
    return DOWNLINK.sync_sequence(0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record(request):
    """Attach a measured-value note to the acceptance summary line."""
    def _record(text):
        request.node.user_properties.append(("detail", text))
    return _record


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        details = "; ".join(v for k, v in report.user_properties if k == "detail")
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = (report.outcome, details)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (outcome, details) in sorted(_ACCEPTANCE.items()):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}  {details}".rstrip())
