import shutil
from pathlib import Path

import pytest

from ocalign import catalog
from ocalign.log_model import trace_graphs

FIXTURES = Path(__file__).parent / "fixtures"

HAVE_Z3 = shutil.which("z3") is not None
HAVE_YICES = shutil.which("yices-smt2") is not None
needs_z3 = pytest.mark.skipif(not HAVE_Z3, reason="z3 not on PATH")
needs_yices = pytest.mark.skipif(not HAVE_YICES, reason="yices-smt2 not on PATH")


@pytest.fixture(scope="session")
def order_net():
    return catalog.order_net()


@pytest.fixture(scope="session")
def order_log():
    return catalog.order_log()


@pytest.fixture(scope="session")
def order_traces(order_log):
    """(X1, X2): the o1/o2/p1/p2 component and the o3/p3/p4 component."""
    first, second = trace_graphs(order_log)
    return first, second


@pytest.fixture(scope="session")
def order_types(order_log):
    return dict(order_log.universe.objects)


# -- acceptance summary ------------------------------------------------------------

_CRITERIA: dict[int, list[tuple[str, str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.outcome != "passed"):
        return
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _CRITERIA.setdefault(marker.args[0], []).append((item.name, rep.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        for name, outcome, detail in _CRITERIA[k]:
            verdict = "PASS" if outcome == "passed" else "FAIL" if outcome == "failed" else outcome.upper()
            terminalreporter.write_line(f"criterion {k}: {verdict}  {name}  {detail}".rstrip())
