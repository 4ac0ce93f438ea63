import json
from pathlib import Path

import pytest

from patent_kg.attention import FixtureAttentionProvider
from patent_kg.preprocess import FixtureParseProvider

FIXTURES = Path(__file__).parent / "fixtures"

LEVITATE_SENTENCE = "the magnetic force provided levitates the shaft"
HUB_SENTENCE = "a bearingless hub assembly comprises a rim to receive a tube magnet"

# electric-valve control system abstract, used for sentence counts and the integration check
VALVE_ABSTRACT = (
    "The invention discloses an automatic high-precision adjustment control system for a common electric valve, "
    "and the automatic high-precision adjustment control system is applied to a cold and hot continuous supply "
    "system. The control system comprises an electric valve, a DCS control cabinet and a relay, wherein the "
    "electric valve is installed inside the cold and hot continuous supply system, and a temperature sensor, a "
    "pressure sensor and a flow sensor are installed inside the cold and hot continuous supply system separately; "
    "the temperature sensor, the pressure sensor and the flow sensor are electrically connected to the input end "
    "of the DCS control cabinet separately; and the electric valve is connected in an output loop of the relay, "
    "an input loop of the relay is connected with the output end of the DCS control cabinet, and a voltage "
    "reduction module and a frequency conversion module are electrically connected in the output loop of the "
    "relay. A 380 V/50 HZ three-phase voltage input is adopted, 380 V three-phase voltage is converted into "
    "110 V three-phase voltage through the voltage reduction module, and then the frequency is converted to "
    "2 HZ through the frequency conversion module; and a millisecond-level control unit is electrically "
    "connected between the relay and the DCS control cabinet"
)


def load_fixture(name):
    return json.loads((FIXTURES / f"{name}.json").read_text())


@pytest.fixture
def levitate():
    return (
        FixtureParseProvider.from_file(FIXTURES / "levitate_parse.json"),
        FixtureAttentionProvider.from_file(FIXTURES / "levitate_attn.json"),
    )


@pytest.fixture
def hub():
    return (
        FixtureParseProvider.from_file(FIXTURES / "hub_parse.json"),
        FixtureAttentionProvider.from_file(FIXTURES / "hub_attn.json"),
    )


@pytest.fixture
def phrasal_parser():
    return FixtureParseProvider.from_file(FIXTURES / "phrasal_parse.json")


# -- acceptance reporting: one line per criterion --------------------------

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    n, title = marker
    prev = _criteria.get(n, (title, "PASS"))
    outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
    if prev[1] == "FAIL" or (prev[1] == "SKIP" and outcome == "PASS"):
        outcome = prev[1]
    _criteria[n] = (title, outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report.criterion = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, outcome = _criteria[n]
        terminalreporter.write_line(f"[{outcome}] criterion {n}: {title}")
