import json
from pathlib import Path

import pytest

from bichores.instance import normalize, parse_instance

DATA = Path(__file__).resolve().parent.parent / "data"
_CRITERIA: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, text): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and not report.failed):
        return
    cid, text = marker.args
    entry = _CRITERIA.setdefault(cid, {"text": text, "ok": True, "failed": []})
    if report.failed:
        entry["ok"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c.lstrip("AC"))):
        entry = _CRITERIA[cid]
        status = "PASS" if entry["ok"] else "FAIL"
        extra = "" if entry["ok"] else f"  (failing: {', '.join(entry['failed'])})"
        terminalreporter.write_line(f"{cid} {status}  {entry['text']}{extra}")


def load_raw(name: str):
    return parse_instance((DATA / name).read_text())


@pytest.fixture
def six_agents():
    return load_raw("six_agents.json")


@pytest.fixture
def seven_agents():
    return load_raw("seven_agents.json")


@pytest.fixture
def crossed():
    return load_raw("crossed.json")


def inst_of(rows):
    from bichores.instance import RawInstance
    return normalize(RawInstance(rows))


def bundles_json(path: Path):
    return json.loads(path.read_text())
