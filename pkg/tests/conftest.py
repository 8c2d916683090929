import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


@pytest.fixture
def acceptance_report(request):
    """Collects one pass/fail line per acceptance criterion; the terminal
    summary prints them after the run."""

    def report(criterion: str, detail: str = ""):
        line = f"{criterion}: PASS" + (f" ({detail})" if detail else "")
        _ACCEPTANCE_RESULTS.append((criterion, line))
        print(line)

    yield report
    if request.node.rep_call_failed:
        name = request.node.name
        _ACCEPTANCE_RESULTS.append((name, f"{name}: FAIL"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call_failed = rep.failed


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for _, line in _ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


def survey_scenario(current=(0.0, 0.0), speed=4.0, seed=7, duration=900, n_vehicles=1,
                    base_loss=0.0, events=None, sensors=None):
    """Fig-7a-style north-south lawnmower over a ~100 x 120 m rectangle."""
    vehicles = []
    for i in range(n_vehicles):
        v = {
            "sys_id": i + 1,
            "start": {"east": -15.0 - 10.0 * i, "north": -15.0},
            "heading": 0.0,
            "mode": "AUTO_WP_ONBOARD",
        }
        if sensors is not None:
            v["sensors"] = dict(sensors)
        vehicles.append(v)
    doc = {
        "name": "lawnmower",
        "seed": seed,
        "origin": {"lat": 34.0, "lon": -81.0},
        "duration": duration,
        "link": {"base_loss": base_loss},
        "vehicles": vehicles,
        "survey": {
            "polygon": [[34.0, -81.0], [34.0009, -81.0], [34.0009, -81.0011], [34.0, -81.0011]],
            "swath": 10.0,
            "heading": 0.0,
            "r_min": 5.0,
            "speed": speed,
        },
    }
    if current != (0.0, 0.0):
        doc["environment"] = {"type": "uniform", "current": list(current), "max_current": 4.0}
    if events:
        doc["events"] = events
    return doc


def bench_scenario(seed=3, sensors=None, mode="MANUAL_RC"):
    """Stationary single vehicle for preflight / command tests."""
    v = {"sys_id": 1, "start": {"east": 0.0, "north": 0.0}, "mode": mode}
    if sensors is not None:
        v["sensors"] = dict(sensors)
    return {
        "name": "bench",
        "seed": seed,
        "origin": {"lat": 34.0, "lon": -81.0},
        "duration": 120,
        "vehicles": [v],
    }
