import numpy as np
import pytest

from survml.data import CATEGORICAL, NUMERIC, SurvivalTable

FOUR_CSV = """id,age,gender,Y,delta
S1,40,Female,7.1,1
S2,30,Male,4.9,0
S3,52,Male,3.4,0
S4,60,Female,3,1
"""


@pytest.fixture
def four_csv(tmp_path):
    path = tmp_path / "four.csv"
    path.write_text(FOUR_CSV, encoding="utf-8")
    return path


@pytest.fixture
def four_table():
    return SurvivalTable(
        ids=np.array(["S1", "S2", "S3", "S4"], dtype=object),
        durations=np.array([7.1, 4.9, 3.4, 3.0]),
        events=np.array([1, 0, 0, 1]),
        covariates={"age": np.array([40.0, 30.0, 52.0, 60.0]),
                    "gender": np.array(["Female", "Male", "Male", "Female"], dtype=object)},
        schema={"age": NUMERIC, "gender": CATEGORICAL},
    )


@pytest.fixture
def four_design():
    """Male indicator and age of the four individuals."""
    X = np.array([[0.0, 40.0], [1.0, 30.0], [1.0, 52.0], [0.0, 60.0]])
    return X, np.array([7.1, 4.9, 3.4, 3.0]), np.array([1, 0, 0, 1])


# -- acceptance report ----------------------------------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "failed": []})
    if not report.passed:
        entry["ok"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"criterion {number:2d} {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failed: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
