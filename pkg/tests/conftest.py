"""Collects one line per acceptance criterion and prints them in the terminal summary."""
import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = mark.args
        detail = dict(item.user_properties).get("detail", "")
        _CRITERIA[number] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        line = f"[{'PASS' if ok else 'FAIL'}] {number:2d} {title}"
        terminalreporter.write_line(line + (f": {detail}" if detail else ""))
    passed = sum(ok for _, ok, _ in _CRITERIA.values())
    terminalreporter.write_line(f"{passed}/{len(_CRITERIA)} acceptance criteria passed")
