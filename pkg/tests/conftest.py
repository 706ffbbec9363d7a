import pytest

_RESULTS: dict[int, list[tuple[str, bool]]] = {}

CRITERIA = {
    1: "Dirichlet z - lambda factorization and Sarason series",
    2: "Drury-Arveson 1 + 2 z1 z2 factorization and moment system",
    3: "(1 - z1)(1 - z2) is not free outer, gain >= a* - 1",
    4: "six-word free polynomial outer defect envelope",
    5: "Dirichlet zero-free radii and root check",
    6: "Pick extremal solve and two-point classification",
    7: "property suites",
    8: "subinner approximant convergence",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): test belongs to acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _RESULTS.setdefault(int(marker.args[0]), []).append((item.nodeid, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        runs = _RESULTS.get(n)
        if not runs:
            continue
        ok = all(passed for _, passed in runs)
        status = "PASS" if ok else "FAIL"
        bad = sum(not passed for _, passed in runs)
        extra = "" if ok else f", {bad} failing"
        terminalreporter.write_line(f"criterion {n}: {status}  {CRITERIA[n]} ({len(runs)} checks{extra})")
