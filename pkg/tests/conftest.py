from collections import defaultdict

import pytest

from corpus import build_corpus

_criteria = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number this test checks")


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    return build_corpus(tmp_path_factory.mktemp("corpus"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        _criteria[marker.args[0]].append((item.name, report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        parts = _criteria[n]
        failed = [name for name, ok, _ in parts if not ok]
        status = "PASS" if not failed else "FAIL"
        extra = f" ({len(failed)}/{len(parts)} parts red: {', '.join(failed)})" if failed else (f" ({len(parts)} parts)" if len(parts) > 1 else "")
        tr.write_line(f"criterion {n:>2}: {status}{extra}")
        for name, ok, detail in parts:
            if detail:
                tr.write_line(f"    {name}: {detail}")
