import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Tag a test as an acceptance criterion; the returned callable records detail text."""
    def mark(label: str, detail: str = ""):
        request.node.user_properties.append(("criterion", label))
        if detail:
            request.node.user_properties.append(("detail", detail))
    return mark


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    props = dict(item.user_properties)
    if "criterion" in props:
        details = [v for k, v in item.user_properties if k == "detail"]
        _ACCEPTANCE.append((props["criterion"], report.passed, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(_ACCEPTANCE, key=lambda t: int(t[0].split(".")[0])):
        line = f"{'PASS' if ok else 'FAIL'}  {label}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
