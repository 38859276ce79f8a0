import pytest

_RESULTS = pytest.StashKey[dict]()

ACCEPTANCE_TITLES = {
    1: "enclosure soundness",
    2: "massless absence",
    3: "refined enclosure",
    4: "sup-norm closed form",
    5: "Birman-Schwinger consistency",
    6: "Hermitian gap",
    7: "first-moment exclusion",
    8: "non-relativistic limit",
    9: "special-case identities",
    10: "v = 1/2 report",
}


def pytest_configure(config):
    config.stash[_RESULTS] = {}


@pytest.fixture
def verdict(request):
    """Record one acceptance verdict; printed in the terminal summary."""
    results = request.config.stash[_RESULTS]

    def record(number: int, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d} ({ACCEPTANCE_TITLES[number]}): {detail}"
        results[number] = line
        print(line)

    return record


def pytest_runtest_logreport(report):
    # a criterion test that dies before recording still gets a FAIL line
    name = report.nodeid.rpartition("::")[2]
    if report.when == "call" and name.startswith("test_criterion_") and report.failed:
        _CRASHED.add(int(name.split("_")[2]))


_CRASHED: set[int] = set()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_RESULTS]
    if not results and not _CRASHED:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(ACCEPTANCE_TITLES):
        if k in results:
            terminalreporter.write_line(results[k])
        elif k in _CRASHED:
            terminalreporter.write_line(f"FAIL  criterion {k:2d} ({ACCEPTANCE_TITLES[k]}): raised before a verdict")
