from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"


def pytest_addoption(parser):
    parser.addoption("--extended", action="store_true", default=False,
                     help="run hours-scale reproductions (X = 1e8 bias, 1e5 zeta zeros)")


def pytest_configure(config):
    config.addinivalue_line("markers", "extended: hours-scale run, enabled by --extended")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--extended"):
        return
    skip = pytest.mark.skip(reason="needs --extended")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def reference_zeros():
    """First 100 zeta ordinates from mpmath.zetazero (25 digits)."""
    return np.loadtxt(DATA / "zeta_zeros_100.txt", comments="#")


@pytest.fixture(scope="session")
def table1():
    """Published a(p) of E6 for p <= 173."""
    rows = np.loadtxt(DATA / "e6_ap_173.txt", dtype=np.int64)
    return {int(p): int(a) for p, a in rows}


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("apcache")


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":").split("-")[0])):
            terminalreporter.write_line(line)
