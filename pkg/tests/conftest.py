import functools

import pytest

from homsurf.immersion import catalog, fundamental_data

SURFACES = {
    "vertical-plane": {},
    "nil-z0": {},
    "horocycle-cylinder": {},
    "cmc-graph-B": {},
    "tube": {"H": 1.0},
    "sphere": {"H": 1.0},
}


@functools.lru_cache(maxsize=None)
def catalog_quadruple(name, n=81):
    p = catalog(name, **SURFACES[name])
    return fundamental_data(p, p.default_grid(n, n))


@pytest.fixture
def quad():
    return catalog_quadruple


# one summary line per acceptance check, shown at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
