import json

import pytest
from hypothesis import strategies as st

from oracle import make_clean_scheme, make_scheme
from twospace.scheme import DATA_DIR, load_scheme, scheme_from_dict


@pytest.fixture
def toy_v1():
    return load_scheme(DATA_DIR / "toy-v1.json")


@pytest.fixture
def toy_v2():
    return load_scheme(DATA_DIR / "toy-v2.json")


@pytest.fixture
def toy_doc():
    return json.loads((DATA_DIR / "toy-v1.json").read_text())


@st.composite
def scheme_docs(draw, clean=False, rho=None):
    def draw_int(lo, hi):
        return draw(st.integers(lo, hi))

    if clean:
        return make_clean_scheme(draw_int, rho)
    return make_scheme(draw_int, rho)


@st.composite
def schemes(draw, clean=False, rho=None):
    doc = draw(scheme_docs(clean=clean, rho=rho))
    return doc, scheme_from_dict(doc)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
