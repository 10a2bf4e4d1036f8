import pytest

from dtk.embedding import (SHUFFLED_CONVOLUTION, SHUFFLED_PRODUCT,
                           NodeLexicon, make_spec)

DIM_BIG = 8192
DIM_SMALL = 512
SEED = 42


@pytest.fixture(scope="session")
def lex_big():
    return NodeLexicon(SEED, DIM_BIG)


@pytest.fixture(scope="session")
def spec_conv_big():
    return make_spec(SHUFFLED_CONVOLUTION, DIM_BIG, SEED)


@pytest.fixture(scope="session")
def spec_prod_big():
    return make_spec(SHUFFLED_PRODUCT, DIM_BIG, SEED)


@pytest.fixture(scope="session")
def lex_small():
    return NodeLexicon(SEED, DIM_SMALL)


@pytest.fixture(scope="session")
def spec_conv_small():
    return make_spec(SHUFFLED_CONVOLUTION, DIM_SMALL, SEED)


@pytest.fixture(scope="session")
def spec_prod_small():
    return make_spec(SHUFFLED_PRODUCT, DIM_SMALL, SEED)


# ----------------------------------------------------------------------
# Acceptance-gate reporting: tests in test_acceptance.py record one verdict
# per criterion; the summary prints them even when stdout capture is on.

ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def record_criterion(num: int, name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((num, name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {num} [{status}] {name}"
        if detail:
            line += f" — {detail}"
        terminalreporter.write_line(line)
