import pytest
from hypothesis import strategies as st

from regbg.background import Background
from regbg.expr import ExprStore
from regbg.plain import CONCAT, LETTER, ONE_E, STAR, UNION, ZERO_E

SMALL_M = 200_000


@pytest.fixture
def store():
    return ExprStore(2, SMALL_M)


@pytest.fixture
def bg(store):
    return Background(store)


def plain_exprs(nl: int = 2, max_leaves: int = 12, with_constants: bool = True):
    """Hypothesis strategy for plain trees over the first nl letters."""
    leaves = [st.builds(lambda x: (LETTER, x), st.integers(0, nl - 1))]
    if with_constants:
        leaves += [st.just(ZERO_E), st.just(ONE_E)]
    return st.recursive(
        st.one_of(leaves),
        lambda kids: st.one_of(
            st.tuples(st.just(UNION), kids, kids),
            st.tuples(st.just(CONCAT), kids, kids),
            st.tuples(st.just(STAR), kids),
        ),
        max_leaves=max_leaves,
    )


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE: list[str] = []


def record(name: str, ok: bool, detail: str) -> None:
    line = f"{name}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
