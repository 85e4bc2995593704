import pytest

from probdatalog import normalize, parse_program

RUNNING_EXAMPLE = """\
0.5::e(a,b).
0.5::e(b,c).
0.5::e(a,c).
0.5::e(c,b).
p(X,Y) :- e(X,Y).
p(X,Y) :- p(X,Z), p(Z,Y).
query(p(a,b)).
"""


def collapse_example(n: int) -> str:
    """One fact q(a,b_i) per i plus s(a,b1); r/t rules with a loop through t."""
    lines = [f"0.5::q(a,b{i})." for i in range(1, n + 1)]
    lines.append("0.5::s(a,b1).")
    lines += [
        "r(X,Y) :- q(X,Y).",
        "t(X) :- r(X,Y).",
        "r(X,Y) :- t(X), s(X,Y).",
    ]
    return "\n".join(lines) + "\n"


@pytest.fixture
def running_text():
    return RUNNING_EXAMPLE


@pytest.fixture
def running_prog():
    return normalize(parse_program(RUNNING_EXAMPLE))
