import pytest

from relform.specfile import SpecFileError, parse_problem

GOOD = """
# comment
[vars]
x even
t odd
y even fiber
[poisson]
x*d_x*d_y
  + d_x*d_t   # continued
[submanifold]
transverse = y
K = 3
[order]
1
"""


def test_parse_good_file():
    p = parse_problem(GOOD)
    assert p.spec.base == (("x", 0), ("t", 1))
    assert p.spec.transverse == ("y",)
    assert p.spec.K == 3 and p.order == 1
    B = p.spec.b_side
    assert p.pi == B.var("x") * B.var("d_x") * B.var("d_y") + B.var("d_x") * B.var("d_t")


def test_defaults():
    p = parse_problem("[vars]\nx even\ny even fiber\n[poisson]\nd_x*d_y\n")
    assert p.order == 2 and p.spec.K == 4
    assert p.spec.transverse == ("y",)


@pytest.mark.parametrize("text", [
    "x even\n[vars]\n",
    "[vars]\nx even\n[bogus]\n",
    "[vars]\nx even\n[vars]\n",
    "[vars]\nx maybe\n[poisson]\nd_x\n",
    "[vars]\nx odd fiber\n[poisson]\nd_x\n",
    "[vars]\nx even\ny even fiber\n[poisson]\nd_x*d_y\n[submanifold]\ntransverse = x\n",
    "[vars]\nx even\n[poisson]\nd_x*d_x\n[submanifold]\nfoo = 1\n",
    "[vars]\nx even\n[poisson]\nd_x\n[order]\ntwo\n",
    "[vars]\nx even\n",
    "[poisson]\nd_x\n",
])
def test_errors(text):
    with pytest.raises(SpecFileError):
        parse_problem(text)


def test_integer_degrees():
    p = parse_problem("[vars]\nu 2\nw -1\n[poisson]\nu*d_u*d_w\n")
    assert p.spec.base == (("u", 2), ("w", -1))
