import pytest
from hypothesis import given, strategies as st

from nilprob.errors import ParseError
from nilprob.groupfile import (load_group_file, parse_group_text, perm_from_cycles, perm_inv,
                               perm_mul, perm_to_cycles)
from nilprob.nildegree import dc_k_exact
from fractions import Fraction


def test_perm_cycles_roundtrip():
    p = perm_from_cycles("(1,2,3)(4,5)", 5)
    assert perm_to_cycles(p) == "(1,2,3)(4,5)"
    assert perm_to_cycles(perm_from_cycles("()", 3)) == "()"


@given(st.permutations(range(6)), st.permutations(range(6)))
def test_perm_mul_is_left_to_right(x, y):
    xy = perm_mul(tuple(x), tuple(y))
    assert all(xy[i] == y[x[i]] for i in range(6))
    assert perm_mul(tuple(x), perm_inv(tuple(x))) == tuple(range(6))


def test_perm_block():
    G = parse_group_text("perm 4\n(1,2,3,4)\n(1,3)\nend\n")
    assert G.order == 8
    assert dc_k_exact(G, 1) == Fraction(5, 8)


def test_table_block():
    text = "table 3\n0 1 2\n1 2 0\n2 0 1\nend\n"
    assert parse_group_text(text).order == 3


def test_matfp_block_gives_heisenberg():
    G = parse_group_text("matfp 3\n1 1 0; 0 1 0; 0 0 1\n1 0 0; 0 1 1; 0 0 1\nend\n")
    assert G.order == 27
    assert dc_k_exact(G, 1) == Fraction(11, 27)


def test_several_blocks_give_direct_product():
    G = parse_group_text("perm\n(1,2)\nend\n# second factor\nperm\n(1,2,3)\n(1,2)\nend\n")
    assert G.order == 12


@pytest.mark.parametrize("text,line", [
    ("perm 3\n(1,2,3)\n(1,2\nend\n", 3),
    ("table 2\n0 1\n1 x\nend\n", 3),
    ("table 2\n0 1\nend\n", 1),
    ("matfp 4\n1 0; 0 1\nend\n", 1),
    ("perm 3\n(1,2)\n", 1),
    ("bogus\nend\n", 1),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as exc:
        parse_group_text(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_singular_matrix_rejected():
    with pytest.raises(ParseError):
        parse_group_text("matfp 3\n1 1; 1 1\nend\n")


def test_load_file_names_group(tmp_path):
    f = tmp_path / "klein.grp"
    f.write_text("perm 4\n(1,2)(3,4)\n(1,3)(2,4)\nend\n")
    G = load_group_file(f)
    assert G.name == "klein" and G.order == 4
