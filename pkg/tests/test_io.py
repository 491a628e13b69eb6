import pytest

from kleinshuffle.fuchsian import block, markov_family
from kleinshuffle.io import FormatError, format_group, parse_group_text, parse_scalar, read_group
from fractions import Fraction as F


@pytest.mark.parametrize("G", [block(1), block(2), markov_family(3 + 0.1j, 3)],
                         ids=["torus", "genus2", "markov"])
def test_group_roundtrip(G):
    text = format_group(G)
    back = parse_group_text(text)
    assert back.generators == G.generators
    assert back.boundary_word == G.boundary_word
    assert format_group(back) == text


def test_combined_roundtrip(gamma3):
    back = parse_group_text(format_group(gamma3))
    assert back.heights == gamma3.heights and back.c == gamma3.c
    assert back.generators == gamma3.generators


def test_scalars():
    assert parse_scalar("1/6") == F(1, 6)
    assert parse_scalar("-3") == F(-3)
    assert parse_scalar("0.5") == 0.5 and isinstance(parse_scalar("0.5"), float)
    assert parse_scalar("1e3") == 1000.0


@pytest.mark.parametrize("text", [
    "junk",
    "name = x\nboundary = A\n",
    "generator A = 1 0 0 0 0 0 1\nboundary = A\n",
    "generator A = 1 0 1 0 1 0 1 0\nboundary = A\n",
    "generator A = 1 0 1 0 0 0 1 0\nboundary = B\n",
    "generator A = 1 0 1 0 0 0 1 0\n",
    "[block 1]\ngenerator A = 1 0 1 0 0 0 1 0\nboundary = A\n[structure]\nc = 1\n",
])
def test_malformed(text):
    with pytest.raises(FormatError):
        parse_group_text(text)


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        read_group(tmp_path / "nope.txt")
