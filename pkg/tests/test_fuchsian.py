import pytest
from hypothesis import given, strategies as st

from kleinshuffle.fuchsian import (
    MarkedGroup, block, cyclic_parabolic_group, find_cover_permutations, genus_cover_group, markov_family,
    perm_cycles, punctured_torus_group, verify_boundary_primitive,
)
from kleinshuffle.invariance import jorgensen_check
from kleinshuffle.limitset import enumerate_limit_points
from kleinshuffle.moebius import QQi, TAU_CLASS, xi
from kleinshuffle.words import (
    expand_word, format_word, invert_word, parse_word, reduce_word, word_length,
)


def test_torus_boundary_is_xi1(torus):
    assert torus.boundary_element() == xi(1)
    assert torus.rank == 2
    for g in torus.generators:
        assert all(x.im == 0 for x in g.entries())


@pytest.mark.parametrize("j", [2, 3, 4])
def test_cover_rank_and_cusp(j):
    G = genus_cover_group(j)
    # Schreier index formula for an index-d subgroup of F_2
    d = 2 * j - 1
    assert G.rank == d + 1 == 2 * j
    assert G.boundary_element() == xi(1)
    assert G.is_exact
    for g in G.generators:
        assert g.det() == 1
        assert all(x.im == 0 for x in g.entries())


@pytest.mark.parametrize("d", [3, 5])
def test_cover_permutations(d):
    data = find_cover_permutations(d)
    assert data.is_transitive()
    # one cycle for the commutator means one cusp
    assert len(perm_cycles(data.commutator())) == 1


def test_cyclic_parabolic_group():
    G = cyclic_parabolic_group()
    assert G.boundary_element() == xi(1) and G.rank == 1


def test_genus_one_rejected_by_cover():
    with pytest.raises(ValueError):
        genus_cover_group(1)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_blocks_satisfy_jorgensen(j):
    assert all(ok for _, _, ok in jorgensen_check(block(j)))


def test_primitive_certificate(torus):
    cert = verify_boundary_primitive(torus, 6)
    assert cert and cert.examined > 0 and cert.mode == "exact"


def test_primitivity_violation_for_root():
    half = MarkedGroup(("R",), (xi(QQi(1, 0) / 2),), parse_word("R^2"), 0, "fuchsian_exact", "root")
    assert half.boundary_element() == xi(1)
    v = verify_boundary_primitive(half, 2)
    assert not v and v.root_order == 2


def test_fuchsian_limit_points_on_real_line(torus):
    cloud = enumerate_limit_points(torus, 6)
    assert len(cloud) > 100
    assert max(abs(z.imag) for z in cloud.global_points() if z is not None) <= TAU_CLASS


def test_markov_family_normalized():
    G = markov_family(3 + 0.1j, 3)
    assert G.boundary_element() == xi(1)
    assert abs(complex(G.generators[0].trace()) ** 2 - (3 + 0.1j) ** 2) < 1e-9
    with pytest.raises(ValueError):
        markov_family(1, 3)


def test_markov_at_fuchsian_point_is_real_up_to_conjugacy():
    G = markov_family(3, 3)
    for g in G.generators:
        assert abs(complex(g.trace()).imag) < 1e-12


letters = st.lists(st.tuples(st.sampled_from("ABC"), st.integers(-3, 3)), max_size=12)


@given(letters)
def test_reduce_word_idempotent(w):
    r = reduce_word(w)
    assert reduce_word(r) == r
    assert all(e != 0 for _, e in r)
    assert all(a[0] != b[0] for a, b in zip(r, r[1:]))


@given(letters)
def test_word_roundtrip(w):
    r = reduce_word(w)
    assert parse_word(format_word(r)) == r
    assert reduce_word(r + invert_word(r)) == ()
    assert word_length(expand_word(r)) == word_length(r) == len(expand_word(r))


@given(letters)
def test_evaluate_respects_reduction(w):
    G = punctured_torus_group()
    w = tuple((g if g != "C" else "A", e) for g, e in w)
    assert G.evaluate(tuple(w)) == G.evaluate(reduce_word(w))
