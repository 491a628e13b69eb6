import random

import pytest
from hypothesis import given, settings, strategies as st

from kleinshuffle.combiner import (
    CombinedGroup, HypothesisError, PingPongCertificate, PingPongViolation, amalgamate,
    conjugate_block, hnn_extend, invert, normal_form, ping_pong_certify, random_word, syllables,
)
from kleinshuffle.fuchsian import block
from kleinshuffle.io import format_group, parse_group_text
from kleinshuffle.moebius import QQi, is_identity, xi

seeds = st.integers(0, 2 ** 32 - 1)


def _word(G, seed, n=None):
    rng = random.Random(seed)
    return random_word(G, n if n is not None else rng.randint(0, 12), rng)


@settings(max_examples=80)
@given(seeds)
def test_normal_form_idempotent(gamma3, seed):
    w = _word(gamma3, seed)
    nf = normal_form(gamma3, w)
    assert normal_form(gamma3, nf) == nf


@settings(max_examples=80)
@given(seeds)
def test_w_winv_trivial(gamma3, seed):
    w = _word(gamma3, seed)
    assert normal_form(gamma3, w + invert(w)) == ()


@settings(max_examples=40)
@given(seeds)
def test_evaluate_factors_through_normal_form(gamma3, seed):
    w = _word(gamma3, seed)
    assert gamma3.evaluate(w) == gamma3.evaluate(normal_form(gamma3, w))


@settings(max_examples=40)
@given(seeds)
def test_normal_form_alternates(gamma3, seed):
    nf = normal_form(gamma3, _word(gamma3, seed))
    kinds = [s[0] for s in syllables(gamma3, nf)]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))
    assert "J" not in kinds[:-1]


@settings(max_examples=40)
@given(seeds)
def test_hnn_normal_forms(gamma3_tau, seed):
    g_hat = gamma3_tau[1]
    w = _word(g_hat, seed)
    nf = normal_form(g_hat, w)
    assert normal_form(g_hat, nf) == nf
    assert normal_form(g_hat, w + invert(w)) == ()
    assert g_hat.evaluate(w) == g_hat.evaluate(nf)


def test_stable_letter_commutes_with_J(gamma3_tau):
    g_hat = gamma3_tau[1]
    w = (("t", 0, 1), ("J", 0, 1), ("t", 0, -1), ("J", 0, -1))
    assert normal_form(g_hat, w) == ()
    assert g_hat.stable_letter() == xi(QQi(0, 17))


def test_nonempty_normal_forms_are_nontrivial(gamma3):
    rng = random.Random(7)
    for _ in range(200):
        w = random_word(gamma3, 6, rng)
        nf = normal_form(gamma3, w)
        if nf and nf[-1][0] != "J" or len(nf) > 1:
            assert not is_identity(gamma3.evaluate(nf))


def test_ping_pong_small(gamma3):
    cert = ping_pong_certify(gamma3, 2)
    assert isinstance(cert, PingPongCertificate) and cert.margin > 0


def test_ping_pong_detects_overlap():
    G = CombinedGroup((block(1), block(1)), (0, 1), 1, None, None, {}, "bad")
    assert isinstance(ping_pong_certify(G, 2), PingPongViolation)


def test_amalgamate_single_block():
    G = amalgamate([(block(1), 5)], 1)
    cert = G.certificates["combined"]
    assert cert and "H_6" in cert.region and "H*_4" in cert.region


def test_amalgamate_rejects_wide_blocks():
    # c below the block's strip constant: the block check fails
    with pytest.raises(HypothesisError) as e:
        amalgamate([(block(1), 0), (block(1), 10)], 0.1)
    assert e.value.check == "block_invariance"


def test_amalgamate_rejects_bad_boundary():
    G = block(1).with_generator("X", xi(2))
    bad = type(G)(G.names, G.generators, (("X", 1),), 1, "fuchsian_exact", "bad")
    with pytest.raises(HypothesisError) as e:
        amalgamate([(bad, 0), (block(1), 10)], 1)
    assert e.value.check == "boundary"


def test_hnn_width_failure(gamma3_tau):
    g_tau = gamma3_tau[0]
    with pytest.raises(HypothesisError) as e:
        hnn_extend(g_tau, 7)
    assert e.value.check == "hnn_width"


def test_conjugate_block_moves_height():
    G = conjugate_block(block(1), 5)
    assert G.boundary_element() == xi(1)
    A = G.generators[0]
    assert A.c == block(1).generators[0].c


def test_combined_serialization(gamma3_tau):
    g_hat = gamma3_tau[1]
    back = parse_group_text(format_group(g_hat))
    assert back.generators == g_hat.generators
    assert back.heights == g_hat.heights and back.hnn_p == 17
