import itertools
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from kleinshuffle.shuffle import (
    PlanError, ShufflePlan, assign_primes, build_gamma_k, canonical_rep, coset_reps,
    crt_coefficients, dihedral_group, format_perm, heights, homeo_classes, make_plan, parse_perm,
    pinv, pmul, resolve_tau, rotation, shuffle_exponents,
)


def _is_prime(n):
    return n > 1 and all(n % q for q in range(2, int(n ** 0.5) + 1))


def brute_crt(primes):
    """Least positive d by scanning multiples of the other primes' product."""
    out = {}
    for s, p in primes.items():
        step = 1
        for t, q in primes.items():
            if t != s:
                step *= q
        m = 1
        while (m * step) % p != 1:
            m += 1
        out[s] = m * step
    return out


def brute_partition(k, subgroup):
    """Right cosets s*H of S_k by exhaustive listing."""
    seen, parts = set(), []
    for s in itertools.permutations(range(1, k + 1)):
        if s in seen:
            continue
        part = frozenset(pmul(s, h) for h in subgroup)
        seen |= part
        parts.append(part)
    return parts


def test_golden_plan(plan3):
    idp, t12 = (1, 2, 3), (2, 1, 3)
    assert plan3.reps == (idp, t12)
    assert plan3.primes == {idp: 13, t12: 17}
    assert plan3.coeffs == {idp: 170, t12: 52}
    assert plan3.heights == (4190, 7756, 11946)
    assert shuffle_exponents(plan3, t12) == (246, 456, 702)
    assert shuffle_exponents(plan3, idp) == (322, 596, 918)
    assert plan3.heights[1] - plan3.heights[0] == 3566


@pytest.mark.parametrize("k,C", [(3, 1), (3, 2), (4, 1), (5, 1)])
def test_crt_matches_brute_force(k, C):
    plan = make_plan(k, C)
    assert crt_coefficients(plan.primes) == brute_crt(plan.primes)


def test_primes_for_C2():
    assert sorted(assign_primes(3, 2).values()) == [29, 31]


def test_single_prime_crt():
    assert crt_coefficients({(1, 2, 3): 13}) == {(1, 2, 3): 1}


@pytest.mark.parametrize("k,C", [(3, 1), (3, 3), (4, 1), (4, 2), (5, 1)])
def test_plan_invariants_independent(k, C):
    plan = make_plan(k, C)
    assert len(plan.reps) == factorial(k - 1)
    ps = list(plan.primes.values())
    assert len(set(ps)) == len(ps) and all(_is_prime(p) and p > 4 * C * k for p in ps)
    a = plan.heights
    assert a[0] >= 0 and all(a[j + 1] - a[j] >= 2 * C for j in range(k - 1))
    for s in plan.reps:
        inv = pinv(s)
        n = shuffle_exponents(plan, s)
        for j in range(1, k + 1):
            assert n[j - 1] * plan.primes[s] == a[j - 1] - 4 * C * inv[j - 1]


@pytest.mark.parametrize("k", [3, 4, 5])
def test_reps_against_coset_partition(k):
    parts = brute_partition(k, [rotation(k, i) for i in range(k)])
    assert len(parts) == factorial(k - 1)
    reps = coset_reps(k)
    assert sorted(sum(1 for r in reps if r in P) for P in parts) == [1] * len(parts)


@pytest.mark.parametrize("k,marked,homeo", [(3, 2, 1), (4, 6, 3), (5, 24, 12)])
def test_classification_table(k, marked, homeo):
    assert len(coset_reps(k)) == marked
    classes = homeo_classes(k)
    assert len(classes) == homeo
    dparts = brute_partition(k, dihedral_group(k))
    assert len(dparts) == homeo
    cparts = brute_partition(k, [rotation(k, i) for i in range(k)])
    # every dihedral coset is a union of cyclic cosets
    for D in dparts:
        assert all(P <= D or not (P & D) for P in cparts)
    for cl in classes:
        assert sum(1 for D in dparts if set(cl) <= D) == 1


def test_k2_rejected():
    with pytest.raises(ValueError):
        coset_reps(2)


perms5 = st.permutations(range(1, 6)).map(tuple)


@given(perms5)
def test_canonical_rep_is_in_coset(s):
    r = canonical_rep(s)
    assert r in coset_reps(5)
    assert any(pmul(s, rotation(5, i)) == r for i in range(5))


@given(perms5)
def test_perm_format_roundtrip(s):
    assert parse_perm(format_perm(s), 5) == s


def test_resolve_tau_notice(plan3):
    rep, note = resolve_tau(plan3, "(23)")
    assert rep == (2, 1, 3) and note
    assert resolve_tau(plan3, "")[0] == (1, 2, 3)


def test_plan_text_roundtrip(plan3):
    text = plan3.to_text()
    back = ShufflePlan.from_text(text)
    assert back == plan3 and back.to_text() == text
    assert "rep (12) 17 52 246 456 702" in text


def test_forged_plan_fails(plan3):
    bad = ShufflePlan(3, 1, plan3.reps, plan3.primes, plan3.coeffs, (4190, 4191, 11946))
    with pytest.raises(PlanError):
        bad.check()
    with pytest.raises(PlanError):
        shuffle_exponents(bad, (2, 1, 3))


def test_forged_heights_break_spacing(plan3):
    from kleinshuffle.combiner import HypothesisError, amalgamate
    from kleinshuffle.fuchsian import block

    with pytest.raises(HypothesisError) as e:
        amalgamate([(block(1), 10), (block(2), 11)], 1)
    assert e.value.check == "spacing"


def test_gamma_k_heights_match_plan(plan3, gamma3):
    assert tuple(gamma3.heights) == plan3.heights
    assert len(gamma3.blocks) == 3


def test_gamma_tau_shuffle(plan3, gamma3_tau):
    g_tau, g_hat, check = gamma3_tau
    assert tuple(g_tau.heights) == (4, 8, 12)
    assert tuple(b.genus for b in g_tau.blocks) == (2, 1, 3)
    assert check and [r[:4] for r in check.rows] == [(1, 246, 8, 2), (2, 456, 4, 1), (3, 702, 12, 3)]
    w = g_hat.certificates["hnn_width"]
    assert w["width"] == 12 and w["p"] == 17


@settings(max_examples=20)
@given(st.integers(1, 4))
def test_heights_closed_form(C):
    plan = make_plan(3, C)
    ps, ds = plan.primes, plan.coeffs
    direct = tuple(sum(ds[s] * (j * ps[s] + 4 * C * pinv(s)[j - 1]) for s in plan.reps)
                   for j in (1, 2, 3))
    assert heights(3, C, ps, ds) == direct == plan.heights
