"""Acceptance checks, one test per criterion.

Each test runs under its stated time limit and prints one PASS/FAIL line
(visible with ``pytest -s`` or in the terminal summary via ``-rA``).
"""

import contextlib
import itertools
import os
import random
import subprocess
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from kleinshuffle.combiner import invert, normal_form, ping_pong_certify, random_word
from kleinshuffle.deform import verify_deformed_blocks
from kleinshuffle.fuchsian import block, genus_cover_group, markov_family, punctured_torus_group
from kleinshuffle.invariance import check_precisely_invariant, reverify_violation
from kleinshuffle.limitset import enumerate_limit_points
from kleinshuffle.moebius import QQi, lower, region_disjoint, region_image, upper, xi
from kleinshuffle.shuffle import (
    build_gamma_k, build_gamma_k_tau, coset_reps, dihedral_group, homeo_classes, make_plan, pinv,
    pmul, rotation, shuffle_exponents,
)


@contextlib.contextmanager
def criterion(capsys, n, title, limit):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        passed = ok and dt < limit
        with capsys.disabled():
            print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {n}: {title} "
                  f"({dt:.2f} s, limit {limit} s)")
    assert dt < limit, f"criterion {n} took {dt:.1f} s (limit {limit} s)"


def test_criterion_01_exact_blocks(capsys):
    with criterion(capsys, 1, "exact block algebra", 1.0):
        T = punctured_torus_group()
        assert T.boundary_element() == xi(1)
        for j, rank in ((2, 4), (3, 6)):
            G = genus_cover_group(j)
            assert G.rank == rank
            assert G.boundary_element() == xi(1)
            assert all(g.is_exact for g in G.generators)


def test_criterion_02_crt_golden(capsys):
    with criterion(capsys, 2, "CRT golden instance (k=3, C=1)", 1.0):
        plan = make_plan(3, 1)
        idp, t12 = (1, 2, 3), (2, 1, 3)
        assert plan.primes == {idp: 13, t12: 17}
        assert plan.coeffs == {idp: 170, t12: 52}
        assert plan.heights == (4190, 7756, 11946)
        assert shuffle_exponents(plan, t12) == (246, 456, 702)
        assert plan.check()
        # independent residue search over [1, prod p)
        P = 13 * 17
        for s, p in plan.primes.items():
            others = [q for t, q in plan.primes.items() if t != s]
            d = next(x for x in range(1, P) if x % p == 1 and all(x % q == 0 for q in others))
            assert d == plan.coeffs[s]
        for s, p in plan.primes.items():
            inv = pinv(s)
            n = shuffle_exponents(plan, s)
            for j in range(1, 4):
                r = next(x for x in range(p) if (plan.heights[j - 1] - x) % p == 0)
                assert r == (4 * inv[j - 1]) % p
                assert n[j - 1] * p == plan.heights[j - 1] - 4 * inv[j - 1]
        assert all(b - a >= 2 for a, b in zip(plan.heights, plan.heights[1:]))


def test_criterion_03_precise_invariance(capsys):
    with criterion(capsys, 3, "precise invariance of the torus block", 60):
        T = punctured_torus_group()
        cert = check_precisely_invariant(T, (upper(1), lower(-1)), 6)
        assert cert and cert.margin > 0
        B = (upper(F(1, 100)),)
        v = check_precisely_invariant(T, B, 6)
        assert not v
        assert reverify_violation(T, B, v)
        assert not region_disjoint(region_image(v.witness_matrix, B[0]), B[0])[0]


def test_criterion_04_combination_pipeline(capsys):
    with criterion(capsys, 4, "Gamma_3 and Gamma_3^(12) certified at L=5, HNN width 12 < 17", 300):
        plan = make_plan(3, 1)
        gk = build_gamma_k(plan)
        g_tau, g_hat, _ = build_gamma_k_tau(plan, (2, 1, 3), gamma_k=gk)
        assert tuple(g_tau.heights) == (4, 8, 12)
        for G in (gk, g_tau):
            cert = check_precisely_invariant(G, G.reference_region(), 5)
            assert cert and cert.margin > 0 and cert.L == 5
        w = g_hat.certificates["hnn_width"]
        assert w["width"] == 12 and w["p"] == 17 and w["width"] < w["p"]


def _conj_exact(s, g):
    """xi_{s i} g xi_{-s i} by explicit entry formulas."""
    t = QQi(0, s)
    a, b, c, d = g.entries()
    return (a + t * c, b + t * (d - a) - t * t * c, c, d - t * c)


def test_criterion_05_shuffle_identity(capsys, plan3, gamma3, gamma3_tau):
    g_tau = gamma3_tau[0]
    with criterion(capsys, 5, "shuffle identity, exact", 1.0):
        tau = (2, 1, 3)
        p = plan3.primes[tau]
        n = shuffle_exponents(plan3, tau)
        inv = pinv(tau)
        for j in range(1, 4):
            lhs = [_conj_exact(-n[j - 1] * p, g) for g in gamma3.conjugated_block(j - 1).generators]
            rhs = [g.entries() for g in g_tau.conjugated_block(inv[j - 1] - 1).generators]
            assert len(lhs) == len(rhs)
            for x, y in zip(lhs, rhs):
                assert x == y or x == tuple(-e for e in y)


def test_criterion_06_strip_confinement(capsys, plan3, gamma3):
    with criterion(capsys, 6, "limit points confined to strips", 300):
        cloud = enumerate_limit_points(gamma3, 8)
        a = plan3.heights
        assert len(cloud) > 0
        assert (cloud.height_excess(a[0] - 1, a[-1] + 1) <= 1e-9).all()
        for j in (1, 2, 3):
            c = enumerate_limit_points(block(j), 8)
            assert len(c) > 0 and np.abs(c.global_imag()).max() <= 1e-9


def test_criterion_07_normal_forms(capsys, gamma3):
    with criterion(capsys, 7, "normal forms on 10^4 words, ping-pong depth 3", 300):
        rng = random.Random(20261015)
        for _ in range(10_000):
            w = random_word(gamma3, rng.randint(0, 12), rng)
            nf = normal_form(gamma3, w)
            assert normal_form(gamma3, nf) == nf
            assert normal_form(gamma3, w + invert(w)) == ()
        cert = ping_pong_certify(gamma3, 3, exhaustive_depth=3)
        assert cert and cert.exhaustive_depth == 3 and cert.sampled == 0 and cert.margin > 0


def _brute_cosets(k, H):
    seen, parts = set(), []
    for s in itertools.permutations(range(1, k + 1)):
        if s not in seen:
            part = frozenset(pmul(s, h) for h in H)
            seen |= part
            parts.append(part)
    return parts


def test_criterion_08_classification(capsys):
    with criterion(capsys, 8, "classification table k=3,4,5", 10):
        for k, marked, homeo in ((3, 2, 1), (4, 6, 3), (5, 24, 12)):
            reps = coset_reps(k)
            classes = homeo_classes(k)
            assert (len(reps), len(classes)) == (marked, homeo)
            cyc = _brute_cosets(k, [rotation(k, i) for i in range(k)])
            dih = _brute_cosets(k, dihedral_group(k))
            assert len(cyc) == marked and len(dih) == homeo
            assert sorted(sum(r in P for r in reps) for P in cyc) == [1] * marked
            for cl in classes:
                assert sum(set(cl) <= D for D in dih) == 1


def _render(out, threads):
    env = dict(os.environ)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        env[var] = str(threads)
    subprocess.run([sys.executable, "-m", "kleinshuffle", "render", "--k", "5", "--tau", "(13)(24)",
                    "--out", str(out)], env=env, check=True, capture_output=True)
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.pgm"))}


def test_criterion_09_determinism(capsys, tmp_path):
    with criterion(capsys, 9, "byte-identical k=5 renders across runs and thread counts", 600):
        a = _render(tmp_path / "a", 1)
        b = _render(tmp_path / "b", 4)
        assert len(a) == 2 and a == b


def test_criterion_10_deformed_blocks(capsys, plan3):
    with criterion(capsys, 10, "Markov specimen consistent, corrupted specimen violated", 600):
        good = markov_family(3 + 0.1j, 3)
        rep = verify_deformed_blocks([good, block(2), block(3)], plan3)
        assert rep.verdict == "consistent" and np.isfinite(rep.c_inst)
        bad = good.with_generator("X", xi(F(1, 2)))
        rep = verify_deformed_blocks([bad, block(2), block(3)], plan3)
        assert rep.verdict == "violated"
        fails = rep.failures()
        assert fails and any(c.detail.get("witness") for c in fails)
