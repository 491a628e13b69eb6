"""Amalgamated products over J and HNN extensions by a vertical translation.

A :class:`CombinedGroup` keeps the unconjugated blocks G_i together with
their heights a_i; block i acts through xi_{a_i i} G_i xi_{a_i i}^-1.  The
optional stable letter is t = xi_{p i}.

Words are tuples of letters ``(block, gen, exp)``; ``("t", 0, e)`` is the
stable letter and ``("J", 0, m)`` is xi_1^m.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cosets import normalize_exact, to_array
from .fuchsian import MarkedGroup
from .invariance import (
    HypothesisError, InvarianceCertificate, check_precisely_invariant, _num,
)
from .moebius import (
    QQi, MoebiusMap, compose, conjugate_by, im_, inverse, lower, re_, region_image, upper, xi,
)
from .words import format_word, invert_word, power, reduce_word

FLOAT_C_TOL = 1e-10
DEFAULT_COMBINED_L = 2


def conjugate_block(G, a, label=None):
    """xi_{a i} G xi_{a i}^-1 with the same names and boundary word."""
    if a == 0:
        return G
    h = xi(QQi(0, a) if not isinstance(a, float) else complex(0, a))
    return G.conjugate(h, label or f"{G.label}@{a}")


def _exact_height(a):
    if isinstance(a, (int, Fraction)):
        return Fraction(a)
    if isinstance(a, float) and a.is_integer():
        return Fraction(int(a))
    return a


@dataclass(frozen=True)
class CombinedGroup:
    """Blocks amalgamated over J, optionally extended by the stable letter xi_{p i}."""

    blocks: tuple
    heights: tuple
    c: object
    hnn_p: int = None
    hnn_strip: tuple = None
    certificates: dict = field(default_factory=dict, compare=False)
    label: str = "Gamma"

    # alphabet -----------------------------------------------------------
    @property
    def letters(self):
        out = [(i, j) for i, G in enumerate(self.blocks) for j in range(G.rank)]
        if self.hnn_p is not None:
            out.append(("t", 0))
        return out

    @property
    def names(self):
        return tuple(self.letter_name(b, g) for b, g in self.letters)

    def letter_name(self, b, g):
        if b == "t":
            return "t"
        if b == "J":
            return "J"
        return f"{b + 1}.{self.blocks[b].names[g]}"

    @property
    def generators(self):
        return self._gens()

    def _gens(self):
        cache = self.__dict__.setdefault("_cache", {})
        if "gens" not in cache:
            out = []
            for b, g in self.letters:
                out.append(self.letter_matrix(b, g))
            cache["gens"] = tuple(out)
        return cache["gens"]

    @property
    def is_exact(self):
        return all(G.is_exact for G in self.blocks) and all(
            isinstance(_exact_height(a), Fraction) for a in self.heights)

    def stable_letter(self):
        return xi(QQi(0, self.hnn_p))

    def letter_matrix(self, b, g):
        if b == "t":
            return self.stable_letter()
        if b == "J":
            return xi(1)
        a = _exact_height(self.heights[b])
        h = xi(QQi(0, a)) if isinstance(a, Fraction) else xi(complex(0, a))
        return conjugate_by(h, self.blocks[b].generators[g])

    def conjugated_block(self, i):
        return conjugate_block(self.blocks[i], self.heights[i],
                               f"{self.blocks[i].label}@{self.heights[i]}")

    # words ----------------------------------------------------------------
    def word_from_letters(self, letters, jpow=0):
        """Word for a flat letter sequence (letter 2i is generator i, 2i+1 its inverse)."""
        al = self.letters
        w = [(al[s // 2][0], al[s // 2][1], -1 if s % 2 else 1) for s in letters]
        if jpow:
            w.append(("J", 0, jpow))
        return make_word(w)

    def evaluate(self, word):
        out = MoebiusMap.identity()
        for b, g, e in word:
            if b == "J":
                out = compose(out, xi(e))
            else:
                out = compose(out, self.letter_matrix(b, g) ** e)
        return out

    def format_word(self, word):
        parts = []
        for b, g, e in word:
            n = self.letter_name(b, g)
            parts.append(n if e == 1 else f"{n}^{e}")
        return " ".join(parts)

    @property
    def top(self):
        return self.heights[-1] + self.c

    @property
    def bottom(self):
        return self.heights[0] - self.c

    def reference_region(self):
        """H_{a_N+c} u H*_{a_1-c}."""
        return (upper(self.top), lower(self.bottom))

    def describe(self):
        parts = [f"{G.label}@{a}" for G, a in zip(self.blocks, self.heights)]
        s = " *_J ".join(parts)
        if self.hnn_p is not None:
            s = f"({s}) *_<t>, t = xi_{self.hnn_p}i"
        return f"{self.label}: {s}; c = {self.c}"

    # banded float enumeration ---------------------------------------------
    def banded_batches(self, L, chunk=1 << 15, expand_filter=None):
        """Reduced words of length 1..L as (src band, dst band, local matrix M).

        The element is xi_{a_dst i} M xi_{a_src i}^-1, so M keeps moderate
        entries while the large height offsets stay exact integers.  Words
        evaluating into J are dropped with their subtrees.
        """
        if self.hnn_p is not None:
            raise ValueError("banded enumeration covers the amalgam only")
        info = [(b, g) for b, g in self.letters]
        small = []
        bands = []
        for b, g in info:
            m = to_array(self.blocks[b].generators[g])
            small.append(m)
            small.append(np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]))
            bands += [b, b]
        small = np.array(small)
        bands = np.array(bands)
        m = len(small)
        inv = np.arange(m) ^ 1
        hs = [_exact_height(a) for a in self.heights]
        nb = len(hs)
        D = np.array([[float(hs[x] - hs[y]) for y in range(nb)] for x in range(nb)])
        first = BandBatch(small.copy(), np.arange(m)[:, None], np.zeros(m, np.int64),
                          bands.copy(), bands.copy())
        first = _drop_J(first, D)
        stack = [first]
        per = max(1, chunk // max(m - 1, 1))
        while stack:
            batch = stack.pop()
            yield batch
            if batch.depth >= L or len(batch) == 0:
                continue
            parents = batch
            if expand_filter is not None:
                parents = batch.select(expand_filter(batch))
            subs = []
            for start in range(0, len(parents), per):
                par = parents.select(slice(start, start + per))
                n = len(par)
                s_idx = np.repeat(np.arange(m), n)
                p_idx = np.tile(np.arange(n), m)
                ok = par.words[p_idx, 0] != inv[s_idx]
                s_idx, p_idx = s_idx[ok], p_idx[ok]
                delta = D[par.dst[p_idx], bands[s_idx]]
                M = par.mats[p_idx]
                XM = M.copy()
                XM[:, 0, 0] = M[:, 0, 0] + 1j * delta * M[:, 1, 0]
                XM[:, 0, 1] = M[:, 0, 1] + 1j * delta * M[:, 1, 1]
                prod = np.einsum("nij,njk->nik", small[s_idx], XM)
                words = np.concatenate([s_idx[:, None], par.words[p_idx]], axis=1)
                child = BandBatch(prod, words, np.zeros(len(s_idx), np.int64),
                                  par.src[p_idx], bands[s_idx])
                subs.append(_drop_J(child, D))
            stack.extend(reversed(subs))

    def band_heights(self):
        return [_exact_height(a) for a in self.heights]


@dataclass
class BandBatch:
    mats: np.ndarray
    words: np.ndarray
    jpow: np.ndarray
    src: np.ndarray
    dst: np.ndarray

    def __len__(self):
        return len(self.jpow)

    @property
    def depth(self):
        return self.words.shape[1]

    def select(self, idx):
        return BandBatch(self.mats[idx], self.words[idx], self.jpow[idx], self.src[idx], self.dst[idx])


def _drop_J(batch, D):
    M = batch.mats
    a, b, c, d = M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1]
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(d)))
    fixes = np.abs(c) <= FLOAT_C_TOL * scale
    safe_d = np.where(np.abs(d) == 0, 1.0, d)
    t = b / safe_d + 1j * D[batch.dst, batch.src]
    in_J = fixes & (np.abs(a - d) <= 1e-9 * scale) & (np.abs(t.imag) <= 1e-9) & (
        np.abs(t.real - np.round(t.real)) <= 1e-9)
    return batch.select(~in_J)


def make_word(letters):
    """Merge adjacent letters on the same generator and drop zero exponents."""
    pairs = reduce_word(((b, g), e) for b, g, e in letters)
    return tuple((bg[0], bg[1], e) for bg, e in pairs)


def invert(word):
    return tuple((b, g, -e) for b, g, e in reversed(word))


# --------------------------------------------------------------------------
# construction


_BLOCK_CERTS = {}


def block_certificate(G, c, L, mode="auto"):
    """Precise invariance of H_c u H*_{-c} in G up to L (cached per block)."""
    key = (G.label, tuple(g.canonical() for g in G.generators) if G.is_exact else id(G), c, L, mode)
    if key not in _BLOCK_CERTS:
        _BLOCK_CERTS[key] = check_precisely_invariant(G, (upper(c), lower(-c)), L, mode=mode)
    return _BLOCK_CERTS[key]


def amalgamate(blocks, c, L=6, combined_L=DEFAULT_COMBINED_L, label="Gamma", mode="auto"):
    """Amalgamate ``[(G_i, a_i), ...]`` over J after checking every hypothesis.

    Checks, in order: a_{i+1} - a_i >= 2c; H_c u H*_{-c} precisely
    J-invariant in each G_i up to L; then the combined reference region
    H_{a_N+c} u H*_{a_1-c} up to ``combined_L`` (0 skips it).
    Raises :class:`HypothesisError` naming the failing check.
    """
    if not blocks:
        raise ValueError("need at least one block")
    groups = tuple(G for G, _ in blocks)
    hs = tuple(_exact_height(a) for _, a in blocks)
    c = _exact_height(c)
    for i in range(len(hs) - 1):
        if not hs[i + 1] - hs[i] >= 2 * c:
            raise HypothesisError(
                f"spacing hypothesis fails: a_{i + 2} - a_{i + 1} = {hs[i + 1] - hs[i]} < 2c = {2 * c}",
                check="spacing")
    certs = {}
    for i, G in enumerate(groups):
        if G.boundary_element() != xi(1):
            raise HypothesisError(f"block {i + 1} boundary word is not xi_1", check="boundary")
        cert = block_certificate(G, c, L, mode)
        if not cert:
            raise HypothesisError(
                f"block {i + 1} ({G.label}): H_c u H*_-c not precisely J-invariant "
                f"(witness {format_word(cert.witness_word)})", check="block_invariance", witness=cert)
        certs[f"block{i + 1}"] = cert
    out = CombinedGroup(groups, hs, c, certificates=certs, label=label)
    if combined_L:
        cert = check_precisely_invariant(out, out.reference_region(), combined_L, mode=mode)
        if not cert:
            raise HypothesisError("combined reference region not precisely J-invariant",
                                  check="combined_invariance", witness=cert)
        certs["combined"] = cert
    return out


def default_hnn_strip(G):
    """(a_1 - c, a_N + 3c): for blocks at 4C, ..., 4Ck this is (3C, 4Ck + 3C)."""
    return (G.heights[0] - G.c, G.heights[-1] + 3 * G.c)


def hnn_extend(G, p, L=6, strip=None, mode="auto", label=None):
    """Adjoin t = xi_{p i} after checking the strip width and its complementary half-planes."""
    if G.hnn_p is not None:
        raise ValueError("group already has a stable letter")
    if not isinstance(p, int) or p <= 0:
        raise ValueError("p must be a positive integer")
    lo, hi = strip if strip is not None else default_hnn_strip(G)
    width = hi - lo
    if not width < p:
        raise HypothesisError(f"strip width {width} >= p = {p}", check="hnn_width")
    region = (upper(hi), lower(lo))
    base = CombinedGroup(G.blocks, G.heights, G.c, label=G.label)
    cert = check_precisely_invariant(base, region, L, mode=mode)
    if not cert:
        raise HypothesisError("complementary half-planes of the strip not precisely J-invariant",
                              check="hnn_invariance", witness=cert)
    certs = dict(G.certificates)
    certs["hnn"] = cert
    certs["hnn_width"] = {"width": _num(width), "p": p, "strip": [_num(lo), _num(hi)]}
    return CombinedGroup(G.blocks, G.heights, G.c, p, (lo, hi), certs,
                         label or f"{G.label}^")


# --------------------------------------------------------------------------
# normal forms


def _split_matrix(M):
    """(None, m) if M = xi_1^m, else (k, M xi_1^k) with the pole normalized to [0, 1)."""
    if M.c == 0 if M.is_exact else abs(complex(M.c)) < FLOAT_C_TOL:
        if M.is_exact:
            t = M.b / M.d
            if M.a == M.d and t.im == 0 and Fraction(t.re).denominator == 1:
                return None, int(t.re)
        else:
            t = complex(M.b / M.d)
            if abs(t.imag) < 1e-9 and abs(t.real - round(t.real)) < 1e-9:
                return None, int(round(t.real))
    if M.is_exact:
        k, rep = normalize_exact(M)
        return k, rep
    c = complex(M.c)
    k = int(np.floor((-complex(M.d) / c).real)) if abs(c) >= FLOAT_C_TOL else 0
    return k, compose(M, xi(k))


def _block_normalize(G, word):
    """Split a block element as rep * xi^m: returns (rep word or (), m)."""
    k, _ = _split_matrix(G.evaluate(word))
    if k is None:
        return (), _
    return reduce_word(tuple(word) + power(G.boundary_word, k)), -k


def _rmul(f, g):
    a, b, c, d = f
    p, q, r, s = g
    return (a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s)


def _rsplit(M):
    """Real-rational fast path of :func:`_split_matrix` (no representative matrix)."""
    a, b, c, d = M
    if c == 0:
        t = b / d
        if a == d and t.denominator == 1:
            return None, int(t)
        return (-math.floor(t) if a == d else 0), None
    return math.floor(-d / c), None


def _rtrans(m):
    return (Fraction(1), Fraction(m), Fraction(0), Fraction(1))


class _BlockTables:
    """Generator matrices and their inverses for fast syllable updates."""

    def __init__(self, G):
        self.G = G
        self.real = G.is_exact and all(x.im == 0 for g in G.generators for x in g.entries())
        if self.real:
            ents = {n: tuple(Fraction(x.re) for x in g.entries()) for n, g in zip(G.names, G.generators)}
            self.pos = ents
            self.neg = {n: (d, -b, -c, a) for n, (a, b, c, d) in ents.items()}
            self.mul, self.trans, self.split = _rmul, _rtrans, _rsplit
        else:
            self.pos = {n: g for n, g in zip(G.names, G.generators)}
            self.neg = {n: inverse(g) for n, g in zip(G.names, G.generators)}
            self.mul, self.trans, self.split = compose, xi, _split_matrix


def _tables(G):
    cache = G.__dict__.setdefault("_cache", {})
    if "nf" not in cache:
        cache["nf"] = [_BlockTables(Gb) for Gb in G.blocks]
    return cache["nf"]


def normal_form(G, w):
    """Canonical form: alternating block syllables (J-coset reps) and t-powers, then xi_1^m.

    Block syllables are the unique reduced free words of the coset
    representatives whose pole has real part in [0, 1).
    """
    tabs = _tables(G)
    syl = []      # (block, word over names, matrix) or ("t", e, None)
    m = 0
    for b, g, e in w:
        if e == 0:
            continue
        if b == "J":
            m += e
            continue
        if b == "t":
            if syl and syl[-1][0] == "t":
                e2 = syl[-1][1] + e
                syl.pop()
                if e2:
                    syl.append(("t", e2, None))
            else:
                syl.append(("t", e, None))
            continue
        tb = tabs[b]
        Gb = tb.G
        name = Gb.names[g]
        step = tb.pos[name] if e > 0 else tb.neg[name]
        for _ in range(abs(e)):
            if syl and syl[-1][0] == b:
                _, u, M = syl.pop()
            else:
                u, M = (), None
            jm = tb.trans(m)
            M = tb.mul(jm, step) if M is None else tb.mul(tb.mul(M, jm), step)
            k, rep = tb.split(M)
            if k is None:
                m = rep
                continue
            if k:
                M = tb.mul(M, tb.trans(k))
            y = reduce_word(u + power(Gb.boundary_word, m) + ((name, 1 if e > 0 else -1),)
                            + power(Gb.boundary_word, k))
            syl.append((b, y, M))
            m = -k
    out = []
    for s in syl:
        if s[0] == "t":
            out.append(("t", 0, s[1]))
        else:
            Gb = G.blocks[s[0]]
            out.extend((s[0], Gb.names.index(n), x) for n, x in s[1])
    if m:
        out.append(("J", 0, m))
    return tuple(out)


def syllables(G, w):
    """Split a normal form into syllables ``[(block or 't' or 'J', letters), ...]``."""
    out = []
    for letter in w:
        if out and out[-1][0] == letter[0] and letter[0] not in ("t", "J"):
            out[-1][1].append(letter)
        else:
            out.append((letter[0], [letter]))
    return out


def random_word(G, length, rng):
    al = G.letters
    w = []
    for _ in range(length):
        r = rng.randrange(len(al) + 1)
        if r == len(al):
            w.append(("J", 0, rng.choice((-1, 1))))
        else:
            b, g = al[r]
            w.append((b, g, rng.choice((-1, 1))))
    return tuple(w)


# --------------------------------------------------------------------------
# ping-pong


@dataclass
class PingPongCertificate:
    group: str
    depth: int
    exhaustive_depth: int
    examined: int
    sampled: int
    margin: object
    seed: int
    mode: str = "exact"

    def __bool__(self):
        return True

    def to_dict(self):
        return {"group": self.group, "depth": self.depth, "exhaustive_depth": self.exhaustive_depth,
                "examined": self.examined, "sampled": self.sampled, "margin": _num(self.margin),
                "seed": self.seed, "mode": self.mode,
                "claim": "every examined nonempty normal form maps H_top u H*_bottom into the "
                         "open strip of its first syllable's block"}


@dataclass
class PingPongViolation:
    group: str
    word: tuple
    text: str
    reason: str

    def __bool__(self):
        return False

    def to_dict(self):
        return {"group": self.group, "witness": self.text, "reason": self.reason}


def _strip_margin(R, lo, hi):
    """Signed distance of a region from the complement of the open strip lo < Im z < hi."""
    if R.kind != "disk" or R.outside:
        return None
    y = im_(R.center)
    return min(y - R.radius - lo, hi - y - R.radius)


def _syllable_pool(G, max_len):
    """Block words of length <= max_len that are J-coset reps, as (block, word, matrix)."""
    pool = []
    for b, Gb in enumerate(G.blocks):
        seen = set()
        frontier = [()]
        for _ in range(max_len):
            nxt = []
            for u in frontier:
                for name in Gb.names:
                    for e in (1, -1):
                        if u and u[-1] == (name, -e):
                            continue
                        w = u + ((name, e),)
                        nxt.append(w)
                        rep, _ = _block_normalize(Gb, w)
                        if rep and rep not in seen:
                            seen.add(rep)
                            letters = tuple((b, Gb.names.index(n), x) for n, x in rep)
                            pool.append((b, letters, G.evaluate(letters)))
            frontier = nxt
    return pool


def ping_pong_certify(G, depth, samples=10_000, seed=0, exhaustive_depth=3, syllable_len=2):
    """Region-tracking check of nontriviality for normal forms up to ``depth`` syllables.

    Exhaustive over alternating sequences of generator-level syllables up to
    ``exhaustive_depth``; above that, ``samples`` seeded random sequences
    whose syllables are coset reps of block word length <= ``syllable_len``.
    The stable letter is not part of the tracked alphabet.
    """
    B = G.reference_region()
    hs = G.heights
    c = G.c
    # the strips must be disjoint for the region game to say anything
    for i in range(len(hs) - 1):
        if not hs[i + 1] - hs[i] >= 2 * c:
            return PingPongViolation(G.label, (), "", f"strips of blocks {i + 1} and {i + 2} overlap")
    examined = 0
    margin = None
    gen_pool = _syllable_pool(G, 1)

    def image(M, regions):
        return tuple(region_image(M, R) for R in regions)

    def check(word_letters, first_block, regs):
        nonlocal margin
        lo, hi = hs[first_block] - c, hs[first_block] + c
        for R in regs:
            m = _strip_margin(R, lo, hi)
            if m is None or not m > 0:
                return PingPongViolation(G.label, word_letters, G.format_word(word_letters),
                                         f"image {R.describe()} not inside open strip ({lo}, {hi})")
            margin = m if margin is None or m < margin else margin
        return None

    # exhaustive: prepend syllables (images compose right to left)
    frontier = [((), None, B)]
    for d in range(1, min(depth, exhaustive_depth) + 1):
        nxt = []
        for letters, fb, regs in frontier:
            for b, s, M in gen_pool:
                if fb is not None and b == fb:
                    continue
                new_regs = image(M, regs)
                w = s + letters
                examined += 1
                v = check(w, b, new_regs)
                if v is not None:
                    return v
                nxt.append((w, b, new_regs))
        frontier = nxt
    sampled = 0
    if depth > exhaustive_depth and samples:
        rng = random.Random(seed)
        pool = _syllable_pool(G, syllable_len)
        by_block = {}
        for item in pool:
            by_block.setdefault(item[0], []).append(item)
        blocks = sorted(by_block)
        for _ in range(samples):
            n = rng.randint(exhaustive_depth + 1, depth)
            seq, prev = [], None
            for _ in range(n):
                b = rng.choice([x for x in blocks if x != prev] or blocks)
                seq.append(rng.choice(by_block[b]))
                prev = b
            regs = B
            for b, s, M in reversed(seq):
                regs = image(M, regs)
            w = tuple(x for item in seq for x in item[1])
            sampled += 1
            v = check(w, seq[0][0], regs)
            if v is not None:
                return v
    return PingPongCertificate(G.label, depth, min(depth, exhaustive_depth), examined, sampled,
                               margin, seed)
