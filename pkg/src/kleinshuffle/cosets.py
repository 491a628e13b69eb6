"""Enumeration of right J-cosets gJ, J = <z -> z+1>, by word length.

Words are built by left multiplication: the children of ``gJ`` are ``s g J``
for generator letters ``s`` that do not cancel the first letter of ``g``.
Each coset is represented by ``g xi_1^k`` with the pole ``-d/c`` normalized to
real part in ``[0, 1)`` (or, when ``g`` fixes infinity, the translation part
normalized to ``[0, 1)``).  Images of J-invariant sets depend only on the
coset, which is why this is the natural tree for invariance checks.

Two engines share that contract:

* :func:`exact_cosets` walks the tree with exact Gaussian rationals and
  deduplicates cosets by their canonical matrix.
* :func:`float_batches` walks it with vectorized numpy complex arithmetic in
  depth-first chunks (no deduplication); used once the tree is too big for
  exact arithmetic.

Letter ``2i`` is generator ``i`` and letter ``2i+1`` is its inverse.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .moebius import MoebiusMap, QQi, compose, inverse, xi

FLOAT_C_TOL = 1e-10


def letter_matrices(generators):
    mats = []
    for g in generators:
        mats.append(g)
        mats.append(inverse(g))
    return mats


def estimate_count(n_letters, L):
    """Number of freely reduced words of length 1..L."""
    total, level = 0, n_letters
    for _ in range(L):
        total += level
        level *= max(n_letters - 1, 1)
    return total


@dataclass
class Coset:
    word: tuple          # letter indices, first (leftmost) to last
    jpow: int            # total right power of xi_1 appended by normalization
    matrix: MoebiusMap   # g * xi_1^jpow

    @property
    def depth(self):
        return len(self.word)


def _floor(q):
    return math.floor(q)


def normalize_exact(g):
    """Return ``(k, g xi_1^k)`` for the canonical representative, or ``None`` if g is in J."""
    a, b, c, d = g.entries()
    if c == 0:
        t = b / d
        if a == d and t.im == 0 and t.re.denominator == 1:
            return None
        if a == d:
            k = -_floor(t.re)
        else:
            k = 0
    else:
        pole = -d / c
        k = _floor(pole.re)
    if k:
        g = compose(g, xi(k))
    return k, g


def exact_cosets(generators, L, include_fixing_infinity=True):
    """Yield :class:`Coset` objects of word length 1..L in breadth-first order."""
    mats = letter_matrices(generators)
    m = len(mats)
    seen = set()
    frontier = []
    for s in range(m):
        norm = normalize_exact(mats[s])
        if norm is None:
            continue
        k, rep = norm
        key = rep.canonical()
        if key in seen:
            continue
        seen.add(key)
        cos = Coset((s,), k, rep)
        frontier.append(cos)
        yield cos
    for _ in range(2, L + 1):
        nxt = []
        for cos in frontier:
            first = cos.word[0]
            for s in range(m):
                if s == first ^ 1:
                    continue
                norm = normalize_exact(compose(mats[s], cos.matrix))
                if norm is None:
                    continue
                k, rep = norm
                key = rep.canonical()
                if key in seen:
                    continue
                seen.add(key)
                child = Coset((s,) + cos.word, cos.jpow + k, rep)
                nxt.append(child)
                yield child
        frontier = nxt


@dataclass
class Batch:
    mats: np.ndarray    # (n, 2, 2) complex
    words: np.ndarray   # (n, depth) letter indices
    jpow: np.ndarray    # (n,) int64

    def __len__(self):
        return len(self.jpow)

    @property
    def depth(self):
        return self.words.shape[1]


def to_array(g):
    return np.array([[complex(g.a), complex(g.b)], [complex(g.c), complex(g.d)]], dtype=complex)


def _normalize_float(mats):
    """Right-multiply by xi_1^k to normalize; returns (mats, k, in_J mask)."""
    a = mats[:, 0, 0]
    b = mats[:, 0, 1]
    c = mats[:, 1, 0]
    d = mats[:, 1, 1]
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(d)))
    fixes_inf = np.abs(c) <= FLOAT_C_TOL * scale
    k = np.zeros(len(a), dtype=np.int64)
    safe_c = np.where(fixes_inf, 1.0, c)
    pole = -d / safe_c
    k = np.where(fixes_inf, 0, np.floor(pole.real)).astype(np.int64)
    # translations fixing infinity
    safe_d = np.where(np.abs(d) == 0, 1.0, d)
    t = b / safe_d
    is_trans = fixes_inf & (np.abs(a - d) <= 1e-9 * scale)
    kt = -np.floor(t.real + 1e-9)
    k = np.where(is_trans, kt.astype(np.int64), k)
    t_norm = t.real + kt
    in_J = is_trans & (np.abs(t.imag) <= 1e-9) & ((np.abs(t_norm) <= 1e-9) | (np.abs(t_norm - 1) <= 1e-9))
    out = mats.copy()
    out[:, 0, 1] = a * k + b
    out[:, 1, 1] = c * k + d
    return out, k, in_J


def float_batches(generators, L, chunk=1 << 15, expand_filter=None):
    """Yield :class:`Batch` objects covering all reduced words of length 1..L.

    Traversal is depth-first over chunks so memory stays bounded.  Elements of
    J are dropped along with their subtrees (their children are depth-1
    cosets already visited).  ``expand_filter(batch) -> bool mask`` may veto
    expansion of some parents; vetoed parents are counted by the caller.
    """
    letters = np.array([to_array(g) for g in letter_matrices(generators)])
    m = len(letters)
    inv = np.arange(m) ^ 1
    mats, k, in_J = _normalize_float(letters.copy())
    keep = ~in_J
    first = Batch(mats[keep], np.arange(m)[keep][:, None], k[keep])
    stack = [first]
    per = max(1, chunk // max(m - 1, 1))
    while stack:
        batch = stack.pop()
        yield batch
        if batch.depth >= L or len(batch) == 0:
            continue
        parents = batch
        if expand_filter is not None:
            mask = expand_filter(batch)
            parents = Batch(batch.mats[mask], batch.words[mask], batch.jpow[mask])
        subs = []
        for start in range(0, len(parents), per):
            sl = slice(start, start + per)
            pm, pw, pj = parents.mats[sl], parents.words[sl], parents.jpow[sl]
            n = len(pj)
            # children: letter s times parent
            prod = np.einsum("sij,njk->snik", letters, pm).reshape(m * n, 2, 2)
            s_idx = np.repeat(np.arange(m), n)
            p_idx = np.tile(np.arange(n), m)
            allowed = pw[p_idx, 0] != inv[s_idx]
            prod, s_idx, p_idx = prod[allowed], s_idx[allowed], p_idx[allowed]
            prod, kk, in_J = _normalize_float(prod)
            keep = ~in_J
            words = np.concatenate([s_idx[keep, None], pw[p_idx[keep]]], axis=1)
            subs.append(Batch(prod[keep], words, pj[p_idx[keep]] + kk[keep]))
        stack.extend(reversed(subs))
