"""Word-length-truncated checks of precise J-invariance and strip confinement.

A set B is precisely J-invariant in G when it is J-invariant and g(B) meets B
only for g in J.  Here B is a union of horizontal half-planes and the check
runs over all right J-cosets of word length <= L (see :mod:`.cosets`).
Certificates always carry L; nothing here proves discreteness.

Groups are anything exposing ``generators``, ``label``, ``is_exact``,
``word_from_letters(letters, jpow)`` and ``evaluate(word)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cosets import estimate_count, exact_cosets, float_batches
from .moebius import (
    INF, TAU_CLASS, MoebiusMap, Region, commutator_trace, im_, lower, re_, region_disjoint,
    region_image, upper,
)
from .words import format_word

EXACT_ENUM_LIMIT = 40_000
DELTA_PRUNE = 1e-6


class HypothesisError(ValueError):
    """A hypothesis of a combination step failed; carries the failing check."""

    def __init__(self, message, check=None, witness=None):
        super().__init__(message)
        self.check = check
        self.witness = witness


@dataclass
class InvarianceCertificate:
    group: str
    region: str
    L: int
    examined: int
    margin: object
    mode: str
    pruned_subtrees: int = 0

    def __bool__(self):
        return True

    def to_dict(self):
        return {"group": self.group, "region": self.region, "L": self.L,
                "examined": self.examined, "margin": _num(self.margin), "mode": self.mode,
                "pruned_subtrees": self.pruned_subtrees}


@dataclass
class Violation:
    group: str
    region: str
    witness_word: tuple
    witness_matrix: MoebiusMap
    regions: tuple          # (image region, region of B it meets)
    reason: str
    margin: object = None
    witness_text: str = ""

    def __bool__(self):
        return False

    def to_dict(self):
        return {"group": self.group, "region": self.region,
                "witness": self.witness_text or format_word(self.witness_word),
                "matrix": [str(x) for x in self.witness_matrix.canonical()],
                "reason": self.reason, "margin": _num(self.margin)}


def _num(x):
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return x


def _parse_components(B):
    if isinstance(B, Region):
        B = (B,)
    B = tuple(B)
    for R in B:
        if not R.is_horizontal:
            raise ValueError(f"{R.describe()} is not invariant under z -> z+1")
    return B


def describe_regions(B):
    return " u ".join(R.describe() for R in B)


def _bounds(B):
    """Split horizontal half-planes into upper thresholds T and lower thresholds S."""
    tops, bottoms = [], []
    for R in B:
        h = R.offset / im_(R.normal)
        (tops if im_(R.normal) > 0 else bottoms).append(h)
    return tops, bottoms


def _use_exact(G, L, mode):
    if mode == "exact":
        if not G.is_exact:
            raise ValueError("exact mode needs exact generators")
        return True
    if mode == "float":
        return False
    return G.is_exact and estimate_count(2 * len(G.generators), L) <= EXACT_ENUM_LIMIT


def _exact_element_check(g, B):
    """(ok, margin, image, hit) for one coset representative against B."""
    if g.c == 0:
        return False, None, None, None
    pole = -g.d / g.c
    for R in B:
        if R.contains(pole):
            return False, None, region_image(g, R), R
    margin = None
    for R in B:
        img = region_image(g, R)
        for S in B:
            dj, m = region_disjoint(img, S)
            if margin is None or m < margin:
                margin = m
            if not dj:
                return False, m, img, S
    return True, margin, None, None


def _float_margins(mats, src, dst):
    """Vectorized min separation of g(B) from B; -inf where the pole lies in B.

    ``src``/``dst`` are ``(tops, bottoms)`` height lists in the frames where
    the matrix acts and where its image lives (scalars or per-row arrays).
    """
    a = mats[:, 0, 0]
    c = mats[:, 1, 0]
    d = mats[:, 1, 1]
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(d)))
    fixes_inf = np.abs(c) <= 1e-10 * scale
    c_safe = np.where(fixes_inf, 1.0, c)
    pole_im = (-d / c_safe).imag
    w = 1.0 / (c_safe * c_safe)
    base = (a / c_safe).imag
    margin = np.full(len(a), np.inf)
    bad = fixes_inf.copy()
    tops_s, bots_s = src
    tops_d, bots_d = dst
    for T in tops_s:
        bad |= pole_im >= T
    for S in bots_s:
        bad |= pole_im <= S
    for h in list(tops_s) + list(bots_s):
        s = h - pole_im
        s = np.where(s == 0, np.nan, s)
        y = base + w.real / (2 * s)
        r = np.abs(w) / (2 * np.abs(s))
        for T in tops_d:
            margin = np.fmin(margin, T - (y + r))
        for S in bots_d:
            margin = np.fmin(margin, (y - r) - S)
    return np.where(bad, -np.inf, margin)


def _frames(G, B, batch):
    """Height lists (src, dst) for a batch; banded batches shift per row."""
    tops, bottoms = _bounds(B)
    if not hasattr(batch, "src"):
        f = ([float(t) for t in tops], [float(b) for b in bottoms])
        return f, f
    hs = G.band_heights()
    rel_t = [np.array([float(T - a) for a in hs]) for T in tops]
    rel_b = [np.array([float(S - a) for a in hs]) for S in bottoms]
    src = ([r[batch.src] for r in rel_t], [r[batch.src] for r in rel_b])
    dst = ([r[batch.dst] for r in rel_t], [r[batch.dst] for r in rel_b])
    return src, dst


def _batches(G, L, expand_filter=None):
    if hasattr(G, "banded_batches"):
        return G.banded_batches(L, expand_filter=expand_filter)
    return float_batches(G.generators, L, expand_filter=expand_filter)


def float_tolerance(B):
    tops, bottoms = _bounds(B)
    scale = max([1.0] + [abs(float(x)) for x in tops + bottoms])
    return 1e-9 * scale


def check_precisely_invariant(G, B, L, mode="auto", prune=None):
    """Certificate if g(B) and B are disjoint for every coset gJ of length <= L with g not in J.

    ``B`` is a horizontal half-plane or a union of them (anything else raises
    ``ValueError``: B must be J-invariant).  Returns :class:`InvarianceCertificate`
    or :class:`Violation` (falsy).  In float mode a margin below a relative
    tolerance of 1e-9 counts as a violation.  ``prune`` (a diameter floor,
    float mode only) stops expanding cosets whose image of B is a disk smaller
    than the floor lying inside the complement of B by more than its diameter;
    the count of such subtrees is recorded.  Pruning is a heuristic and is off
    by default.
    """
    B = _parse_components(B)
    desc = describe_regions(B)
    examined = 0
    if _use_exact(G, L, mode):
        margin = None
        for cos in exact_cosets(G.generators, L):
            examined += 1
            ok, m, img, hit = _exact_element_check(cos.matrix, B)
            if not ok:
                return _violation(G, desc, cos.word, cos.jpow, B, m)
            if margin is None or m < margin:
                margin = m
        return InvarianceCertificate(G.label, desc, L, examined, margin, "exact")
    tol = float_tolerance(B)
    pruned = [0]
    margin = np.inf

    def filt(batch):
        src, dst = _frames(G, B, batch)
        m = _float_margins(batch.mats, src, dst)
        diam = _image_diameters(batch.mats, src)
        stop = (diam < prune) & (m > diam)
        pruned[0] += int(stop.sum())
        return ~stop

    for batch in _batches(G, L, expand_filter=filt if prune else None):
        examined += len(batch)
        src, dst = _frames(G, B, batch)
        m = _float_margins(batch.mats, src, dst)
        bad = np.nonzero(~(m > tol))[0]
        if len(bad):
            i = bad[0]
            return _violation(G, desc, tuple(int(x) for x in batch.words[i]),
                              int(batch.jpow[i]), B, float(m[i]))
        if len(m):
            margin = min(margin, float(m.min()))
    return InvarianceCertificate(G.label, desc, L, examined,
                                 None if examined == 0 else margin, "float", pruned[0])


def _image_diameters(mats, src):
    c = mats[:, 1, 0]
    d = mats[:, 1, 1]
    c_safe = np.where(c == 0, 1.0, c)
    pole_im = (-d / c_safe).imag
    diam = np.zeros(len(c))
    for h in list(src[0]) + list(src[1]):
        s = np.abs(h - pole_im)
        diam = np.maximum(diam, 1.0 / (s * np.abs(c_safe) ** 2))
    return diam


def _violation(G, desc, letters, jpow, B, margin):
    word = G.word_from_letters(letters, jpow)
    g = G.evaluate(word)
    img_pair = (None, None)
    reason = "image meets B"
    if g.is_exact and g.c == 0 or (not g.is_exact and abs(complex(g.c)) < 1e-10):
        reason = "element outside J fixes infinity"
        img_pair = (region_image(g, B[0]), B[0])
    else:
        pole = -g.d / g.c
        for R in B:
            if R.contains(pole):
                reason = "pole of the element lies in B (infinity maps into B)"
                img_pair = (region_image(g, R), R)
                break
        else:
            for R in B:
                img = region_image(g, R)
                for S in B:
                    dj, _ = region_disjoint(img, S)
                    if not dj:
                        img_pair = (img, S)
                        break
                if img_pair[0] is not None:
                    break
            if img_pair[0] is None:
                reason = "separation below float tolerance"
    text = getattr(G, "format_word", format_word)(word)
    return Violation(G.label, desc, word, g, img_pair, reason, margin, text)


def reverify_violation(G, B, violation):
    """Re-check a witness independently: g not in J and g(B) meets B."""
    B = _parse_components(B)
    g = G.evaluate(violation.witness_word)
    if g.c == 0 if g.is_exact else abs(complex(g.c)) < 1e-10:
        t = g.b / g.d
        in_J = g.a == g.d and im_(t) == 0 and Fraction(re_(t)).denominator == 1 if g.is_exact else False
        return not in_J
    pole = -g.d / g.c
    if any(R.contains(pole) for R in B):
        return True
    for R in B:
        img = region_image(g, R)
        for S in B:
            if not region_disjoint(img, S)[0]:
                return True
    return False


# --------------------------------------------------------------------------
# strip constants


def _thresholds_exact(g):
    """(upper, lower) thresholds: g maps H_t off H_t iff t > upper, H*_{-t} off H*_{-t} iff t > lower."""
    if g.c == 0:
        return math.inf, math.inf
    a, c, d = g.a, g.c, g.d
    w = 1 / (c * c)
    K = float(re_(w)) + abs(w)
    pim = float(im_(-d / c))
    q = float(im_(a / c)) - pim
    root = math.sqrt(q * q + 2 * K)
    return pim + (q + root) / 2, -pim + (-q + root) / 2


def _thresholds_float(mats):
    a = mats[:, 0, 0]
    c = mats[:, 1, 0]
    d = mats[:, 1, 1]
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(d)))
    fixes_inf = np.abs(c) <= 1e-10 * scale
    c_safe = np.where(fixes_inf, 1.0, c)
    w = 1.0 / (c_safe * c_safe)
    K = w.real + np.abs(w)
    pim = (-d / c_safe).imag
    q = (a / c_safe).imag - pim
    root = np.sqrt(q * q + 2 * K)
    up = pim + (q + root) / 2
    lo = -pim + (-q + root) / 2
    t = np.maximum(up, lo)
    return np.where(fixes_inf, np.inf, t)


@dataclass
class StripConstant:
    """Least height c (not attained) with H_c, H*_{-c} precisely J-invariant up to L."""

    value: float
    L: int
    examined: int
    mode: str
    witness_word: tuple = ()

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return {"c": _num(self.value), "L": self.L, "examined": self.examined, "mode": self.mode,
                "witness": format_word(self.witness_word)}


def strip_constant(G, L, mode="auto"):
    """Strip constant with provenance (see :func:`min_strip_constant`)."""
    best, best_word = 0.0, ()
    examined = 0
    if _use_exact(G, L, mode):
        for cos in exact_cosets(G.generators, L):
            examined += 1
            t = max(_thresholds_exact(cos.matrix))
            if t > best:
                best, best_word = t, G.word_from_letters(cos.word, cos.jpow)
        return StripConstant(best, L, examined, "exact", best_word)
    for batch in _batches(G, L):
        if hasattr(batch, "src"):
            raise ValueError("strip constants are computed per block")
        examined += len(batch)
        t = _thresholds_float(batch.mats)
        i = int(np.argmax(t))
        if len(t) and t[i] > best:
            best = float(t[i])
            best_word = G.word_from_letters(tuple(int(x) for x in batch.words[i]), int(batch.jpow[i]))
    return StripConstant(best, L, examined, "float", best_word)


def min_strip_constant(G, L, mode="auto"):
    """Lower bound for the strip constant from all cosets of word length <= L.

    Every examined element outside J maps H_c off itself and H*_{-c} off
    itself exactly when c exceeds the returned value; an element outside J
    fixing infinity makes the value infinite.  Monotone in L.
    """
    return strip_constant(G, L, mode).value


def strip_confinement(points, c, center=0.0, tol=TAU_CLASS):
    """Whether every finite point lies in the strip |Im z - center| <= c (+tol).

    ``points`` is a :class:`~kleinshuffle.limitset.PointCloud` or an iterable
    of complex numbers.  Returns ``(ok, worst_point, worst_excess)``.
    """
    heights = None
    if hasattr(points, "global_imag"):
        heights = points.global_imag()
        pts = points.points
    else:
        pts = np.array([complex(p) for p in points if p is not INF], dtype=complex)
        heights = pts.imag
    if len(heights) == 0:
        return True, None, 0.0
    excess = np.abs(heights - center) - c
    i = int(np.argmax(excess))
    worst = complex(pts[i].real, heights[i])
    return bool(excess[i] <= tol), worst, float(excess[i])


# --------------------------------------------------------------------------
# Jorgensen


def jorgensen_quantity(A, B):
    t = complex(A.trace())
    return abs(t * t - 4) + abs(complex(commutator_trace(A, B)) - 2)


def jorgensen_check(G, tol=TAU_CLASS):
    """``[(pair, quantity, passed)]`` for every ordered non-elementary generator pair.

    Pairs with commutator trace 2 (a common fixed point) are elementary and
    skipped.
    """
    out = []
    names = getattr(G, "names", None) or [str(i) for i in range(len(G.generators))]
    gens = G.generators
    for i, A in enumerate(gens):
        for j, Bm in enumerate(gens):
            if i == j:
                continue
            ct = commutator_trace(A, Bm)
            if (ct == 2) if (A.is_exact and Bm.is_exact) else abs(complex(ct) - 2) <= tol:
                continue
            q = jorgensen_quantity(A, Bm)
            out.append(((names[i], names[j]), q, q >= 1 - tol))
    return out
