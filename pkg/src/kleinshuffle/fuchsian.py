"""Building-block groups containing xi_1 = (z -> z+1) as a primitive boundary parabolic.

* :func:`punctured_torus_group` -- an exact rank-2 Fuchsian group whose
  commutator is exactly xi_1.
* :func:`genus_cover_group` -- genus-j blocks as (2j-1)-fold covers of the
  punctured torus with a single cusp, via Reidemeister-Schreier rewriting.
* :func:`markov_family` -- numeric quasifuchsian deformations parameterized by
  the traces of the two generators.
"""

from __future__ import annotations

import cmath
import itertools
from collections import deque
from dataclasses import dataclass

from .cosets import exact_cosets, float_batches, estimate_count
from .moebius import (MoebiusMap, QQi, TAU_CLASS, classify, compose, conjugate_by,
    conjugate_by_matrix, inverse, xi)
from .words import expand_word, format_word, invert_word, parse_word, power, reduce_word

EXACT_ENUM_LIMIT = 40_000


@dataclass(frozen=True)
class MarkedGroup:
    """Finitely generated group with a boundary word realizing xi_1."""

    names: tuple
    generators: tuple
    boundary_word: tuple
    genus: object = "unknown"
    claimed_kind: str = "fuchsian_exact"
    label: str = "G"

    def __post_init__(self):
        if len(self.names) != len(self.generators):
            raise ValueError("names and generators differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate generator names")

    @property
    def rank(self):
        return len(self.generators)

    @property
    def is_exact(self):
        return all(g.is_exact for g in self.generators)

    def generator(self, name):
        return self.generators[self.names.index(name)]

    def evaluate(self, word):
        """Matrix of a word ``((name, exp), ...)`` or a string ``"A B A^-1"``."""
        if isinstance(word, str):
            word = parse_word(word)
        out = MoebiusMap.identity()
        for name, e in word:
            g = self.generator(name)
            out = compose(out, g ** e)
        return out

    def boundary_element(self):
        return self.evaluate(self.boundary_word)

    def letter_label(self, letter):
        return (self.names[letter // 2], -1 if letter % 2 else 1)

    def word_from_letters(self, letters, jpow=0):
        """Word for a letter sequence followed by ``boundary^jpow``."""
        w = tuple(self.letter_label(s) for s in letters)
        return reduce_word(w + power(self.boundary_word, jpow))

    def conjugate(self, h, label=None):
        """The group ``h G h^-1`` with the same names and boundary word."""
        gens = tuple(conjugate_by(h, g) for g in self.generators)
        return MarkedGroup(self.names, gens, self.boundary_word, self.genus,
                           self.claimed_kind, label or self.label)

    def with_generator(self, name, g, label=None):
        return MarkedGroup(self.names + (name,), self.generators + (g,), self.boundary_word,
                           "unknown", "quasifuchsian_numeric" if not g.is_exact else self.claimed_kind,
                           label or self.label + "+" + name)

    def describe(self):
        return f"{self.label} (rank {self.rank}, genus {self.genus}, {self.claimed_kind})"


def seed_pair():
    """The integer seed pair A=[[1,1],[1,2]], B=[[1,-1],[-1,2]] (commutator trace -2)."""
    return MoebiusMap(1, 1, 1, 2), MoebiusMap(1, -1, -1, 2)


def commutator(a, b):
    return compose(compose(a, b), compose(inverse(a), inverse(b)))


# conjugator z -> 1/(6z) sending the seed commutator (z -> z/(6z+1)) to xi_1
_SEED_CONJUGATOR = ((QQi(0), QQi(1)), (QQi(6), QQi(0)))


def punctured_torus_group():
    """Exact genus-one block: generators A=[[2,1/6],[6,1]], B=[[2,-1/6],[-6,1]].

    Obtained from the seed pair by the conjugation z -> 1/(6z), which takes
    the parabolic commutator to exactly xi_1.
    """
    A, B = seed_pair()
    h = _SEED_CONJUGATOR
    gens = (conjugate_by_matrix(h, A), conjugate_by_matrix(h, B))
    return MarkedGroup(("A", "B"), gens, parse_word("A B A^-1 B^-1"), 1,
                       "fuchsian_exact", "G0(1)")


def cyclic_parabolic_group():
    """The cyclic group <xi_1> itself."""
    return MarkedGroup(("T",), (xi(1),), (("T", 1),), "unknown", "fuchsian_exact", "<xi_1>")


# --------------------------------------------------------------------------
# permutation covers


def perm_mul(p, q):
    """Right-action product: apply p, then q."""
    return tuple(q[p[x]] for x in range(len(p)))


def perm_inv(p):
    out = [0] * len(p)
    for x, y in enumerate(p):
        out[y] = x
    return tuple(out)


def perm_cycles(p):
    seen, cycles = set(), []
    for x in range(len(p)):
        if x in seen:
            continue
        cyc, y = [], x
        while y not in seen:
            seen.add(y)
            cyc.append(y)
            y = p[y]
        cycles.append(tuple(cyc))
    return cycles


def cycle_perm(cycles, d):
    """Permutation of {0..d-1} from 0-based cycles."""
    p = list(range(d))
    for cyc in cycles:
        for i, x in enumerate(cyc):
            p[x] = cyc[(i + 1) % len(cyc)]
    return tuple(p)


@dataclass(frozen=True)
class PermutationCoverData:
    """Images of A, B in S_d (right action on {0..d-1})."""

    sigma: tuple
    theta: tuple

    @property
    def degree(self):
        return len(self.sigma)

    def commutator(self):
        s, t = self.sigma, self.theta
        return perm_mul(perm_mul(perm_mul(s, t), perm_inv(s)), perm_inv(t))

    def is_transitive(self):
        seen, todo = {0}, [0]
        while todo:
            x = todo.pop()
            for p in (self.sigma, self.theta, perm_inv(self.sigma), perm_inv(self.theta)):
                if p[x] not in seen:
                    seen.add(p[x])
                    todo.append(p[x])
        return len(seen) == self.degree

    def single_cusp(self):
        cyc = perm_cycles(self.commutator())
        return len(cyc) == 1

    def is_valid(self):
        return self.degree % 2 == 1 and self.is_transitive() and self.single_cusp()


def find_cover_permutations(d):
    """First valid pair with sigma the standard d-cycle, theta in lexicographic order."""
    if d == 3:
        data = PermutationCoverData(cycle_perm([(0, 1, 2)], 3), cycle_perm([(0, 1)], 3))
        if data.is_valid():
            return data
    sigma = cycle_perm([tuple(range(d))], d)
    for theta in itertools.permutations(range(d)):
        data = PermutationCoverData(sigma, tuple(theta))
        if data.is_valid():
            return data
    raise RuntimeError(f"no single-cusp transitive cover of degree {d}")


def schreier_generators(data):
    """Reidemeister-Schreier data for the stabilizer of coset 0.

    Returns (transversal words, list of (coset, base generator) for non-tree
    edges).  Base generators are 'A', 'B'.
    """
    d = data.degree
    perms = {"A": data.sigma, "B": data.theta}
    invs = {g: perm_inv(p) for g, p in perms.items()}
    trans = {0: ()}
    tree = set()
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for g in ("A", "B"):
            y = perms[g][x]
            if y not in trans:
                trans[y] = trans[x] + ((g, 1),)
                tree.add((x, g))
                queue.append(y)
            y = invs[g][x]
            if y not in trans:
                trans[y] = trans[x] + ((g, -1),)
                tree.add((y, g))
                queue.append(y)
    edges = [(x, g) for x in range(d) for g in ("A", "B") if (x, g) not in tree]
    return trans, edges, perms, invs


def rewrite(word, perms, invs, edge_names):
    """Rewrite a base word lying in the subgroup into Schreier generators."""
    x = 0
    out = []
    for g, e in expand_word(word):
        if e > 0:
            if (x, g) in edge_names:
                out.append((edge_names[(x, g)], 1))
            x = perms[g][x]
        else:
            y = invs[g][x]
            if (y, g) in edge_names:
                out.append((edge_names[(y, g)], -1))
            x = y
    if x != 0:
        raise ValueError("word does not lie in the subgroup")
    return reduce_word(out)


def genus_cover_group(j, data=None):
    """Exact genus-j block (rank 2j) as a (2j-1)-fold cover of the punctured torus."""
    if j < 2:
        raise ValueError("genus_cover_group needs j >= 2")
    d = 2 * j - 1
    data = data or find_cover_permutations(d)
    if not data.is_valid():
        raise ValueError("permutation data is not a transitive single-cusp cover")
    base = punctured_torus_group()
    trans, edges, perms, invs = schreier_generators(data)
    names = tuple(f"s{i}" for i in range(len(edges)))
    edge_names = dict(zip(edges, names))
    gens = []
    for x, g in edges:
        y = perms[g][x]
        w = reduce_word(trans[x] + ((g, 1),) + invert_word(trans[y]))
        gens.append(base.evaluate(w))
    cusp = power(base.boundary_word, d)
    bword = rewrite(cusp, perms, invs, edge_names)
    sub = MarkedGroup(names, tuple(gens), bword, j, "fuchsian_exact", f"G0({j})")
    if sub.boundary_element() != xi(d):
        raise RuntimeError("cover cusp is not xi_d")
    # renormalize the cusp: conjugate by z -> z/d
    out = MarkedGroup(names, tuple(_conj_dilate(g, d) for g in gens), bword, j,
                      "fuchsian_exact", f"G0({j})")
    if out.boundary_element() != xi(1):
        raise RuntimeError("renormalized cusp is not xi_1")
    return out


def _conj_dilate(g, d):
    """Conjugate by z -> z/d: [[a,b],[c,e]] -> [[a, b/d], [d c, e]]."""
    return MoebiusMap(g.a, g.b / d, g.c * d, g.d, normalize=False)


def block(j):
    """Default block of genus j."""
    return punctured_torus_group() if j == 1 else genus_cover_group(j)


# --------------------------------------------------------------------------
# primitivity of the boundary parabolic


@dataclass
class PrimitivityCertificate:
    group: str
    L: int
    examined: int
    mode: str

    def __bool__(self):
        return True

    def to_dict(self):
        return {"group": self.group, "L": self.L, "examined": self.examined, "mode": self.mode,
                "claim": "no element of word length <= L fixing infinity lies outside J"}


@dataclass
class PrimitivityViolation:
    group: str
    witness_word: tuple
    witness_matrix: MoebiusMap
    translation: object
    root_order: object = None

    def __bool__(self):
        return False

    def to_dict(self):
        return {"group": self.group, "witness": format_word(self.witness_word),
                "matrix": [[str(x) for x in row] for row in self.witness_matrix.matrix()],
                "translation": str(self.translation), "root_order": self.root_order}


def _root_order(t):
    """q when <1, t> = (1/q) Z for rational t, else None."""
    from fractions import Fraction

    if isinstance(t, QQi):
        if t.im != 0:
            return None
        return Fraction(t.re).denominator
    return None


def verify_boundary_primitive(G, L, mode="auto"):
    """Check up to word length L that no element fixing infinity lies outside J.

    Any such element h either is a proper root of xi_1 or generates, with
    xi_1, a group containing one (rational translation p/q gives xi_{1/q});
    so absence certifies that xi_1 has no proper root of length <= L.
    """
    if G.boundary_element() != xi(1):
        raise ValueError("boundary word does not evaluate to xi_1")
    use_exact = G.is_exact and (mode == "exact" or
                                (mode == "auto" and estimate_count(2 * G.rank, L) <= EXACT_ENUM_LIMIT))
    examined = 0
    if use_exact:
        for cos in exact_cosets(G.generators, L):
            examined += 1
            if cos.matrix.c == 0:
                w = G.word_from_letters(cos.word, cos.jpow)
                g = G.evaluate(w)
                t = g.b / g.d
                return PrimitivityViolation(G.label, w, g, t, _root_order(t))
        return PrimitivityCertificate(G.label, L, examined, "exact")
    import numpy as np

    for batch in float_batches(G.generators, L):
        examined += len(batch)
        c = batch.mats[:, 1, 0]
        scale = np.maximum(1.0, np.abs(batch.mats[:, 0, 0]))
        hit = np.nonzero(np.abs(c) <= 1e-9 * scale)[0]
        if len(hit):
            i = hit[0]
            w = G.word_from_letters(tuple(batch.words[i]), int(batch.jpow[i]))
            g = G.evaluate(w)
            return PrimitivityViolation(G.label, w, g, complex(g.b / g.d))
    return PrimitivityCertificate(G.label, L, examined, "float")


# --------------------------------------------------------------------------
# trace-parameter (Markov) family


def _degenerate_trace(t):
    t2 = complex(t) ** 2
    return abs(t2.imag) <= TAU_CLASS and -TAU_CLASS <= t2.real <= 4 + TAU_CLASS


def markov_roots(x, y):
    """Roots z of z^2 - x y z + x^2 + y^2 = 0, smaller modulus first."""
    x, y = complex(x), complex(y)
    disc = cmath.sqrt((x * y) ** 2 - 4 * (x * x + y * y))
    roots = [(x * y - disc) / 2, (x * y + disc) / 2]
    return sorted(roots, key=lambda z: (round(abs(z), 12), z.real, z.imag))


def markov_family(x, y):
    """Rank-2 group with tr A = x, tr B = y and commutator normalized to xi_1.

    Discreteness is not certified (``claimed_kind='quasifuchsian_numeric'``).
    """
    if _degenerate_trace(x) or _degenerate_trace(y):
        raise ValueError("generator traces must be loxodromic (tr^2 not in [0, 4])")
    z = markov_roots(x, y)[0]
    if _degenerate_trace(z):
        raise ValueError("trace relation forces a degenerate product trace")
    x, y = complex(x), complex(y)
    beta = (-z + cmath.sqrt(z * z - 4)) / 2
    A = MoebiusMap(x, 1, -1, 0)
    B = MoebiusMap(0, beta, -1 / beta, y)
    K = commutator(A, B)
    if classify(K) != "parabolic":
        raise ValueError("commutator is not parabolic")
    (f,) = [p for p in _parabolic_fixed(K)]
    h = MoebiusMap(0, 1j, 1j, -1j * f)      # z -> 1/(z - f)
    Kc = conjugate_by(h, K)
    lam = complex(Kc.b / Kc.d)
    s = MoebiusMap(1, 0, 0, lam)             # z -> z/lam
    conj = compose(s, h)
    gens = (conjugate_by(conj, A), conjugate_by(conj, B))
    G = MarkedGroup(("A", "B"), gens, parse_word("A B A^-1 B^-1"), 1,
                    "quasifuchsian_numeric", f"markov({_fmt(x)},{_fmt(y)})")
    if G.boundary_element() != xi(1):
        raise RuntimeError("normalization failed")
    return G


def _parabolic_fixed(K):
    a, b, c, d = (complex(v) for v in K.entries())
    if abs(c) < 1e-14:
        raise ValueError("commutator already fixes infinity")
    return [(a - d) / (2 * c)]


def _fmt(z):
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"
