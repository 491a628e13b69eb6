"""Shuffle arithmetic: coset representatives, primes, CRT coefficients, heights.

Permutations of {1..k} are tuples ``p`` with ``p[j-1] = p(j)``.  Products
compose right to left: ``(s * t)(j) = s(t(j))``.  The rotation is
rho = (1 2 ... k); Z_k = <rho>, and D_k = <rho, j -> k+1-j>.

Right cosets are ``s Z_k = {s rho^i}`` (precompose with a rotation of block
positions).  Every such coset contains exactly one permutation fixing k, and
those are the canonical representatives, listed in lexicographic order of
their image tuples.  The same set is a transversal for ``Z_k s`` as well.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from sympy import nextprime


# --------------------------------------------------------------------------
# permutations


def identity_perm(k):
    return tuple(range(1, k + 1))


def pmul(s, t):
    """s after t."""
    return tuple(s[t[j] - 1] for j in range(len(t)))


def pinv(s):
    out = [0] * len(s)
    for j, v in enumerate(s, start=1):
        out[v - 1] = j
    return tuple(out)


def rotation(k, i=1):
    return tuple(((j - 1 + i) % k) + 1 for j in range(1, k + 1))


def reflection(k):
    return tuple(k + 1 - j for j in range(1, k + 1))


def cyclic_group(k):
    return [rotation(k, i) for i in range(k)]


def dihedral_group(k):
    r = reflection(k)
    rots = cyclic_group(k)
    return rots + [pmul(x, r) for x in rots]


def format_perm(p):
    """Cycle notation, e.g. ``(13)(24)``; identity is ``id``.  Multi-digit points use commas."""
    k = len(p)
    sep = "," if k >= 10 else ""
    seen, out = set(), []
    for j in range(1, k + 1):
        if j in seen or p[j - 1] == j:
            continue
        cyc, x = [], j
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = p[x - 1]
        out.append("(" + sep.join(str(v) for v in cyc) + ")")
    return "".join(out) or "id"


_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_perm(text, k):
    """Parse cycle notation.  Empty text or ``id`` gives the identity."""
    text = (text or "").strip()
    if text in ("", "id", "()", "e"):
        return identity_perm(k)
    if _CYCLE.sub("", text).strip():
        raise ValueError(f"bad permutation {text!r}")
    # cycles compose right to left; disjoint cycles are the common case
    perm = identity_perm(k)
    for body in reversed(_CYCLE.findall(text)):
        body = body.strip()
        pts = [int(x) for x in (body.split(",") if "," in body else
                                 body.split() if " " in body else list(body))]
        if any(not 1 <= x <= k for x in pts) or len(set(pts)) != len(pts):
            raise ValueError(f"bad cycle ({body}) for k={k}")
        c = list(range(1, k + 1))
        for i, x in enumerate(pts):
            c[x - 1] = pts[(i + 1) % len(pts)]
        perm = pmul(tuple(c), perm)
    return perm


# --------------------------------------------------------------------------
# cosets and classes


def _check_k(k):
    if not isinstance(k, int) or k < 3:
        raise ValueError("k must be an integer >= 3")


def coset_reps(k):
    """Canonical right coset representatives of Z_k in S_k: the (k-1)! permutations fixing k."""
    _check_k(k)
    return [p for p in itertools.permutations(range(1, k + 1)) if p[-1] == k]


def coset_of(s):
    """The right coset ``s Z_k``."""
    return frozenset(pmul(s, r) for r in cyclic_group(len(s)))


def canonical_rep(s):
    """The representative of ``s Z_k`` fixing k."""
    for t in sorted(coset_of(s)):
        if t[-1] == len(s):
            return t
    raise AssertionError("unreachable")


def homeo_classes(k):
    """Representatives grouped by right cosets ``s D_k``; each class is sorted, classes by first element."""
    _check_k(k)
    D = dihedral_group(k)
    classes = {}
    for s in coset_reps(k):
        key = min(pmul(s, g) for g in D)
        classes.setdefault(key, []).append(s)
    return sorted(classes.values())


def classification_table(ks=(3, 4, 5)):
    return [(k, len(coset_reps(k)), len(homeo_classes(k))) for k in ks]


# --------------------------------------------------------------------------
# primes, CRT, heights


def assign_primes(k, C, reps=None):
    """Distinct primes, the smallest above 4Ck, in representative order."""
    _check_k(k)
    if C < 1:
        raise ValueError("C must be a positive integer")
    reps = reps if reps is not None else coset_reps(k)
    out, p = {}, 4 * C * k
    for s in reps:
        p = nextprime(p)
        out[s] = int(p)
    return out


def crt_coefficients(primes):
    """Least positive d with d = 1 mod own prime and 0 mod the others."""
    ps = list(primes.values())
    if len(set(ps)) != len(ps):
        raise ValueError("primes must be distinct")
    out = {}
    for s, p in primes.items():
        M = 1
        for q in ps:
            if q != p:
                M *= q
        out[s] = M * pow(M % p, -1, p) if p > 1 else M
    return out


def heights(k, C, primes, coeffs):
    """a_j = sum over reps of d(j p + 4C s^-1(j)), j = 1..k."""
    inv = {s: pinv(s) for s in primes}
    a = tuple(sum(coeffs[s] * (j * primes[s] + 4 * C * inv[s][j - 1]) for s in primes)
              for j in range(1, k + 1))
    return a


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class ShufflePlan:
    k: int
    C: int
    reps: tuple
    primes: dict
    coeffs: dict
    heights: tuple
    genera: tuple = None

    def __post_init__(self):
        if self.genera is None:
            object.__setattr__(self, "genera", tuple(range(1, self.k + 1)))

    @property
    def exponents(self):
        return {s: shuffle_exponents(self, s) for s in self.reps}

    def check(self):
        """Raise :class:`PlanError` on any broken invariant."""
        k, C = self.k, self.C
        if k < 3 or C < 1:
            raise PlanError("need k >= 3 and C >= 1")
        if len(self.reps) != _factorial(k - 1):
            raise PlanError("wrong number of coset representatives")
        ps = [self.primes[s] for s in self.reps]
        if len(set(ps)) != len(ps):
            raise PlanError("primes not distinct")
        for p in ps:
            if p <= 4 * C * k or nextprime(p - 1) != p:
                raise PlanError(f"{p} is not a prime above 4Ck")
        for s in self.reps:
            for t in self.reps:
                want = 1 if s == t else 0
                if self.coeffs[s] % self.primes[t] != want:
                    raise PlanError(f"d for {format_perm(s)} fails the CRT condition")
        a = self.heights
        if len(a) != k or a[0] < 0 or any(a[j + 1] - a[j] < 2 * C for j in range(k - 1)):
            raise PlanError("heights are not 2C-separated and nonnegative")
        for s in self.reps:
            inv = pinv(s)
            for j in range(1, k + 1):
                if (a[j - 1] - 4 * C * inv[j - 1]) % self.primes[s]:
                    raise PlanError(f"a_{j} is not 4C s^-1(j) mod p for s={format_perm(s)}")
        if len(set(self.genera)) != len(self.genera) or len(self.genera) != k:
            raise PlanError("genera must be k distinct positive integers")
        return True

    # serialization ----------------------------------------------------
    def to_text(self):
        lines = ["# shuffle plan", f"k = {self.k}", f"C = {self.C}",
                 "genera = " + " ".join(str(g) for g in self.genera),
                 "heights = " + " ".join(str(a) for a in self.heights),
                 "# tau  prime  d  n_1..n_k"]
        for s in self.reps:
            n = shuffle_exponents(self, s)
            lines.append(f"rep {format_perm(s)} {self.primes[s]} {self.coeffs[s]} "
                         + " ".join(str(x) for x in n))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        fields, rows = {}, []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("rep "):
                rows.append(line.split()[1:])
            elif "=" in line:
                key, val = (x.strip() for x in line.split("=", 1))
                fields[key] = val
            else:
                raise PlanError(f"bad plan line {raw!r}")
        try:
            k, C = int(fields["k"]), int(fields["C"])
            genera = tuple(int(x) for x in fields.get("genera", "").split()) or None
            hts = tuple(int(x) for x in fields["heights"].split())
            reps, primes, coeffs = [], {}, {}
            for row in rows:
                s = parse_perm(row[0], k)
                reps.append(s)
                primes[s] = int(row[1])
                coeffs[s] = int(row[2])
        except (KeyError, IndexError, ValueError) as e:
            raise PlanError(f"malformed plan: {e}") from None
        return cls(k, C, tuple(reps), primes, coeffs, hts, genera)

    def describe(self):
        return self.to_text()


def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def make_plan(k, C=1, genera=None):
    """Canonical plan for (k, C); checks every invariant."""
    _check_k(k)
    reps = tuple(coset_reps(k))
    primes = assign_primes(k, C, reps)
    coeffs = crt_coefficients(primes)
    a = heights(k, C, primes, coeffs)
    plan = ShufflePlan(k, C, reps, primes, coeffs, a, tuple(genera) if genera else None)
    plan.check()
    return plan


def shuffle_exponents(plan, s):
    """n_j = (a_j - 4C s^-1(j)) / p_s, exact."""
    p = plan.primes[s]
    inv = pinv(s)
    out = []
    for j in range(1, plan.k + 1):
        q, r = divmod(plan.heights[j - 1] - 4 * plan.C * inv[j - 1], p)
        if r:
            raise PlanError(f"a_{j} - 4C s^-1(j) not divisible by {p}")
        out.append(q)
    return tuple(out)


def resolve_tau(plan, tau):
    """(canonical rep, note) for a permutation or cycle string."""
    if isinstance(tau, str):
        tau = parse_perm(tau, plan.k)
    rep = canonical_rep(tuple(tau))
    note = None
    if rep != tuple(tau):
        note = f"{format_perm(tau)} is not a canonical representative; using {format_perm(rep)}"
    return rep, note


# --------------------------------------------------------------------------
# group pipelines


def default_blocks(plan):
    from .fuchsian import block

    return {g: block(g) for g in plan.genera}


def build_gamma_k(plan, blocks=None, L=6, combined_L=None, mode="auto"):
    """Gamma_k: block of genus genera[j-1] at height a_j, amalgamated with c = C."""
    from .combiner import DEFAULT_COMBINED_L, amalgamate

    plan.check()
    blocks = blocks or default_blocks(plan)
    pairs = [(blocks[g], a) for g, a in zip(plan.genera, plan.heights)]
    cl = DEFAULT_COMBINED_L if combined_L is None else combined_L
    return amalgamate(pairs, plan.C, L, cl, label=f"Gamma_{plan.k}", mode=mode)


def shuffled_heights(plan):
    return tuple(4 * plan.C * l for l in range(1, plan.k + 1))


@dataclass
class ShuffleCheck:
    """Block j of Gamma_k conjugated by g^-n_j against position s^-1(j) of Gamma_k^s."""

    tau: tuple
    rows: list          # (j, n_j, a_j - n_j p, position, equal)

    def __bool__(self):
        return all(r[-1] for r in self.rows)


def shuffle_consistency(plan, tau, gamma_k, gamma_tau):
    from .moebius import QQi, conjugate_by, projectively_close, xi

    p = plan.primes[tau]
    n = shuffle_exponents(plan, tau)
    inv = pinv(tau)
    rows = []
    for j in range(1, plan.k + 1):
        h = xi(QQi(0, -n[j - 1] * p))
        lhs = gamma_k.conjugated_block(j - 1)
        moved = [conjugate_by(h, g) for g in lhs.generators]
        l = inv[j - 1]
        rhs = list(gamma_tau.conjugated_block(l - 1).generators)
        height = plan.heights[j - 1] - n[j - 1] * p
        if all(g.is_exact for g in moved + rhs):
            same = len(moved) == len(rhs) and all(x == y for x, y in zip(moved, rhs))
        else:
            # conjugating float entries by xi_{a i} amplifies rounding by about a^2
            tol = 1e-14 * (1 + abs(plan.heights[j - 1])) ** 2
            same = len(moved) == len(rhs) and all(
                projectively_close(x, y, tol) for x, y in zip(moved, rhs))
        rows.append((j, n[j - 1], height, l, same and height == 4 * plan.C * l))
    return ShuffleCheck(tau, rows)


def build_gamma_k_tau(plan, tau, blocks=None, L=6, combined_L=None, gamma_k=None, mode="auto"):
    """(Gamma_k^tau, hat Gamma_k^tau, consistency check) for a canonical representative tau."""
    from .combiner import DEFAULT_COMBINED_L, amalgamate, hnn_extend

    plan.check()
    tau = tuple(tau)
    if tau not in plan.primes:
        raise PlanError(f"{format_perm(tau)} is not a representative of this plan")
    blocks = blocks or default_blocks(plan)
    cl = DEFAULT_COMBINED_L if combined_L is None else combined_L
    pairs = [(blocks[plan.genera[tau[l - 1] - 1]], 4 * plan.C * l) for l in range(1, plan.k + 1)]
    name = format_perm(tau)
    g_tau = amalgamate(pairs, plan.C, L, cl, label=f"Gamma_{plan.k}^{name}", mode=mode)
    g_hat = hnn_extend(g_tau, plan.primes[tau], L=cl or 1, mode=mode,
                       label=f"hatGamma_{plan.k}^{name}")
    if gamma_k is None:
        gamma_k = build_gamma_k(plan, blocks, L, 0, mode)
    check = shuffle_consistency(plan, tau, gamma_k, g_tau)
    if not check:
        raise PlanError(f"shuffle consistency fails for {name}")
    return g_tau, g_hat, check
