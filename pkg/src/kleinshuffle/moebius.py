"""Möbius transformations of the extended complex plane.

Maps are 2x2 determinant-one matrices.  Entries are either exact Gaussian
rationals (:class:`QQi`) or Python complex floats.  Exact arithmetic is closed;
an operation that mixes an exact and a float operand produces a float result
and the resulting map carries ``promoted=True``.

Regions are closed half-planes ``{z : Re(conj(n) z) >= k}`` and closed disks
(optionally complemented).  Horizontal half-planes ``H_a = {Im z >= a}`` and
``H*_a = {Im z <= a}`` are exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

TAU_DET = 1e-12
TAU_CLASS = 1e-9


class _Infinity:
    """The point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


class QQi:
    """Exact Gaussian rational ``re + im*i``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @staticmethod
    def coerce(x):
        if isinstance(x, QQi):
            return x
        if isinstance(x, (int, Rational)):
            return QQi(Fraction(x))
        return None

    def __add__(self, other):
        o = QQi.coerce(other)
        if o is None:
            return complex(self) + other
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = QQi.coerce(other)
        if o is None:
            return complex(self) - other
        return QQi(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = QQi.coerce(other)
        if o is None:
            return other - complex(self)
        return QQi(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = QQi.coerce(other)
        if o is None:
            return complex(self) * other
        return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QQi.coerce(other)
        if o is None:
            return complex(self) / other
        n = o.abs2()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QQi((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        o = QQi.coerce(other)
        if o is None:
            return other / complex(self)
        return o / self

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            return complex(self) ** n
        if n < 0:
            return QQi(1) / (self ** (-n))
        out = QQi(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return QQi(self.re, -self.im)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def __abs__(self):
        return math.sqrt(self.abs2())

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = QQi.coerce(other)
        if o is None:
            return complex(self) == other
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        if self.im == 0:
            return f"QQi({self.re})"
        return f"QQi({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


I = QQi(0, 1)


def exact(x):
    """Coerce an int / Fraction / QQi / exact string like '1/6' to :class:`QQi`."""
    if isinstance(x, str):
        return QQi(Fraction(x))
    q = QQi.coerce(x)
    if q is None:
        raise TypeError(f"cannot make {x!r} exact")
    return q


def is_exact(x):
    return isinstance(x, (QQi, int, Rational))


def re_(x):
    return x.re if isinstance(x, QQi) else x.real


def im_(x):
    return x.im if isinstance(x, QQi) else x.imag


def abs2(x):
    if isinstance(x, QQi):
        return x.abs2()
    return x.real * x.real + x.imag * x.imag


def conj(x):
    return x.conjugate()


def is_zero(x, tol=0.0):
    if isinstance(x, (QQi, int, Rational)):
        return x == 0
    return abs(x) <= tol


def sqrt_exact(q):
    """Square root of a nonnegative rational; a Fraction when q is a perfect square."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative")
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return math.sqrt(q)


def _sqrt_scalar(x):
    """Square root of a scalar, exact when x is a rational perfect square."""
    if isinstance(x, QQi) and x.im == 0 and x.re >= 0:
        r = sqrt_exact(x.re)
        if isinstance(r, Fraction):
            return QQi(r)
    return cmath.sqrt(complex(x))


class MoebiusMap:
    """z -> (a z + b) / (c z + d) with ad - bc = 1.

    A map and its negation are the same group element; ``==`` and ``hash``
    compare projectively through :meth:`canonical`.
    """

    __slots__ = ("a", "b", "c", "d", "promoted")

    def __init__(self, a, b, c, d, normalize=True, promoted=False):
        entries = [QQi.coerce(x) if is_exact(x) else complex(x) for x in (a, b, c, d)]
        exact_all = all(isinstance(x, QQi) for x in entries)
        if not exact_all:
            if any(isinstance(x, QQi) for x in entries):
                promoted = True
            entries = [complex(x) for x in entries]
        a, b, c, d = entries
        if normalize:
            det = a * d - b * c
            if exact_all:
                if det == 0:
                    raise ValueError("singular matrix")
                if det != 1:
                    s = _sqrt_scalar(det)
                    if isinstance(s, QQi):
                        a, b, c, d = a / s, b / s, c / s, d / s
                    else:
                        promoted = True
                        a, b, c, d = (complex(x) / s for x in (a, b, c, d))
            else:
                if abs(det) == 0:
                    raise ValueError("singular matrix")
                if abs(det - 1) > TAU_DET:
                    s = cmath.sqrt(det)
                    a, b, c, d = a / s, b / s, c / s, d / s
        self.a, self.b, self.c, self.d = a, b, c, d
        self.promoted = promoted

    # constructors -----------------------------------------------------
    @classmethod
    def from_matrix(cls, m, normalize=True):
        (a, b), (c, d) = m
        return cls(a, b, c, d, normalize=normalize)

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @property
    def mode(self):
        return "exact" if isinstance(self.a, QQi) else "float"

    @property
    def is_exact(self):
        return isinstance(self.a, QQi)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def matrix(self):
        return ((self.a, self.b), (self.c, self.d))

    def to_complex(self):
        return [[complex(self.a), complex(self.b)], [complex(self.c), complex(self.d)]]

    def as_float(self):
        return MoebiusMap(*(complex(x) for x in self.entries()), normalize=False)

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    # group law --------------------------------------------------------
    def __matmul__(self, other):
        return compose(self, other)

    def __call__(self, z):
        return apply(self, z)

    def __pow__(self, n):
        if n < 0:
            return inverse(self) ** (-n)
        out = MoebiusMap.identity()
        base = self
        while n:
            if n & 1:
                out = compose(out, base)
            base = compose(base, base)
            n >>= 1
        return out

    def inverse(self):
        return inverse(self)

    # projective comparison -------------------------------------------
    def canonical(self):
        """Entries with the deterministic projective sign applied."""
        for x in self.entries():
            if isinstance(x, QQi):
                if x == 0:
                    continue
                flip = x.re < 0 or (x.re == 0 and x.im < 0)
            else:
                if abs(x) <= TAU_DET:
                    continue
                if abs(x.real) > TAU_DET:
                    flip = x.real < 0
                else:
                    flip = x.imag < 0
            return tuple(-y for y in self.entries()) if flip else self.entries()
        return self.entries()

    def __eq__(self, other):
        if not isinstance(other, MoebiusMap):
            return NotImplemented
        if self.is_exact and other.is_exact:
            return self.canonical() == other.canonical()
        return projectively_close(self, other)

    def __hash__(self):
        if self.is_exact:
            return hash(self.canonical())
        return hash(tuple(complex(round(complex(x).real, 6), round(complex(x).imag, 6))
                          for x in self.canonical()))

    def __repr__(self):
        a, b, c, d = self.canonical()
        return f"MoebiusMap([[{a}, {b}], [{c}, {d}]])"


def projectively_close(f, g, tol=1e-9):
    e1 = [complex(x) for x in f.entries()]
    e2 = [complex(x) for x in g.entries()]
    scale = max(1.0, *(abs(x) for x in e1))
    for sign in (1, -1):
        if all(abs(x - sign * y) <= tol * scale for x, y in zip(e1, e2)):
            return True
    return False


def xi(a):
    """Translation z -> z + a."""
    return MoebiusMap(1, a, 0, 1, normalize=False)


def dilation(lam):
    """z -> lam * z (as a determinant-one matrix)."""
    return MoebiusMap(lam, 0, 0, 1)


def compose(f, g):
    a = f.a * g.a + f.b * g.c
    b = f.a * g.b + f.b * g.d
    c = f.c * g.a + f.d * g.c
    d = f.c * g.b + f.d * g.d
    promoted = f.promoted or g.promoted or (f.is_exact != g.is_exact)
    if f.is_exact and g.is_exact:
        return MoebiusMap(a, b, c, d, normalize=False)
    # keep float maps on the determinant-one locus
    return MoebiusMap(a, b, c, d, normalize=True, promoted=promoted)


def inverse(f):
    return MoebiusMap(f.d, -f.b, -f.c, f.a, normalize=False, promoted=f.promoted)


def conjugate_by(h, g):
    """h g h^-1."""
    return compose(compose(h, g), inverse(h))


def conjugate_by_matrix(h, g):
    """h g h^-1 for an arbitrary invertible 2x2 matrix ``h = ((p, q), (r, s))``.

    The determinant of h cancels, so exact g with rational h stays exact.
    """
    (p, q), (r, s) = h
    det = p * s - q * r
    hg = ((p * g.a + q * g.c, p * g.b + q * g.d), (r * g.a + s * g.c, r * g.b + s * g.d))
    adj = ((s, -q), (-r, p))
    a = (hg[0][0] * adj[0][0] + hg[0][1] * adj[1][0]) / det
    b = (hg[0][0] * adj[0][1] + hg[0][1] * adj[1][1]) / det
    c = (hg[1][0] * adj[0][0] + hg[1][1] * adj[1][0]) / det
    d = (hg[1][0] * adj[0][1] + hg[1][1] * adj[1][1]) / det
    return MoebiusMap(a, b, c, d, normalize=not (g.is_exact and is_exact(det)))


def commutator_trace(f, g):
    """tr(f g f^-1 g^-1), well defined on PSL2 since the commutator lifts uniquely."""
    return compose(compose(f, g), compose(inverse(f), inverse(g))).trace()


def apply(f, z):
    """Image of a point of the extended plane (``INF`` for infinity)."""
    a, b, c, d = f.entries()
    if z is INF:
        if is_zero(c, TAU_DET * max(1.0, abs(complex(a)))) if not f.is_exact else c == 0:
            return INF
        return a / c
    num = a * z + b
    den = c * z + d
    if (den == 0) if (f.is_exact and is_exact(z)) else abs(complex(den)) == 0:
        return INF
    return num / den


def _is_zero_entry(x):
    if isinstance(x, QQi):
        return x == 0
    return abs(x) <= TAU_DET


def is_identity(f, tol=TAU_CLASS):
    a, b, c, d = f.entries()
    if f.is_exact:
        return b == 0 and c == 0 and a == d and (a == 1 or a == -1)
    return abs(b) <= tol and abs(c) <= tol and abs(a - d) <= tol and abs(abs(a) - 1) <= tol


def classify(f):
    """'identity', 'parabolic', 'elliptic' or 'loxodromic' by the squared trace."""
    if is_identity(f):
        return "identity"
    t2 = f.trace() ** 2
    if f.is_exact:
        if t2 == 4:
            return "parabolic"
        if t2.im == 0 and 0 <= t2.re < 4:
            return "elliptic"
        return "loxodromic"
    t2 = complex(t2)
    if abs(t2 - 4) <= TAU_CLASS:
        return "parabolic"
    if abs(t2.imag) <= TAU_CLASS and -TAU_CLASS <= t2.real < 4:
        return "elliptic"
    return "loxodromic"


def fixed_points(f):
    """Fixed points: roots of c z^2 + (d - a) z - b = 0.

    Parabolic maps return a single point.  Exact maps give exact roots when the
    discriminant is a rational square, complex floats otherwise.
    """
    if is_identity(f):
        raise ValueError("identity has no isolated fixed points")
    a, b, c, d = f.entries()
    if _is_zero_entry(c):
        if _is_zero_entry(d - a):
            return (INF,)
        return (INF, b / (d - a))
    disc = (d - a) ** 2 + 4 * b * c
    if (disc == 0) if f.is_exact else abs(disc) <= TAU_CLASS * max(1.0, abs(c) ** 2):
        return ((a - d) / (2 * c),)
    s = _sqrt_scalar(disc)
    if isinstance(s, QQi):
        roots = ((a - d - s) / (2 * c), (a - d + s) / (2 * c))
    else:
        a, d, c = complex(a), complex(d), complex(c)
        roots = ((a - d - s) / (2 * c), (a - d + s) / (2 * c))
    return tuple(sorted(roots, key=lambda z: (float(re_(z)), float(im_(z)))))


def translation_length(f):
    """For a map fixing infinity with a = d = +-1, the translation b/d."""
    a, b, c, d = f.entries()
    return b / d


# --------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Region:
    """Closed half-plane or closed disk (``outside=True``: closed disk complement).

    half_plane: ``{z : Re(conj(normal) * z) >= offset}``.
    disk: ``{|z - center| <= radius}``, or ``{|z - center| >= radius}`` if outside.
    """

    kind: str
    normal: object = None
    offset: object = None
    center: object = None
    radius: object = None
    outside: bool = False

    def __post_init__(self):
        if self.kind == "disk" and not (self.radius > 0):
            raise ValueError("disk radius must be positive")
        if self.kind not in ("half_plane", "disk"):
            raise ValueError(f"unknown region kind {self.kind!r}")

    @property
    def is_horizontal(self):
        """True for H_a / H*_a (the J-invariant half-planes)."""
        return self.kind == "half_plane" and re_(self.normal) == 0

    def contains(self, z):
        if z is INF:
            return self.kind == "half_plane" or self.outside
        if self.kind == "half_plane":
            return re_(conj(self.normal) * z) >= self.offset
        dist2 = abs2(z - self.center)
        r2 = self.radius * self.radius
        return dist2 >= r2 if self.outside else dist2 <= r2

    def describe(self):
        if self.kind == "half_plane":
            n = self.normal
            if re_(n) == 0 and im_(n) > 0:
                return f"H_{self.offset / im_(n)}"
            if re_(n) == 0 and im_(n) < 0:
                return f"H*_{-self.offset / -im_(n)}"
            return f"halfplane(n={n}, k={self.offset})"
        tag = "outside" if self.outside else "disk"
        return f"{tag}(center={self.center}, r={self.radius})"


def upper(a):
    """H_a = {Im z >= a}."""
    return Region("half_plane", normal=I if is_exact(a) else 1j,
                  offset=Fraction(a) if isinstance(a, (int, Rational)) else a)


def lower(a):
    """H*_a = {Im z <= a}."""
    return Region("half_plane", normal=-I if is_exact(a) else -1j,
                  offset=-Fraction(a) if isinstance(a, (int, Rational)) else -a)


def strip(bottom, top):
    """The closed strip A^top_bottom as a pair of half-planes (intersection)."""
    return (upper(bottom), lower(top))


def disk(center, radius):
    return Region("disk", center=center, radius=radius)


def _horizontal_height(R):
    n = R.normal
    return R.offset / im_(n)


def halfplane_image(f, H):
    """Exact image of a closed half-plane under ``f``."""
    if H.kind != "half_plane":
        raise ValueError("expected a half-plane")
    a, b, c, d = f.entries()
    n, k = H.normal, H.offset
    if _is_zero_entry(c):
        # affine: z -> alpha z + beta with alpha = a/d, beta = b/d
        alpha, beta = a / d, b / d
        n2 = n * alpha / abs2(alpha)
        return Region("half_plane", normal=n2, offset=k + re_(conj(n2) * beta))
    p = -d / c
    hp = re_(conj(n) * p) - k
    if (hp == 0) if f.is_exact else abs(hp) <= TAU_DET * max(1.0, abs(complex(p))):
        # pole on the boundary line: image is a half-plane through f(inf) = a/c
        u = 1 / (c * c * n * I)
        n2 = I * u
        base = a / c
        k2 = re_(conj(n2) * base)
        z1 = apply(f, p + n)
        if re_(conj(n2) * z1) < k2:
            n2, k2 = -n2, -k2
        return Region("half_plane", normal=n2, offset=k2)
    kprime = -hp
    center = a / c - conj(n) / (2 * kprime * c * c)
    n_abs2 = abs2(n)
    if isinstance(n_abs2, Fraction):
        n_abs = sqrt_exact(n_abs2)
    else:
        n_abs = math.sqrt(n_abs2)
    radius = n_abs / (2 * abs(kprime) * abs2(c))
    return Region("disk", center=center, radius=radius, outside=hp >= 0)


def disk_image(f, D):
    """Exact image of a closed disk (or disk complement) under ``f``."""
    a, b, c, d = f.entries()
    m, r = D.center, D.radius
    if _is_zero_entry(c):
        alpha, beta = a / d, b / d
        ab = abs2(alpha)
        rad = r * (sqrt_exact(ab) if isinstance(ab, Fraction) else math.sqrt(ab))
        return Region("disk", center=alpha * m + beta, radius=rad, outside=D.outside)
    p = -d / c
    mp = m - p
    gap = abs2(mp) - r * r
    if (gap == 0) if f.is_exact else abs(gap) <= TAU_DET * max(1.0, r * r):
        # pole on the circle: the image is a half-plane
        pts = []
        for t in (0, 1, 2, 3):
            q = m + r * (QQi(1 - t * t, 2 * t) / (1 + t * t) if f.is_exact else
                         complex(1 - t * t, 2 * t) / (1 + t * t))
            if not ((q - p) == 0 if f.is_exact else abs(complex(q - p)) < 1e-12):
                pts.append(apply(f, q))
            if len(pts) == 2:
                break
        z0, z1 = pts
        n2 = I * (z1 - z0) if f.is_exact else 1j * (z1 - z0)
        k2 = re_(conj(n2) * z0)
        inside_pt = m if not D.outside else m + 2 * r
        w = apply(f, inside_pt)
        if re_(conj(n2) * w) < k2:
            n2, k2 = -n2, -k2
        return Region("half_plane", normal=n2, offset=k2)
    center = a / c - conj(mp) / (gap * c * c)
    radius = r / (abs(gap) * abs2(c))
    pole_inside = gap < 0
    return Region("disk", center=center, radius=radius, outside=D.outside != pole_inside)


def region_image(f, R):
    if R.kind == "half_plane":
        return halfplane_image(f, R)
    return disk_image(f, R)


NEG_INF = float("-inf")


def _norm(x):
    a2 = abs2(x)
    return sqrt_exact(a2) if isinstance(a2, Fraction) else math.sqrt(a2)


def _dist(z, w):
    return _norm(z - w)


def region_disjoint(R1, R2):
    """Whether two closed regions of the plane are disjoint, with signed margin.

    The margin is the separation distance (positive when disjoint, zero at
    tangency, negative on overlap; ``-inf`` when both regions are unbounded in
    a way that forces overlap).  The boolean uses exact squared comparisons in
    exact mode; the margin is exact whenever the needed square roots are.
    """
    if R1.kind == "disk" and R2.kind == "half_plane":
        R1, R2 = R2, R1
    if R1.kind == "half_plane" and R2.kind == "half_plane":
        n1, k1, n2, k2 = R1.normal, R1.offset, R2.normal, R2.offset
        cross = im_(conj(n1) * n2)
        dot = re_(conj(n1) * n2)
        if cross != 0 or dot >= 0:
            return False, NEG_INF
        lam = -dot / abs2(n1)  # n2 = -lam * n1
        # R2: Re(conj(n1) z) <= -k2/lam
        gap = k1 + k2 / lam
        margin = gap / _norm(n1)
        return gap > 0, margin
    if R1.kind == "half_plane":
        H, D = R1, R2
        if D.outside:
            return False, NEG_INF
        n, k = H.normal, H.offset
        slack = k - re_(conj(n) * D.center)
        n2 = abs2(n)
        disjoint = slack > 0 and slack * slack > D.radius * D.radius * n2
        margin = slack / _norm(n) - D.radius
        return disjoint, margin
    # disk vs disk
    if R1.outside and R2.outside:
        return False, NEG_INF
    if R1.outside or R2.outside:
        hole, D = (R1, R2) if R1.outside else (R2, R1)
        if D.radius >= hole.radius:
            return False, hole.radius - D.radius - _dist(hole.center, D.center)
        diff = hole.radius - D.radius
        d2 = abs2(hole.center - D.center)
        return d2 < diff * diff, diff - _dist(hole.center, D.center)
    rs = R1.radius + R2.radius
    d2 = abs2(R1.center - R2.center)
    return d2 > rs * rs, _dist(R1.center, R2.center) - rs


def union_disjoint(regions1, regions2):
    """Disjointness of two finite unions of regions (min margin over pairs)."""
    margin = None
    ok = True
    for R in regions1:
        for S in regions2:
            dj, m = region_disjoint(R, S)
            ok = ok and dj
            margin = m if margin is None or m < margin else margin
    return ok, margin
