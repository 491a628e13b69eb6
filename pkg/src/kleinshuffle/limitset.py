"""Limit-set sampling by orbit enumeration, and deterministic PGM rendering.

Points are stored in banded coordinates ``(band, w)`` meaning the global
point ``w + a_band i``; plain groups use a single band at height 0.  This
keeps combined groups whose blocks sit at enormous heights (k = 5 puts them
near 1e47) in well-conditioned local coordinates.

Every group here contains xi_1, so the limit set is invariant under
z -> z + 1 and real parts are reduced to [0, 1).  Rasterizing replicates
points over the integer translates meeting the viewport.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .moebius import INF, fixed_points, compose, classify, inverse


# --------------------------------------------------------------------------
# point clouds


@dataclass
class PointCloud:
    points: np.ndarray          # local complex coordinates
    bands: np.ndarray           # band index per point
    band_heights: tuple         # exact height of each band
    reached_infinity: bool
    provenance: dict = field(default_factory=dict)
    elementary: bool = False
    depth_of: np.ndarray = None  # level at which each point first appeared

    def __len__(self):
        return len(self.points)

    def global_imag(self):
        off = np.array([float(h) for h in self.band_heights])
        return self.points.imag + off[self.bands] if len(self.points) else np.zeros(0)

    def global_points(self):
        return self.points.real + 1j * self.global_imag()

    def height_excess(self, lo, hi):
        """Per point: how far it lies outside lo <= Im z <= hi (<= 0 inside).

        Offsets are formed exactly per band before converting to float.
        """
        lo_rel = np.array([float(lo - h) for h in self.band_heights])
        hi_rel = np.array([float(hi - h) for h in self.band_heights])
        y = self.points.imag
        return np.maximum(lo_rel[self.bands] - y, y - hi_rel[self.bands])

    def keys(self, res):
        return set(zip(self.bands.tolist(), np.floor(self.points.real / res).astype(np.int64).tolist(),
                       np.floor(self.points.imag / res).astype(np.int64).tolist()))

    def to_csv(self):
        lines = [f"# {k}: {v}" for k, v in self.provenance.items()]
        lines.append("re,im")
        for z in self.global_points():
            lines.append(f"{z.real!r},{z.imag!r}")
        if self.reached_infinity:
            lines.append("inf,inf")
        return "\n".join(lines) + "\n"


def _letters(G):
    """(matrices (m,2,2) complex, band per letter, band heights) for plain or combined groups."""
    if hasattr(G, "blocks"):
        mats, bands = [], []
        for b, Gb in enumerate(G.blocks):
            for g in Gb.generators:
                for h in (g, inverse(g)):
                    mats.append(h.to_complex())
                    bands.append(b)
        hs = tuple(G.band_heights())
        return np.array(mats, dtype=complex), np.array(bands), hs
    mats = []
    for g in G.generators:
        mats.append(g.to_complex())
        mats.append(inverse(g).to_complex())
    return np.array(mats, dtype=complex), np.zeros(len(mats), dtype=np.int64), (Fraction(0),)


def _seed_maps(G):
    """(band, map) pairs: generators and pairwise products within each block.

    All four sign patterns of each product are used so the seed set does not
    change when generators are replaced by their inverses.
    """
    groups = list(enumerate(G.blocks)) if hasattr(G, "blocks") else [(0, G)]
    out = []
    for b, Gb in groups:
        gens = list(Gb.generators)
        out += [(b, g) for g in gens]
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                gi, gj = gens[i], gens[j]
                for x, y in ((gi, gj), (gi, inverse(gj)), (inverse(gi), gj), (inverse(gi), inverse(gj))):
                    out.append((b, compose(x, y)))
    return out


def seed_points(G):
    """Fixed points of generators and pairwise products (banded), and whether infinity is a seed."""
    pts, bands, inf = [], [], False
    for b, g in _seed_maps(G):
        if classify(g) in ("identity", "elliptic"):
            continue
        for p in fixed_points(g):
            if p is INF:
                inf = True
            else:
                pts.append(complex(p))
                bands.append(b)
    return np.array(pts, dtype=complex), np.array(bands, dtype=np.int64), inf


def _rebase(z, bands, D, res):
    """Move each point to the band whose height is nearest to it.

    A point far from its band carries an absolute error of about
    |Im z| * eps; if that exceeds the dedup grid it is dropped.  Returns
    (z, bands, dropped count).
    """
    if D.shape[0] == 1 or len(z) == 0:
        return z, bands, 0
    off = D[:, bands]                       # (nb, n): a_beta - a_band
    best = np.argmin(np.abs(z.imag[None, :] - off), axis=0)
    moved = best != bands
    shift = D[best, bands]
    precise = ~moved | (np.abs(z.imag) * 1e-15 < res)
    z = np.where(moved, z - 1j * shift, z)
    return z[precise], best[precise], int((~precise).sum())


_EPS = 2.0 ** -52


def _reduce_mod1(z):
    re = z.real - np.floor(z.real)
    re = np.where(re >= 1.0, 0.0, re)
    return re + 1j * z.imag


def enumerate_limit_points(G, depth, prune=1e-3, seed=0, max_points=2_000_000):
    """Orbit of the seed points under words of length <= ``depth``.

    Each level applies every generator letter to the points first reached at
    the previous level; points are reduced mod 1 in real part and deduplicated
    on a grid of spacing ``prune / 2`` (per band), which also bounds memory.
    ``seed`` is recorded in the provenance; the enumeration itself is
    deterministic.  A group whose seeds only reach infinity gets
    ``elementary=True``.
    """
    mats, lband, hs = _letters(G)
    nb = len(hs)
    D = np.array([[float(hs[x] - hs[y]) for y in range(nb)] for x in range(nb)])
    res = prune / 2.0
    pts0, bands0, inf = seed_points(G)
    inf = True      # xi_1 lies in every group handled here
    seen = set()
    dropped = 0
    all_pts, all_bands, all_lvl = [], [], []

    def admit(z, bands, level):
        z = _reduce_mod1(z)
        kx = np.floor(z.real / res).astype(np.int64)
        ky = np.floor(z.imag / res).astype(np.int64)
        keep = []
        for i, key in enumerate(zip(bands.tolist(), kx.tolist(), ky.tolist())):
            if key not in seen:
                seen.add(key)
                keep.append(i)
        keep = np.array(keep, dtype=np.int64)
        z, bands = z[keep], bands[keep]
        all_pts.append(z)
        all_bands.append(bands)
        all_lvl.append(np.full(len(z), level, dtype=np.int64))
        return z, bands

    ok = np.isfinite(pts0)
    front, fb = admit(pts0[ok], bands0[ok], 0)
    reached_inf = inf
    m = len(mats)
    for level in range(1, depth + 1):
        cand, cb = [], []
        if level == 1 and inf:
            # images of infinity: a/c in the letter's band
            c = mats[:, 1, 0]
            fin = np.abs(c) > 0
            cand.append(mats[fin, 0, 0] / c[fin])
            cb.append(lband[fin])
        for s in range(m):
            if len(front) == 0:
                break
            a, b, c, d = mats[s, 0, 0], mats[s, 0, 1], mats[s, 1, 0], mats[s, 1, 1]
            w = front + 1j * D[fb, lband[s]]
            den = c * w + d
            hit = den == 0
            if hit.any():
                reached_inf = True
            w, den = w[~hit], den[~hit]
            num = a * w + b
            img = num / den
            # first-order rounding error of the quotient; near a pole it swamps the grid
            err = _EPS * ((np.abs(a * w) + np.abs(b)) / np.abs(den)
                          + np.abs(img) * (np.abs(c * w) + np.abs(d)) / np.abs(den))
            good = err < res
            dropped += int((~good).sum())
            cand.append(img[good])
            cb.append(np.full(int(good.sum()), lband[s], dtype=np.int64))
        if not cand:
            break
        z = np.concatenate(cand)
        zb = np.concatenate(cb)
        fin = np.isfinite(z)
        z, zb, nd = _rebase(z[fin], zb[fin], D, res)
        dropped += nd
        front, fb = admit(z, zb, level)
        if sum(len(p) for p in all_pts) > max_points:
            break
    points = np.concatenate(all_pts) if all_pts else np.zeros(0, complex)
    bands = np.concatenate(all_bands) if all_bands else np.zeros(0, np.int64)
    lvl = np.concatenate(all_lvl) if all_lvl else np.zeros(0, np.int64)
    prov = {"group": getattr(G, "label", "G"), "depth": depth, "prune": prune, "seed": seed,
            "points": len(points), "dropped_imprecise": dropped}
    return PointCloud(points, bands, hs, reached_inf, prov, elementary=len(points) == 0,
                      depth_of=lvl)


# --------------------------------------------------------------------------
# rasters


@dataclass
class RasterImage:
    width: int
    height: int
    viewport: tuple          # (x0, x1, y0, y1) or a description for stacked layouts
    pixels: np.ndarray       # (height, width) uint8, row 0 at the top

    def to_pgm(self):
        header = f"P5\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + np.ascontiguousarray(self.pixels, dtype=np.uint8).tobytes()

    def write_pgm(self, path):
        _atomic_write(path, self.to_pgm())

    def write_png(self, path):
        try:
            from PIL import Image
        except ImportError as e:
            raise RuntimeError("PNG export needs Pillow; PGM output is always available") from e
        Image.fromarray(self.pixels, mode="L").save(path)


def _atomic_write(path, data):
    import os
    import tempfile

    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "wb") as fh:
        fh.write(data if isinstance(data, bytes) else data.encode())
    os.replace(tmp, path)


def _log_scale(counts):
    out = np.zeros(counts.shape, dtype=np.uint8)
    mx = counts.max() if counts.size else 0
    if mx > 0:
        scaled = np.log1p(counts.astype(np.float64)) / math.log1p(float(mx))
        out = np.minimum(255, np.floor(scaled * 255 + 0.5)).astype(np.uint8)
    return out


def _bin(counts, x, y, viewport):
    x0, x1, y0, y1 = viewport
    h, w = counts.shape
    # replicate over integer translates hitting [x0, x1]
    for n in range(math.floor(x0) - 1, math.ceil(x1) + 1):
        xs = x + n
        ok = (xs >= x0) & (xs < x1) & (y >= y0) & (y < y1)
        if not ok.any():
            continue
        col = np.floor((xs[ok] - x0) / (x1 - x0) * w).astype(np.int64)
        row = np.floor((y1 - y[ok]) / (y1 - y0) * h).astype(np.int64)
        col = np.clip(col, 0, w - 1)
        row = np.clip(row, 0, h - 1)
        np.add.at(counts, (row, col), 1)


def rasterize(cloud, viewport, resolution):
    """Bin global points into a ``resolution = (width, height)`` grid over ``viewport = (x0, x1, y0, y1)``."""
    x0, x1, y0, y1 = (float(v) for v in viewport)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate viewport")
    w, h = resolution
    counts = np.zeros((h, w), dtype=np.int64)
    if len(cloud):
        z = cloud.global_points()
        _bin(counts, z.real, z.imag, (x0, x1, y0, y1))
    return RasterImage(w, h, (x0, x1, y0, y1), _log_scale(counts))


GUIDE_LEVEL = 80


def rasterize_bands(cloud, x_range, half_height, resolution, guides=()):
    """Stack one panel per band (top panel = highest band), each showing local heights within +-half_height.

    ``guides`` lists local heights (relative to each band) drawn as gray lines.
    """
    x0, x1 = (float(v) for v in x_range)
    nb = len(cloud.band_heights)
    w, h = resolution
    ph = max(1, h // nb)
    counts = np.zeros((ph * nb, w), dtype=np.int64)
    guide_rows = []
    hh = float(half_height)
    for b in range(nb):
        panel = np.zeros((ph, w), dtype=np.int64)
        sel = cloud.bands == b
        if sel.any():
            z = cloud.points[sel]
            _bin(panel, z.real, z.imag, (x0, x1, -hh, hh))
        top = (nb - 1 - b) * ph
        counts[top:top + ph] = panel
        for g in guides:
            r = int(math.floor((hh - float(g)) / (2 * hh) * ph))
            if 0 <= r < ph:
                guide_rows.append(top + r)
    pix = _log_scale(counts)
    for r in guide_rows:
        pix[r] = np.maximum(pix[r], GUIDE_LEVEL)
    return RasterImage(w, ph * nb, ("bands", x0, x1, -hh, hh), pix)


def render_shuffle_figure(plan, tau, depth=6, prune=1e-3, resolution=(512, 512), x_range=(0, 2),
                          L=6, gamma_k=None, gamma_tau=None, seed=0):
    """(image of Gamma_k, image of Gamma_k^tau, clouds, groups).

    Both are stacked-band renders with a panel per block of half-height 2C
    and guide lines at +-C.  For Gamma_k^tau (blocks 4C apart) the panels
    tile the strip exactly, so its render is a true vertical-scale picture.
    """
    from .shuffle import build_gamma_k, build_gamma_k_tau

    if gamma_k is None:
        gamma_k = build_gamma_k(plan, L=L, combined_L=0)
    if gamma_tau is None:
        gamma_tau, _, _ = build_gamma_k_tau(plan, tau, L=L, combined_L=0, gamma_k=gamma_k)
    C = plan.C
    out = []
    clouds = []
    for G in (gamma_k, gamma_tau):
        cloud = enumerate_limit_points(G, depth, prune, seed)
        clouds.append(cloud)
        out.append(rasterize_bands(cloud, x_range, 2 * C, resolution, guides=(C, -C)))
    return out[0], out[1], clouds, (gamma_k, gamma_tau)
