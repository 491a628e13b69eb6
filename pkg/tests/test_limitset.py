import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kleinshuffle.fuchsian import block, cyclic_parabolic_group, punctured_torus_group
from kleinshuffle.limitset import (
    GUIDE_LEVEL, enumerate_limit_points, rasterize, rasterize_bands, seed_points,
)
from kleinshuffle.moebius import QQi, apply, compose, fixed_points, inverse, xi


def _finite(cloud):
    return cloud.global_points()


def _mod1_dist(z, Q):
    dz = Q - z
    dz = (dz.real - np.round(dz.real)) + 1j * dz.imag
    return float(np.abs(dz).min())


def _mod1_hausdorff(P, Q):
    return max(max(_mod1_dist(z, Q) for z in P), max(_mod1_dist(z, P) for z in Q))


def _inverted(G):
    return type(G)(G.names, tuple(inverse(g) for g in G.generators), G.boundary_word, G.genus,
                   G.claimed_kind, G.label + "'")


@pytest.mark.parametrize("j", [1, 2])
def test_inverse_generators_same_cloud(j):
    G = block(j)
    prune = 1e-3
    a = enumerate_limit_points(G, 6, prune)
    b = enumerate_limit_points(_inverted(G), 6, prune)
    assert _mod1_hausdorff(_finite(a), _finite(b)) <= prune


@settings(max_examples=10)
@given(st.integers(-30, 30))
def test_vertical_translation(a):
    G = punctured_torus_group()
    base = enumerate_limit_points(G, 5)
    moved = enumerate_limit_points(G.conjugate(xi(QQi(0, a))), 5)
    # dedup keeps one representative per cell, and the offset survives in its images
    assert _mod1_hausdorff(_finite(base) + 1j * a, _finite(moved)) <= 2e-3


@pytest.mark.parametrize("d", [3, 5])
def test_deeper_only_adds(torus, d):
    a = enumerate_limit_points(torus, d)
    b = enumerate_limit_points(torus, d + 1)
    P, Q = _finite(a), _finite(b)
    assert len(Q) >= len(P)
    assert max(float(np.abs(Q - z).min()) for z in P) <= 5e-4


def test_seed_points_are_fixed_points(torus):
    pts, bands, inf = seed_points(torus)
    A, B = torus.generators
    for g in (A, B, compose(A, B), compose(inverse(A), B)):
        for p in fixed_points(g):
            assert np.abs(pts - complex(p)).min() < 1e-12


def test_points_are_near_orbit_of_fixed_points(torus):
    # level-1 points are letter images of the stored (mod 1) seeds
    cloud = enumerate_limit_points(torus, 1, prune=1e-9)
    A, B = torus.generators
    for p in fixed_points(A):
        p = complex(p)
        p = p.real % 1 + 1j * p.imag
        img = complex(apply(B, p))
        assert _mod1_dist(img, cloud.points) < 1e-9


def test_fuchsian_cloud_real(torus):
    cloud = enumerate_limit_points(torus, 8)
    assert np.abs(cloud.global_imag()).max() <= 1e-9
    assert cloud.reached_infinity


def test_elementary_group():
    cloud = enumerate_limit_points(cyclic_parabolic_group(), 4)
    assert cloud.elementary and len(cloud) == 0 and cloud.reached_infinity


def test_gamma3_confinement(plan3, gamma3):
    cloud = enumerate_limit_points(gamma3, 8)
    a = plan3.heights
    assert len(cloud) > 500
    assert cloud.height_excess(a[0] - 1, a[-1] + 1).max() <= 1e-9
    assert sorted(set(cloud.bands.tolist())) == [0, 1, 2]


def test_rasterize_deterministic(torus):
    cloud = enumerate_limit_points(torus, 6)
    v = (0, 2, -0.5, 0.5)
    a = rasterize(cloud, v, (64, 32)).to_pgm()
    b = rasterize(enumerate_limit_points(torus, 6), v, (64, 32)).to_pgm()
    assert a == b
    assert a.startswith(b"P5\n64 32\n255\n") and len(a) == len(b"P5\n64 32\n255\n") + 64 * 32


def test_rasterize_rejects_degenerate(torus):
    with pytest.raises(ValueError):
        rasterize(enumerate_limit_points(torus, 2), (0, 0, 0, 1), (8, 8))


def test_band_render_has_guides(gamma3):
    cloud = enumerate_limit_points(gamma3, 5)
    img = rasterize_bands(cloud, (0, 2), 2, (64, 60), guides=(1, -1))
    assert img.pixels.shape == (60, 64)
    assert (img.pixels == GUIDE_LEVEL).any()
    # the real line of each band sits in the middle row of its panel
    assert img.pixels[10].max() == 255 or img.pixels[9:12].max() > GUIDE_LEVEL


def test_csv_output(torus):
    text = enumerate_limit_points(torus, 3).to_csv()
    lines = text.splitlines()
    assert lines[-1] == "inf,inf"
    assert "re,im" in lines
