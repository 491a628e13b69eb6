"""Render Gamma_3 and Gamma_3^(12) side by side as PGM files.

Each panel is one block's band (height 2C either side of its real line)
with guides at +-C.  Output goes to $KLEINSHUFFLE_OUT or the current
directory.
"""

import os

from kleinshuffle.limitset import render_shuffle_figure
from kleinshuffle.shuffle import make_plan

out = os.environ.get("KLEINSHUFFLE_OUT", ".")
plan = make_plan(3, 1)
img_k, img_t, clouds, groups = render_shuffle_figure(plan, (2, 1, 3), depth=8, resolution=(600, 600))
for img, G, cloud, name in zip((img_k, img_t), groups, clouds, ("gamma3.pgm", "gamma3_tau12.pgm")):
    img.write_pgm(os.path.join(out, name))
    worst = cloud.height_excess(G.bottom, G.top).max()
    print(f"{G.describe()}\n  {len(cloud)} points, worst excess over strip {worst:.3g} -> {name}")
