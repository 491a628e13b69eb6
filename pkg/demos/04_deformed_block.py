"""Swap the genus-one block for a quasifuchsian specimen and re-check everything.

The trace-parameter family with x = 3 + 0.1i keeps its measured strip
constant well below C = 1, so the plan survives unchanged.  Adding a
half-translation as an extra generator breaks primitivity of the cusp and
the report says so.
"""

from fractions import Fraction

from kleinshuffle.deform import verify_deformed_blocks
from kleinshuffle.fuchsian import block, markov_family
from kleinshuffle.moebius import xi
from kleinshuffle.shuffle import make_plan

plan = make_plan(3, 1)
specimen = markov_family(3 + 0.1j, 3)
for G in (specimen, specimen.with_generator("X", xi(Fraction(1, 2)), label="corrupted")):
    rep = verify_deformed_blocks([G, block(2), block(3)], plan)
    print(f"{G.label}: {rep.verdict}, c_inst = {rep.c_inst:.4g}, C used = {rep.C_used}")
    for c in rep.failures():
        print(f"  failed {c.name}: {c.detail.get('witness', '')}")
