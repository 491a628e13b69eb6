"""Precise invariance for the punctured-torus block, and how it breaks.

Above height 1/6 both half-planes H_c and H*_-c are moved off themselves by
every coset outside J; just below that a witness appears.
"""

from fractions import Fraction

from kleinshuffle.fuchsian import punctured_torus_group
from kleinshuffle.invariance import check_precisely_invariant, reverify_violation, strip_constant
from kleinshuffle.moebius import lower, upper
from kleinshuffle.words import format_word

G = punctured_torus_group()
sc = strip_constant(G, 6)
print(f"strip constant up to L=6: {sc.value:.6f} (attained by {format_word(sc.witness_word)})")

for c in (Fraction(1), Fraction(1, 5), Fraction(1, 7), Fraction(1, 100)):
    B = (upper(c), lower(-c))
    r = check_precisely_invariant(G, B, 6)
    if r:
        print(f"c = {c}: certificate, {r.examined} cosets, margin {r.margin}")
    else:
        print(f"c = {c}: violation by {r.witness_text or r.witness_word}; re-verified {reverify_violation(G, B, r)}")
