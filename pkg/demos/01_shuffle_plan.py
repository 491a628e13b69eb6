"""Walk through the integer bookkeeping behind a shuffle.

For k = 3 and C = 1: one prime per coset representative, the CRT
coefficients, the heights a_j, and the exponents n_j that move block j
down to height 4C tau^-1(j).
"""

from kleinshuffle.shuffle import format_perm, make_plan, pinv, shuffle_exponents

plan = make_plan(3, 1)
print(f"k = {plan.k}, C = {plan.C}")
print("heights a_j:", plan.heights)
for s in plan.reps:
    p, d = plan.primes[s], plan.coeffs[s]
    others = [q for t, q in plan.primes.items() if t != s]
    print(f"\ntau = {format_perm(s)}: p = {p}, d = {d}  "
          f"(d mod p = {d % p}, d mod others = {[d % q for q in others]})")
    inv = pinv(s)
    for j, n in enumerate(shuffle_exponents(plan, s), start=1):
        a = plan.heights[j - 1]
        print(f"  block {j}: a_j = {a:6d} = {n} * {p} + {a - n * p}   -> lands at 4C*{inv[j - 1]}")
