"""Verification of candidate deformed blocks against the shuffle construction.

Nothing here builds a deformation.  Given groups claimed to be normalized
deformations of the blocks (same boundary word, still equal to xi_1), the
pipeline measures each block's own strip constant, picks a height C' that
dominates it, and re-runs every hypothesis check of the combination with
that C'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .combiner import HypothesisError, amalgamate, hnn_extend
from .fuchsian import verify_boundary_primitive
from .invariance import (
    _num, check_precisely_invariant, jorgensen_check, strip_confinement, strip_constant,
)
from .limitset import enumerate_limit_points
from .moebius import lower, upper, xi
from .shuffle import (
    build_gamma_k_tau, format_perm, make_plan, parse_perm, shuffle_consistency,
)


class PreconditionError(ValueError):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"check": self.name, "passed": self.passed, **self.detail}


@dataclass
class DeformationReport:
    groups: list
    K: object
    c_inst: float
    C_used: object
    plan_rebuilt: bool
    checks: list
    plan: object = None

    @property
    def verdict(self):
        return "consistent" if all(c.passed for c in self.checks) else "violated"

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {"deformation": {
            "input": self.groups, "K": _num(self.K), "c_inst": _num(self.c_inst),
            "C_used": _num(self.C_used), "plan_rebuilt": self.plan_rebuilt,
            "primes": None if self.plan is None else
            {format_perm(s): p for s, p in self.plan.primes.items()},
            "verdict": self.verdict, "checks": [c.to_dict() for c in self.checks]}}


def _dominating_height(c_inst, C):
    """Least usable integer height: C itself if c_inst < C, else the next integer above c_inst."""
    if math.isinf(c_inst):
        return None
    if c_inst < C:
        return C
    return math.floor(c_inst) + 1


def verify_deformed_blocks(blocks, plan, L=6, K=None, tau=None, depth=6, prune=1e-3,
                           combined_L=2, mode="auto"):
    """Run the deformed-block pipeline; returns a :class:`DeformationReport`.

    ``blocks[j-1]`` stands in for the block of genus ``plan.genera[j-1]``.
    Raises :class:`PreconditionError` if some boundary word is not xi_1.
    """
    if len(blocks) != plan.k:
        raise PreconditionError(f"expected {plan.k} blocks, got {len(blocks)}")
    for G in blocks:
        if G.boundary_element() != xi(1):
            raise PreconditionError(f"{G.label}: boundary word does not evaluate to xi_1")
    checks = []
    c_inst = 0.0
    for j, G in enumerate(blocks, start=1):
        bad = [(p, q) for p, q, ok in jorgensen_check(G) if not ok]
        checks.append(Check(f"jorgensen[{j}]", not bad,
                            {"group": G.label, "failing_pairs": [[list(p), q] for p, q in bad]}))
        prim = verify_boundary_primitive(G, L, mode)
        checks.append(Check(f"primitive[{j}]", bool(prim), {"group": G.label, **prim.to_dict()}))
        sc = strip_constant(G, L, mode)
        checks.append(Check(f"strip_constant[{j}]", not math.isinf(sc.value),
                            {"group": G.label, **sc.to_dict()}))
        c_inst = max(c_inst, sc.value)
    C_new = _dominating_height(c_inst, plan.C)
    rebuilt = False
    if C_new is None:
        # no finite height works; still produce invariance witnesses at the plan height
        C_use = plan.C
        checks.append(Check("plan_rebuild", False, {"reason": "strip constant is infinite"}))
        new_plan = plan
    else:
        C_use = C_new
        if C_new != plan.C:
            new_plan = make_plan(plan.k, C_new, plan.genera)
            rebuilt = True
        else:
            new_plan = plan
        checks.append(Check("plan_rebuild", True, {"C": C_new, "rebuilt": rebuilt,
                                                   "heights": [str(a) for a in new_plan.heights]}))
    region = (upper(C_use), lower(-C_use))
    inv_ok = True
    for j, G in enumerate(blocks, start=1):
        cert = check_precisely_invariant(G, region, L, mode=mode)
        inv_ok = inv_ok and bool(cert)
        checks.append(Check(f"invariance[{j}]", bool(cert), cert.to_dict()))
        cloud = enumerate_limit_points(G, depth, prune)
        ok, worst, excess = strip_confinement(cloud, C_use)
        checks.append(Check(f"strip_confinement[{j}]", ok,
                            {"group": G.label, "c": _num(C_use), "points": len(cloud),
                             "worst": None if worst is None else [worst.real, worst.imag],
                             "excess": excess}))
    if C_new is not None and inv_ok:
        by_genus = dict(zip(new_plan.genera, blocks))
        try:
            pairs = [(by_genus[g], a) for g, a in zip(new_plan.genera, new_plan.heights)]
            gk = amalgamate(pairs, new_plan.C, L, combined_L, label=f"Gamma_{plan.k}'", mode=mode)
            checks.append(Check("gamma_k", True, {k: v.to_dict() for k, v in gk.certificates.items()}))
            t = tau if tau is not None else new_plan.reps[-1]
            if isinstance(t, str):
                t = parse_perm(t, plan.k)
            g_tau, g_hat, sc = build_gamma_k_tau(new_plan, t, by_genus, L, combined_L, gk, mode)
            checks.append(Check("gamma_tau", True, {"tau": format_perm(t),
                                                    "shuffle_consistent": bool(sc)}))
            width = g_hat.certificates["hnn_width"]
            checks.append(Check("hnn_width", width["width"] < width["p"]
                                and new_plan.primes[t] > 4 * c_inst * plan.k, width))
        except HypothesisError as e:
            checks.append(Check(e.check or "combination", False, {"error": str(e)}))
    return DeformationReport([G.label for G in blocks], K, c_inst, C_use, rebuilt, checks, new_plan)
