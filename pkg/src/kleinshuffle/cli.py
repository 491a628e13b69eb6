"""Command-line front end.

Exit codes: 0 success or certificate, 1 a check failed (violation or
hypothesis failure), 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__

OUT_ENV = "KLEINSHUFFLE_OUT"
EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# --------------------------------------------------------------------------
# parsing helpers


def parse_height(text):
    t = text.strip()
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad height {text!r}") from None


def parse_region(text):
    """``"H_1,H*_-1"`` -> tuple of Regions."""
    from .moebius import lower, upper

    out = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if part.startswith("H*_"):
            out.append(lower(parse_height(part[3:])))
        elif part.startswith("H_"):
            out.append(upper(parse_height(part[2:])))
        else:
            raise InputError(f"bad region {part!r}; use H_a or H*_a")
    if not out:
        raise InputError("empty region list")
    return tuple(out)


def parse_resolution(text):
    try:
        w, h = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise InputError(f"bad resolution {text!r}; use WxH") from None
    if w <= 0 or h <= 0:
        raise InputError("resolution must be positive")
    return w, h


def parse_viewport(text):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"bad viewport {text!r}") from None
    if len(vals) != 2 or not vals[1] > vals[0]:
        raise InputError("viewport is 'x0,x1' with x0 < x1")
    return tuple(vals)


def _out_dir(args):
    d = args.out or os.environ.get(OUT_ENV) or "."
    os.makedirs(d, exist_ok=True)
    return d


def _write(path, text):
    from .limitset import _atomic_write

    _atomic_write(path, text)
    return path


def _plan(args):
    from .shuffle import PlanError, ShufflePlan, make_plan

    if getattr(args, "plan", None):
        try:
            with open(args.plan, encoding="utf-8") as fh:
                return ShufflePlan.from_text(fh.read())
        except OSError as e:
            raise InputError(str(e)) from None
        except PlanError as e:
            raise InputError(str(e)) from None
    if args.k is None:
        raise InputError("give --k or --plan")
    if args.k < 3:
        raise InputError("k must be >= 3")
    if args.C < 1:
        raise InputError("C must be >= 1")
    genera = None
    if getattr(args, "genera", None):
        try:
            genera = tuple(int(g) for g in args.genera.split(","))
        except ValueError:
            raise InputError(f"bad --genera {args.genera!r}") from None
        if len(genera) != args.k or len(set(genera)) != args.k or min(genera) < 1:
            raise InputError("--genera needs k distinct positive integers")
    try:
        return make_plan(args.k, args.C, genera)
    except PlanError as e:
        raise InputError(str(e)) from None


def _tau(plan, text):
    from .shuffle import resolve_tau

    try:
        rep, note = resolve_tau(plan, text or "")
    except ValueError as e:
        raise InputError(str(e)) from None
    if note:
        print(f"notice: {note}")
    return rep


# --------------------------------------------------------------------------
# commands


def cmd_shuffle(args):
    from .shuffle import format_perm, shuffle_exponents

    plan = _plan(args)
    out = _out_dir(args)
    path = _write(os.path.join(out, f"plan_k{plan.k}_C{plan.C}.txt"), plan.to_text())
    print(f"k = {plan.k}, C = {plan.C}, {len(plan.reps)} coset representatives")
    print("heights: " + " ".join(str(a) for a in plan.heights))
    for s in plan.reps:
        n = shuffle_exponents(plan, s)
        print(f"  {format_perm(s):>12}  p = {plan.primes[s]}  d = {plan.coeffs[s]}  "
              f"n = {' '.join(str(x) for x in n)}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_build(args):
    from .combiner import HypothesisError, ping_pong_certify
    from .io import format_group
    from .shuffle import PlanError, build_gamma_k, build_gamma_k_tau, format_perm

    plan = _plan(args)
    out = _out_dir(args)
    try:
        plan.check()
        tau = _tau(plan, args.tau)
        gk = build_gamma_k(plan, L=args.L, mode=args.mode)
        g_tau, g_hat, check = build_gamma_k_tau(plan, tau, L=args.L, gamma_k=gk, mode=args.mode)
    except (HypothesisError, PlanError) as e:
        name = getattr(e, "check", None) or "plan"
        print(f"FAILED [{name}]: {e}")
        return EXIT_VIOLATION
    pp = ping_pong_certify(gk, 3, seed=args.seed)
    if not pp:
        print(f"FAILED [ping_pong]: {pp.to_dict()}")
        return EXIT_VIOLATION
    gk.certificates["ping_pong"] = pp
    tag = format_perm(tau).replace("(", "").replace(")", "_").strip("_") or "id"
    files = [(f"gamma_k{plan.k}.txt", gk), (f"gamma_k{plan.k}_tau_{tag}.txt", g_tau),
             (f"hatgamma_k{plan.k}_tau_{tag}.txt", g_hat)]
    for name, G in files:
        _write(os.path.join(out, name), format_group(G))
        print(f"{G.describe()}  -> {name}")
    report = {"plan": {"k": plan.k, "C": plan.C}, "tau": format_perm(tau),
              "shuffle_consistency": [list(r) for r in check.rows],
              "certificates": {G.label: {k: (v.to_dict() if hasattr(v, "to_dict") else v)
                                         for k, v in G.certificates.items()}
                               for _, G in files}}
    _write(os.path.join(out, f"certificates_k{plan.k}_tau_{tag}.json"),
           json.dumps(report, indent=2, sort_keys=True, default=str))
    print("all hypotheses certified")
    return EXIT_OK


def cmd_verify(args):
    from .invariance import check_precisely_invariant
    from .io import FormatError, read_group

    try:
        G = read_group(args.group)
    except FormatError as e:
        raise InputError(f"{args.group}: {e}") from None
    B = parse_region(args.region)
    try:
        cert = check_precisely_invariant(G, B, args.L, mode=args.mode)
    except ValueError as e:
        raise InputError(str(e)) from None
    d = cert.to_dict()
    d["result"] = "certificate" if cert else "violation"
    out = _out_dir(args)
    path = _write(os.path.join(out, "certificate.json"), json.dumps(d, indent=2, sort_keys=True))
    print(json.dumps(d, sort_keys=True))
    print(f"wrote {path}")
    return EXIT_OK if cert else EXIT_VIOLATION


def cmd_render(args):
    from .limitset import render_shuffle_figure
    from .shuffle import format_perm

    plan = _plan(args)
    tau = _tau(plan, args.tau)
    res = parse_resolution(args.resolution)
    xr = parse_viewport(args.viewport)
    if args.depth < 1 or args.prune <= 0:
        raise InputError("depth and prune must be positive")
    img_k, img_t, clouds, groups = render_shuffle_figure(
        plan, tau, depth=args.depth, prune=args.prune, resolution=res, x_range=xr, L=args.L,
        seed=args.seed)
    out = _out_dir(args)
    tag = format_perm(tau).replace("(", "").replace(")", "_").strip("_") or "id"
    names = [f"limitset_k{plan.k}.pgm", f"limitset_k{plan.k}_tau_{tag}.pgm"]
    for img, name, cloud in zip((img_k, img_t), names, clouds):
        img.write_pgm(os.path.join(out, name))
        if args.png:
            img.write_png(os.path.join(out, name[:-4] + ".png"))
        if args.csv:
            _write(os.path.join(out, name[:-4] + ".csv"), cloud.to_csv())
        print(f"{name}: {len(cloud)} points")
    for G, cloud in zip(groups, clouds):
        ex = cloud.height_excess(G.bottom, G.top)
        worst = float(ex.max()) if len(ex) else 0.0
        print(f"{G.label}: all points in [{G.bottom}, {G.top}]: {worst <= 1e-9}")
    return EXIT_OK


def cmd_classify(args):
    from .shuffle import format_perm, homeo_classes, coset_reps

    if args.k is None or args.k < 3:
        raise InputError("k must be >= 3")
    reps = coset_reps(args.k)
    classes = homeo_classes(args.k)
    print(f"k = {args.k}: {len(reps)} marked classes, {len(classes)} homeomorphism classes")
    for i, cl in enumerate(classes, start=1):
        print(f"  class {i}: " + " ".join(format_perm(s) for s in cl))
    return EXIT_OK


def cmd_deform(args):
    from .deform import PreconditionError, verify_deformed_blocks
    from .fuchsian import block, markov_family

    plan = _plan(args)
    try:
        x, y = (complex(v.replace("i", "j")) for v in args.markov.split(","))
    except ValueError:
        raise InputError(f"bad --markov {args.markov!r}; use x,y such as 3+0.1i,3") from None
    try:
        m = markov_family(x, y)
    except ValueError as e:
        raise InputError(str(e)) from None
    if 1 not in plan.genera:
        raise InputError("the deformed block has genus one; include 1 in --genera")
    blocks = [m if g == 1 else block(g) for g in plan.genera]
    tau = _tau(plan, args.tau) if args.tau else None
    try:
        rep = verify_deformed_blocks(blocks, plan, L=args.L, tau=tau, depth=args.depth,
                                     prune=args.prune, mode=args.mode)
    except PreconditionError as e:
        raise InputError(str(e)) from None
    d = rep.to_dict()
    out = _out_dir(args)
    path = _write(os.path.join(out, "deformation_report.json"),
                  json.dumps(d, indent=2, sort_keys=True, default=str))
    print(f"verdict: {rep.verdict}; c_inst = {rep.c_inst:.6g}; C used = {rep.C_used}")
    for c in rep.failures():
        print(f"  failed: {c.name}")
    print(f"wrote {path}")
    return EXIT_OK if rep.verdict == "consistent" else EXIT_VIOLATION


# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="kleinshuffle",
                                description="Build and check shuffled amalgams of Fuchsian blocks.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, plan=True):
        if plan:
            sp.add_argument("--k", type=int)
            sp.add_argument("--C", type=int, default=1)
            sp.add_argument("--plan", help="plan file written by 'shuffle'")
            sp.add_argument("--genera", help="comma-separated block genera, default 1..k")
        sp.add_argument("--L", type=int, default=6, help="word length budget")
        sp.add_argument("--mode", choices=("auto", "exact", "float"), default="auto")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")

    s = sub.add_parser("shuffle", help="write the shuffle plan for (k, C)")
    common(s)
    s.set_defaults(func=cmd_shuffle)

    s = sub.add_parser("build", help="build Gamma_k, Gamma_k^tau and its HNN extension")
    common(s)
    s.add_argument("--tau", default="", help="permutation in cycle notation, e.g. '(12)'")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("verify", help="check precise J-invariance of a region")
    s.add_argument("group", help="group description file")
    s.add_argument("--region", default="H_1,H*_-1")
    common(s, plan=False)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("render", help="render the limit sets of Gamma_k and Gamma_k^tau")
    common(s)
    s.add_argument("--tau", default="")
    s.add_argument("--depth", type=int, default=6)
    s.add_argument("--prune", type=float, default=1e-3)
    s.add_argument("--viewport", default="0,2", help="real range x0,x1")
    s.add_argument("--resolution", default="512x512")
    s.add_argument("--png", action="store_true")
    s.add_argument("--csv", action="store_true")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("classify", help="marked and homeomorphism class counts")
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("deform", help="verify a trace-deformed genus-one block inside the plan")
    common(s)
    s.add_argument("--markov", default="3+0.1i,3", help="traces x,y of the deformed block")
    s.add_argument("--tau", default="")
    s.add_argument("--depth", type=int, default=6)
    s.add_argument("--prune", type=float, default=1e-3)
    s.set_defaults(func=cmd_deform)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    if getattr(args, "L", 1) is not None and getattr(args, "L", 1) < 1:
        print("error: L must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
