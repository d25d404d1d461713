"""Command-line front end: ``pvcsp <command> [files] [flags]``.

Exit status 0 on success, 1 on a domain error (bad file, budget, role...),
2 on a usage error.  Numbers are printed as exact rationals.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import decomp, distsim, generate, morph, relax, wl
from .arith import format_ext, parse_ext
from .errors import PvcspError
from .maps import MapDistribution
from .model import (
    DEFAULT_OPT_BUDGET,
    CrispStructure,
    k_fold_twist,
    load_structure,
    maxcsp_encode,
    opt,
    serialize_structure,
)


def _rational(text):
    try:
        return parse_ext(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(args, human, data):
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(human)


def _dist_lines(dist: MapDistribution):
    lines = []
    for table, p in dist.named_support():
        body = " ".join(f"{a}->{b}" for a, b in table.items())
        lines.append(f"{format_ext(p)}: {body}")
    return "\n".join(lines)


def _counterexample_json(c):
    data = {
        "kind": "counterexample",
        "instance": serialize_structure(c.instance),
        "opt_source": format_ext(c.opt_source),
        "opt_target": format_ext(c.opt_target),
        "perturbed": c.perturbed,
    }
    if "opt_blp" in c.meta:
        data["opt_blp"] = format_ext(c.meta["opt_blp"])
    return data


def _counterexample_text(c):
    head = (
        f"counterexample: Opt(target) = {format_ext(c.opt_target)}"
        f" > {format_ext(c.opt_source)} = Opt(source)"
    )
    return head + "\n" + serialize_structure(c.instance).rstrip()


def _hom_result(args, out):
    if isinstance(out, MapDistribution):
        data = {"kind": "distribution", **out.to_json()}
        _emit(args, _dist_lines(out), data)
    else:
        _emit(args, _counterexample_text(out), _counterexample_json(out))


# -- commands --------------------------------------------------------------


def cmd_opt(args):
    I, A = load_structure(args.instance), load_structure(args.template)
    value, witness = opt(I, A, args.budget or DEFAULT_OPT_BUDGET)
    names = {v: A.universe[a] for v, a in zip(I.universe, witness)}
    _emit(args, format_ext(value), {"value": format_ext(value), "witness": names})


def _relaxation(flavor):
    def run(args):
        I, A = load_structure(args.instance), load_structure(args.template)
        sol = relax.solve_relaxation(I, A, flavor)
        data = {"value": format_ext(sol.value), "flavor": flavor}
        if sol.feasible:
            data["point"] = {k: format_ext(v) for k, v in sorted(sol.point.items())}
        _emit(args, format_ext(sol.value), data)

    return run


def cmd_decide(args):
    A, B, I = (load_structure(p) for p in (args.A, args.B, args.instance))
    verdict = relax.decide(A, B, I, args.threshold, args.method)
    _emit(args, str(verdict), {"verdict": str(verdict), "method": args.method})


def cmd_wl(args):
    I = load_structure(args.instance)
    _, P = wl.color_classes(I)
    if args.json:
        _emit(args, None, P.to_json())
        return
    data = P.to_json()
    lines = [f"{k} {c}" for k, c in data["vertices"].items()]
    lines.append(f"rounds {P.rounds}")
    print("\n".join(lines))


def cmd_equiv(args):
    I, J = load_structure(args.left), load_structure(args.right)
    ok = wl.equiv1(I, J)
    _emit(args, "true" if ok else "false", {"equiv1": ok})


def cmd_weak(args):
    I, J = load_structure(args.left), load_structure(args.right)
    ok = wl.weak_congruent(I, J)
    _emit(args, "true" if ok else "false", {"weak_congruent": ok})


def cmd_simulate(args):
    A, B, I = (load_structure(p) for p in (args.A, args.B, args.instance))
    res = distsim.simulate(I, A, B, args.threshold)
    if args.trace is not None:
        lines = "\n".join(res.trace_lines()) + "\n"
        if args.trace == "-":
            sys.stdout.write(lines)
        else:
            with open(args.trace, "w", encoding="utf-8") as fh:
                fh.write(lines)
    data = {"verdict": str(res.verdict), "rounds": res.rounds, "value": format_ext(res.value)}
    _emit(args, str(res.verdict), data)


def cmd_frachom(args):
    A, B = load_structure(args.A), load_structure(args.B)
    _hom_result(args, morph.frac_hom(A, B, args.budget or morph.DEFAULT_MAP_BUDGET))


def cmd_dualfrachom(args):
    I, J = load_structure(args.left), load_structure(args.right)
    dist = morph.dual_frac_hom(I, J, args.budget or morph.DEFAULT_MAP_BUDGET)
    if dist is None:
        _emit(args, "none", {"kind": "none"})
    else:
        _emit(args, _dist_lines(dist), {"kind": "distribution", **dist.to_json()})


def cmd_power(args):
    A = load_structure(args.template)
    P = morph.power_lp(A, args.m, args.budget or morph.DEFAULT_POWER_BUDGET)
    text = serialize_structure(P.structure)
    _emit(args, text.rstrip(), {"m": args.m, "structure": text})


def cmd_sympoly(args):
    A, B = load_structure(args.A), load_structure(args.B)
    out = morph.sym_frac_polymorphism(A, B, args.m, args.budget or morph.DEFAULT_MAP_BUDGET)
    _hom_result(args, out)


def cmd_blp_power(args):
    I, A = load_structure(args.instance), load_structure(args.template)
    rep = morph.blp_power_consistency(I, A, args.budget or morph.DEFAULT_POWER_BUDGET)
    data = {
        "status": rep.status,
        "opt_blp": format_ext(rep.opt_blp),
        "m_star": rep.m_star,
        "opt_power": {str(m): format_ext(v) for m, v in sorted(rep.opt_power.items())},
    }
    human = [f"status {rep.status}", f"opt_blp {format_ext(rep.opt_blp)}", f"m* {rep.m_star}"]
    human += [f"m={m} {format_ext(v)}" for m, v in sorted(rep.opt_power.items())]
    _emit(args, "\n".join(human), data)
    if not rep.consistent and rep.status != "skipped":
        return 1
    return 0


def cmd_decompose(args):
    I, A = load_structure(args.instance), load_structure(args.template)
    d = decomp.decompose(I, A)
    rep = decomp.verify_decomposition(I, A, d)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, text in d.files().items():
            with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
                fh.write(text)
    data = {"decomposition": d.to_json(), "report": rep.to_json()}
    human = f"m {d.m}\nok {str(rep.ok).lower()}"
    if rep.first_failure:
        human += f"\nfirst failing clause ({rep.first_failure})"
    _emit(args, human, data)
    return 0 if rep.ok else 1


def cmd_twist(args):
    I = load_structure(args.instance)
    order = args.order.split(",") if args.order else None
    tw = k_fold_twist(I, args.k, order)
    text = serialize_structure(tw.twisted)
    _emit(args, text.rstrip(), {"k": args.k, "structure": text})


def cmd_maxcsp(args):
    A = CrispStructure.from_zero_inf(load_structure(args.template))
    a2, b2 = maxcsp_encode(A, args.c)
    ta, tb = serialize_structure(a2), serialize_structure(b2)
    _emit(args, ta + "\n" + tb.rstrip(), {"A": ta, "B": tb})


def cmd_gen(args):
    rng = generate.rng_of(args.seed)
    sig = generate.random_signature(rng)
    if args.kind == "template":
        S = generate.random_template(rng, sig, args.size)
    elif args.kind == "instance":
        S = generate.random_instance(rng, sig, args.size)
    elif args.kind == "connected":
        S = generate.random_connected_instance(rng, [("R", 2)], args.size)
    else:
        lp = generate.random_lp(rng)
        _emit(args, lp.to_text().rstrip(), {"lp": lp.to_text()})
        return
    text = serialize_structure(S)
    _emit(args, text.rstrip(), {"structure": text})


# -- parser ----------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="pvcsp", description="Promise valued CSP toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget", type=int, default=None, help="search budget")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, *positional, help=None):
        sp = sub.add_parser(name, parents=[common], help=help)
        for arg in positional:
            sp.add_argument(arg)
        sp.set_defaults(func=func)
        return sp

    add("opt", cmd_opt, "instance", "template", help="exact optimum by enumeration")
    add("blp", _relaxation(relax.BLP), "instance", "template", help="basic LP relaxation")
    add("sa1", _relaxation(relax.SA1), "instance", "template", help="SA1 relaxation")
    add("sa1-reduced", _relaxation(relax.SA1_REDUCED), "instance", "template",
        help="SA1 reduced over colour classes")
    sp = add("decide", cmd_decide, "A", "B", "instance", help="Yes/No verdict")
    sp.add_argument("--tau", dest="threshold", type=_rational)
    sp.add_argument("--method", default=relax.SA1,
                    choices=[relax.BLP, relax.SA1, relax.SA1_REDUCED, relax.ORACLE])
    add("wl", cmd_wl, "instance", help="colour refinement of the factor graph")
    add("equiv", cmd_equiv, "left", "right", help="same iterated degrees")
    add("weak-congruent", cmd_weak, "left", "right", help="weak congruence")
    sp = add("simulate", cmd_simulate, "A", "B", "instance", help="distributed SA1 decision")
    sp.add_argument("--tau", dest="threshold", type=_rational)
    sp.add_argument("--trace", nargs="?", const="-", default=None,
                    help="write JSON-lines trace to FILE (default stdout)")
    add("frachom", cmd_frachom, "A", "B", help="fractional homomorphism or counterexample")
    add("dualfrachom", cmd_dualfrachom, "left", "right", help="dual fractional homomorphism")
    sp = add("power", cmd_power, "template", help="multiset power structure")
    sp.add_argument("--m", type=int, required=True)
    sp = add("sympoly", cmd_sympoly, "A", "B", help="symmetric fractional polymorphism")
    sp.add_argument("--m", type=int, required=True)
    add("blp-power-check", cmd_blp_power, "instance", "template",
        help="BLP optimum against power structures")
    sp = add("decompose", cmd_decompose, "instance", "template", help="SA1 decomposition")
    sp.add_argument("--out", help="directory for copies.vcsp, twisted.vcsp and decomposition.json")
    sp = add("twist", cmd_twist, "instance", help="k-fold twist")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--order", help="comma-separated variable order")
    sp = add("maxcsp-encode", cmd_maxcsp, "template", help="MaxCSP approximation templates")
    sp.add_argument("--c", type=_rational, required=True)
    sp = add("gen", cmd_gen, help="random fixture")
    sp.add_argument("kind", choices=["template", "instance", "connected", "lp"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--size", type=int, default=3)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except (PvcspError, OSError, ValueError) as exc:
        print(f"pvcsp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
