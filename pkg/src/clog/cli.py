"""Command line front end.

Every operation is a subcommand printing a single-line JSON report:
{"cmd": <subcommand echo>, "status": "ok"|"fail"|"infeasible", ...payload}.
Exit code is 0 exactly when the status is "ok"; domain errors (bad files,
unparsable formulas, module ValueErrors) exit 1 with an "error" field, and
usage errors exit 2 via argparse.  Rationals are printed reduced as "p/q"
with an explicit positive denominator so reports are byte-stable.

Commands that assert a property (valid, sat, entail, check-proof, rand los,
hall, ...) report status "ok" when the property holds and "fail" (or
"infeasible" for hall) when it does not; pure computations (dist, joint,
glue, ...) are "ok" whenever the input was well-formed.
"""

import argparse
import json
import os
import random
import sys

from . import hall as hall_mod
from . import proofs, randomisation, rv, semantics, syntax
from .rationals import ZERO, format_rat, parse_rat, rat

DEFAULT_BRANCH_BUDGET = 24


def _budget():
    """Monus-node budget for the semantic procedures.

    The library itself runs unbounded; the CLI defaults to 24 and honours
    CLOG_BRANCH_BUDGET (an integer, 0 or less meaning "no budget").
    """
    text = os.environ.get("CLOG_BRANCH_BUDGET")
    if text is None:
        return DEFAULT_BRANCH_BUDGET
    try:
        value = int(text)
    except ValueError:
        raise ValueError("CLOG_BRANCH_BUDGET must be an integer, got %r" % text)
    return value if value > 0 else None


def _fmt(x):
    return format_rat(x)


def _fmt_point(point):
    return {name: _fmt(point[name]) for name in sorted(point)}


def _load_json(path):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _formula_arg(p, many=False):
    """Attach the shared formula input: -e TEXT or a file path."""
    p.add_argument(
        "-e",
        "--expr",
        action="append",
        default=None,
        metavar="FORMULA",
        help="formula text" + (" (repeatable)" if many else ""),
    )
    p.add_argument(
        "file",
        nargs="?",
        default=None,
        help="file with the formula text"
        + (", one per line" if many else ""),
    )


def _read_formulas(args, parser, many=False):
    if (args.expr is None) == (args.file is None):
        parser.error("provide a formula with -e or a file, not both")
    if args.expr is not None:
        texts = args.expr
    else:
        with open(args.file, "r", encoding="utf-8") as handle:
            texts = [line for line in handle.read().splitlines() if line.strip()]
    if not texts:
        raise ValueError("no formula given")
    if not many and len(texts) != 1:
        parser.error("this command takes exactly one formula")
    return texts


def _parse_sections(family, pairs):
    """--section NAME=v1,v2,... occurrences into an environment dict."""
    env = {}
    for pair in pairs or ():
        name, eq, body = pair.partition("=")
        if not eq:
            raise ValueError("--section expects NAME=v1,v2,..., got %r" % pair)
        values = tuple(v.strip() for v in body.split(",")) if body else ()
        env[name.strip()] = randomisation.Section(family, values)
    return env


def _parse_event(text):
    """Comma-separated atom ids; an empty string is the empty event."""
    if not text.strip():
        return ()
    return tuple(part.strip() for part in text.split(","))


def _random_rvs(space, count, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        values = tuple(rat(rng.randint(0, 8), 8) for _ in space.ids)
        out.append(rv.RandomVariable(space, values))
    return out


# --- propositional commands ---------------------------------------------------


def _cmd_valid(args, parser):
    (text,) = _read_formulas(args, parser)
    formula = syntax.parse_formula(text)
    ok, point = semantics.is_valid(formula, budget=_budget())
    if ok:
        return "ok", {"valid": True}
    return "fail", {
        "valid": False,
        "countermodel": _fmt_point(point),
        "value": _fmt(semantics.evaluate(formula, point)),
    }


def _cmd_sat(args, parser):
    texts = _read_formulas(args, parser, many=True)
    formulas = [syntax.parse_formula(t) for t in texts]
    ok = semantics.is_satisfiable(formulas, budget=_budget())
    return ("ok" if ok else "fail"), {"satisfiable": bool(ok)}


def _cmd_entail(args, parser):
    premises = [syntax.parse_formula(t) for t in args.premise or ()]
    goal = syntax.parse_formula(args.goal)
    budget = _budget()
    ok, point = semantics.entails_semantic(premises, goal, budget=budget)
    payload = {"valid": bool(ok)}
    if args.witness:
        m = semantics.entails_witness(premises, goal, cap=args.cap, budget=budget)
        payload["m"] = m
    if not ok:
        payload["countermodel"] = _fmt_point(point)
    return ("ok" if ok else "fail"), payload


def _cmd_unsat_witness(args, parser):
    premises = [syntax.parse_formula(t) for t in args.premise or ()]
    n = semantics.unsat_witness(premises, cap=args.cap, budget=_budget())
    if n is None:
        return "fail", {"n": None}
    return "ok", {"n": n}


def _cmd_check_proof(args, parser):
    proof = proofs.proof_from_json(_load_json(args.proof))
    premises = [syntax.parse_formula(t) for t in args.premise or ()]
    ok, offense = proofs.check_proof(proof, premises, explain=True)
    if ok:
        return "ok", {"checked": True, "lines": len(proof)}
    line, reason = offense
    return "fail", {"checked": False, "line": line, "reason": reason}


def _cmd_find_proof(args, parser):
    (text,) = _read_formulas(args, parser)
    goal = syntax.parse_formula(text)
    premises = [syntax.parse_formula(t) for t in args.premise or ()]
    proof = proofs.find_proof(goal, premises, depth=args.depth)
    if proof is None:
        return "fail", {"found": False, "proof": None}
    return "ok", {
        "found": True,
        "lines": len(proof),
        "proof": proofs.proof_to_json(proof),
    }


def _cmd_elim_half(args, parser):
    premises = [syntax.parse_formula(t) for t in args.premise or ()]
    goal = syntax.parse_formula(args.goal)
    res = proofs.eliminate_half(premises, goal)
    return "ok", {
        "premises": [syntax.print_formula(f) for f in res.premises],
        "goal": syntax.print_formula(res.goal),
        "fresh": {
            name: syntax.print_formula(f) for name, f in res.fresh.items()
        },
    }


# --- random-variable commands ---------------------------------------------------


def _cmd_rv_check(args, parser):
    space = rv.space_from_json(_load_json(args.space))
    samples = _random_rvs(space, args.samples, args.seed)
    residuals = rv.check_rv_axioms(space, samples)
    ok = all(v == 0 for v in residuals.values())
    payload = {
        "samples": args.samples,
        "residuals": {k: _fmt(v) for k, v in residuals.items()},
    }
    return ("ok" if ok else "fail"), payload


def _cmd_rv_arv_defect(args, parser):
    x = rv.rv_from_json(_load_json(args.rv))
    if args.witness:
        value, witness = rv.arv_defect(x.space, x, with_witness=True)
        return "ok", {
            "defect": _fmt(value),
            "witness": [_fmt(v) for v in witness.values],
        }
    value = rv.arv_defect(x.space, x)
    return "ok", {"defect": _fmt(value)}


def _cmd_rv_dist(args, parser):
    x = rv.rv_from_json(_load_json(args.x))
    y = rv.rv_from_json(_load_json(args.y))
    return "ok", {"d": _fmt(rv.l1_dist(x, y))}


def _cmd_rv_joint(args, parser):
    rvs = [rv.rv_from_json(_load_json(path)) for path in args.rv]
    law = rv.joint_distribution(rvs)
    masses = [
        {"values": [_fmt(v) for v in key], "w": _fmt(w)}
        for key, w in sorted(law.masses.items())
    ]
    return "ok", {"masses": masses}


def _cmd_rv_condexp(args, parser):
    x = rv.rv_from_json(_load_json(args.rv))
    partition = [x.space.event(_parse_event(b)) for b in args.block]
    out = rv.cond_expectation(x, partition)
    return "ok", {"values": [_fmt(v) for v in out.values]}


def _cmd_rv_tauphi(args, parser):
    f = rv.rv_from_json(_load_json(args.rv))
    event = _parse_event(args.event)
    phi = rv.tau_phi_interpretation(f.space, f, args.n, event)
    integral = rv.integral_over(f, f.space.event(event))
    bound = rat(1, 2**args.n)
    gap = abs(phi - integral)
    within = gap <= bound
    return ("ok" if within else "fail"), {
        "n": args.n,
        "phi": _fmt(phi),
        "integral": _fmt(integral),
        "bound": _fmt(bound),
        "within": bool(within),
    }


# --- randomisation commands ------------------------------------------------------


def _cmd_rand_eval(args, parser):
    family = randomisation.family_from_json(_load_json(args.family))
    (text,) = _read_formulas(args, parser)
    phi = syntax.parse_lformula(text)
    env = _parse_sections(family, args.section)
    out = randomisation.bracket(phi, env, family)
    return "ok", {"values": [_fmt(v) for v in out.values]}


def _cmd_rand_axioms(args, parser):
    family = randomisation.family_from_json(_load_json(args.family))
    rng = random.Random(args.seed)
    sections = []
    for _ in range(args.samples):
        values = tuple(
            rng.choice(s.universe) for s in family.structures
        )
        sections.append(randomisation.Section(family, values))
    residuals = randomisation.check_R_axioms(family, sections)
    ok = all(v == 0 for v in residuals.values())
    payload = {
        "samples": args.samples,
        "residuals": {k: _fmt(v) for k, v in residuals.items()},
    }
    return ("ok" if ok else "fail"), payload


def _cmd_rand_los(args, parser):
    family = randomisation.family_from_json(_load_json(args.family))
    (text,) = _read_formulas(args, parser)
    phi = syntax.parse_lformula(text)
    env = _parse_sections(family, args.section)
    weighting = None
    if args.weights is not None:
        weighting = [parse_rat(w.strip()) for w in args.weights.split(",")]
    lhs, rhs, equal = randomisation.los_check(phi, env, family, weighting)
    return ("ok" if equal else "fail"), {
        "lhs": _fmt(lhs),
        "rhs": _fmt(rhs),
        "equal": bool(equal),
    }


def _cmd_rand_glue(args, parser):
    family = randomisation.family_from_json(_load_json(args.family))
    a = randomisation.Section(family, _parse_event(args.a))
    b = randomisation.Section(family, _parse_event(args.b))
    event = frozenset(_parse_event(args.event))
    out = randomisation.glue(event, a, b)
    return "ok", {"section": list(out.values)}


def _cmd_rand_type_measure(args, parser):
    family = randomisation.family_from_json(_load_json(args.family))
    texts = _read_formulas(args, parser, many=True)
    formulas = [syntax.parse_lformula(t) for t in texts]
    if not args.section:
        raise ValueError("need at least one --section")
    sections = [
        randomisation.Section(family, _parse_event(body))
        for body in args.section
    ]
    names = args.name or None
    measure = randomisation.type_measure(sections, family, formulas, names)
    masses = [
        {"label": [_fmt(v) for v in key], "w": _fmt(w)}
        for key, w in sorted(measure.masses.items())
    ]
    pairings = [
        _fmt(randomisation.pairing(measure, i)) for i in range(len(formulas))
    ]
    return "ok", {"masses": masses, "pairings": pairings}


def _cmd_rand_inf_witness(args, parser):
    family = randomisation.family_from_json(_load_json(args.family))
    (text,) = _read_formulas(args, parser)
    phi = syntax.parse_lformula(text)
    env = _parse_sections(family, args.section)
    epsilon = parse_rat(args.epsilon) if args.epsilon is not None else ZERO
    sec = randomisation.inf_witness(phi, args.var, env, family, epsilon)
    bound = dict(env)
    bound[args.var] = sec
    at = randomisation.bracket(phi, bound, family)
    return "ok", {
        "section": list(sec.values),
        "values": [_fmt(v) for v in at.values],
    }


# --- hall ------------------------------------------------------------------------


def _cmd_hall(args, parser):
    instance = hall_mod.instance_from_json(_load_json(args.instance))
    holds, violating = hall_mod.hall_condition(instance, bound=args.bound)
    if not holds:
        return "infeasible", {"holds": False, "violating": list(violating)}
    allocation = hall_mod.solve_allocation(instance)
    if allocation is None:  # cannot happen when the condition holds
        return "fail", {"holds": True, "error": "no allocation found"}
    labels = hall_mod.realizable_labels(instance, allocation)
    return "ok", {
        "holds": True,
        "allocation": hall_mod.allocation_to_json(allocation)["masses"],
        "realizable": {k: labels[k] for k in sorted(labels)},
    }


# --- wiring ------------------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="clog",
        description="Continuous-logic toolkit: validity, proofs, random "
        "variables, randomised structures, mass allocation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("valid", help="is the formula 0 everywhere?")
    _formula_arg(p)
    p.set_defaults(handler=_cmd_valid, echo="valid")

    p = sub.add_parser("sat", help="do the formulas share a zero?")
    _formula_arg(p, many=True)
    p.set_defaults(handler=_cmd_sat, echo="sat")

    p = sub.add_parser("entail", help="do the premises entail the goal?")
    p.add_argument("--premise", action="append", metavar="FORMULA")
    p.add_argument("--goal", required=True, metavar="FORMULA")
    p.add_argument("--witness", action="store_true",
                   help="also search for the finite witness m")
    p.add_argument("--cap", type=int, default=semantics.DEFAULT_WITNESS_CAP)
    p.set_defaults(handler=_cmd_entail, echo="entail")

    p = sub.add_parser("unsat-witness",
                       help="smallest n certifying the premises unsatisfiable")
    p.add_argument("--premise", action="append", metavar="FORMULA")
    p.add_argument("--cap", type=int, default=semantics.DEFAULT_WITNESS_CAP)
    p.set_defaults(handler=_cmd_unsat_witness, echo="unsat-witness")

    p = sub.add_parser("check-proof", help="check a proof file")
    p.add_argument("proof", help="proof JSON file")
    p.add_argument("--premise", action="append", metavar="FORMULA")
    p.set_defaults(handler=_cmd_check_proof, echo="check-proof")

    p = sub.add_parser("find-proof", help="search for a proof of the goal")
    _formula_arg(p)
    p.add_argument("--premise", action="append", metavar="FORMULA")
    p.add_argument("--depth", type=int, default=20,
                   help="largest proof length to consider")
    p.set_defaults(handler=_cmd_find_proof, echo="find-proof")

    p = sub.add_parser("elim-half",
                       help="rewrite premises and goal without half")
    p.add_argument("--premise", action="append", metavar="FORMULA")
    p.add_argument("--goal", required=True, metavar="FORMULA")
    p.set_defaults(handler=_cmd_elim_half, echo="elim-half")

    rv_p = sub.add_parser("rv", help="random variables on finite spaces")
    rv_sub = rv_p.add_subparsers(dest="rv_command", required=True)

    p = rv_sub.add_parser("check", help="axiom residuals on random samples")
    p.add_argument("space", help="probability space JSON file")
    p.add_argument("--samples", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_rv_check, echo="rv check")

    p = rv_sub.add_parser("arv-defect",
                          help="distance from the variable's law to atomlessness")
    p.add_argument("rv", help="random variable JSON file")
    p.add_argument("--witness", action="store_true")
    p.set_defaults(handler=_cmd_rv_arv_defect, echo="rv arv-defect")

    p = rv_sub.add_parser("dist", help="L1 distance of two variables")
    p.add_argument("x", help="random variable JSON file")
    p.add_argument("y", help="random variable JSON file")
    p.set_defaults(handler=_cmd_rv_dist, echo="rv dist")

    p = rv_sub.add_parser("joint", help="joint law of the variables")
    p.add_argument("rv", nargs="+", help="random variable JSON files")
    p.set_defaults(handler=_cmd_rv_joint, echo="rv joint")

    p = rv_sub.add_parser("condexp", help="conditional expectation")
    p.add_argument("rv", help="random variable JSON file")
    p.add_argument("--block", action="append", required=True,
                   metavar="ATOMS", help="partition block, comma-separated")
    p.set_defaults(handler=_cmd_rv_condexp, echo="rv condexp")

    p = rv_sub.add_parser("tauphi",
                          help="staged integral approximation over an event")
    p.add_argument("rv", help="random variable JSON file")
    p.add_argument("--n", type=int, required=True, help="stage (>= 1)")
    p.add_argument("--event", required=True, metavar="ATOMS",
                   help="event, comma-separated atom ids")
    p.set_defaults(handler=_cmd_rv_tauphi, echo="rv tauphi")

    rand_p = sub.add_parser("rand", help="randomisations of finite structures")
    rand_sub = rand_p.add_subparsers(dest="rand_command", required=True)

    p = rand_sub.add_parser("eval", help="pointwise value of a formula")
    p.add_argument("family", help="random family JSON file")
    _formula_arg(p)
    p.add_argument("--section", action="append", metavar="NAME=V1,V2,...")
    p.set_defaults(handler=_cmd_rand_eval, echo="rand eval")

    p = rand_sub.add_parser("axioms", help="axiom residuals on random sections")
    p.add_argument("family", help="random family JSON file")
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_rand_axioms, echo="rand axioms")

    p = rand_sub.add_parser("los",
                            help="expected truth value both ways: do they agree?")
    p.add_argument("family", help="random family JSON file")
    _formula_arg(p)
    p.add_argument("--section", action="append", metavar="NAME=V1,V2,...")
    p.add_argument("--weights", metavar="P/Q,P/Q,...",
                   help="reweighting of the atoms (defaults to the family's)")
    p.set_defaults(handler=_cmd_rand_los, echo="rand los")

    p = rand_sub.add_parser("glue", help="combine two sections along an event")
    p.add_argument("family", help="random family JSON file")
    p.add_argument("--event", required=True, metavar="ATOMS")
    p.add_argument("--a", required=True, metavar="V1,V2,...",
                   help="section used on the event")
    p.add_argument("--b", required=True, metavar="V1,V2,...",
                   help="section used off the event")
    p.set_defaults(handler=_cmd_rand_glue, echo="rand glue")

    p = rand_sub.add_parser("type-measure",
                            help="pushforward law of formula values at sections")
    p.add_argument("family", help="random family JSON file")
    _formula_arg(p, many=True)
    p.add_argument("--section", action="append", metavar="V1,V2,...",
                   help="section values (repeatable)")
    p.add_argument("--name", action="append", metavar="NAME",
                   help="variable name bound per section tuple entry")
    p.set_defaults(handler=_cmd_rand_type_measure, echo="rand type-measure")

    p = rand_sub.add_parser("inf-witness",
                            help="section nearly attaining an inf")
    p.add_argument("family", help="random family JSON file")
    _formula_arg(p)
    p.add_argument("--var", required=True, help="the quantified variable")
    p.add_argument("--section", action="append", metavar="NAME=V1,V2,...")
    p.add_argument("--epsilon", metavar="P/Q", help="slack (default 0)")
    p.set_defaults(handler=_cmd_rand_inf_witness, echo="rand inf-witness")

    p = sub.add_parser("hall",
                       help="marriage condition and mass allocation")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--bound", type=int, default=hall_mod.DEFAULT_SUBSET_BOUND,
                   help="largest item-subset count to enumerate")
    p.set_defaults(handler=_cmd_hall, echo="hall")

    return parser


def _error_text(e):
    if isinstance(e, KeyError) and e.args:
        return str(e.args[0])
    return str(e)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        status, payload = args.handler(args, parser)
    except (ValueError, KeyError, TypeError, OSError) as e:
        report = {"cmd": args.echo, "status": "fail", "error": _error_text(e)}
        print(json.dumps(report, separators=(",", ":")))
        return 1
    report = {"cmd": args.echo, "status": status}
    report.update(payload)
    print(json.dumps(report, separators=(",", ":")))
    return 0 if status == "ok" else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
