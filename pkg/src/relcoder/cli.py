"""Command-line entry point.

Exit codes: 0 holds/verified, 1 fails/refuted, 2 inconclusive, 64 usage or
instance errors, 65 a mathematical precondition of the command is violated,
66 the instance file cannot be read.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .errors import InstanceError, RelcoderError
from .io import FORMAT_VERSION, InstanceFile, OracleSettings, emit_report, load_instance, make_report

EXIT_HOLDS, EXIT_FAILS, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_PRECONDITION, EXIT_NOINPUT = 64, 65, 66

PROPERTY_NAMES = {
    "lipschitz": "lipschitz-like-relative",
    "metric-regularity": "metric-regular-relative",
    "openness": "linearly-open-relative",
}
RULES = ("chain-m", "chain-n", "chain-smooth", "sum-m", "sum-n", "equiv", "estimate-check")
DEMOS = ("ell2", "lp43", "extremal", "fuzzy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _schedule(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc
    if not vals or any(v <= 0 for v in vals) or any(a <= b for a, b in zip(vals, vals[1:])):
        raise argparse.ArgumentTypeError("radius schedule must be positive and strictly decreasing")
    return vals


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--instance", type=Path, help="instance file (JSON)")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")
    common.add_argument("--seed", type=_u64)
    common.add_argument("--tol", type=float)
    common.add_argument("--radius-schedule", type=_schedule, dest="radii")
    common.add_argument("--samples", type=_positive_int)

    p = _Parser(prog="relcoder", description="Relative coderivatives of polyhedral multimaps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("coderivative", parents=[common], help="compute the coderivative cone union")
    c.add_argument("--flavor", choices=("normal", "regular", "mirror"), default="normal")
    c = sub.add_parser("certify", parents=[common], help="coderivative criterion for a property")
    c.add_argument("--property", choices=tuple(PROPERTY_NAMES), default="lipschitz")
    sub.add_parser("estimate", parents=[common], help="sampled Lipschitz modulus")
    c = sub.add_parser("verify", parents=[common], help="check a calculus rule or an equivalence")
    c.add_argument("--rule", choices=RULES, required=True)
    c = sub.add_parser("demo", parents=[common], help="witness searches and sequence-space demos")
    c.add_argument("--which", choices=DEMOS, required=True)
    c = sub.add_parser("corpus", parents=[common], help="write the generated instance corpus to a directory")
    c.add_argument("--count", type=_positive_int, default=100)
    return p


# --------------------------------------------------------------------------


def _settings(args, inst: InstanceFile | None) -> OracleSettings:
    base = inst.oracle if inst is not None else OracleSettings()
    upd = {}
    if args.seed is not None:
        upd["seed"] = args.seed
    if args.radii is not None:
        upd["radii"] = args.radii
    if args.samples is not None:
        upd["samples"] = args.samples
    if args.tol is not None:
        upd["tolerance"] = args.tol
    return dataclasses.replace(base, **upd)


def _sample_config(o: OracleSettings):
    from .oracle import SampleConfig

    return SampleConfig(seed=o.seed, radii=o.radii, samples=o.samples, tolerance=o.tolerance)


def _need(inst: InstanceFile | None, *kinds: str) -> InstanceFile:
    if inst is None:
        raise UsageError("--instance is required for this command")
    if inst.kind not in kinds:
        raise InstanceError(f"expected an instance of kind {' or '.join(kinds)}, got {inst.kind}", "$.kind")
    return inst


def _base(inst: InstanceFile):
    b = inst["base"]
    return b["x"], b["y"]


def _verdict_code(verdict: str) -> int:
    return {"holds": EXIT_HOLDS, "fails": EXIT_FAILS}.get(verdict, EXIT_INCONCLUSIVE)


def _trend_code(hint: str) -> int:
    return {"stable": EXIT_HOLDS, "diverging": EXIT_FAILS}.get(hint, EXIT_INCONCLUSIVE)


def cmd_coderivative(args, inst, o):
    from .coderivative import (
        kernel,
        limiting_coderivative,
        mirror_coderivative,
        outer_norm,
        regular_coderivative,
        zero_image,
    )

    inst = _need(inst, "multimap")
    S, base = inst["S"], _base(inst)
    if args.flavor == "regular":
        D = regular_coderivative(S, inst["Omega"], inst["Theta"], base)
    elif args.flavor == "mirror":
        D = mirror_coderivative(S, inst["Theta"], base)
    else:
        D = limiting_coderivative(S, inst["Omega"], inst["Theta"], base)
    result = {
        "flavor": D.flavor,
        "n": D.n,
        "m": D.m,
        "cones": list(D.cones),
        "outerNorm": outer_norm(D),
        "zeroImageTrivial": zero_image(D).isTrivial,
        "kernelTrivial": kernel(D).isTrivial,
    }
    return result, EXIT_HOLDS


def cmd_certify(args, inst, o):
    from .wellposedness import certify_lipschitz_like, certify_property, linear_operator_certificate

    inst = _need(inst, "multimap", "linear-operator")
    if inst.kind == "linear-operator":
        if args.property != "lipschitz":
            raise UsageError("linear-operator instances certify the inverse's Lipschitz-like property only")
        cert = linear_operator_certificate(inst["A"], inst["base"]["x"])
    elif args.property == "lipschitz":
        cert = certify_lipschitz_like(inst["S"], inst["Omega"], _base(inst))
    else:
        cert = certify_property(inst["S"], inst["Theta"], _base(inst), PROPERTY_NAMES[args.property])
    return cert, _verdict_code(cert.verdict)


def cmd_estimate(args, inst, o):
    from .oracle import sample_lip

    inst = _need(inst, "multimap")
    est = sample_lip(inst["S"], inst["Omega"], _base(inst), _sample_config(o))
    return est, _trend_code(est.verdictHint)


def _rule_code(r) -> int:
    if not r.inclusionHolds:
        return EXIT_FAILS
    return EXIT_HOLDS if r.hypothesesVerified else EXIT_INCONCLUSIVE


def cmd_verify(args, inst, o):
    rule = args.rule
    if rule.startswith("chain"):
        from .calculus import verify_chain_rule, verify_chain_rule_smooth
        from .multifunction import PolyMultimap

        inst = _need(inst, "chain")
        b = inst["base"]
        if rule == "chain-smooth":
            if "inner" not in inst.data:
                raise InstanceError("chain-smooth needs an affine 'inner' map", "$.inner")
            if "y" not in b:
                raise InstanceError("chain-smooth needs the intermediate point", "$.base.y")
            inner = inst["inner"]
            r = verify_chain_rule_smooth(inst["S1"], inner["A"], inner["offset"], inst["Omega"], b["x"], b["z"], b["y"])
        else:
            S2 = inst.get("S2") or PolyMultimap.linear(inst["inner"]["A"], inst["inner"]["offset"])
            r = verify_chain_rule(inst["S1"], S2, inst["Omega"], b["x"], b["z"], b.get("y"),
                                  rule[-1].upper(), isc_samples=o.samples, seed=o.seed)
        return r, _rule_code(r)
    if rule.startswith("sum"):
        from .calculus import verify_sum_rule

        inst = _need(inst, "sum")
        b = inst["base"]
        r = verify_sum_rule(inst["S1"], inst["S2"], inst["Omega"], b["x"], b["y"], b["y1"], b["y2"],
                            rule[-1].upper(), isc_samples=o.samples, seed=o.seed)
        return r, _rule_code(r)
    if rule == "equiv":
        from .oracle import regularity_equivalence

        inst = _need(inst, "multimap")
        rep = regularity_equivalence(inst["S"], inst["Theta"], _base(inst), _sample_config(o))
        if not rep.agree:
            return rep, EXIT_FAILS
        return rep, _verdict_code(rep.inverseLipschitz)
    # estimate-check: oracle modulus against the exact certificate
    from .oracle import sample_lip
    from .wellposedness import certify_lipschitz_like

    inst = _need(inst, "multimap")
    cert = certify_lipschitz_like(inst["S"], inst["Omega"], _base(inst))
    est = sample_lip(inst["S"], inst["Omega"], _base(inst), _sample_config(o))
    rel = 0.05 if args.tol is None else args.tol
    if cert.verdict == "inconclusive" or est.verdictHint == "inconclusive":
        code = EXIT_INCONCLUSIVE
    elif cert.verdict == "holds":
        ok = est.verdictHint == "stable" and abs(est.value - cert.bound.value) <= max(rel * cert.bound.value, 1e-3)
        code = EXIT_HOLDS if ok else EXIT_FAILS
    else:
        code = EXIT_HOLDS if est.verdictHint == "diverging" else EXIT_FAILS
    return {"certificate": cert, "estimate": est, "relativeTolerance": rel}, code


def cmd_demo(args, inst, o):
    from .oracle import (
        ell2_psnc_demo,
        extremal_pairs,
        extremal_witness_search,
        fuzzy_witness_search,
        intersection_instances,
        lp43_projectional_demo,
    )

    which = args.which
    if which == "ell2":
        r = ell2_psnc_demo(1000, 100, samples=o.samples, seed=o.seed)
        ok = r.maxDualNorm["0.0"] == 0 and all(v <= float(k) for k, v in r.maxDualNorm.items()) \
            and all(v == 1.0 for v in r.unitNorms)
        return r, EXIT_HOLDS if ok else EXIT_FAILS
    if which == "lp43":
        r = lp43_projectional_demo()
        tail = r.pairingWithE[1:]
        ok = all(a < b for a, b in zip(tail, tail[1:])) and all(
            abs(u - v) <= 1e-14 * v for u, v in zip(r.yNorms, r.yNormsExpected))
        return r, EXIT_HOLDS if ok else EXIT_FAILS
    eps_levels = ("1/10", "1/100")
    runs = []
    if inst is not None:
        inst = _need(inst, "extremal")
        b = _base(inst)
        if which == "extremal":
            runs.append((inst.name or "instance", lambda: extremal_witness_search(inst["L1"], inst["L2"], inst["Omega"], b, inst["eps"])))
        else:
            if "dual" not in inst.data or "gamma" not in inst.data:
                raise InstanceError("the fuzzy search needs 'gamma' and 'dual'", "$")
            runs.append((inst.name or "instance", lambda: fuzzy_witness_search(
                inst["L1"], inst["L2"], inst["Omega"], b, inst["eps"], inst["gamma"], inst["dual"])))
    elif which == "extremal":
        for e in extremal_pairs(12, o.seed):
            for eps in eps_levels:
                runs.append((f"{e.name}@{eps}", lambda e=e, eps=eps: extremal_witness_search(e.L1, e.L2, e.Omega, e.base, eps)))
    else:
        for e in intersection_instances(12, o.seed):
            for g in eps_levels:
                runs.append((f"{e.name}@{g}", lambda e=e, g=g: fuzzy_witness_search(e.Theta1, e.Theta2, e.Omega, e.base, g, g, e.dual)))
    results = {name: fn() for name, fn in runs}
    found = all(r.found for r in results.values())
    return {"searches": results, "allFound": found}, EXIT_HOLDS if found else EXIT_FAILS


def cmd_corpus(args, inst, o):
    from .corpus import write_corpus

    if args.out is None:
        raise UsageError("corpus needs --out DIR")
    names = write_corpus(args.out, args.count, o.seed)
    return {"written": names}, EXIT_HOLDS


COMMANDS = {
    "coderivative": cmd_coderivative,
    "certify": cmd_certify,
    "estimate": cmd_estimate,
    "verify": cmd_verify,
    "demo": cmd_demo,
    "corpus": cmd_corpus,
}


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    inst = None
    try:
        if args.instance is not None:
            inst = load_instance(args.instance)
        o = _settings(args, inst)
        result, code = COMMANDS[args.command](args, inst, o)
    except OSError as exc:
        print(f"error: cannot read {exc.filename}: {exc.strerror}", file=stderr)
        return EXIT_NOINPUT
    except InstanceError as exc:
        print(f"instance error: {exc}", file=stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (RelcoderError, ValueError) as exc:
        print(f"precondition violated: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_PRECONDITION
    if args.command == "corpus":
        print(f"wrote {len(result['written'])} instances to {args.out}", file=stdout)
        return code
    config = {"command": args.command, "options": {k: getattr(args, k) for k in ("flavor", "property", "rule", "which")
                                                   if hasattr(args, k)},
              "oracle": o, "formatVersion": FORMAT_VERSION}
    report = make_report(inst, args.command, result, o.seed, config)
    text = emit_report(report, args.out)
    if args.out is None:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
