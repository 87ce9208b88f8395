"""Command-line entry point: ``twospace analyze | simulate | paradox``.

Exit codes: 0 success, 1 scheme validation failure, 2 I/O or parse error,
3 bad flag, strategy or variant.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from enum import Enum
from fractions import Fraction

from . import __version__
from .adversary import (
    AttackReport,
    Fallback,
    Strategy,
    check_conditions,
    run_strategy,
)
from .montecarlo import DEFAULT_CONFIDENCE, DEFAULT_SEED, SimConfig, simulate_scheme
from .paradox import (
    VARIANT_ALIASES,
    WEEKDAYS,
    TwoChildCondition,
    TwoChildVariant,
    monty_hall,
    read_table,
    simpson_check,
    two_child,
)
from .prob import ProbabilityError, format_rational, parse_rational
from .scheme import (
    SchemeError,
    SchemeInstance,
    input_digest,
    load_scheme_bytes,
    overlap_analysis,
    receiver_success,
    resolve_data_path,
    validate_scheme,
)

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_USAGE = 0, 1, 2, 3
ALL_STRATEGIES = [s.value for s in Strategy]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ProbabilityError:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def dec(r: Fraction) -> str:
    return f"{float(r):.6g}"


def show(r: Fraction) -> str:
    return f"{format_rational(r)} ({dec(r)})"


# ---------------------------------------------------------------------------
# serialization


def to_jsonable(obj):
    """Rationals become ``"p/q"`` with a sibling ``<key>_decimal`` approximation."""
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            if isinstance(v, Fraction):
                out[k] = format_rational(v)
                out[f"{k}_decimal"] = float(v)
            else:
                out[k] = to_jsonable(v)
        return out
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, Enum):
        return obj.value
    return obj


def attack_dict(rep: AttackReport) -> dict:
    return {
        "strategy": rep.strategy,
        "P_E": rep.p_e,
        "formula_prediction": rep.formula_prediction,
        "formula_gap": rep.formula_gap,
        "notes": list(rep.notes),
        "context": dict(sorted(rep.context.items())),
        "per_transcript": {
            ct: {"mass": t.mass, "eve_correct": t.eve_correct, **dict(sorted(t.diagnostics.items()))}
            for ct, t in rep.per_transcript.items()
        },
    }


def build_report(
    s: SchemeInstance,
    raw: bytes,
    strategies: list[str],
    fallback: str = "abstain",
    lam: Fraction = Fraction(1, 2),
) -> dict:
    """The full analysis as a plain dict (rationals still Fractions)."""
    ov = overlap_analysis(s)
    p_b, per = receiver_success(s)
    attacks = [attack_dict(run_strategy(s, st, fallback, lam)) for st in strategies]
    try:
        cc = check_conditions(s)
        conditions = {
            "q2_gt_q1": cc.q2_gt_q1,
            "sum_gt_1": cc.sum_gt_1,
            "tau1_lt_1": cc.tau1_lt_1,
            "engagement_gt_1": cc.engagement_gt_1,
            "verdict_PE_lt_PB": cc.verdict_PE_lt_PB,
        }
    except ValueError as exc:
        conditions = {"error": str(exc)}
    return {
        "tool": "twospace",
        "tool_version": __version__,
        "scheme": s.name,
        "input_digest": input_digest(raw),
        "validation": [],
        "space_prior": s.space_prior,
        "overlap": {
            "S12": ov.S12,
            "S21": ov.S21,
            "partial_overlap_keys": ov.partial_overlap_keys,
            "q1": ov.q1,
            "q2": ov.q2,
            "tau1": ov.tau1,
            "tau2": ov.tau2,
            "tau1_ct": ov.tau1_ct,
            "tau2_ct": ov.tau2_ct,
            "notes": list(ov.notes),
        },
        "receiver": {"P_B": p_b, "per_transcript": {ct: {"p": v} for ct, v in per.items()}},
        "attacks": attacks,
        "conditions": conditions,
    }


def _flatten(prefix: str, obj, rows: list):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, (list, tuple)) and obj and isinstance(obj[0], dict):
        for item in obj:
            _flatten(f"{prefix}.{item.get('strategy', '?')}", item, rows)
    elif isinstance(obj, (list, tuple, set, frozenset)):
        rows.append((prefix, ";".join(sorted(str(x) for x in obj)), ""))
    elif isinstance(obj, Fraction):
        rows.append((prefix, format_rational(obj), repr(float(obj))))
    elif obj is None:
        rows.append((prefix, "", ""))
    elif isinstance(obj, bool):
        rows.append((prefix, "true" if obj else "false", ""))
    else:
        rows.append((prefix, str(obj), ""))


def render_csv(report: dict) -> str:
    rows: list = []
    _flatten("", report, rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["field", "value", "decimal"])
    w.writerows(rows)
    return buf.getvalue()


def render_json(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2) + "\n"


def _opt(r) -> str:
    return "undefined" if r is None else show(r)


def render_human(report: dict) -> str:
    ov = report["overlap"]
    lines = [
        f"twospace {report['tool_version']}",
        f"scheme: {report['scheme']}  ({report['input_digest']})",
        f"space prior rho: {show(report['space_prior'])}",
        "",
        "overlap:",
        f"  S12 = {{{', '.join(sorted(ov['S12']))}}}   S21 = {{{', '.join(sorted(ov['S21']))}}}",
        f"  q1 = {show(ov['q1'])}   q2 = {show(ov['q2'])}",
        f"  tau1 = {_opt(ov['tau1'])}   tau2 = {_opt(ov['tau2'])}",
    ]
    lines += [f"  note: {n}" for n in ov["notes"]]
    rx = report["receiver"]
    lines += ["", f"receiver: P_B = {show(rx['P_B'])}"]
    lines += [f"  p({ct}) = {show(v['p'])}" for ct, v in rx["per_transcript"].items()]
    for a in report["attacks"]:
        lines += ["", f"attack {a['strategy']}: P_E = {show(a['P_E'])}"]
        if a["formula_prediction"] is not None:
            lines.append(
                f"  formula = {show(a['formula_prediction'])}   gap = {show(a['formula_gap'])}"
            )
        for k, v in a["context"].items():
            lines.append(f"  {k} = {show(v) if isinstance(v, Fraction) else v}")
        for ct, t in a["per_transcript"].items():
            extras = "  ".join(
                f"{k}={format_rational(v) if isinstance(v, Fraction) else v}"
                for k, v in t.items()
                if k not in ("mass", "eve_correct")
            )
            lines.append(
                f"  {ct}: Pr={format_rational(t['mass'])}  eve={format_rational(t['eve_correct'])}"
                + (f"  {extras}" if extras else "")
            )
        lines += [f"  note: {n}" for n in a["notes"]]
    lines += ["", "conditions:"]
    lines += [f"  {k}: {v}" for k, v in report["conditions"].items()]
    return "\n".join(lines) + "\n"


RENDER = {"human": render_human, "json": render_json, "csv": render_csv}


# ---------------------------------------------------------------------------
# commands


def _load(path):
    s, raw = load_scheme_bytes(path)
    violations = validate_scheme(s)
    return s, raw, violations


def _strategies(name: str) -> list[str]:
    return ALL_STRATEGIES if name == "all" else [name]


def cmd_analyze(args) -> int:
    s, raw, violations = _load(args.scheme)
    if violations:
        for v in violations:
            print(f"violation: {v}", file=sys.stderr)
        if args.format == "json":
            sys.stdout.write(json.dumps({"scheme": s.name, "validation": violations}, indent=2) + "\n")
        return EXIT_INVALID
    report = build_report(s, raw, _strategies(args.strategy), args.fallback, args.lam)
    sys.stdout.write(RENDER[args.format](report))
    return EXIT_OK


def cmd_simulate(args) -> int:
    s, _, violations = _load(args.scheme)
    if violations:
        for v in violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_INVALID
    results = []
    for st in _strategies(args.strategy):
        cfg = SimConfig(args.trials, args.seed, st, args.confidence, args.fallback, args.lam)
        r = simulate_scheme(s, cfg)
        results.append(
            {
                "strategy": st,
                "trials": r.trials,
                "seed": cfg.seed,
                "hits_P_B": r.hits_b,
                "hits_P_E": r.hits_e,
                "confidence": cfg.confidence,
                "hoeffding_radius": r.hoeffding_radius,
                "empirical_P_B": r.empirical_pb,
                "exact_P_B": r.exact_pb,
                "agrees_P_B": r.agrees_pb,
                "empirical_P_E": r.empirical_pe,
                "exact_P_E": r.exact_pe,
                "agrees_P_E": r.agrees_pe,
                "verdict": "agree" if r.agrees_with_exact else "disagree",
            }
        )
    doc = {"tool": "twospace", "tool_version": __version__, "scheme": s.name, "simulations": results}
    if args.format == "json":
        sys.stdout.write(render_json(doc))
    elif args.format == "csv":
        sys.stdout.write(render_csv(doc))
    else:
        out = [f"twospace {__version__}", f"scheme: {s.name}"]
        for r in results:
            out += [
                "",
                f"strategy: {r['strategy']}  trials: {r['trials']}  seed: {r['seed']}"
                f"  confidence: {format_rational(r['confidence'])}",
                f"hoeffding radius: {r['hoeffding_radius']:.6g}",
                f"P_B  empirical {r['hits_P_B']}/{r['trials']} ({dec(r['empirical_P_B'])})"
                f"  exact {show(r['exact_P_B'])}  {'agree' if r['agrees_P_B'] else 'disagree'}",
                f"P_E  empirical {r['hits_P_E']}/{r['trials']} ({dec(r['empirical_P_E'])})"
                f"  exact {show(r['exact_P_E'])}  {'agree' if r['agrees_P_E'] else 'disagree'}",
                f"verdict: {r['verdict']}",
            ]
        sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_paradox(args) -> int:
    if args.puzzle == "monty-hall":
        value = monty_hall(args.doors, args.strategy)
        result = {"puzzle": "monty-hall", "doors": args.doors, "strategy": args.strategy, "value": value}
        text = show(value)
    elif args.puzzle == "two-child":
        if args.variant in VARIANT_ALIASES:
            variant, day = VARIANT_ALIASES[args.variant]
            day = args.day or day
        else:
            variant, day = TwoChildVariant(args.variant), args.day
            if variant.uses_day and day is None:
                day = "Tuesday"
        try:
            value = two_child(TwoChildCondition(variant, day))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        result = {"puzzle": "two-child", "variant": variant.value, "day": day, "value": value}
        text = show(value)
    else:
        path = resolve_data_path(args.table)
        try:
            strata = read_table(path)
        except OSError as exc:
            raise SchemeError(f"cannot read {args.table}: {exc.strerror}") from None
        except (ValueError, KeyError, TypeError) as exc:
            raise SchemeError(f"{args.table}: {exc}") from None
        rep = simpson_check(strata)
        result = {
            "puzzle": "simpson",
            "per_stratum": rep.per_stratum,
            "aggregate": rep.aggregate,
            "reversal": rep.reversal,
            "rates": {k: {"A": a, "B": b} for k, (a, b) in rep.rates.items()},
        }
        lines = []
        for name, (a, b) in rep.rates.items():
            who = rep.per_stratum.get(name, rep.aggregate)
            lines.append(f"{name}: A {show(a)} vs B {show(b)} -> {who}")
        lines.append(f"reversal: {'true' if rep.reversal else 'false'}")
        text = "\n".join(lines)
    if args.format == "json":
        sys.stdout.write(render_json(result))
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="twospace", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"twospace {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, with_all=True):
        sp.add_argument("scheme", help="scheme JSON file (shipped names like toy-v1.json also work)")
        sp.add_argument("--format", choices=["human", "json", "csv"], default="human")
        sp.add_argument(
            "--strategy",
            choices=(["all"] if with_all else []) + ALL_STRATEGIES,
            default="all" if with_all else Strategy.ASSUME_S2.value,
        )
        sp.add_argument("--fallback", choices=[f.value for f in Fallback], default="abstain")
        sp.add_argument("--lambda", dest="lam", type=_rational_arg, default=Fraction(1, 2))

    a = sub.add_parser("analyze", help="exact analysis of a scheme file")
    common(a)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="seeded Monte Carlo run against the exact values")
    common(s)
    s.set_defaults(strategy=Strategy.ASSUME_S2.value)
    s.add_argument("--trials", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--confidence", type=_rational_arg, default=DEFAULT_CONFIDENCE)
    s.set_defaults(func=cmd_simulate)

    x = sub.add_parser("paradox", help="worked conditional-probability puzzles")
    xs = x.add_subparsers(dest="puzzle", required=True, parser_class=_Parser)
    mh = xs.add_parser("monty-hall")
    mh.add_argument("--doors", type=int, default=3)
    mh.add_argument("--strategy", choices=["stay", "switch"], default="switch")
    tc = xs.add_parser("two-child")
    tc.add_argument(
        "--variant",
        choices=[v.value for v in TwoChildVariant] + sorted(VARIANT_ALIASES),
        default=TwoChildVariant.YOUNGER_BOY.value,
    )
    tc.add_argument("--day", choices=WEEKDAYS)
    sm = xs.add_parser("simpson")
    sm.add_argument("--table", default="kidney.csv")
    for sp in (mh, tc, sm):
        sp.add_argument("--format", choices=["human", "json"], default="human")
    x.set_defaults(func=cmd_paradox)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    lam = getattr(args, "lam", None)
    if lam is not None and not 0 <= lam <= 1:
        print("twospace: error: --lambda must lie in [0, 1]", file=sys.stderr)
        return EXIT_USAGE
    conf = getattr(args, "confidence", None)
    if conf is not None and not 0 < conf < 1:
        print("twospace: error: --confidence must lie in (0, 1)", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "trials", 1) < 1:
        print("twospace: error: --trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "doors", 3) < 3:
        print("twospace: error: --doors must be >= 3", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except SchemeError as exc:
        print(f"twospace: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except UsageError as exc:
        print(f"twospace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
