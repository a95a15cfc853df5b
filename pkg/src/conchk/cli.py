"""Command-line surface: check histories, audit the hierarchy, simulate stores.

Exit codes: 0 satisfied / success, 1 violated / not found, 2 unknown (budget),
64 usage errors, 65 unreadable or invalid input files.  All randomized
subcommands take an explicit --seed (default 0); machine-format output is
canonical JSON (sorted keys), so identical invocations are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .checker import DEFAULT_BUDGET, check_history, shrink_history, validate_witness
from .hierarchy import find_separation, model_graph, run_audit
from .histfile import HistoryFileError, format_history, load_history
from .predicates import (
    ParameterError,
    UnknownModelError,
    custom_model,
    evaluate_model,
    list_models,
    resolve_model,
)
from .simulator import (
    StoreConfig,
    WorkloadConfig,
    generate_workload,
    simulate_store_with_stats,
)

EX_OK = 0
EX_VIOLATED = 1
EX_UNKNOWN = 2
EX_USAGE = 64
EX_DATA = 65


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _machine(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _build_parser() -> _Parser:
    parser = _Parser(prog="conchk", description=__doc__)
    parser.add_argument("--version", action="version", version=f"conchk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check a history file against a model")
    p.add_argument("--model", help="registered model name")
    p.add_argument("--predicates", help="comma-separated predicate ids (ad-hoc model)")
    p.add_argument("--input", required=True, help="history file ('-' for stdin)")
    p.add_argument("--delta", type=int, help="staleness window in ticks")
    p.add_argument("--k", dest="k_versions", type=int, help="version-staleness bound K")
    p.add_argument("--ev-slack", type=int, help="eventual-visibility slack")
    p.add_argument("--q-slack", type=int, help="quiescence slack")
    p.add_argument("--rdt", help="replicated data type (default register)")
    p.add_argument("--budget", type=int, default=None,
                   help=f"search node budget (default {DEFAULT_BUDGET}, env CONCHK_BUDGET)")
    p.add_argument("--witness", help="write the witness/report JSON to this file")
    p.add_argument("--format", choices=("human", "machine"), default="human")

    p = sub.add_parser("models", help="list registered models and their predicates")
    p.add_argument("--format", choices=("human", "machine"), default="human")

    p = sub.add_parser("audit", help="audit the model implication hierarchy")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--edge", action="append", default=None,
                   help="audit only WEAK,STRONG (repeatable)")
    p.add_argument("--history-samples", type=int, default=2_000)
    p.add_argument("--report", help="write the report JSON to this file")
    p.add_argument("--dot", help="write the model graph in dot format to this file")
    p.add_argument("--format", choices=("human", "machine"), default="human")

    p = sub.add_parser("separate", help="search for a history telling two models apart")
    p.add_argument("--weak", required=True)
    p.add_argument("--strong", required=True)
    p.add_argument("--budget", type=int, default=40_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-ops", type=int, default=5)

    p = sub.add_parser("simulate", help="generate a history from a simulated store")
    p.add_argument("--mode", required=True,
                   choices=("linearizable", "sequential", "causal", "eventual", "pram"))
    p.add_argument("--procs", type=int, default=2)
    p.add_argument("--ops", type=int, default=8)
    p.add_argument("--objects", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicas", type=int, default=2)
    p.add_argument("--delay-min", type=int, default=1)
    p.add_argument("--delay-max", type=int, default=5)
    p.add_argument("--repl-delay-min", type=int, default=None)
    p.add_argument("--repl-delay-max", type=int, default=None)
    p.add_argument("--anti-entropy", type=int, default=0)
    p.add_argument("--read-fraction", type=float, default=0.5)
    p.add_argument("--think-max", type=int, default=3)
    p.add_argument("--no-sticky", action="store_true",
                   help="spread a client's reads over replicas")

    p = sub.add_parser("shrink", help="minimize a violating history")
    p.add_argument("--model")
    p.add_argument("--predicates", help="comma-separated predicate ids (ad-hoc model)")
    p.add_argument("--input", required=True)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--format", choices=("human", "machine"), default="human")
    return parser


def _load(args):
    if args.input == "-":
        from .histfile import parse_history

        return parse_history(sys.stdin.read(), source="<stdin>")
    return load_history(args.input)


def _resolve_model_args(args):
    if bool(args.model) == bool(args.predicates):
        raise _UsageError("give exactly one of --model or --predicates")
    params = {}
    for key in ("delta", "k_versions", "ev_slack", "q_slack", "rdt"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    if args.model:
        return resolve_model(args.model), params
    preds = tuple(p.strip() for p in args.predicates.split(",") if p.strip())
    return custom_model(preds), params


def _cmd_check(args, out) -> int:
    h = _load(args)
    model, params = _resolve_model_args(args)
    result = check_history(h, model, params=params or None, budget=args.budget)
    payload = result.to_dict()
    if result.satisfied:
        verdict_breakdown = evaluate_model(result.witness, model, result.params)
        payload["predicates"] = {
            k: bool(v) for k, v in sorted(verdict_breakdown.per_predicate.items())
        }
    if args.witness:
        with open(args.witness, "w", encoding="utf-8") as fh:
            fh.write(_machine(payload))
    if args.format == "machine":
        out.write(_machine(payload))
    else:
        out.write(f"model: {model.describe()}\n")
        out.write(f"verdict: {result.verdict} (completeness: {result.completeness})\n")
        out.write(
            f"nodes explored: {result.stats['nodes']}, prunes: {result.stats['prunes']}\n"
        )
        parts = result.witness_parts
        if parts is not None:
            vis, ar, hprime = parts
            out.write(f"witness ar: {ar}\n")
            out.write(f"witness vis: {vis}\n")
            if hprime:
                out.write(f"witness excluded pending: {hprime}\n")
        if result.evidence:
            out.write(f"evidence: {list(result.evidence)}\n")
    return {
        "satisfied": EX_OK,
        "violated": EX_VIOLATED,
        "unknown": EX_UNKNOWN,
    }[result.verdict]


def _cmd_models(args, out) -> int:
    registry = list_models()
    if args.format == "machine":
        payload = {
            name: {
                "predicates": list(m.predicates),
                "params": {k: v for k, v in sorted(m.params.items())},
                "note": m.note,
            }
            for name, m in registry.items()
        }
        out.write(_machine(payload))
    else:
        for name in sorted(registry):
            m = registry[name]
            line = m.describe()
            if m.params:
                fixed = ", ".join(f"{k}={v}" for k, v in sorted(m.params.items()))
                line += f"  [{fixed}]"
            out.write(line + "\n")
    return EX_OK


def _cmd_audit(args, out) -> int:
    edges = None
    if args.edge:
        edges = []
        for spec in args.edge:
            try:
                weak, strong = (s.strip() for s in spec.split(","))
            except ValueError:
                raise _UsageError(f"--edge expects WEAK,STRONG, got {spec!r}") from None
            edges.append((resolve_model(weak).name, resolve_model(strong).name))
    report = run_audit(
        samples=args.samples,
        seed=args.seed,
        edges=edges,
        history_samples=args.history_samples,
    )
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(_machine(report))
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(model_graph().to_dot())
    if args.format == "machine":
        out.write(_machine(report))
    else:
        for e in report["edges"]:
            out.write(
                f"{e['strong']} => {e['weak']}: {e['status']}"
                f" (samples={e['samples']}, hits={e['strong_hits']})\n"
            )
        for e in report["equivalences"]:
            out.write(
                f"history-level {e['strong']} => {e['weak']}: {e['status']}"
                f" (samples={e['samples']}, hits={e['strong_hits']})\n"
            )
        for n in report["session-bundle-vs-pram"]:
            out.write(f"note {n['claim']}: {n['status']} (samples={n['samples']})\n")
    refuted = [e for e in report["edges"] if e["status"] == "refuted"]
    return EX_VIOLATED if refuted else EX_OK


def _cmd_separate(args, out) -> int:
    h = find_separation(
        args.weak, args.strong, budget=args.budget, seed=args.seed, max_ops=args.max_ops
    )
    if h is None:
        sys.stderr.write("no separating history found within budget\n")
        return EX_VIOLATED
    out.write(
        format_history(
            h,
            header=[
                f"separates weak={resolve_model(args.weak).name} "
                f"strong={resolve_model(args.strong).name} seed={args.seed}"
            ],
        )
    )
    return EX_OK


def _cmd_simulate(args, out) -> int:
    store = StoreConfig(
        mode=args.mode,
        replicas=args.replicas,
        delay_min=args.delay_min,
        delay_max=args.delay_max,
        repl_delay_min=args.repl_delay_min,
        repl_delay_max=args.repl_delay_max,
        anti_entropy=args.anti_entropy,
        sticky=not args.no_sticky,
    )
    wl_cfg = WorkloadConfig(
        processes=args.procs,
        objects=args.objects,
        ops=args.ops,
        read_fraction=args.read_fraction,
        think_max=args.think_max,
    )
    workload = generate_workload(wl_cfg, args.seed)
    history, stats = simulate_store_with_stats(store, workload, args.seed)
    header = [
        "conchk simulate "
        + " ".join(
            f"{k}={v}"
            for k, v in sorted(
                {
                    "mode": store.mode,
                    "procs": wl_cfg.processes,
                    "objects": wl_cfg.objects,
                    "ops": wl_cfg.ops,
                    "replicas": store.replicas,
                    "delay_min": store.delay_min,
                    "delay_max": store.delay_max,
                    "repl_delay_min": store.repl_delay_min,
                    "repl_delay_max": store.repl_delay_max,
                    "anti_entropy": store.anti_entropy,
                    "sticky": store.sticky,
                    "read_fraction": wl_cfg.read_fraction,
                    "think_max": wl_cfg.think_max,
                    "seed": args.seed,
                }.items()
            )
        ),
        f"stats max_visibility_lag={stats['max_visibility_lag']}",
    ]
    out.write(format_history(history, header=header))
    return EX_OK


def _cmd_shrink(args, out) -> int:
    h = _load(args)
    model, params = _resolve_model_args(args)
    try:
        shrunk = shrink_history(h, model, params=params or None, budget=args.budget)
    except ValueError as exc:
        sys.stderr.write(f"shrink: {exc}\n")
        return EX_VIOLATED
    out.write(format_history(shrunk, header=[f"shrunk under model={model.name}"]))
    return EX_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EX_USAGE
    out = sys.stdout
    try:
        if args.command == "check":
            return _cmd_check(args, out)
        if args.command == "models":
            return _cmd_models(args, out)
        if args.command == "audit":
            return _cmd_audit(args, out)
        if args.command == "separate":
            return _cmd_separate(args, out)
        if args.command == "simulate":
            return _cmd_simulate(args, out)
        if args.command == "shrink":
            return _cmd_shrink(args, out)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EX_USAGE
    except (UnknownModelError, ParameterError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EX_USAGE
    except HistoryFileError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EX_DATA
    except OSError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EX_DATA


if __name__ == "__main__":
    sys.exit(main())
