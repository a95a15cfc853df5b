"""Consistency predicates over concrete abstract executions, and the model registry.

Every predicate takes an execution (history, vis, ar) plus parameters and is a
pure boolean condition; a model is a named conjunction of predicates.  The
evaluators here are the reference semantics: written with explicit pair sets,
close to the defining formulas.  Hot paths (oracle sweeps, checker scans) use
the bit-packed kernels, which are tested against these.

Evaluators return the lexicographically smallest violating evidence (a tuple
of operation ids) or None, so diagnostics are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .history import AbstractExecution, Relation, happens_before, per_object_happens_before
from .rdt import rdt_spec, rval_violation, seq_rval_violation

Evidence = Optional[tuple]

SINGLE_ORDER = "SingleOrder"
REAL_TIME = "RealTime"
REAL_TIME_WRITES = "RealTimeWrites"
REAL_TIME_WW = "RealTimeWW"
K_REAL_TIME_READS = "K-RealTimeReads"
K_REAL_TIME = "K-RealTime"
PRAM = "PRAM"
MONOTONIC_READS = "MonotonicReads"
READ_YOUR_WRITES = "ReadYourWrites"
MONOTONIC_WRITES = "MonotonicWrites"
WRITES_FOLLOW_READS = "WritesFollowReads"
CAUSAL_VISIBILITY = "CausalVisibility"
CAUSAL_ARBITRATION = "CausalArbitration"
STRONG_CONVERGENCE = "StrongConvergence"
NO_CIRCULAR_CAUSALITY = "NoCircularCausality"
EVENTUAL_VISIBILITY = "EventualVisibility"
QUIESCENT = "Quiescent"
TIMED_VISIBILITY = "TimedVisibility"
NO_JOIN = "NoJoin"
AT_MOST_ONE_JOIN = "AtMostOneJoin"
PER_OBJECT_PRAM = "PerObjectPRAM"
PER_OBJECT_SINGLE_ORDER = "PerObjectSingleOrder"
RVAL = "RVal"
SEQ_RVAL = "SeqRVal"

ALL_PREDICATES = (
    SINGLE_ORDER,
    REAL_TIME,
    REAL_TIME_WRITES,
    REAL_TIME_WW,
    K_REAL_TIME_READS,
    K_REAL_TIME,
    PRAM,
    MONOTONIC_READS,
    READ_YOUR_WRITES,
    MONOTONIC_WRITES,
    WRITES_FOLLOW_READS,
    CAUSAL_VISIBILITY,
    CAUSAL_ARBITRATION,
    STRONG_CONVERGENCE,
    NO_CIRCULAR_CAUSALITY,
    EVENTUAL_VISIBILITY,
    QUIESCENT,
    TIMED_VISIBILITY,
    NO_JOIN,
    AT_MOST_ONE_JOIN,
    PER_OBJECT_PRAM,
    PER_OBJECT_SINGLE_ORDER,
    RVAL,
    SEQ_RVAL,
)


class UnknownModelError(ValueError):
    pass


class ParameterError(ValueError):
    pass


#: Stable public parameter vocabulary (also the CLI flag names).
DEFAULT_PARAMS: dict = {
    "delta": 0,  # staleness window, ticks
    "k_versions": 1,  # version-staleness bound K
    "ev_slack": 0,  # eventual-visibility slack per (op, session)
    "q_slack": 0,  # quiescence slack per session
    "rdt": "register",
    "causal_scope": "global",  # or "object": happens-before per object
    "k_mode": "intent",  # or "literal": the raw quantifier form, kept for audits
}


def merge_params(model: "ModelDefinition", overrides: Optional[Mapping] = None) -> dict:
    params = dict(DEFAULT_PARAMS)
    params.update(model.params)
    if overrides:
        unknown = set(overrides) - set(DEFAULT_PARAMS)
        if unknown:
            raise ParameterError(f"unknown parameters: {sorted(unknown)}")
        params.update(overrides)
    if params["k_versions"] < 1:
        raise ParameterError("k_versions must be >= 1")
    if params["ev_slack"] < 0 or params["q_slack"] < 0 or params["delta"] < 0:
        raise ParameterError("delta, ev_slack and q_slack must be >= 0")
    return params


# ---------------------------------------------------------------------------
# individual predicate evaluators
# ---------------------------------------------------------------------------


def _subset_violation(rel: Relation, target: Relation) -> Evidence:
    diff = rel.pairs - target.pairs
    return min(diff) if diff else None


def _single_order_violation(a: AbstractExecution, per_object: bool) -> Evidence:
    """vis = ar minus pairs sourced at some set of never-returning operations.

    Operation by operation: either its (same-object, for the per-object
    variant) vis successors coincide with its ar successors, or it has no such
    vis successors and never returned (then it can sit in the excluded set).
    """
    h = a.history
    for op in h.ops:
        succ_vis = a.vis.image((op.id,))
        succ_ar = a.ar.image((op.id,))
        if per_object:
            same = frozenset(i for i in h.ids if h.by_id[i].obj == op.obj)
            succ_vis &= same
            succ_ar &= same
        if succ_vis == succ_ar:
            continue
        if not succ_vis and not op.returned:
            continue
        diff = succ_vis ^ succ_ar
        return (op.id, min(diff))
    return None


def eval_single_order(a: AbstractExecution) -> bool:
    return _single_order_violation(a, per_object=False) is None


def _k_staleness_violation(
    a: AbstractExecution, targets: frozenset[int], k: int, mode: str
) -> Evidence:
    """Version-staleness core shared by K-RealTimeReads / K-RealTime.

    mode "intent": a returned write must be arbitrated before a later target
    unless at least K-1 distinct writes are arbitrated after it and returned
    before the target started; K=1 degrades to plain real-time ordering of
    writes before the targets.  mode "literal" evaluates the raw quantifier
    shape, under which any small witness set of intervening writes forces the
    ordering and K=1 is vacuous.
    """
    h = a.history
    rb, ar = h.rb, a.ar
    writes = sorted(h.update_ids)
    out = None
    for w in writes:
        for b in sorted(targets):
            if (w, b) not in rb.pairs or (w, b) in ar.pairs:
                continue
            intervening = sum(
                1
                for pw in writes
                if pw != w and (w, pw) in ar.pairs and (pw, b) in rb.pairs
            )
            if mode == "literal":
                bad = k >= 2 and intervening >= 1
            else:
                bad = k == 1 or intervening < k - 1
            if bad:
                cand = (w, b)
                out = cand if out is None else min(out, cand)
    return out


def eval_realtime_family(a: AbstractExecution, variant: str, params=None) -> bool:
    """Real-time ordering constraints on arbitration, from full rb down to K-staleness."""
    params = params or DEFAULT_PARAMS
    return _realtime_violation(a, variant, params) is None


def _realtime_violation(a: AbstractExecution, variant: str, params) -> Evidence:
    h = a.history
    if variant == REAL_TIME:
        return _subset_violation(h.rb, a.ar)
    if variant == REAL_TIME_WRITES:
        return _subset_violation(h.project(h.rb, "wr", "op"), a.ar)
    if variant == REAL_TIME_WW:
        return _subset_violation(h.project(h.rb, "wr", "wr"), a.ar)
    k = params["k_versions"]
    mode = params["k_mode"]
    if variant == K_REAL_TIME_READS:
        return _k_staleness_violation(a, h.read_ids, k, mode)
    if variant == K_REAL_TIME:
        return _k_staleness_violation(a, frozenset(h.ids), k, mode)
    raise ParameterError(f"unknown real-time variant {variant!r}")


def eval_session_family(a: AbstractExecution, guarantee: str) -> bool:
    """The session guarantees: exact subset tests over vis / ar."""
    return _session_violation(a, guarantee) is None


def _session_violation(a: AbstractExecution, guarantee: str) -> Evidence:
    h = a.history
    so = h.so
    if guarantee == PRAM:
        return _subset_violation(so, a.vis)
    if guarantee == MONOTONIC_READS:
        comp = a.vis.compose(h.project(so, "rd", "rd"))
        return _subset_violation(comp, a.vis)
    if guarantee == READ_YOUR_WRITES:
        return _subset_violation(h.project(so, "wr", "rd"), a.vis)
    if guarantee == MONOTONIC_WRITES:
        return _subset_violation(h.project(so, "wr", "wr"), a.ar)
    if guarantee == WRITES_FOLLOW_READS:
        comp = a.vis.compose(h.project(so, "rd", "wr"))
        return _subset_violation(comp, a.ar)
    raise ParameterError(f"unknown session guarantee {guarantee!r}")


def _hb(a: AbstractExecution, scope: str) -> Relation:
    return per_object_happens_before(a) if scope == "object" else happens_before(a)


def eval_causal_family(a: AbstractExecution, variant: str, scope: str = "global") -> bool:
    return _causal_violation(a, variant, scope) is None


def _causal_violation(a: AbstractExecution, variant: str, scope: str) -> Evidence:
    hb = _hb(a, scope)
    if variant == CAUSAL_VISIBILITY:
        return _subset_violation(hb, a.vis)
    if variant == CAUSAL_ARBITRATION:
        return _subset_violation(hb, a.ar)
    raise ParameterError(f"unknown causal variant {variant!r}")


def _strong_convergence_violation(a: AbstractExecution) -> Evidence:
    # Register semantics are per object, so reads are compared per object and
    # against their same-object visible update sets.
    h = a.history
    reads = [op for op in h.ops if op.is_read and op.returned]
    seen: dict[tuple, tuple] = {}
    for op in sorted(reads, key=lambda o: o.id):
        vis_writes = frozenset(
            i
            for i in a.vis.preimage((op.id,))
            if h.by_id[i].is_update and h.by_id[i].obj == op.obj
        )
        key = (op.obj, vis_writes)
        if key in seen:
            prev_id, prev_oval = seen[key]
            if prev_oval != op.oval:
                return (prev_id, op.id)
        else:
            seen[key] = (op.id, op.oval)
    return None


def _no_circular_causality_violation(a: AbstractExecution) -> Evidence:
    hb = happens_before(a)
    for i in sorted(a.history.ids):
        if (i, i) in hb.pairs:
            return (i, i)
    return None


def _eventual_visibility_violation(a: AbstractExecution, slack: int) -> Evidence:
    h = a.history
    for op in h.ops:
        for session in h.sessions:
            missed = [
                b
                for b in session
                if (op.id, b) in h.rb.pairs and (op.id, b) not in a.vis.pairs
            ]
            if len(missed) > slack:
                return (op.id, min(missed))
    return None


def _quiescent_violation(a: AbstractExecution, q: int, rdt_name: str) -> Evidence:
    """Some total order over all updates explains almost every session.

    Only the resulting per-object outcome matters to the data types here, so
    the order search reduces to choosing which returning update lands last on
    each object.
    """
    from .history import BOTTOM
    import itertools

    h = a.history
    objs = sorted({op.obj for op in h.ops})
    spec = rdt_spec(rdt_name)
    choices = []
    for obj in objs:
        if rdt_name == "counter":
            choices.append([sum(1 for o in h.ops if o.type == "inc" and o.obj == obj)])
            continue
        finals = sorted(
            {o.ival for o in h.ops if o.is_update and o.returned and o.obj == obj},
            key=repr,
        )
        choices.append(finals if finals else [BOTTOM])
    best_evidence = None
    for combo in itertools.product(*choices):
        outcome = dict(zip(objs, combo))
        worst = None
        for session in h.sessions:
            bad = [
                i
                for i in session
                if h.by_id[i].is_read
                and h.by_id[i].returned
                and h.by_id[i].oval != outcome[h.by_id[i].obj]
            ]
            if len(bad) > q:
                worst = (min(bad), min(bad))
                break
        if worst is None:
            return None
        if best_evidence is None or worst < best_evidence:
            best_evidence = worst
    return best_evidence


def eval_timed_visibility(a: AbstractExecution, delta: int) -> bool:
    return _timed_visibility_violation(a, delta) is None


def _timed_visibility_violation(a: AbstractExecution, delta: int) -> Evidence:
    # A returned update must be visible to every distinct operation starting
    # at least delta ticks after it returned.
    h = a.history
    for w in sorted(h.update_ids):
        wo = h.by_id[w]
        if not wo.returned:
            continue
        for b in sorted(h.ids):
            if b == w:
                continue
            if h.by_id[b].stime >= wo.rtime + delta and (w, b) not in a.vis.pairs:
                return (w, b)
    return None


def _so_descendants(h, op_id: int) -> frozenset[int]:
    # reflexive closure of session order from op_id
    out = {op_id}
    out.update(h.so.image((op_id,)))
    return frozenset(out)


def eval_fork_family(a: AbstractExecution, variant: str) -> bool:
    return _fork_violation(a, variant) is None


def _fork_violation(a: AbstractExecution, variant: str) -> Evidence:
    """Forked views (arbitrated but invisible cross-session pairs) must not rejoin.

    NoJoin forbids any visibility between the session descendants of a forked
    pair; AtMostOneJoin allows one common descendant on each side.
    """
    h = a.history
    forked = sorted(
        (x, y)
        for (x, y) in a.ar.pairs - a.vis.pairs
        if h.by_id[x].proc != h.by_id[y].proc
    )
    for ai, aj in forked:
        di = _so_descendants(h, ai)
        dj = _so_descendants(h, aj)
        if variant == NO_JOIN:
            joins = sorted(
                (x, y)
                for x, y in a.vis.pairs
                if (x in di and y in dj) or (x in dj and y in di)
            )
            if joins:
                return joins[0]
        elif variant == AT_MOST_ONE_JOIN:
            left = {x for x in di if any((x, y) in a.vis.pairs for y in dj)}
            right = {y for y in dj if any((y, x) in a.vis.pairs for x in di)}
            if len(left) > 1 or len(right) > 1:
                bad = left if len(left) > 1 else right
                return (ai, min(bad))
        else:
            raise ParameterError(f"unknown fork variant {variant!r}")
    return None


def eval_per_object_family(a: AbstractExecution, variant: str) -> bool:
    return _per_object_violation(a, variant) is None


def _per_object_violation(a: AbstractExecution, variant: str) -> Evidence:
    h = a.history
    if variant == PER_OBJECT_PRAM:
        return _subset_violation(h.so.intersect(h.ob), a.vis)
    if variant == PER_OBJECT_SINGLE_ORDER:
        return _single_order_violation(a, per_object=True)
    raise ParameterError(f"unknown per-object variant {variant!r}")


def predicate_violation(pred: str, a: AbstractExecution, params: Mapping) -> Evidence:
    """Dispatch a predicate id to its evaluator; None means it holds."""
    if pred == SINGLE_ORDER:
        return _single_order_violation(a, per_object=False)
    if pred in (REAL_TIME, REAL_TIME_WRITES, REAL_TIME_WW, K_REAL_TIME_READS, K_REAL_TIME):
        return _realtime_violation(a, pred, params)
    if pred in (PRAM, MONOTONIC_READS, READ_YOUR_WRITES, MONOTONIC_WRITES, WRITES_FOLLOW_READS):
        return _session_violation(a, pred)
    if pred in (CAUSAL_VISIBILITY, CAUSAL_ARBITRATION):
        return _causal_violation(a, pred, params["causal_scope"])
    if pred == STRONG_CONVERGENCE:
        return _strong_convergence_violation(a)
    if pred == NO_CIRCULAR_CAUSALITY:
        return _no_circular_causality_violation(a)
    if pred == EVENTUAL_VISIBILITY:
        return _eventual_visibility_violation(a, params["ev_slack"])
    if pred == QUIESCENT:
        return _quiescent_violation(a, params["q_slack"], params["rdt"])
    if pred == TIMED_VISIBILITY:
        return _timed_visibility_violation(a, params["delta"])
    if pred in (NO_JOIN, AT_MOST_ONE_JOIN):
        return _fork_violation(a, pred)
    if pred in (PER_OBJECT_PRAM, PER_OBJECT_SINGLE_ORDER):
        return _per_object_violation(a, pred)
    if pred == RVAL:
        bad = rval_violation(a, rdt_spec(params["rdt"]))
        return None if bad is None else (bad.id, bad.id)
    if pred == SEQ_RVAL:
        bad = seq_rval_violation(a, rdt_spec(params["rdt"]))
        return None if bad is None else (bad.id, bad.id)
    raise UnknownModelError(f"unknown predicate {pred!r}")


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelDefinition:
    """A named conjunction of predicates with the parameters they need."""

    name: str
    predicates: tuple[str, ...]
    params: Mapping = field(default_factory=dict)
    note: str = ""

    def describe(self) -> str:
        return f"{self.name} = " + " ∧ ".join(self.predicates)


@dataclass
class Verdict:
    model: str
    per_predicate: dict
    evidence: dict
    overall: bool


def evaluate_model(a: AbstractExecution, model: "ModelDefinition | str", params=None) -> Verdict:
    """Evaluate every member predicate of the model on the given execution."""
    model = resolve_model(model)
    merged = merge_params(model, params)
    per, evid = {}, {}
    for pred in model.predicates:
        bad = predicate_violation(pred, a, merged)
        per[pred] = bad is None
        if bad is not None:
            evid[pred] = bad
    return Verdict(model.name, per, evid, all(per.values()))


_REGISTRY: dict[str, ModelDefinition] = {}


def _register(name, predicates, params=None, note=""):
    _REGISTRY[name] = ModelDefinition(name, tuple(predicates), params or {}, note)


_register("linearizability", (SINGLE_ORDER, REAL_TIME, RVAL))
_register("regular", (SINGLE_ORDER, REAL_TIME_WRITES, RVAL))
_register("safe", (SINGLE_ORDER, REAL_TIME_WRITES, SEQ_RVAL))
_register("sequential", (SINGLE_ORDER, PRAM, RVAL))
_register("pram", (PRAM,))
_register("monotonic-reads", (MONOTONIC_READS,))
_register("read-your-writes", (READ_YOUR_WRITES,))
_register("monotonic-writes", (MONOTONIC_WRITES,))
_register("writes-follow-reads", (WRITES_FOLLOW_READS,))
_register("causality", (CAUSAL_VISIBILITY, CAUSAL_ARBITRATION, RVAL))
_register("causal-plus", (CAUSAL_VISIBILITY, CAUSAL_ARBITRATION, RVAL, STRONG_CONVERGENCE))
_register("real-time-causality", (CAUSAL_VISIBILITY, CAUSAL_ARBITRATION, RVAL, REAL_TIME))
_register("eventual", (EVENTUAL_VISIBILITY, NO_CIRCULAR_CAUSALITY, RVAL))
_register(
    "strong-eventual",
    (EVENTUAL_VISIBILITY, NO_CIRCULAR_CAUSALITY, RVAL, STRONG_CONVERGENCE),
)
_register("quiescent", (QUIESCENT,))
_register("timed-visibility", (TIMED_VISIBILITY,))
_register("timed-causality", (CAUSAL_VISIBILITY, CAUSAL_ARBITRATION, RVAL, TIMED_VISIBILITY))
_register("timed-linearizability", (SINGLE_ORDER, TIMED_VISIBILITY, RVAL))
_register("prefix-sequential", (SINGLE_ORDER, MONOTONIC_WRITES, RVAL))
_register("prefix-linearizable", (SINGLE_ORDER, REAL_TIME_WW, RVAL))
_register("k-linearizability", (SINGLE_ORDER, REAL_TIME_WW, K_REAL_TIME_READS, RVAL))
_register("fork-linearizability", (PRAM, REAL_TIME, NO_JOIN, RVAL))
_register("fork-star", (READ_YOUR_WRITES, REAL_TIME, AT_MOST_ONE_JOIN, RVAL))
_register("fork-sequential", (PRAM, NO_JOIN, RVAL))
_register(
    "weak-fork-linearizability",
    (PRAM, K_REAL_TIME, AT_MOST_ONE_JOIN, RVAL),
    params={"k_versions": 2},
    note="version-staleness bound fixed at two",
)
_register("per-object-pram", (PER_OBJECT_PRAM,))
_register("per-object-sequential", (PER_OBJECT_SINGLE_ORDER, PER_OBJECT_PRAM, RVAL))
_register("processor", (PER_OBJECT_SINGLE_ORDER, PRAM, RVAL))
_register(
    "per-object-causal",
    (CAUSAL_VISIBILITY, CAUSAL_ARBITRATION, RVAL),
    params={"causal_scope": "object"},
    note="happens-before computed per object",
)


def list_models() -> dict[str, ModelDefinition]:
    """The full model registry, name -> definition."""
    return dict(_REGISTRY)


def resolve_model(model: "ModelDefinition | str") -> ModelDefinition:
    if isinstance(model, ModelDefinition):
        return model
    name = model.strip().lower().replace("_", "-")
    if name in _REGISTRY:
        return _REGISTRY[name]
    raise UnknownModelError(f"unknown model {model!r}; see the models listing")


def custom_model(predicates, params=None, name=None) -> ModelDefinition:
    """Ad-hoc conjunction of predicate ids (for audits and custom checks)."""
    preds = tuple(predicates)
    for p in preds:
        if p not in ALL_PREDICATES:
            raise UnknownModelError(f"unknown predicate {p!r}")
    return ModelDefinition(name or "+".join(preds), preds, params or {})
