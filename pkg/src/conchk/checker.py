"""Decide whether some abstract execution extending a history satisfies a model.

The search works in a bit-packed index space: operations are indexed in
(stime, id) order and a relation is one integer with pair (i, j) at bit
i*stride + j.  Histories of up to eight operations use stride 8 and the
numba kernels; larger ones use stride n with plain Python integers (same
code, slower arithmetic).

Two candidate spaces cover the registry:

* single-order models (containing SingleOrder or PerObjectSingleOrder):
  visibility is a function of the arbitration order and a choice of excluded
  never-returning operations, so candidates are (order, exclusion) pairs,
  enumerated lexicographically by (stime, id).

* everything else ("reads-from" mode): visibility grows from model-mandated
  edges (session order, timed edges, returns-before for eventual visibility)
  plus one reads-from choice per value-constrained read, closed under the
  model's closure rules; arbitration is a linear extension of the edges the
  model and the chosen reads force.  Arbitration-sensitive predicates (fork
  joins, version staleness) get full extension enumeration instead.

A Satisfied verdict is always produced by evaluating the complete model on
the witness candidate.  A Violated verdict carries a completeness flag:
"exhaustive" when the searched space provably covers every satisfying
execution (single-order modes; reads-from when all predicates have
visibility-monotone obligations), "restricted" otherwise.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Optional

from . import kernels
from .history import AbstractExecution, History, all_linear_extensions, execution
from .kernels import KERNEL_BITS, pack_history
from .predicates import (
    AT_MOST_ONE_JOIN,
    CAUSAL_ARBITRATION,
    CAUSAL_VISIBILITY,
    EVENTUAL_VISIBILITY,
    K_REAL_TIME,
    K_REAL_TIME_READS,
    MONOTONIC_READS,
    MONOTONIC_WRITES,
    NO_CIRCULAR_CAUSALITY,
    NO_JOIN,
    PER_OBJECT_PRAM,
    PER_OBJECT_SINGLE_ORDER,
    PRAM,
    QUIESCENT,
    READ_YOUR_WRITES,
    REAL_TIME,
    REAL_TIME_WRITES,
    REAL_TIME_WW,
    RVAL,
    SEQ_RVAL,
    SINGLE_ORDER,
    STRONG_CONVERGENCE,
    TIMED_VISIBILITY,
    WRITES_FOLLOW_READS,
    ModelDefinition,
    evaluate_model,
    merge_params,
    resolve_model,
)

DEFAULT_BUDGET = int(os.environ.get("CONCHK_BUDGET", "200000"))

SATISFIED = "satisfied"
VIOLATED = "violated"
UNKNOWN = "unknown"

EXHAUSTIVE = "exhaustive"
RESTRICTED = "restricted"
BUDGET = "budget"

_KERNEL_PREDS = frozenset(KERNEL_BITS)

#: predicates whose obligations only grow with visibility: minimal-visibility
#: candidates are complete for satisfiability, so Violated is exhaustive
_MONOTONE_SAFE = frozenset(
    {
        PRAM,
        MONOTONIC_READS,
        READ_YOUR_WRITES,
        MONOTONIC_WRITES,
        WRITES_FOLLOW_READS,
        CAUSAL_VISIBILITY,
        CAUSAL_ARBITRATION,
        RVAL,
        SEQ_RVAL,
        PER_OBJECT_PRAM,
        NO_CIRCULAR_CAUSALITY,
        REAL_TIME,
        REAL_TIME_WRITES,
        REAL_TIME_WW,
        TIMED_VISIBILITY,
        QUIESCENT,
    }
)

_AR_SENSITIVE = frozenset({NO_JOIN, AT_MOST_ONE_JOIN, K_REAL_TIME, K_REAL_TIME_READS})


# ---------------------------------------------------------------------------
# stride-generic packed space
# ---------------------------------------------------------------------------


class Space:
    """History packed at a given stride, with the masks the search needs."""

    def __init__(self, h: History):
        n = len(h)
        self.h = h
        self.n = n
        self.st = 8 if n <= 8 else n
        st = self.st
        order = sorted(h.ops, key=lambda o: (o.stime, o.id))
        self.ids = tuple(op.id for op in order)
        self.ops = order
        idx = {op.id: k for k, op in enumerate(order)}
        self.index_of = idx

        def rel_of(pairs):
            r = 0
            for a, b in pairs:
                r |= 1 << (idx[a] * st + idx[b])
            return r

        self.rb = rel_of(h.rb.pairs)
        self.so = rel_of(h.so.pairs)
        self.ob = rel_of(h.ob.pairs)
        self.wrmask = sum(1 << k for k, op in enumerate(order) if op.is_update)
        self.retmask = sum(1 << k for k, op in enumerate(order) if op.returned)
        self.full = (1 << n) - 1
        self.objwr = [0] * n
        self.match = [0] * n
        self.bottom = 0
        self.rvalmask = 0
        self.seqmask = 0
        self.stime = [op.stime for op in order]
        self.rtime = [op.rtime if op.returned else -1 for op in order]
        procs = sorted({op.proc for op in h.ops})
        objs = sorted({op.obj for op in h.ops})
        self.proc = [procs.index(op.proc) for op in order]
        self.obj = [objs.index(op.obj) for op in order]
        self.nproc = len(procs)
        from .history import BOTTOM

        for k, op in enumerate(order):
            ow = mm = 0
            concurrent = False
            for j, other in enumerate(order):
                if j == k or not other.is_update or other.obj != op.obj:
                    continue
                if other.returned:
                    ow |= 1 << j
                    if op.is_read and op.returned and other.ival == op.oval:
                        mm |= 1 << j
                if not (self.rb >> (st * k + j)) & 1 and not (self.rb >> (st * j + k)) & 1:
                    concurrent = True
            self.objwr[k] = ow
            self.match[k] = mm
            if op.is_read and op.returned:
                self.rvalmask |= 1 << k
                if op.oval is BOTTOM:
                    self.bottom |= 1 << k
                if not concurrent:
                    self.seqmask |= 1 << k

        if n <= 8:
            self.packed = pack_history(h)
        else:
            self.packed = None

    # -- generic bit algebra at this stride ---------------------------------

    def row(self, rel, i):
        return (rel >> (self.st * i)) & self.full

    def col(self, rel, j):
        m = 0
        for i in range(self.n):
            if (rel >> (self.st * i + j)) & 1:
                m |= 1 << i
        return m

    def expand(self, mask):
        r = 0
        for i in range(self.n):
            if (mask >> i) & 1:
                r |= self.full << (self.st * i)
        return r & self.nondiag

    def colsel(self, mask):
        r = 0
        for i in range(self.n):
            r |= mask << (self.st * i)
        return r & self.nondiag

    @property
    def nondiag(self):
        nd = getattr(self, "_nondiag", None)
        if nd is None:
            nd = 0
            for i in range(self.n):
                nd |= self.full << (self.st * i)
            nd ^= sum(1 << (self.st * i + i) for i in range(self.n))
            self._nondiag = nd
        return nd

    def closure(self, rel):
        for k in range(self.n):
            rowk = self.row(rel, k)
            for i in range(self.n):
                if (rel >> (self.st * i + k)) & 1:
                    rel |= rowk << (self.st * i)
        return rel

    def is_acyclic(self, rel):
        c = self.closure(rel)
        return all(not (c >> (self.st * i + i)) & 1 for i in range(self.n))

    def compose(self, r1, r2):
        out = 0
        for i in range(self.n):
            acc = 0
            row = self.row(r1, i)
            for j in range(self.n):
                if (row >> j) & 1:
                    acc |= self.row(r2, j)
            out |= acc << (self.st * i)
        return out

    def pairs(self, rel):
        return frozenset(
            (self.ids[i], self.ids[j])
            for i in range(self.n)
            for j in range(self.n)
            if (rel >> (self.st * i + j)) & 1
        )

    def execution_of(self, vis_rel, order) -> AbstractExecution:
        return execution(self.h, self.pairs(vis_rel), [self.ids[i] for i in order])

    def timed_pairs(self, delta):
        rel = 0
        for a in range(self.n):
            if not (self.wrmask >> a) & 1 or self.rtime[a] < 0:
                continue
            for b in range(self.n):
                if b != a and self.stime[b] >= self.rtime[a] + delta:
                    rel |= 1 << (self.st * a + b)
        return rel


def _space(h: History) -> Space:
    sp = getattr(h, "_space", None)
    if sp is None:
        sp = Space(h)
        h._space = sp
    return sp


# ---------------------------------------------------------------------------
# candidate evaluation
# ---------------------------------------------------------------------------


def _eval_extra(pred, sp: Space, vis, ar, arpos, params):
    """Evaluators for predicates outside the kernel bit set, on Space masks."""
    n, st = sp.n, sp.st

    if pred == TIMED_VISIBILITY:
        return sp.timed_pairs(params["delta"]) & ~vis == 0

    if pred in (K_REAL_TIME_READS, K_REAL_TIME):
        k = params["k_versions"]
        mode = params["k_mode"]
        targets = (~sp.wrmask) & sp.full if pred == K_REAL_TIME_READS else sp.full
        for w in range(n):
            if not (sp.wrmask >> w) & 1:
                continue
            for b in range(n):
                if not (targets >> b) & 1:
                    continue
                if not (sp.rb >> (st * w + b)) & 1 or (ar >> (st * w + b)) & 1:
                    continue
                inter = 0
                for pw in range(n):
                    if pw == w or not (sp.wrmask >> pw) & 1:
                        continue
                    if (ar >> (st * w + pw)) & 1 and (sp.rb >> (st * pw + b)) & 1:
                        inter += 1
                if mode == "literal":
                    if k >= 2 and inter >= 1:
                        return False
                elif k == 1 or inter < k - 1:
                    return False
        return True

    if pred == NO_CIRCULAR_CAUSALITY:
        return sp.is_acyclic(sp.so | vis)

    if pred == EVENTUAL_VISIBILITY:
        slack = params["ev_slack"]
        for a in range(n):
            per = [0] * sp.nproc
            for b in range(n):
                if (sp.rb >> (st * a + b)) & 1 and not (vis >> (st * a + b)) & 1:
                    per[sp.proc[b]] += 1
                    if per[sp.proc[b]] > slack:
                        return False
        return True

    if pred == STRONG_CONVERGENCE:
        seen = {}
        for r in range(n):
            op = sp.ops[r]
            if not (op.is_read and op.returned):
                continue
            allw = sum(
                1 << i
                for i in range(n)
                if i != r and sp.ops[i].is_update and sp.ops[i].obj == op.obj
            )
            key = (sp.obj[r], sp.col(vis, r) & allw)
            if key in seen and seen[key] != op.oval:
                return False
            seen.setdefault(key, op.oval)
        return True

    if pred == QUIESCENT:
        q = params["q_slack"]
        nobj = max(sp.obj) + 1 if n else 0
        finals = []
        for o in range(nobj):
            cands = [
                i
                for i in range(n)
                if sp.obj[i] == o and (sp.wrmask >> i) & 1 and (sp.retmask >> i) & 1
            ]
            finals.append(cands if cands else [-1])
        for combo in itertools.product(*finals) if nobj else [()]:
            per = [0] * sp.nproc
            ok = True
            for r in range(n):
                if not (sp.rvalmask >> r) & 1:
                    continue
                f = combo[sp.obj[r]]
                good = (sp.bottom >> r) & 1 if f < 0 else (sp.match[r] >> f) & 1
                if not good:
                    per[sp.proc[r]] += 1
                    if per[sp.proc[r]] > q:
                        ok = False
                        break
            if ok:
                return True
        return nobj == 0

    if pred in (NO_JOIN, AT_MOST_ONE_JOIN):
        sodesc = []
        for i in range(n):
            sodesc.append((1 << i) | sp.row(sp.so, i))
        for ai in range(n):
            for aj in range(n):
                if ai == aj or sp.proc[ai] == sp.proc[aj]:
                    continue
                if not (ar >> (st * ai + aj)) & 1 or (vis >> (st * ai + aj)) & 1:
                    continue
                di, dj = sodesc[ai], sodesc[aj]
                left = right = 0
                for x in range(n):
                    row = sp.row(vis, x)
                    if (di >> x) & 1 and row & dj:
                        left += 1
                    if (dj >> x) & 1 and row & di:
                        right += 1
                if pred == NO_JOIN:
                    if left or right:
                        return False
                elif left > 1 or right > 1:
                    return False
        return True

    if pred == PER_OBJECT_PRAM:
        return sp.so & sp.ob & ~vis == 0

    if pred == PER_OBJECT_SINGLE_ORDER:
        for i in range(n):
            row_ob = sp.row(sp.ob, i) & ~(1 << i)
            sv = sp.row(vis, i) & row_ob
            sa = sp.row(ar, i) & row_ob
            if sv != sa and not (sv == 0 and ((sp.retmask >> i) & 1) == 0):
                return False
        return True

    if pred in (CAUSAL_VISIBILITY, CAUSAL_ARBITRATION):
        scope = params["causal_scope"]
        base = ((sp.so & sp.ob) if scope == "object" else sp.so) | vis
        hb = sp.closure(base)
        target = vis if pred == CAUSAL_VISIBILITY else ar
        return hb & ~target == 0

    if pred == SINGLE_ORDER:
        for i in range(n):
            sv = sp.row(vis, i)
            sa = sp.row(ar, i)
            if sv != sa and not (sv == 0 and ((sp.retmask >> i) & 1) == 0):
                return False
        return True

    if pred == PRAM:
        return sp.so & ~vis == 0
    if pred == MONOTONIC_READS:
        rd = (~sp.wrmask) & sp.full
        so_rdrd = sp.so & sp.expand(rd) & sp.colsel(rd)
        return sp.compose(vis, so_rdrd) & ~vis == 0
    if pred == READ_YOUR_WRITES:
        rd = (~sp.wrmask) & sp.full
        return sp.so & sp.expand(sp.wrmask) & sp.colsel(rd) & ~vis == 0
    if pred == MONOTONIC_WRITES:
        return sp.so & sp.expand(sp.wrmask) & sp.colsel(sp.wrmask) & ~ar == 0
    if pred == WRITES_FOLLOW_READS:
        rd = (~sp.wrmask) & sp.full
        so_rdwr = sp.so & sp.expand(rd) & sp.colsel(sp.wrmask)
        return sp.compose(vis, so_rdwr) & ~ar == 0
    if pred == REAL_TIME:
        return sp.rb & ~ar == 0
    if pred == REAL_TIME_WRITES:
        return sp.rb & sp.expand(sp.wrmask) & ~ar == 0
    if pred == REAL_TIME_WW:
        return sp.rb & sp.expand(sp.wrmask) & sp.colsel(sp.wrmask) & ~ar == 0

    if pred in (RVAL, SEQ_RVAL):
        check = sp.rvalmask if pred == RVAL else sp.seqmask
        for r in range(n):
            if not (check >> r) & 1:
                continue
            vw = sp.col(vis, r) & sp.objwr[r]
            if vw == 0:
                if not (sp.bottom >> r) & 1:
                    return False
            else:
                best, bestpos = -1, -1
                for i in range(n):
                    if (vw >> i) & 1 and arpos[i] > bestpos:
                        bestpos, best = arpos[i], i
                if not (sp.match[r] >> best) & 1:
                    return False
        return True

    raise ValueError(f"no packed evaluator for predicate {pred!r}")


def _ar_rel_from_pos(sp: Space, arpos):
    ar = 0
    for i in range(sp.n):
        for j in range(sp.n):
            if i != j and arpos[i] < arpos[j]:
                ar |= 1 << (sp.st * i + j)
    return ar


def eval_model_on_candidate(sp: Space, vis, arpos, model, params) -> bool:
    """Full-model evaluation of one candidate (vis mask, ar positions)."""
    kernel_need = 0
    extras = []
    scope_object = params["causal_scope"] == "object"
    register = params["rdt"] == "register"
    for pred in model.predicates:
        usable = (
            sp.st == 8
            and pred in _KERNEL_PREDS
            and not (scope_object and pred in (CAUSAL_VISIBILITY, CAUSAL_ARBITRATION))
            and not (not register and pred in (RVAL, SEQ_RVAL))
        )
        if usable:
            kernel_need |= 1 << KERNEL_BITS[pred]
        else:
            extras.append(pred)
    if kernel_need:
        bits = kernels.pred_mask_for(sp.packed, vis, arpos, kernel_need)
        if bits & kernel_need != kernel_need:
            return False
    if extras:
        ar = _ar_rel_from_pos(sp, arpos)
        for pred in extras:
            if pred in (RVAL, SEQ_RVAL) and not register:
                from .predicates import predicate_violation

                order = sorted(range(sp.n), key=lambda i: arpos[i])
                a = sp.execution_of(vis, order)
                if predicate_violation(pred, a, params) is not None:
                    return False
                continue
            if not _eval_extra(pred, sp, vis, ar, arpos, params):
                return False
    return True


# ---------------------------------------------------------------------------
# constraints
# ---------------------------------------------------------------------------


@dataclass
class SearchConstraints:
    """Derived search plan for one (history, model) pair."""

    mode: str  # "single-order" | "per-object-single-order" | "reads-from"
    mandatory_ar: int
    mandatory_vis: int
    droppable_vis: int  # subset of mandatory_vis that eventual slack may remove
    closure_rules: tuple
    hprime_eligible: tuple  # packed indices of never-returning operations
    ar_sensitive: bool
    constrained_reads: tuple  # packed indices carrying a reads-from obligation


def derive_constraints(h: History, model, params=None) -> SearchConstraints:
    model = resolve_model(model)
    params = merge_params(model, params)
    sp = _space(h)
    preds = set(model.predicates)

    mand_ar = 0
    if REAL_TIME in preds:
        mand_ar |= sp.rb
    if REAL_TIME_WRITES in preds:
        mand_ar |= sp.rb & sp.expand(sp.wrmask)
    if REAL_TIME_WW in preds:
        mand_ar |= sp.rb & sp.expand(sp.wrmask) & sp.colsel(sp.wrmask)
    if MONOTONIC_WRITES in preds:
        mand_ar |= sp.so & sp.expand(sp.wrmask) & sp.colsel(sp.wrmask)
    if (
        (K_REAL_TIME_READS in preds or K_REAL_TIME in preds)
        and params["k_mode"] == "intent"
        and params["k_versions"] == 1
    ):
        targets = (~sp.wrmask) & sp.full if K_REAL_TIME_READS in preds else sp.full
        mand_ar |= sp.rb & sp.expand(sp.wrmask) & sp.colsel(targets)

    mand_vis = 0
    droppable = 0
    if PRAM in preds or CAUSAL_VISIBILITY in preds:
        mand_vis |= sp.so
    if READ_YOUR_WRITES in preds:
        rd = (~sp.wrmask) & sp.full
        mand_vis |= sp.so & sp.expand(sp.wrmask) & sp.colsel(rd)
    if PER_OBJECT_PRAM in preds or (
        CAUSAL_VISIBILITY in preds and params["causal_scope"] == "object"
    ):
        mand_vis |= sp.so & sp.ob
    if TIMED_VISIBILITY in preds:
        mand_vis |= sp.timed_pairs(params["delta"])
    if EVENTUAL_VISIBILITY in preds:
        droppable = sp.rb & ~mand_vis
        mand_vis |= sp.rb

    rules = []
    if CAUSAL_VISIBILITY in preds:
        rules.append("transitive-object" if params["causal_scope"] == "object" else "transitive")
    if MONOTONIC_READS in preds:
        rules.append("monotonic-reads")

    if SINGLE_ORDER in preds:
        mode = "single-order"
        mand_ar |= mand_vis  # a single order realises every mandated edge in ar
    elif PER_OBJECT_SINGLE_ORDER in preds:
        mode = "per-object-single-order"
        mand_ar |= mand_vis
    else:
        mode = "reads-from"

    # reads-from pruning encodes register semantics; other data types fall back
    # to unguided search (single-order modes stay complete for them)
    if params["rdt"] != "register":
        constrained = []
    elif RVAL in preds:
        constrained = [r for r in range(sp.n) if (sp.rvalmask >> r) & 1]
    elif SEQ_RVAL in preds:
        constrained = [r for r in range(sp.n) if (sp.seqmask >> r) & 1]
    else:
        constrained = []

    hprime = tuple(i for i in range(sp.n) if not (sp.retmask >> i) & 1)
    return SearchConstraints(
        mode=mode,
        mandatory_ar=mand_ar & sp.nondiag,
        mandatory_vis=mand_vis & sp.nondiag,
        droppable_vis=droppable & sp.nondiag,
        closure_rules=tuple(rules),
        hprime_eligible=hprime,
        ar_sensitive=bool(preds & _AR_SENSITIVE),
        constrained_reads=tuple(constrained),
    )


def _close_vis(sp: Space, vis, rules):
    while True:
        before = vis
        if "transitive" in rules:
            vis = sp.closure(sp.so | vis)
        if "transitive-object" in rules:
            vis = sp.closure((sp.so & sp.ob) | vis)
        if "monotonic-reads" in rules:
            rd = (~sp.wrmask) & sp.full
            so_rdrd = sp.so & sp.expand(rd) & sp.colsel(rd)
            vis |= sp.compose(vis, so_rdrd)
        if vis == before:
            return vis


def _cycle_evidence(sp: Space, rel) -> tuple:
    closed = sp.closure(rel)
    for i in range(sp.n):
        if (closed >> (sp.st * i + i)) & 1:
            for j in range(sp.n):
                if j != i and (closed >> (sp.st * i + j)) & 1 and (closed >> (sp.st * j + i)) & 1:
                    a, b = sp.ids[i], sp.ids[j]
                    return (min(a, b), max(a, b))
            return (sp.ids[i], sp.ids[i])
    return ()


def _lex_topological(sp: Space, required):
    """Minimal linear extension in packed (stime, id) index order, or None."""
    n = sp.n
    preds = [0] * n
    for i in range(n):
        for j in range(n):
            if (required >> (sp.st * i + j)) & 1:
                preds[j] |= 1 << i
    placed = 0
    out = []
    for _ in range(n):
        pick = -1
        for i in range(n):
            if not (placed >> i) & 1 and preds[i] & ~placed == 0:
                pick = i
                break
        if pick < 0:
            return None
        out.append(pick)
        placed |= 1 << pick
    return out


class CheckResult:
    """Verdict plus witness, statistics and completeness flag for one check."""

    def __init__(self, h, model, params, verdict, completeness, stats,
                 witness_packed=None, evidence=None):
        self.history = h
        self.model = model
        self.params = params
        self.verdict = verdict
        self.completeness = completeness
        self.stats = stats
        self._witness_packed = witness_packed  # (vis mask, order indices, hprime ids)
        self.evidence = evidence

    @property
    def satisfied(self):
        return self.verdict == SATISFIED

    @property
    def witness(self) -> Optional[AbstractExecution]:
        parts = self.witness_parts
        if parts is None:
            return None
        vis_pairs, ar_ids, _ = parts
        return execution(self.history, vis_pairs, ar_ids)

    @property
    def witness_parts(self):
        """(vis id pairs, ar id sequence, excluded pending ids) or None."""
        if self._witness_packed is None:
            return None
        vis_rel, order, hprime = self._witness_packed
        sp = _space(self.history)
        return (
            sorted(sp.pairs(vis_rel)),
            [sp.ids[i] for i in order],
            sorted(hprime),
        )

    def to_dict(self):
        out = {
            "model": self.model.name,
            "params": {k: v for k, v in sorted(self.params.items())},
            "verdict": self.verdict,
            "completeness": self.completeness,
            "stats": {k: int(self.stats[k]) for k in sorted(self.stats)},
        }
        parts = self.witness_parts
        if parts is not None:
            vis, ar, hprime = parts
            out["witness"] = {
                "vis": [list(p) for p in vis],
                "ar": ar,
                "excluded_pending": hprime,
            }
        if self.evidence:
            out["evidence"] = list(self.evidence)
        return out


# ---------------------------------------------------------------------------
# single-order search
# ---------------------------------------------------------------------------


def _vis_from_order(mode, sp: Space, ar_rel, hmask, mand_vis):
    if mode == "single-order":
        vis = ar_rel
    else:
        vis = (ar_rel & sp.ob) | (mand_vis & ~0)
    for i in range(sp.n):
        if (hmask >> i) & 1:
            vis &= ~(sp.full << (sp.st * i))
    return vis & sp.nondiag


def _iter_orders(sp: Space, mandatory):
    """Linear extensions of `mandatory` in lexicographic (stime, id) index order."""
    if sp.st == 8:
        pos_tab, rel_tab = kernels.perm_tables(sp.n)
        for p in range(rel_tab.shape[0]):
            ar_rel = int(rel_tab[p])
            if mandatory & ~ar_rel:
                continue
            yield ar_rel, [int(x) for x in pos_tab[p]]
    else:
        from .history import Relation

        pairs = [
            (sp.ids[i], sp.ids[j])
            for i in range(sp.n)
            for j in range(sp.n)
            if (mandatory >> (sp.st * i + j)) & 1
        ]
        rel = Relation(pairs, sp.ids)
        key = {op.id: (op.stime, op.id) for op in sp.h.ops}
        for seq in all_linear_extensions(rel, key=lambda i: key[i]):
            arpos = [0] * sp.n
            for k, op_id in enumerate(seq):
                arpos[sp.index_of[op_id]] = k
            yield _ar_rel_from_pos(sp, arpos), arpos


def _check_single_order(h, sp: Space, model, params, cons, budget):
    nodes = prunes = 0
    if not sp.is_acyclic(cons.mandatory_ar):
        return CheckResult(
            h, model, params, VIOLATED, EXHAUSTIVE, {"nodes": 0, "prunes": 0},
            evidence=_cycle_evidence(sp, cons.mandatory_ar),
        )

    completeness = RESTRICTED if cons.droppable_vis else EXHAUSTIVE

    preds = set(model.predicates)
    kernel_ok = (
        sp.st == 8
        and cons.mode == "single-order"
        and not cons.hprime_eligible
        and params["rdt"] == "register"
        and params["causal_scope"] == "global"
        and preds <= _KERNEL_PREDS
    )
    if kernel_ok:
        need = 0
        for p in preds:
            need |= 1 << KERNEL_BITS[p]
        pos_tab, rel_tab = kernels.perm_tables(sp.n)
        pk = sp.packed
        idx, nodes = kernels.so_scan(
            sp.n, pk.rb, pk.so, pk.wrmask, pk.retmask, pk.objwr, pk.match,
            pk.bottom, pk.rvalmask, pk.seqmask, kernels._EXPAND,
            rel_tab, pos_tab, cons.mandatory_ar, need, budget, 0,
        )
        idx, nodes = int(idx), int(nodes)
        stats = {"nodes": nodes, "prunes": 0}
        if idx >= 0:
            order = sorted(range(sp.n), key=lambda i: int(pos_tab[idx, i]))
            return CheckResult(
                h, model, params, SATISFIED, completeness, stats,
                witness_packed=(int(rel_tab[idx]), order, ()),
            )
        if idx == -1:
            return CheckResult(h, model, params, VIOLATED, completeness, stats)
        return CheckResult(h, model, params, UNKNOWN, BUDGET, stats)

    hprime_sets = [()]
    for size in range(1, len(cons.hprime_eligible) + 1):
        hprime_sets.extend(itertools.combinations(cons.hprime_eligible, size))

    for ar_rel, arpos in _iter_orders(sp, cons.mandatory_ar):
        for combo in hprime_sets:
            if nodes >= budget:
                return CheckResult(
                    h, model, params, UNKNOWN, BUDGET,
                    {"nodes": nodes, "prunes": prunes},
                )
            nodes += 1
            hmask = 0
            for i in combo:
                hmask |= 1 << i
            vis = _vis_from_order(cons.mode, sp, ar_rel, hmask, cons.mandatory_vis)
            if not sp.is_acyclic(vis):
                prunes += 1
                continue
            if eval_model_on_candidate(sp, vis, arpos, model, params):
                order = sorted(range(sp.n), key=lambda i: arpos[i])
                hprime_ids = tuple(sp.ids[i] for i in combo)
                return CheckResult(
                    h, model, params, SATISFIED, completeness,
                    {"nodes": nodes, "prunes": prunes},
                    witness_packed=(vis, order, hprime_ids),
                )
    return CheckResult(
        h, model, params, VIOLATED, completeness, {"nodes": nodes, "prunes": prunes}
    )


# ---------------------------------------------------------------------------
# reads-from search
# ---------------------------------------------------------------------------


def _check_reads_from(h, sp: Space, model, params, cons, budget):
    n, st = sp.n, sp.st
    preds = set(model.predicates)
    state = {"nodes": 0, "prunes": 0}
    slack = params["ev_slack"] if EVENTUAL_VISIBILITY in preds else 0

    complete = (
        preds <= _MONOTONE_SAFE
        and not cons.droppable_vis
        and (params["rdt"] == "register" or not preds & {RVAL, SEQ_RVAL})
    )
    completeness = EXHAUSTIVE if complete else RESTRICTED

    reads = list(cons.constrained_reads)
    assignment: dict = {}

    diag = sum(1 << (st * i + i) for i in range(n))

    def drop_budget_ok(drops):
        per = {}
        for (a, b) in drops:
            key = (a, sp.proc[b])
            per[key] = per.get(key, 0) + 1
            if per[key] > slack:
                return False
        return True

    def finish(vis):
        required = cons.mandatory_ar
        for r, w in assignment.items():
            if w < 0:
                continue
            col = sp.col(vis, r) & sp.objwr[r]
            for c in range(n):
                if (col >> c) & 1 and c != w:
                    required |= 1 << (st * c + w)
        if CAUSAL_ARBITRATION in preds:
            base = (sp.so & sp.ob) if params["causal_scope"] == "object" else sp.so
            required |= sp.closure(base | vis)
        if WRITES_FOLLOW_READS in preds:
            rd = (~sp.wrmask) & sp.full
            so_rdwr = sp.so & sp.expand(rd) & sp.colsel(sp.wrmask)
            required |= sp.compose(vis, so_rdwr)
        required &= sp.nondiag
        if not sp.is_acyclic(required):
            return None

        if cons.ar_sensitive:
            for ar_rel, arpos in _iter_orders(sp, required):
                if state["nodes"] >= budget:
                    return BUDGET
                state["nodes"] += 1
                if eval_model_on_candidate(sp, vis, arpos, model, params):
                    order = sorted(range(n), key=lambda i: arpos[i])
                    return (vis, order)
            return None

        order = _lex_topological(sp, required)
        if order is None:
            return None
        arpos = [0] * n
        for k, i in enumerate(order):
            arpos[i] = k
        if state["nodes"] >= budget:
            return BUDGET
        state["nodes"] += 1
        if eval_model_on_candidate(sp, vis, arpos, model, params):
            return (vis, order)
        return None

    def try_drops(vis, r, victims, drops):
        """Branch over hiding `victims` from read r, honouring the slack budget."""
        bad = 0
        for c in victims:
            edge = 1 << (st * c + r)
            if not cons.droppable_vis & edge:
                return None
            bad |= edge
        nvis = _close_vis(sp, (vis | 0) & ~bad, cons.closure_rules)
        if nvis & bad:
            return None  # closure reintroduces a hidden edge
        ndrops = drops + [(c, r) for c in victims]
        if not drop_budget_ok(ndrops):
            return None
        return nvis, ndrops

    def assign(idx, vis, drops):
        if state["nodes"] >= budget:
            return BUDGET
        if idx == len(reads):
            return finish(vis)
        r = reads[idx]
        if (sp.bottom >> r) & 1:
            options = [-1]
        else:
            options = [w for w in range(n) if (sp.match[r] >> w) & 1]
        for w in options:
            nvis = vis if w < 0 else _close_vis(sp, vis | (1 << (st * w + r)), cons.closure_rules)
            if nvis & diag:
                state["prunes"] += 1
                continue
            conflicts = sp.col(nvis, r) & sp.objwr[r]
            if w >= 0:
                conflicts &= ~(1 << w)
            if w < 0 and conflicts:
                dropped = try_drops(nvis, r, [c for c in range(n) if (conflicts >> c) & 1], drops)
                if dropped is None:
                    state["prunes"] += 1
                    continue
                nvis, ndrops = dropped
                if sp.col(nvis, r) & sp.objwr[r]:
                    state["prunes"] += 1
                    continue
                assignment[r] = w
                res = assign(idx + 1, nvis, ndrops)
                del assignment[r]
                if res is not None:
                    return res
                continue
            assignment[r] = w
            res = assign(idx + 1, nvis, drops)
            del assignment[r]
            if res is not None:
                return res
            if w >= 0 and cons.droppable_vis and conflicts:
                # also try hiding competitor subsets, smallest first
                cand = [c for c in range(n) if (conflicts >> c) & 1]
                for size in range(1, len(cand) + 1):
                    for combo in itertools.combinations(cand, size):
                        dropped = try_drops(nvis, r, list(combo), drops)
                        if dropped is None:
                            continue
                        dvis, ndrops = dropped
                        assignment[r] = w
                        res = assign(idx + 1, dvis, ndrops)
                        del assignment[r]
                        if res is not None:
                            return res
        return None

    base_vis = _close_vis(sp, cons.mandatory_vis, cons.closure_rules)
    if base_vis & diag:
        return CheckResult(
            h, model, params, VIOLATED, completeness,
            {"nodes": 0, "prunes": 0}, evidence=_cycle_evidence(sp, base_vis),
        )
    res = assign(0, base_vis, [])
    stats = {"nodes": state["nodes"], "prunes": state["prunes"]}
    if res == BUDGET:
        return CheckResult(h, model, params, UNKNOWN, BUDGET, stats)
    if res is None:
        return CheckResult(h, model, params, VIOLATED, completeness, stats)
    vis, order = res
    return CheckResult(
        h, model, params, SATISFIED, completeness, stats,
        witness_packed=(vis, order, ()),
    )


# ---------------------------------------------------------------------------
# convergence-only search (StrongConvergence without a value anchor)
# ---------------------------------------------------------------------------


def _check_convergence_only(h, sp: Space, model, params, cons, budget):
    n = sp.n
    groups: dict = {}
    for r in range(n):
        op = sp.ops[r]
        if op.is_read and op.returned:
            groups.setdefault((sp.obj[r], repr(op.oval)), []).append(r)
    vis = cons.mandatory_vis
    ok = True
    per_obj_counter: dict = {}
    # same-value reads share a visible prefix; distinct values get distinct sizes
    for (o, _val), members in sorted(groups.items()):
        writes_o = [i for i in range(n) if sp.obj[i] == o and (sp.wrmask >> i) & 1]
        idx = per_obj_counter.get(o, 0)
        per_obj_counter[o] = idx + 1
        if idx > len(writes_o):
            ok = False
            break
        for r in members:
            for wi in writes_o[:idx]:
                vis |= 1 << (sp.st * wi + r)
    order = _lex_topological(sp, cons.mandatory_ar)
    stats = {"nodes": 1, "prunes": 0}
    if ok and order is not None and sp.is_acyclic(vis):
        arpos = [0] * n
        for k, i in enumerate(order):
            arpos[i] = k
        if eval_model_on_candidate(sp, vis, arpos, model, params):
            return CheckResult(
                h, model, params, SATISFIED, RESTRICTED, stats,
                witness_packed=(vis, order, ()),
            )
    return CheckResult(h, model, params, VIOLATED, RESTRICTED, stats)


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def check_history(h: History, model, params=None, budget: Optional[int] = None) -> CheckResult:
    """Search for an abstract execution of h satisfying the model.

    Deterministic in (history, model, params, budget).  Satisfied results
    carry the lexicographically least witness in the enumeration order;
    Violated results state via `completeness` whether the exhausted space is
    known to cover every satisfying execution; Unknown means the node budget
    ran out first.
    """
    model = resolve_model(model)
    merged = merge_params(model, params)
    budget = DEFAULT_BUDGET if budget is None else int(budget)
    if budget <= 0:
        raise ValueError("budget must be positive")

    if len(h) == 0:
        return CheckResult(
            h, model, merged, SATISFIED, EXHAUSTIVE, {"nodes": 1, "prunes": 0},
            witness_packed=(0, [], ()),
        )

    sp = _space(h)
    cons = derive_constraints(h, model, merged)

    if cons.mode in ("single-order", "per-object-single-order"):
        return _check_single_order(h, sp, model, merged, cons, budget)

    preds = set(model.predicates)
    if STRONG_CONVERGENCE in preds and RVAL not in preds and SEQ_RVAL not in preds:
        return _check_convergence_only(h, sp, model, merged, cons, budget)
    if not sp.is_acyclic(cons.mandatory_ar):
        return CheckResult(
            h, model, merged, VIOLATED, EXHAUSTIVE, {"nodes": 0, "prunes": 0},
            evidence=_cycle_evidence(sp, cons.mandatory_ar),
        )
    return _check_reads_from(h, sp, model, merged, cons, budget)


def search_extensions(h: History, constraints: SearchConstraints):
    """Candidate executions described by the constraints, for inspection.

    This exposes the raw stream behind check_history; consumers filter it
    with evaluate_model.
    """
    sp = _space(h)
    if sp.n == 0:
        return
    if constraints.mode in ("single-order", "per-object-single-order"):
        hprime_sets = [()]
        for size in range(1, len(constraints.hprime_eligible) + 1):
            hprime_sets.extend(itertools.combinations(constraints.hprime_eligible, size))
        for ar_rel, arpos in _iter_orders(sp, constraints.mandatory_ar):
            order = sorted(range(sp.n), key=lambda i: arpos[i])
            for combo in hprime_sets:
                hmask = 0
                for i in combo:
                    hmask |= 1 << i
                vis = _vis_from_order(
                    constraints.mode, sp, ar_rel, hmask, constraints.mandatory_vis
                )
                if sp.is_acyclic(vis):
                    yield sp.execution_of(vis, order)
    else:
        base = _close_vis(sp, constraints.mandatory_vis, constraints.closure_rules)
        per_read = []
        for r in constraints.constrained_reads:
            if (sp.bottom >> r) & 1:
                per_read.append([-1])
            else:
                per_read.append([w for w in range(sp.n) if (sp.match[r] >> w) & 1])
        for combo in itertools.product(*per_read) if per_read else [()]:
            vis = base
            for r, w in zip(constraints.constrained_reads, combo):
                if w >= 0:
                    vis |= 1 << (sp.st * w + r)
            vis = _close_vis(sp, vis, constraints.closure_rules)
            if not sp.is_acyclic(vis):
                continue
            for ar_rel, arpos in _iter_orders(sp, constraints.mandatory_ar):
                order = sorted(range(sp.n), key=lambda i: arpos[i])
                yield sp.execution_of(vis, order)
                break  # one representative extension per visibility candidate


def validate_witness(a: AbstractExecution, model, params=None) -> bool:
    """Re-evaluate the model on a claimed witness via the reference evaluators."""
    model = resolve_model(model)
    merged = merge_params(model, params)
    return evaluate_model(a, model, merged).overall


def shrink_history(h: History, model, params=None, budget: Optional[int] = None) -> History:
    """Greedy subset-minimal sub-history preserving the Violated verdict.

    Every candidate removal is re-checked (no monotonicity assumed); operation
    ids of the surviving operations are preserved.
    """
    first = check_history(h, model, params, budget)
    if first.verdict != VIOLATED:
        raise ValueError("shrink_history needs a Violated starting point")

    current = h
    changed = True
    while changed:
        changed = False
        for op_id in [op.id for op in current.ops]:
            candidate = current.without([op_id])
            if check_history(candidate, model, params, budget).verdict == VIOLATED:
                current = candidate
                changed = True
    return current
