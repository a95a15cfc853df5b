"""Brute-force oracle: decide model satisfaction by full enumeration.

Independent of the checker's constrained search: every arbitration order (all
permutations) is paired with every acyclic visibility relation (all DAGs over
the operations), and the model is evaluated on each candidate.  Feasible for
histories of up to four operations, which is exactly the scale the agreement
audits run at.

This module also owns the exhaustive small-history space: every history with
up to four operations over two processes, two objects and a two-value domain
(reads may also return the bottom token), distinct timestamps, enumerated up
to symmetry.  The symmetry quotient is: operations canonically ordered by
start time, process renaming, object renaming, per-object value renaming, and
monotone time reparametrization (only the returns-before pattern matters to
the untimed models audited here).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import kernels
from .checker import Space, _space, eval_model_on_candidate
from .history import BOTTOM, History, Operation, build_history, read, write
from .predicates import evaluate_model, merge_params, resolve_model

ORACLE_MAX_OPS = 4


def all_executions(h: History):
    """Every abstract execution of h: all orders x all acyclic visibilities."""
    sp = _space(h)
    n = sp.n
    if n == 0:
        return
    if n > ORACLE_MAX_OPS:
        raise ValueError("oracle enumerates histories of at most four operations")
    pos_tab, _rel = kernels.perm_tables(n)
    dag_rel, _cols = kernels.dag_tables(n)
    for p in range(pos_tab.shape[0]):
        order = sorted(range(n), key=lambda i: int(pos_tab[p, i]))
        for d in range(dag_rel.shape[0]):
            yield sp.execution_of(int(dag_rel[d]), order)


def oracle_check(h: History, model, params=None, evaluator: str = "packed") -> bool:
    """True iff some execution of h satisfies the model, by full enumeration.

    evaluator "packed" uses the same per-candidate evaluator as the checker
    (kernel bits plus packed extras); "reference" re-evaluates every candidate
    with the set-based predicate definitions.
    """
    model = resolve_model(model)
    merged = merge_params(model, params)
    sp = _space(h)
    n = sp.n
    if n == 0:
        return True
    if n > ORACLE_MAX_OPS:
        raise ValueError("oracle enumerates histories of at most four operations")
    pos_tab, _rel = kernels.perm_tables(n)
    dag_rel, _cols = kernels.dag_tables(n)
    for p in range(pos_tab.shape[0]):
        arpos = [int(x) for x in pos_tab[p]]
        for d in range(dag_rel.shape[0]):
            vis = int(dag_rel[d])
            if evaluator == "packed":
                if eval_model_on_candidate(sp, vis, arpos, model, merged):
                    return True
            else:
                order = sorted(range(n), key=lambda i: arpos[i])
                a = sp.execution_of(vis, order)
                if evaluate_model(a, model, merged).overall:
                    return True
    return False


# ---------------------------------------------------------------------------
# the exhaustive small-history space
# ---------------------------------------------------------------------------

#: per-operation attribute code: proc * 10 + obj * 5 + kind
#: kind 0/1 = write of value 0/1, kind 2 = read -> bottom, 3/4 = read -> value 0/1
_N_ATTRS = 20


def _attr_parts(code):
    return code // 10, (code // 5) % 2, code % 5


def _attr_code(proc, obj, kind):
    return proc * 10 + obj * 5 + kind


def _symmetry_luts():
    """Attribute maps of the 16-element symmetry group (proc/obj/per-object values)."""
    luts = []
    for sp_, so_, vx, vy in itertools.product((0, 1), repeat=4):
        lut = np.zeros(_N_ATTRS, dtype=np.int64)
        for code in range(_N_ATTRS):
            proc, obj, kind = _attr_parts(code)
            swap = vx if obj == 0 else vy
            if kind < 2:
                kind2 = kind ^ swap
            elif kind == 2:
                kind2 = 2
            else:
                kind2 = 3 + ((kind - 3) ^ swap)
            lut[code] = _attr_code(proc ^ sp_, obj ^ so_, kind2)
        luts.append(lut)
    return luts


def canonical_attr_rows(n: int) -> np.ndarray:
    """Orbit representatives of all attribute tuples under the symmetry group."""
    grids = np.meshgrid(*([np.arange(_N_ATTRS, dtype=np.int64)] * n), indexing="ij")
    rows = np.stack([g.reshape(-1) for g in grids], axis=1)
    weights = np.array([_N_ATTRS ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    keys = rows @ weights
    best = keys.copy()
    for lut in _symmetry_luts():
        mapped = lut[rows] @ weights
        np.minimum(best, mapped, out=best)
    keep = keys == best
    return rows[keep]


@dataclass(frozen=True)
class IntervalPattern:
    """Distinct-timestamp interval layout with starts in operation order."""

    stimes: tuple
    rtimes: tuple
    rb: int  # packed at stride 8


def interval_patterns(n: int) -> list:
    """All returns-before patterns realizable by n distinct-timestamp intervals.

    Enumerates endpoint interleavings (starts in operation order) and keeps
    the first layout per returns-before relation: the audited models only see
    the pattern, not the tick values.
    """
    out = []
    seen = set()

    def rec(seq, started, open_ops):
        if len(seq) == 2 * n:
            st = [0] * n
            rt = [0] * n
            first = [True] * n
            for t, op in enumerate(seq):
                if first[op]:
                    st[op] = t
                    first[op] = False
                else:
                    rt[op] = t
            rb = 0
            for i in range(n):
                for j in range(n):
                    if i != j and rt[i] < st[j]:
                        rb |= 1 << (8 * i + j)
            if rb not in seen:
                seen.add(rb)
                out.append(IntervalPattern(tuple(st), tuple(rt), rb))
            return
        if started < n:
            rec(seq + [started], started + 1, open_ops | (1 << started))
        for op in range(started):
            if (open_ops >> op) & 1:
                rec(seq + [op], started, open_ops & ~(1 << op))

    rec([], 0, 0)
    return out


_PROCS = ("pa", "pb")
_OBJS = ("x", "y")
_VALUES = (1, 2)


def history_from_parts(pattern: IntervalPattern, attrs) -> History:
    """Materialize one canonical small history as a History object."""
    ops = []
    for k, code in enumerate(attrs):
        proc, obj, kind = _attr_parts(int(code))
        if kind < 2:
            ops.append(
                write(k, _PROCS[proc], _OBJS[obj], _VALUES[kind],
                      pattern.stimes[k], pattern.rtimes[k])
            )
        else:
            oval = BOTTOM if kind == 2 else _VALUES[kind - 3]
            ops.append(
                read(k, _PROCS[proc], _OBJS[obj], oval,
                     pattern.stimes[k], pattern.rtimes[k])
            )
    return build_history(ops)


def enumerate_small_histories(max_ops: int = ORACLE_MAX_OPS):
    """Yield every canonical small history (deterministic order)."""
    for n in range(1, max_ops + 1):
        rows = canonical_attr_rows(n)
        for pattern in interval_patterns(n):
            for row in rows:
                yield history_from_parts(pattern, row)


#: models whose predicate needs fit the kernel bit set (register data type)
SMALL_SPACE_MODELS = (
    "linearizability",
    "regular",
    "safe",
    "sequential",
    "pram",
    "monotonic-reads",
    "read-your-writes",
    "monotonic-writes",
    "writes-follow-reads",
    "causality",
    "prefix-sequential",
    "prefix-linearizable",
)


def _model_req_masks(model_names) -> np.ndarray:
    req = np.zeros(len(model_names), dtype=np.int64)
    for m, name in enumerate(model_names):
        definition = resolve_model(name)
        mask = 0
        for predname in definition.predicates:
            mask |= 1 << kernels.KERNEL_BITS[predname]
        req[m] = mask
    return req


def _group_rows_by_skeleton(rows: np.ndarray, n: int):
    """Group attribute rows by (proc, obj, kind-class) signature."""
    proc = rows // 10
    obj = (rows // 5) % 2
    iswr = (rows % 5) < 2
    skel = np.zeros(rows.shape[0], dtype=np.int64)
    for k in range(n):
        skel = skel * 8 + (proc[:, k] * 4 + obj[:, k] * 2 + iswr[:, k])
    order = np.argsort(skel, kind="stable")
    sorted_rows = rows[order]
    sorted_skel = skel[order]
    boundaries = np.nonzero(np.diff(sorted_skel))[0] + 1
    return np.split(sorted_rows, boundaries)


def _value_rows(group: np.ndarray, n: int):
    """match/bottom arrays for one skeleton group (vectorized over histories)."""
    H = group.shape[0]
    kind = group % 5
    obj = (group // 5) % 2
    match = np.zeros((H, max(n, 1)), dtype=np.int64)
    bottom = np.zeros(H, dtype=np.int64)
    for k in range(n):
        is_read = kind[:, k] >= 2
        bottom |= (is_read & (kind[:, k] == 2)).astype(np.int64) << k
        for j in range(n):
            if j == k:
                continue
            hit = (
                is_read
                & (kind[:, k] >= 3)
                & (kind[:, j] < 2)
                & (obj[:, j] == obj[:, k])
                & (kind[:, j] == kind[:, k] - 3)
            )
            match[:, k] |= hit.astype(np.int64) << j
    return match, bottom


def oracle_small_space_verdicts(models=SMALL_SPACE_MODELS, max_ops: int = ORACLE_MAX_OPS):
    """Exhaustive oracle verdicts over the whole canonical small-history space.

    Yields (pattern, attrs_row, satmask) in deterministic order; bit m of
    satmask is the oracle verdict for models[m].  The sweep enumerates, for
    every history, all arbitration orders times all acyclic visibility
    relations, sharing the relational predicate tables across histories that
    differ only in values.
    """
    req = _model_req_masks(models)
    for n in range(1, max_ops + 1):
        rows = canonical_attr_rows(n)
        groups = _group_rows_by_skeleton(rows, n)
        pos_tab, perm_rel = kernels.perm_tables(n)
        dag_rel, viscol = kernels.dag_tables(n)
        armax = kernels.armax_tables(n)
        D = dag_rel.shape[0]
        P = perm_rel.shape[0]
        visbits = np.zeros(D, dtype=np.int64)
        caP = np.zeros(D, dtype=np.int64)
        wfP = np.zeros(D, dtype=np.int64)
        arbits = np.zeros(P, dtype=np.int64)
        ok_tab = np.zeros((max(n, 1), 1 << n), dtype=np.int64)
        for pattern in interval_patterns(n):
            for group in groups:
                first = group[0]
                proc = first // 10
                iswr = (first % 5) < 2
                obj = (first // 5) % 2
                wrmask = 0
                ss = 0
                obrel = 0
                for k in range(n):
                    if iswr[k]:
                        wrmask |= 1 << k
                    for j in range(n):
                        if j != k and proc[j] == proc[k]:
                            ss |= 1 << (8 * k + j)
                        if j != k and obj[j] == obj[k]:
                            obrel |= 1 << (8 * k + j)
                so = pattern.rb & ss
                objwr = np.zeros(max(n, 1), dtype=np.int64)
                seqmask = 0
                rvalmask = 0
                for k in range(n):
                    if not iswr[k]:
                        rvalmask |= 1 << k
                        concurrent = False
                        for j in range(n):
                            if j != k and iswr[j] and obj[j] == obj[k]:
                                objwr[k] |= 1 << j
                                fwd = (pattern.rb >> (8 * k + j)) & 1
                                bwd = (pattern.rb >> (8 * j + k)) & 1
                                if not fwd and not bwd:
                                    concurrent = True
                        if not concurrent:
                            seqmask |= 1 << k
                kernels.skeleton_tables_kernel(
                    n, pattern.rb, so, wrmask, dag_rel, perm_rel,
                    visbits, caP, wfP, arbits,
                )
                match, bottom = _value_rows(group, n)
                out = np.zeros(group.shape[0], dtype=np.int64)
                kernels.small_sweep_kernel(
                    n, objwr, seqmask, rvalmask, dag_rel, viscol, perm_rel,
                    armax, visbits, caP, wfP, arbits, match, bottom, req,
                    out, ok_tab,
                )
                for i in range(group.shape[0]):
                    yield pattern, group[i], int(out[i])
