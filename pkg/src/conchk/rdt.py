"""Replicated-data-type return-value functions and the RVal predicates.

Each data type is an intended-return-value function F mapping an operation
and its context (the fragment of the execution visible to it) to the set of
values the operation is allowed to return.  The read/write register is the
reference type: a read's intended value is the input of the arbitration-latest
returning write on the same object among the writes visible to it, or bottom
when no such write exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .history import (
    BOTTOM,
    AbstractExecution,
    HistoryError,
    Operation,
    Relation,
    Value,
)


class UnknownRdtError(ValueError):
    pass


@dataclass(frozen=True)
class Context:
    """Projection of an execution onto one operation: A | op, vis^-1(op), vis, ar."""

    op: Operation
    visible: tuple[Operation, ...]  # vis^-1(op), in arbitration order
    vis: Relation  # restricted to visible + {op}
    ar: Relation  # restricted to visible + {op}; total on that carrier

    @property
    def visible_ids(self) -> frozenset[int]:
        return frozenset(o.id for o in self.visible)


@dataclass(frozen=True)
class RdtSpec:
    """Named data type with its intended-return-value function."""

    name: str
    returns: Callable[[Operation, Context], frozenset]


def context_of(a: AbstractExecution, op: Operation) -> Context:
    """Context of op in a: its visible operations plus vis/ar restricted to them."""
    if op not in a.history:
        raise HistoryError(f"operation {op.id} not in history")
    vis_ids = a.vis.preimage((op.id,))
    keep = vis_ids | {op.id}
    seq = [i for i in a.ar_sequence if i in vis_ids]
    return Context(
        op=op,
        visible=tuple(a.history.by_id[i] for i in seq),
        vis=a.vis.restrict(keep, keep),
        ar=a.ar.restrict(keep, keep),
    )


def prec(a: AbstractExecution, op: Operation) -> Optional[Operation]:
    """Arbitration-latest returning same-object write visible to op, else None.

    None stands for the bottom default: the register still holds its initial
    value as far as op can tell.
    """
    if op not in a.history:
        raise HistoryError(f"operation {op.id} not in history")
    vis_ids = a.vis.preimage((op.id,))
    best = None
    for i in a.ar_sequence:
        if i not in vis_ids:
            continue
        cand = a.history.by_id[i]
        if cand.is_update and cand.returned and cand.obj == op.obj:
            best = cand
    return best


def _register_returns(op: Operation, ctx: Context) -> frozenset:
    best = None
    for cand in ctx.visible:  # already in ar order
        if cand.is_update and cand.returned and cand.obj == op.obj:
            best = cand
    return frozenset({BOTTOM if best is None else best.ival})


def _counter_returns(op: Operation, ctx: Context) -> frozenset:
    # A counter read returns how many increments it can see on its object;
    # visibility alone decides, so pending increments count once visible.
    n = sum(1 for c in ctx.visible if c.type == "inc" and c.obj == op.obj)
    return frozenset({n})


REGISTER = RdtSpec("register", _register_returns)
COUNTER = RdtSpec("counter", _counter_returns)

RDT_SPECS = {spec.name: spec for spec in (REGISTER, COUNTER)}


def rdt_spec(name: str) -> RdtSpec:
    try:
        return RDT_SPECS[name]
    except KeyError:
        raise UnknownRdtError(
            f"unknown replicated data type {name!r}; known: {sorted(RDT_SPECS)}"
        ) from None


def rval_set(spec: RdtSpec, op: Operation, ctx: Context) -> frozenset:
    """Intended return values of op given its context."""
    return spec.returns(op, ctx)


def _checked_ops(a: AbstractExecution):
    # Updates acknowledge rather than read, and pending operations returned
    # nothing to check, so return-value consistency constrains returning reads.
    return [op for op in a.history if op.is_read and op.returned]


def rval_violation(a: AbstractExecution, spec: RdtSpec) -> Optional[Operation]:
    """First (smallest-id) returning read whose output is not an intended value."""
    for op in sorted(_checked_ops(a), key=lambda o: o.id):
        if op.oval not in rval_set(spec, op, context_of(a, op)):
            return op
    return None


def rval_predicate(a: AbstractExecution, spec: RdtSpec) -> bool:
    """Every returning read yields a value intended by the data type."""
    return rval_violation(a, spec) is None


def seq_rval_violation(a: AbstractExecution, spec: RdtSpec) -> Optional[Operation]:
    from .history import concur_writes

    for op in sorted(_checked_ops(a), key=lambda o: o.id):
        if concur_writes(a.history, op):
            continue
        if op.oval not in rval_set(spec, op, context_of(a, op)):
            return op
    return None


def seq_rval_predicate(a: AbstractExecution, spec: RdtSpec) -> bool:
    """Return-value consistency only for operations not overlapping any write."""
    return seq_rval_violation(a, spec) is None
