"""Operation/history data model and the relation algebra everything else is built on.

A history is a finite set of single-object storage operations with real-time
interval timestamps.  From it we derive the standard relations:

    rb      returns-before: a.rtime < b.stime (strict, on integer ticks)
    ss      same-session (same process), an equivalence
    so      session order = rb intersected with ss
    ob      same-object, an equivalence
    concur  same-object real-time overlap = ob minus rb, symmetric

An abstract execution extends a history with an acyclic visibility relation
and a total arbitration order.  Consistency predicates are subset/equality
statements over these relations, so the Relation class carries the small
algebra (compose, closure, inverse, subset, acyclicity, totality) used to
write them down directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Union


class Token:
    """Reserved value outside every object's value domain."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return self.name

    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


#: Initial register value; also what a read with no visible write returns.
BOTTOM = Token("bottom")
#: Input slot of reads and conventional acknowledgement value of writes.
PLACEHOLDER = Token("-")

Value = Union[int, str, Token]

READ = "rd"
WRITE = "wr"


class HistoryError(ValueError):
    """Invalid operation or history construction input."""


class CarrierMismatchError(ValueError):
    """Relation algebra applied across different carrier sets."""


@dataclass(frozen=True)
class Operation:
    """One invocation: (proc, type, obj, ival, oval, stime, rtime).

    A never-returning operation has ``rtime is None`` and ``oval is None``
    (the two pending markers always travel together).  Reads carry
    PLACEHOLDER as ival.
    """

    id: int
    proc: str
    type: str
    obj: str
    ival: Value
    oval: Optional[Value]
    stime: int
    rtime: Optional[int]

    def __post_init__(self):
        if self.stime < 0:
            raise HistoryError(f"op {self.id}: negative stime {self.stime}")
        if (self.rtime is None) != (self.oval is None):
            raise HistoryError(
                f"op {self.id}: pending markers inconsistent "
                f"(rtime={self.rtime!r}, oval={self.oval!r})"
            )
        if self.rtime is not None and self.rtime < self.stime:
            raise HistoryError(
                f"op {self.id}: rtime {self.rtime} precedes stime {self.stime}"
            )
        if self.type == READ and self.ival is not PLACEHOLDER:
            raise HistoryError(f"op {self.id}: reads take the placeholder input")
        if self.type != READ and self.ival is PLACEHOLDER:
            raise HistoryError(f"op {self.id}: updates need a concrete input value")

    @property
    def is_read(self) -> bool:
        return self.type == READ

    @property
    def is_update(self) -> bool:
        """Anything that is not a read modifies the object (wr, inc, ...)."""
        return self.type != READ

    @property
    def returned(self) -> bool:
        return self.rtime is not None

    def describe(self) -> str:
        span = f"[{self.stime},{self.rtime}]" if self.returned else f"[{self.stime},?)"
        return f"{self.id}:{self.proc}.{self.type}({self.obj})={self.ival!r}->{self.oval!r}@{span}"


def read(id, proc, obj, oval, stime, rtime) -> Operation:
    """Shorthand for a read operation (oval=None means it never returned)."""
    return Operation(id, proc, READ, obj, PLACEHOLDER, oval, stime, rtime)


def write(id, proc, obj, ival, stime, rtime, oval="ok") -> Operation:
    """Shorthand for a write; pass rtime=None, oval=None for a pending write."""
    if rtime is None:
        oval = None
    return Operation(id, proc, WRITE, obj, ival, oval, stime, rtime)


class Relation:
    """Binary relation over operation ids of one history.

    Stores explicit id pairs plus optional flags stating what is already
    known about the relation (acyclic / total over the carrier).  Internally
    keeps row bitsets over carrier positions, which is what the closure and
    subset operations work on; histories stay small so clarity beats
    asymptotics.
    """

    __slots__ = ("pairs", "carrier", "known_acyclic", "known_total", "_index", "_rows")

    def __init__(
        self,
        pairs: Iterable[tuple[int, int]],
        carrier: Iterable[int],
        known_acyclic: bool = False,
        known_total: bool = False,
    ):
        self.carrier = tuple(sorted(carrier))
        self.pairs = frozenset((int(a), int(b)) for a, b in pairs)
        self._index = {op: i for i, op in enumerate(self.carrier)}
        for a, b in self.pairs:
            if a not in self._index or b not in self._index:
                raise CarrierMismatchError(f"pair ({a},{b}) outside carrier")
        self.known_acyclic = known_acyclic
        self.known_total = known_total
        self._rows = None

    # -- plumbing ----------------------------------------------------------

    def _check_same_carrier(self, other: "Relation"):
        if self.carrier != other.carrier:
            raise CarrierMismatchError("relations over different carriers")

    @property
    def rows(self) -> tuple[int, ...]:
        """Row bitsets over carrier positions: bit j of rows[i] == (c[i], c[j])."""
        if self._rows is None:
            n = len(self.carrier)
            rows = [0] * n
            idx = self._index
            for a, b in self.pairs:
                rows[idx[a]] |= 1 << idx[b]
            self._rows = tuple(rows)
        return self._rows

    def _from_rows(self, rows, **flags) -> "Relation":
        c = self.carrier
        pairs = []
        for i, row in enumerate(rows):
            while row:
                j = (row & -row).bit_length() - 1
                pairs.append((c[i], c[j]))
                row &= row - 1
        return Relation(pairs, c, **flags)

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair):
        return pair in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __eq__(self, other):
        return (
            isinstance(other, Relation)
            and self.carrier == other.carrier
            and self.pairs == other.pairs
        )

    def __hash__(self):
        return hash((self.carrier, self.pairs))

    def __repr__(self):
        return f"Relation({sorted(self.pairs)})"

    # -- algebra -----------------------------------------------------------

    def union(self, other: "Relation") -> "Relation":
        self._check_same_carrier(other)
        return Relation(self.pairs | other.pairs, self.carrier)

    def intersect(self, other: "Relation") -> "Relation":
        self._check_same_carrier(other)
        return Relation(self.pairs & other.pairs, self.carrier)

    def minus(self, other: "Relation") -> "Relation":
        self._check_same_carrier(other)
        return Relation(self.pairs - other.pairs, self.carrier)

    def compose(self, other: "Relation") -> "Relation":
        """self ; other = {(a, c) : exists b with (a,b) in self, (b,c) in other}."""
        self._check_same_carrier(other)
        rows, orows = self.rows, other.rows
        out = [0] * len(rows)
        for i, row in enumerate(rows):
            acc = 0
            r = row
            while r:
                j = (r & -r).bit_length() - 1
                acc |= orows[j]
                r &= r - 1
            out[i] = acc
        return self._from_rows(out)

    def transitive_closure(self) -> "Relation":
        rows = list(self.rows)
        n = len(rows)
        for k in range(n):
            bit = 1 << k
            rk = rows[k]
            for i in range(n):
                if rows[i] & bit:
                    rows[i] |= rk
        return self._from_rows(rows)

    def inverse(self) -> "Relation":
        return Relation(((b, a) for a, b in self.pairs), self.carrier)

    def restrict(self, src_ids=None, dst_ids=None) -> "Relation":
        """Keep pairs whose source / destination lie in the given id sets."""
        src = None if src_ids is None else frozenset(src_ids)
        dst = None if dst_ids is None else frozenset(dst_ids)
        return Relation(
            (
                (a, b)
                for a, b in self.pairs
                if (src is None or a in src) and (dst is None or b in dst)
            ),
            self.carrier,
        )

    def is_subset(self, other: "Relation") -> bool:
        self._check_same_carrier(other)
        return self.pairs <= other.pairs

    def is_acyclic(self) -> bool:
        if self.known_acyclic:
            return True
        closed = self.transitive_closure()
        return all((c, c) not in closed.pairs for c in self.carrier)

    def is_total_order(self, carrier: Iterable[int]) -> bool:
        """Strict total order over exactly the given carrier set."""
        want = tuple(sorted(carrier))
        if want != self.carrier:
            sub = set(want)
            if not sub <= set(self.carrier):
                return False
            return self.restrict(sub, sub).is_total_order(want)
        n = len(self.carrier)
        rows = self.rows
        for i in range(n):
            if rows[i] & (1 << i):
                return False
            for j in range(i + 1, n):
                fwd = bool(rows[i] & (1 << j))
                bwd = bool(rows[j] & (1 << i))
                if fwd == bwd:
                    return False
        # antisymmetric and complete; total order additionally needs transitivity
        return self.transitive_closure().pairs == self.pairs

    def image(self, ids: Iterable[int]) -> frozenset[int]:
        s = frozenset(ids)
        return frozenset(b for a, b in self.pairs if a in s)

    def preimage(self, ids: Iterable[int]) -> frozenset[int]:
        s = frozenset(ids)
        return frozenset(a for a, b in self.pairs if b in s)


def relation(pairs, carrier, **flags) -> Relation:
    return Relation(pairs, carrier, **flags)


class History:
    """Immutable finite set of operations plus its derived relations."""

    def __init__(self, ops: Iterable[Operation]):
        ops = tuple(sorted(ops, key=lambda o: o.id))
        seen = set()
        for op in ops:
            if op.id in seen:
                raise HistoryError(f"duplicate operation id {op.id}")
            seen.add(op.id)
        self.ops = ops
        self.ids = tuple(op.id for op in ops)
        self.by_id = {op.id: op for op in ops}

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __contains__(self, op):
        if isinstance(op, Operation):
            return self.by_id.get(op.id) == op
        return op in self.by_id

    def __eq__(self, other):
        return isinstance(other, History) and self.ops == other.ops

    def __hash__(self):
        return hash(self.ops)

    def __repr__(self):
        return f"History({len(self.ops)} ops)"

    # -- projections ---------------------------------------------------------

    @cached_property
    def read_ids(self) -> frozenset[int]:
        return frozenset(op.id for op in self.ops if op.is_read)

    @cached_property
    def update_ids(self) -> frozenset[int]:
        return frozenset(op.id for op in self.ops if op.is_update)

    @cached_property
    def returned_ids(self) -> frozenset[int]:
        return frozenset(op.id for op in self.ops if op.returned)

    def kind_ids(self, kind: str) -> frozenset[int]:
        """Resolve a projection kind: 'op' (all), 'rd', 'wr' (updates), or a type name."""
        if kind == "op":
            return frozenset(self.ids)
        if kind == READ:
            return self.read_ids
        if kind == WRITE:
            return self.update_ids
        return frozenset(op.id for op in self.ops if op.type == kind)

    def project(self, rel: Relation, src_kind: str, dst_kind: str) -> Relation:
        """rel restricted to pairs of the given operation kinds (e.g. wr -> rd)."""
        return rel.restrict(self.kind_ids(src_kind), self.kind_ids(dst_kind))

    # -- derived relations ----------------------------------------------------

    @cached_property
    def rb(self) -> Relation:
        pairs = [
            (a.id, b.id)
            for a in self.ops
            for b in self.ops
            if a.returned and a.rtime < b.stime
        ]
        return Relation(pairs, self.ids, known_acyclic=True)

    @cached_property
    def ss(self) -> Relation:
        pairs = [
            (a.id, b.id) for a in self.ops for b in self.ops if a.proc == b.proc
        ]
        return Relation(pairs, self.ids)

    @cached_property
    def so(self) -> Relation:
        return Relation(
            self.rb.pairs & self.ss.pairs, self.ids, known_acyclic=True
        )

    @cached_property
    def ob(self) -> Relation:
        pairs = [(a.id, b.id) for a in self.ops for b in self.ops if a.obj == b.obj]
        return Relation(pairs, self.ids)

    @cached_property
    def concur(self) -> Relation:
        # real-time overlap is direction-free, so both rb orientations drop out
        rb_sym = self.rb.pairs | {(b, a) for a, b in self.rb.pairs}
        return Relation(self.ob.pairs - rb_sym - {(i, i) for i in self.ids},
                        self.ids)

    @cached_property
    def sessions(self) -> tuple[tuple[int, ...], ...]:
        """Operation ids grouped by process, each group in id order."""
        groups: dict[str, list[int]] = {}
        for op in self.ops:
            groups.setdefault(op.proc, []).append(op.id)
        return tuple(tuple(v) for _, v in sorted(groups.items()))

    def empty_relation(self) -> Relation:
        return Relation((), self.ids)

    def without(self, drop_ids: Iterable[int]) -> "History":
        """Sub-history with the given operations removed; ids are preserved."""
        drop = frozenset(drop_ids)
        return History(op for op in self.ops if op.id not in drop)


def build_history(ops: Iterable[Operation]) -> History:
    """Validate operations and construct a History with derived relation caches.

    Rejects duplicate ids, rtime < stime, and inconsistent pending markers;
    error messages name the offending operation id.
    """
    return History(ops)


@dataclass(frozen=True)
class AbstractExecution:
    """A history together with visibility (acyclic) and arbitration (total)."""

    history: History
    vis: Relation
    ar: Relation

    def __post_init__(self):
        ids = set(self.history.ids)
        for rel, name in ((self.vis, "vis"), (self.ar, "ar")):
            if not set(rel.carrier) <= ids or any(
                a not in ids or b not in ids for a, b in rel.pairs
            ):
                raise HistoryError(f"{name} relates operations outside the history")
        if not self.vis.is_acyclic():
            raise HistoryError("vis must be acyclic")
        if not self.ar.is_total_order(self.history.ids):
            raise HistoryError("ar must be a total order over the history")

    @cached_property
    def ar_sequence(self) -> tuple[int, ...]:
        """Operation ids in arbitration order."""
        rows = self.ar.rows
        order = sorted(range(len(rows)), key=lambda i: -bin(rows[i]).count("1"))
        return tuple(self.ar.carrier[i] for i in order)

    def visible_to(self, op_id: int) -> frozenset[int]:
        return self.vis.preimage((op_id,))


def execution(history: History, vis_pairs, ar_sequence) -> AbstractExecution:
    """Convenience builder: vis from explicit pairs, ar from an id sequence."""
    ids = history.ids
    seq = list(ar_sequence)
    if sorted(seq) != sorted(ids):
        raise HistoryError("ar sequence must enumerate every operation exactly once")
    ar_pairs = [
        (seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, len(seq))
    ]
    vis = Relation(vis_pairs, ids, known_acyclic=False)
    ar = Relation(ar_pairs, ids, known_total=True)
    return AbstractExecution(history, vis, ar)


def happens_before(a: AbstractExecution) -> Relation:
    """Transitive closure of session order united with visibility."""
    return a.history.so.union(a.vis).transitive_closure()


def per_object_happens_before(a: AbstractExecution) -> Relation:
    """Like happens_before but session order restricted to same-object pairs."""
    h = a.history
    so_ob = h.so.intersect(h.ob)
    return so_ob.union(a.vis).transitive_closure()


def concur_writes(h: History, a: Operation) -> frozenset[Operation]:
    """Updates on a.obj overlapping a in real time (a itself excluded)."""
    if a not in h:
        raise HistoryError(f"operation {a.id} not in history")
    out = []
    for b_id in h.concur.image((a.id,)):
        b = h.by_id[b_id]
        if b.is_update:
            out.append(b)
    return frozenset(out)


def all_linear_extensions(mandatory: Relation, key=None):
    """Yield id sequences extending `mandatory`, lexicographic in `key` order.

    `key` defaults to carrier (id) order; the checker passes (stime, id).
    Plain recursive enumeration; carriers stay small.
    """
    ids = list(mandatory.carrier)
    if key is not None:
        ids.sort(key=key)
    preds: dict[int, set[int]] = {i: set() for i in ids}
    for x, y in mandatory.pairs:
        if x == y:
            return  # reflexive mandatory edge: no extension exists
        preds[y].add(x)

    n = len(ids)
    chosen: list[int] = []
    placed: set[int] = set()

    def rec():
        if len(chosen) == n:
            yield tuple(chosen)
            return
        for cand in ids:
            if cand in placed or not preds[cand] <= placed:
                continue
            chosen.append(cand)
            placed.add(cand)
            yield from rec()
            placed.discard(cand)
            chosen.pop()

    yield from rec()
