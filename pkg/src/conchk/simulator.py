"""Discrete-event simulation of clients against replicated stores.

A single virtual-time event loop drives client processes (one outstanding
operation each) against a store whose replication protocol is selected by
mode:

  linearizable  one primary copy applies every operation at a point inside
                the operation's interval
  sequential    a primary log broadcast in order; clients read their home
                replica's applied prefix and writes acknowledge only after
                the home replica applied them
  causal        writes carry dependency vector clocks and apply only when
                their dependencies did; concurrent writes converge by a
                last-writer-wins timestamp fixed at the origin
  eventual      writes apply locally and propagate (directly or via periodic
                anti-entropy rounds) with last-writer-wins convergence
  pram          each session's writes ship FIFO per destination replica,
                with no cross-session ordering at all

Simulations are single-threaded and fully deterministic: (store config,
workload, seed) fixes the emitted history byte for byte.  Write values are
unique per object so reads-from recovery is exact downstream.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Optional

from .history import BOTTOM, PLACEHOLDER, History, Operation, build_history

MODES = ("linearizable", "sequential", "causal", "eventual", "pram")


@dataclass(frozen=True)
class StoreConfig:
    mode: str = "linearizable"
    replicas: int = 2
    delay_min: int = 1  # client <-> replica message delay bounds
    delay_max: int = 5
    repl_delay_min: Optional[int] = None  # replica <-> replica; defaults to client's
    repl_delay_max: Optional[int] = None
    anti_entropy: int = 0  # eventual mode: 0 propagates per write, else period
    sticky: bool = True  # route a client to one home replica

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.replicas < 1 or self.delay_min < 0 or self.delay_max < self.delay_min:
            raise ValueError("bad replica count or delay bounds")
        rmin = self.delay_min if self.repl_delay_min is None else self.repl_delay_min
        rmax = self.delay_max if self.repl_delay_max is None else self.repl_delay_max
        if rmin < 0 or rmax < rmin:
            raise ValueError("bad replication delay bounds")


@dataclass(frozen=True)
class WorkloadConfig:
    processes: int = 2
    objects: int = 2
    ops: int = 8  # total operations across processes
    read_fraction: float = 0.5
    think_max: int = 3

    def __post_init__(self):
        if min(self.processes, self.objects, self.ops) < 1 or self.think_max < 1:
            raise ValueError("workload counts must be >= 1")


@dataclass(frozen=True)
class Workload:
    """Per-process operation plans: (kind, obj, value-or-None), plus think gaps."""

    plans: tuple  # tuple per process of (kind, obj, value) tuples
    thinks: tuple  # matching think-time gaps before each operation


def generate_workload(cfg: WorkloadConfig, seed) -> Workload:
    """Reproducible workload; write values are unique per object."""
    rng = random.Random(seed)
    counts = [0] * cfg.processes
    for _ in range(cfg.ops):
        counts[rng.randrange(cfg.processes)] += 1
    next_value = {}
    plans, thinks = [], []
    for p in range(cfg.processes):
        plan, think = [], []
        for _ in range(counts[p]):
            obj = f"o{rng.randrange(cfg.objects)}"
            if rng.random() < cfg.read_fraction:
                plan.append(("rd", obj, None))
            else:
                next_value[obj] = next_value.get(obj, 0) + 1
                plan.append(("wr", obj, next_value[obj]))
            think.append(rng.randrange(1, cfg.think_max + 1))
        plans.append(tuple(plan))
        thinks.append(tuple(think))
    return Workload(tuple(plans), tuple(thinks))


class _Replica:
    __slots__ = ("state", "vclock", "buffer", "log_applied", "fifo_last")

    def __init__(self, nreplicas):
        self.state = {}  # obj -> (ts tuple, value)
        self.vclock = [0] * nreplicas
        self.buffer = []
        self.log_applied = 0
        self.fifo_last = {}

    def lww_apply(self, obj, ts, value):
        cur = self.state.get(obj)
        if cur is None or ts > cur[0]:
            self.state[obj] = (ts, value)

    def value(self, obj):
        cur = self.state.get(obj)
        return BOTTOM if cur is None else cur[1]


def _simulate(store: StoreConfig, workload: Workload, seed):
    rng = random.Random(seed)
    nproc = len(workload.plans)
    R = store.replicas
    replicas = [_Replica(R) for _ in range(R)]
    home = [p % R for p in range(nproc)]
    log = []  # sequential mode: list of (obj, value, origin proc, plan idx)
    records = []  # finished ops: (proc, kind, obj, ival, oval, stime, rtime)
    applied_trace = []  # (proc, plan_idx, frozenset of applied (obj, value))
    stats = {"max_visibility_lag": 0, "events": 0}

    queue = []
    seq_counter = [0]

    def push(t, kind, data):
        seq_counter[0] += 1
        heapq.heappush(queue, (t, seq_counter[0], kind, data))

    def delay():
        return rng.randint(store.delay_min, store.delay_max)

    rmin = store.delay_min if store.repl_delay_min is None else store.repl_delay_min
    rmax = store.delay_max if store.repl_delay_max is None else store.repl_delay_max

    def rdelay():
        return rng.randint(rmin, rmax)

    cursor = [0] * nproc  # next plan index per process
    stime = {}  # (proc, idx) -> issue tick

    def schedule_next(p, t):
        i = cursor[p]
        if i >= len(workload.plans[p]):
            return
        push(t + workload.thinks[p][i], "issue", (p, i))

    for p in range(nproc):
        schedule_next(p, 0)

    if store.mode == "eventual" and store.anti_entropy > 0:
        push(store.anti_entropy, "sync", 0)

    pending_reads = {}  # bookkeeping for read replies

    def reply(t, p, i, kind, obj, ival, oval):
        push(t + delay(), "reply", (p, i, kind, obj, ival, oval))

    def snapshot(r):
        return frozenset((obj, v[1]) for obj, v in replicas[r].state.items())

    def drain_causal(r, t):
        rep = replicas[r]
        progress = True
        while progress:
            progress = False
            rest = []
            for (deps, ts, obj, value, origin) in rep.buffer:
                if all(rep.vclock[k] >= deps[k] for k in range(R)):
                    rep.vclock[origin] += 1
                    rep.lww_apply(obj, ts, value)
                    progress = True
                else:
                    rest.append((deps, ts, obj, value, origin))
            rep.buffer = rest

    while queue:
        t, _seq, kind, data = heapq.heappop(queue)
        stats["events"] += 1
        if kind == "issue":
            p, i = data
            stime[(p, i)] = t
            opkind, obj, value = workload.plans[p][i]
            hr = home[p] if store.sticky else (p + i) % R
            push(t + delay(), "srv", (p, i, opkind, obj, value, hr))
        elif kind == "srv":
            p, i, opkind, obj, value, hr = data
            rep = replicas[hr]
            if store.mode == "linearizable":
                prim = replicas[0]
                if opkind == "wr":
                    prim.lww_apply(obj, (t, 0), value)
                    reply(t, p, i, opkind, obj, value, "ok")
                else:
                    reply(t, p, i, opkind, obj, PLACEHOLDER, prim.value(obj))
            elif store.mode == "sequential":
                if opkind == "wr":
                    log.append((obj, value))
                    pos = len(log)
                    for r in range(R):
                        dt = rdelay()
                        arrive = max(t + dt, replicas[r].fifo_last.get("log", 0))
                        replicas[r].fifo_last["log"] = arrive
                        push(arrive, "apply-log", (r, pos, p, i))
                else:
                    reply(t, p, i, opkind, obj, PLACEHOLDER, rep.value(obj))
            elif store.mode == "causal":
                if opkind == "wr":
                    deps = list(rep.vclock)
                    ts = (t, hr)
                    rep.vclock[hr] += 1
                    rep.lww_apply(obj, ts, value)
                    for r in range(R):
                        if r != hr:
                            push(t + rdelay(), "causal-write", (r, tuple(deps), ts, obj, value, hr))
                    reply(t, p, i, opkind, obj, value, "ok")
                else:
                    applied_trace.append((p, i, snapshot(hr)))
                    reply(t, p, i, opkind, obj, PLACEHOLDER, rep.value(obj))
            elif store.mode == "eventual":
                if opkind == "wr":
                    ts = (t, hr)
                    rep.lww_apply(obj, ts, value)
                    if store.anti_entropy == 0:
                        for r in range(R):
                            if r != hr:
                                push(t + rdelay(), "ev-write", (r, ts, obj, value))
                    reply(t, p, i, opkind, obj, value, "ok")
                else:
                    applied_trace.append((p, i, snapshot(hr)))
                    reply(t, p, i, opkind, obj, PLACEHOLDER, rep.value(obj))
            elif store.mode == "pram":
                if opkind == "wr":
                    rep.state[obj] = ((t, hr), value)
                    for r in range(R):
                        if r != hr:
                            dt = rdelay()
                            key = ("sess", p, r)
                            arrive = max(t + dt, rep.fifo_last.get(key, 0))
                            rep.fifo_last[key] = arrive
                            push(arrive, "pram-write", (r, obj, value, t, hr))
                    reply(t, p, i, opkind, obj, value, "ok")
                else:
                    reply(t, p, i, opkind, obj, PLACEHOLDER, rep.value(obj))
        elif kind == "apply-log":
            r, pos, p, i = data
            rep = replicas[r]
            while rep.log_applied < pos:
                obj, value = log[rep.log_applied]
                rep.state[obj] = ((rep.log_applied, 0), value)
                rep.log_applied += 1
            if r == home[p]:
                # the writer's ack waits for its home replica to apply
                opkind, obj, value = workload.plans[p][i]
                reply(t, p, i, opkind, obj, value, "ok")
        elif kind == "causal-write":
            r, deps, ts, obj, value, origin = data
            replicas[r].buffer.append((deps, ts, obj, value, origin))
            drain_causal(r, t)
        elif kind == "ev-write":
            r, ts, obj, value = data
            replicas[r].lww_apply(obj, ts, value)
        elif kind == "pram-write":
            r, obj, value, wt, origin = data
            replicas[r].state[obj] = ((wt, origin), value)
        elif kind == "sync":
            period = store.anti_entropy
            for r in range(R):
                target = (r + 1) % R
                for obj, (ts, value) in sorted(replicas[r].state.items()):
                    replicas[target].lww_apply(obj, ts, value)
            if any(cursor[p] < len(workload.plans[p]) for p in range(nproc)) or queue:
                push(t + period, "sync", 0)
        elif kind == "reply":
            p, i, opkind, obj, ival, oval = data
            records.append((p, opkind, obj, ival, oval, stime[(p, i)], t))
            cursor[p] = i + 1
            schedule_next(p, t)

    records.sort(key=lambda r: (r[5], r[0]))
    ops = []
    value_to_write = {}
    for op_id, (p, opkind, obj, ival, oval, st, rt) in enumerate(records):
        if opkind == "wr":
            value_to_write[(obj, ival)] = op_id
            ops.append(Operation(op_id, f"p{p}", "wr", obj, ival, oval, st, rt))
        else:
            ops.append(Operation(op_id, f"p{p}", "rd", obj, PLACEHOLDER, oval, st, rt))
    h = build_history(ops)

    # visibility lag: per (returned write, session), how many of the session's
    # reads were served before the write reached their replica
    read_applied = {}
    for p, i, snap in applied_trace:
        read_applied[(p, i)] = snap
    per_pair = {}
    snap_iter = {}
    for (p, i), snap in sorted(read_applied.items()):
        snap_iter.setdefault(p, []).append(snap)
    taken = {p: 0 for p in snap_iter}
    for op in h.ops:
        if op.type != "rd":
            continue
        p = int(op.proc[1:])
        if p not in snap_iter or taken[p] >= len(snap_iter[p]):
            continue
        snap = snap_iter[p][taken[p]]
        taken[p] += 1
        for w in h.ops:
            if w.type != "wr" or not w.returned or w.rtime >= op.stime:
                continue
            if (w.obj, w.ival) not in snap:
                key = (w.id, op.proc)
                per_pair[key] = per_pair.get(key, 0) + 1
    stats["max_visibility_lag"] = max(per_pair.values(), default=0)
    return h, stats


def simulate_store(store: StoreConfig, workload: Workload, seed) -> History:
    """Run the store against the workload; returns the observed history."""
    h, _stats = _simulate(store, workload, seed)
    return h


def simulate_store_with_stats(store: StoreConfig, workload: Workload, seed):
    """Like simulate_store but also returns simulator-side statistics."""
    return _simulate(store, workload, seed)
