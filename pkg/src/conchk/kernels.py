"""Bit-packed predicate kernels for the hot search and sweep loops.

Relations over histories of up to eight operations are packed into a single
int64: pair (i, j) lives at bit i*8 + j (row stride fixed at 8).  Diagonal
bits are never used and every mask constant keeps bit 63 clear, so all values
stay below 2**63 and the arithmetic is identical for Python ints, NumPy int64
and numba-compiled int64.

Every kernel has one source.  When numba is enabled (the default) the
functions are JIT-compiled; otherwise the same definitions run interpreted.
Set CONCHK_NUMBA=0 to force the fallback.  Results are bit-for-bit identical
across backends (integer arithmetic only), which the test suite asserts; the
benchmark under benchmarks/ compares their speed.

The reference evaluators in predicates.py remain the semantic ground truth;
kernels cover the thirteen predicates the exhaustive sweeps need:

    bit  0 SingleOrder      5 MonotonicReads   10 CausalArbitration
    bit  1 RealTime         6 ReadYourWrites   11 RVal (register)
    bit  2 RealTimeWrites   7 MonotonicWrites  12 SeqRVal (register)
    bit  3 RealTimeWW       8 WritesFollowReads
    bit  4 PRAM             9 CausalVisibility
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

import numpy as np

from .history import BOTTOM, History

_env = os.environ.get("CONCHK_NUMBA", "1").strip().lower()
USE_NUMBA = _env not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except Exception:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if USE_NUMBA:
    def _jit(func):
        return _njit(cache=True)(func)

    BACKEND = "numba"
else:
    def _jit(func):
        return func

    BACKEND = "python"


B_SO = 0
B_RT = 1
B_RTW = 2
B_RTWW = 3
B_PRAM = 4
B_MR = 5
B_RYW = 6
B_MW = 7
B_WFR = 8
B_CV = 9
B_CA = 10
B_RVAL = 11
B_SEQRVAL = 12

KERNEL_BITS = {
    "SingleOrder": B_SO,
    "RealTime": B_RT,
    "RealTimeWrites": B_RTW,
    "RealTimeWW": B_RTWW,
    "PRAM": B_PRAM,
    "MonotonicReads": B_MR,
    "ReadYourWrites": B_RYW,
    "MonotonicWrites": B_MW,
    "WritesFollowReads": B_WFR,
    "CausalVisibility": B_CV,
    "CausalArbitration": B_CA,
    "RVal": B_RVAL,
    "SeqRVal": B_SEQRVAL,
}

ALL_KERNEL_MASK = (1 << len(KERNEL_BITS)) - 1

#: every non-diagonal pair bit; bit 63 is the (7,7) diagonal, so this fits int64
NONDIAG = ((1 << 64) - 1) ^ sum(1 << (9 * i) for i in range(8))
#: replicating a byte across rows selects pairs by destination
COLREP = 0x0101010101010101

#: expand a set-of-ops bitmask into "all pairs sourced at a member" form
_EXPAND = np.zeros(256, dtype=np.int64)
for _s in range(256):
    _v = 0
    for _i in range(8):
        if (_s >> _i) & 1:
            _v |= 0xFF << (8 * _i)
    _EXPAND[_s] = _v & NONDIAG


def expand_rows(mask: int) -> int:
    """Pair filter: sources restricted to `mask` members."""
    return int(_EXPAND[mask])


def select_cols(mask: int) -> int:
    """Pair filter: destinations restricted to `mask` members."""
    return (mask * COLREP) & NONDIAG


def pairs_to_packed(pairs, index_of) -> int:
    rel = 0
    for a, b in pairs:
        rel |= 1 << (index_of[a] * 8 + index_of[b])
    return int(rel)


def packed_to_pairs(rel: int, ids) -> frozenset:
    out = []
    n = len(ids)
    for i in range(n):
        for j in range(n):
            if (rel >> (8 * i + j)) & 1:
                out.append((ids[i], ids[j]))
    return frozenset(out)


@dataclass
class PackedHistory:
    """History fields in kernel layout; packed order is (stime, id)-sorted."""

    n: int
    ids: tuple  # ids[k] = operation id at packed index k
    rb: int
    ss: int
    so: int
    ob: int
    wrmask: int  # bit per packed index: operation is an update
    retmask: int  # bit per packed index: operation returned
    objwr: np.ndarray  # int64[n]: same-object returning updates, per op
    match: np.ndarray  # int64[n]: of those, the ones whose ival equals op.oval
    bottom: int  # returning reads whose oval is the bottom token
    rvalmask: int  # returning reads (register RVal scope)
    seqmask: int  # returning reads with no same-object concurrent update
    stime: np.ndarray
    rtime: np.ndarray  # -1 while pending

    @property
    def index_of(self):
        return {op_id: k for k, op_id in enumerate(self.ids)}


def pack_history(h: History) -> PackedHistory:
    """Pack a history (n <= 8) for the kernels; cached on the history object."""
    cached = getattr(h, "_packed", None)
    if cached is not None:
        return cached
    n = len(h)
    if n > 8:
        raise ValueError("kernels pack at most 8 operations")
    order = sorted(h.ops, key=lambda o: (o.stime, o.id))
    ids = tuple(op.id for op in order)
    idx = {op_id: k for k, op_id in enumerate(ids)}
    rb = pairs_to_packed(h.rb.pairs, idx)
    ss = pairs_to_packed(h.ss.pairs, idx)
    so = pairs_to_packed(h.so.pairs, idx)
    ob = pairs_to_packed(h.ob.pairs, idx)
    wrmask = retmask = bottom = rvalmask = seqmask = 0
    objwr = np.zeros(max(n, 1), dtype=np.int64)
    match = np.zeros(max(n, 1), dtype=np.int64)
    stime = np.zeros(max(n, 1), dtype=np.int64)
    rtime = np.full(max(n, 1), -1, dtype=np.int64)
    for k, op in enumerate(order):
        stime[k] = op.stime
        if op.returned:
            retmask |= 1 << k
            rtime[k] = op.rtime
        if op.is_update:
            wrmask |= 1 << k
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
            overlap = not ((rb >> (8 * k + j)) & 1) and not ((rb >> (8 * j + k)) & 1)
            if overlap:
                concurrent = True
        objwr[k] = ow
        match[k] = mm
        if op.is_read and op.returned:
            rvalmask |= 1 << k
            if op.oval is BOTTOM:
                bottom |= 1 << k
            if not concurrent:
                seqmask |= 1 << k
    packed = PackedHistory(
        n=n,
        ids=ids,
        rb=rb,
        ss=ss,
        so=so,
        ob=ob,
        wrmask=wrmask,
        retmask=retmask,
        objwr=objwr,
        match=match,
        bottom=bottom,
        rvalmask=rvalmask,
        seqmask=seqmask,
        stime=stime,
        rtime=rtime,
    )
    h._packed = packed
    return packed


# ---------------------------------------------------------------------------
# scalar relation helpers
# ---------------------------------------------------------------------------


def _closure_src(rel, n):
    for k in range(n):
        rowk = (rel >> (8 * k)) & 0xFF
        for i in range(n):
            if (rel >> (8 * i + k)) & 1:
                rel |= rowk << (8 * i)
    return rel


def _is_acyclic_src(rel, n):
    c = rel
    for k in range(n):
        rowk = (c >> (8 * k)) & 0xFF
        for i in range(n):
            if (c >> (8 * i + k)) & 1:
                c |= rowk << (8 * i)
    for i in range(n):
        if (c >> (9 * i)) & 1:
            return False
    return True


def _compose_src(r1, r2, n):
    out = 0
    for i in range(n):
        row = (r1 >> (8 * i)) & 0xFF
        acc = 0
        for j in range(n):
            if (row >> j) & 1:
                acc |= (r2 >> (8 * j)) & 0xFF
        out |= acc << (8 * i)
    return out


closure_packed = _jit(_closure_src)
is_acyclic_packed = _jit(_is_acyclic_src)
compose_packed = _jit(_compose_src)


def _pred_mask_src(
    n, rb, so, wrmask, retmask, objwr, match, bottom, rvalmask, seqmask,
    expand, vis, arpos, need,
):
    """Predicate bitmask of one execution; only bits selected by `need` are computed."""
    ar = 0
    for i in range(n):
        for j in range(n):
            if i != j and arpos[i] < arpos[j]:
                ar |= 1 << (8 * i + j)

    rdmask = (~wrmask) & ((1 << n) - 1)
    bits = 0

    if (need >> B_SO) & 1:
        ok = True
        for i in range(n):
            sv = (vis >> (8 * i)) & 0xFF
            sa = (ar >> (8 * i)) & 0xFF
            if sv != sa and not (sv == 0 and ((retmask >> i) & 1) == 0):
                ok = False
                break
        if ok:
            bits |= 1 << B_SO
    if (need >> B_RT) & 1 and rb & ~ar == 0:
        bits |= 1 << B_RT
    if (need >> B_RTW) & 1 and rb & expand[wrmask] & ~ar == 0:
        bits |= 1 << B_RTW
    if (need >> B_RTWW) & 1:
        cols = (wrmask * COLREP) & NONDIAG
        if rb & expand[wrmask] & cols & ~ar == 0:
            bits |= 1 << B_RTWW
    if (need >> B_PRAM) & 1 and so & ~vis == 0:
        bits |= 1 << B_PRAM
    if (need >> B_MR) & 1:
        so_rdrd = so & expand[rdmask] & ((rdmask * COLREP) & NONDIAG)
        comp = 0
        for i in range(n):
            row = (vis >> (8 * i)) & 0xFF
            acc = 0
            for j in range(n):
                if (row >> j) & 1:
                    acc |= (so_rdrd >> (8 * j)) & 0xFF
            comp |= acc << (8 * i)
        if comp & ~vis == 0:
            bits |= 1 << B_MR
    if (need >> B_RYW) & 1:
        if so & expand[wrmask] & ((rdmask * COLREP) & NONDIAG) & ~vis == 0:
            bits |= 1 << B_RYW
    if (need >> B_MW) & 1:
        if so & expand[wrmask] & ((wrmask * COLREP) & NONDIAG) & ~ar == 0:
            bits |= 1 << B_MW
    if (need >> B_WFR) & 1:
        so_rdwr = so & expand[rdmask] & ((wrmask * COLREP) & NONDIAG)
        comp = 0
        for i in range(n):
            row = (vis >> (8 * i)) & 0xFF
            acc = 0
            for j in range(n):
                if (row >> j) & 1:
                    acc |= (so_rdwr >> (8 * j)) & 0xFF
            comp |= acc << (8 * i)
        if comp & ~ar == 0:
            bits |= 1 << B_WFR
    if ((need >> B_CV) & 1) or ((need >> B_CA) & 1):
        hb = so | vis
        for k in range(n):
            rowk = (hb >> (8 * k)) & 0xFF
            for i in range(n):
                if (hb >> (8 * i + k)) & 1:
                    hb |= rowk << (8 * i)
        if hb & ~vis == 0:
            bits |= 1 << B_CV
        if hb & ~ar == 0:
            bits |= 1 << B_CA
    if ((need >> B_RVAL) & 1) or ((need >> B_SEQRVAL) & 1):
        okmask = 0
        for r in range(n):
            if ((rvalmask >> r) & 1) == 0:
                continue
            vw = 0
            for i in range(n):
                if (vis >> (8 * i + r)) & 1:
                    vw |= 1 << i
            vw &= objwr[r]
            if vw == 0:
                if (bottom >> r) & 1:
                    okmask |= 1 << r
            else:
                best = 0
                bestpos = -1
                for i in range(n):
                    if (vw >> i) & 1 and arpos[i] > bestpos:
                        bestpos = arpos[i]
                        best = i
                if (match[r] >> best) & 1:
                    okmask |= 1 << r
        if okmask & rvalmask == rvalmask:
            bits |= 1 << B_RVAL
        if okmask & seqmask == seqmask:
            bits |= 1 << B_SEQRVAL
    return bits


exec_pred_mask = _jit(_pred_mask_src)


def _so_scan_src(
    n, rb, so, wrmask, retmask, objwr, match, bottom, rvalmask, seqmask,
    expand, perm_ar, perm_pos, mandatory, need, max_nodes, node_base,
):
    """Scan arbitration orders as single-order candidates (vis == ar).

    Returns (index of the first witnessing order, nodes evaluated); index -1
    means the space was exhausted without a witness, -2 that the node budget
    ran out.  Orders not extending `mandatory` are pruned for free.
    """
    nodes = node_base
    nperm = perm_ar.shape[0]
    for p in range(nperm):
        ar = perm_ar[p]
        if mandatory & ~ar != 0:
            continue
        if nodes >= max_nodes:
            return -2, nodes
        nodes += 1
        bits = exec_pred_mask(
            n, rb, so, wrmask, retmask, objwr, match, bottom,
            rvalmask, seqmask, expand, ar, perm_pos[p], need,
        )
        if bits & need == need:
            return p, nodes
    return -1, nodes


so_scan = _jit(_so_scan_src)


def pred_mask_for(packed: PackedHistory, vis_rel: int, ar_positions,
                  need: int = ALL_KERNEL_MASK) -> int:
    """Predicate bits of one packed execution (ar given as position array)."""
    arpos = np.asarray(ar_positions, dtype=np.int64)
    return int(
        exec_pred_mask(
            packed.n, packed.rb, packed.so, packed.wrmask, packed.retmask,
            packed.objwr, packed.match, packed.bottom, packed.rvalmask,
            packed.seqmask, _EXPAND, int(vis_rel), arpos, int(need),
        )
    )


# ---------------------------------------------------------------------------
# candidate tables (permutations, DAGs) shared by checker and oracle
# ---------------------------------------------------------------------------

_PERM_CACHE: dict = {}
_DAG_CACHE: dict = {}
_ARMAX_CACHE: dict = {}


def perm_tables(n: int):
    """(positions int64[P, n], packed relations int64[P]), lexicographic order."""
    if n not in _PERM_CACHE:
        perms = list(itertools.permutations(range(n)))
        P = len(perms)
        pos = np.zeros((P, max(n, 1)), dtype=np.int64)
        rel = np.zeros(P, dtype=np.int64)
        for p, perm in enumerate(perms):
            r = 0
            for a in range(n):
                for b in range(a + 1, n):
                    r |= 1 << (8 * perm[a] + perm[b])
            rel[p] = r
            for k, op in enumerate(perm):
                pos[p, op] = k
        _PERM_CACHE[n] = (pos, rel)
    return _PERM_CACHE[n]


def dag_tables(n: int):
    """All packed acyclic relations on n nodes plus per-op visible-set columns."""
    if n not in _DAG_CACHE:
        if n > 4:
            raise ValueError("full DAG enumeration is limited to 4 operations")
        offdiag = [(i, j) for i in range(n) for j in range(n) if i != j]
        rels = []
        for bits in range(1 << len(offdiag)):
            rel = 0
            for t, (i, j) in enumerate(offdiag):
                if (bits >> t) & 1:
                    rel |= 1 << (8 * i + j)
            if _is_acyclic_src(rel, n):
                rels.append(rel)
        rels.sort()
        D = len(rels)
        rel_arr = np.array(rels, dtype=np.int64)
        viscol = np.zeros((D, max(n, 1)), dtype=np.int64)
        for d, rel in enumerate(rels):
            for r in range(n):
                col = 0
                for i in range(n):
                    if (rel >> (8 * i + r)) & 1:
                        col |= 1 << i
                viscol[d, r] = col
        _DAG_CACHE[n] = (rel_arr, viscol)
    return _DAG_CACHE[n]


def armax_tables(n: int):
    """Latest-by-arbitration lookup: [perm, member mask] -> packed index, -1 if empty."""
    if n not in _ARMAX_CACHE:
        pos, _rel = perm_tables(n)
        P = pos.shape[0]
        lut = np.full((P, 1 << n), -1, dtype=np.int64)
        for p in range(P):
            for mask in range(1, 1 << n):
                best, bestpos = -1, -1
                for i in range(n):
                    if (mask >> i) & 1 and pos[p, i] > bestpos:
                        bestpos = pos[p, i]
                        best = i
                lut[p, mask] = best
        _ARMAX_CACHE[n] = lut
    return _ARMAX_CACHE[n]


# ---------------------------------------------------------------------------
# batch sweep kernels for the exhaustive small-history oracle
# ---------------------------------------------------------------------------


def _skeleton_tables_src(
    n, rb, so, wrmask, dag_rel, perm_rel, visbits, caP, wfP, arbits,
):
    """Per-candidate relational predicate tables shared by value variants.

    visbits[d] carries the visibility-only bits (PRAM, MR, RYW, CV) of DAG d;
    caP[d]/wfP[d] pack CausalArbitration / WritesFollowReads over the
    arbitration orders as one bit per order; arbits[p] carries the
    arbitration-only bits (RealTime family, MonotonicWrites).
    """
    D = dag_rel.shape[0]
    P = perm_rel.shape[0]
    full = (1 << n) - 1
    rdmask = (~wrmask) & full

    expw = 0
    expr = 0
    colw = 0
    colr = 0
    for i in range(n):
        if (wrmask >> i) & 1:
            expw |= full << (8 * i)
        else:
            expr |= full << (8 * i)
        colw |= wrmask << (8 * i)
        colr |= rdmask << (8 * i)

    rb_w = rb & expw
    rb_ww = rb_w & colw
    so_ww = so & expw & colw
    so_wr_rd = so & expw & colr
    so_rdrd = so & expr & colr
    so_rdwr = so & expr & colw

    for p in range(P):
        ar = perm_rel[p]
        b = 0
        if rb & ~ar == 0:
            b |= 1 << B_RT
        if rb_w & ~ar == 0:
            b |= 1 << B_RTW
        if rb_ww & ~ar == 0:
            b |= 1 << B_RTWW
        if so_ww & ~ar == 0:
            b |= 1 << B_MW
        arbits[p] = b

    for d in range(D):
        vis = dag_rel[d]
        b = 0
        if so & ~vis == 0:
            b |= 1 << B_PRAM
        if so_wr_rd & ~vis == 0:
            b |= 1 << B_RYW
        # compose(vis, so restricted rd->rd) against vis
        comp = 0
        for i in range(n):
            row = (vis >> (8 * i)) & 0xFF
            acc = 0
            for j in range(n):
                if (row >> j) & 1:
                    acc |= (so_rdrd >> (8 * j)) & 0xFF
            comp |= acc << (8 * i)
        if comp & ~vis == 0:
            b |= 1 << B_MR
        hb = so | vis
        for k in range(n):
            rowk = (hb >> (8 * k)) & 0xFF
            for i in range(n):
                if (hb >> (8 * i + k)) & 1:
                    hb |= rowk << (8 * i)
        if hb & ~vis == 0:
            b |= 1 << B_CV
        visbits[d] = b
        compw = 0
        for i in range(n):
            row = (vis >> (8 * i)) & 0xFF
            acc = 0
            for j in range(n):
                if (row >> j) & 1:
                    acc |= (so_rdwr >> (8 * j)) & 0xFF
            compw |= acc << (8 * i)
        cab = 0
        wfb = 0
        for p in range(P):
            ar = perm_rel[p]
            if hb & ~ar == 0:
                cab |= 1 << p
            if compw & ~ar == 0:
                wfb |= 1 << p
        caP[d] = cab
        wfP[d] = wfb


skeleton_tables_kernel = _jit(_skeleton_tables_src)


def _small_sweep_src(
    n, objwr, seqmask, rvalmask, dag_rel, viscol, perm_rel, armax,
    visbits, caP, wfP, arbits, match_rows, bottom_arr, req, out, ok_tab,
):
    """Per-history model satisfiability over the full (order x DAG) space.

    For history h, out[h] gets bit m set iff some candidate execution carries
    every predicate bit of req[m].  ok_tab is an int64[n, 2**n] workspace.
    """
    H = match_rows.shape[0]
    D = dag_rel.shape[0]
    P = perm_rel.shape[0]
    M = req.shape[0]
    fullM = (1 << M) - 1
    fullP = (1 << P) - 1
    for h in range(H):
        for r in range(n):
            if ((rvalmask >> r) & 1) == 0:
                continue
            ow = objwr[r]
            vw = 0
            while True:
                bits = 0
                for p in range(P):
                    pr = armax[p, vw]
                    if pr < 0:
                        ok = (bottom_arr[h] >> r) & 1
                    else:
                        ok = (match_rows[h, r] >> pr) & 1
                    bits |= ok << p
                ok_tab[r, vw] = bits
                if vw == ow:
                    break
                vw = (vw - ow) & ow
        satmask = 0
        for d in range(D):
            rv = fullP
            sq = fullP
            for r in range(n):
                if (rvalmask >> r) & 1:
                    vw = viscol[d, r] & objwr[r]
                    t = ok_tab[r, vw]
                    rv &= t
                    if (seqmask >> r) & 1:
                        sq &= t
            vb = visbits[d]
            ca = caP[d]
            wf = wfP[d]
            dr = dag_rel[d]
            for p in range(P):
                bits = vb | arbits[p]
                if dr == perm_rel[p]:
                    bits |= 1 << B_SO
                bits |= ((ca >> p) & 1) << B_CA
                bits |= ((wf >> p) & 1) << B_WFR
                bits |= ((rv >> p) & 1) << B_RVAL
                bits |= ((sq >> p) & 1) << B_SEQRVAL
                for m in range(M):
                    if ((satmask >> m) & 1) == 0 and (bits & req[m]) == req[m]:
                        satmask |= 1 << m
                if satmask == fullM:
                    break
            if satmask == fullM:
                break
        out[h] = satmask


small_sweep_kernel = _jit(_small_sweep_src)
