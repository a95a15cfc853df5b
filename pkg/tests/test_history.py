import pytest
from hypothesis import given, settings, strategies as st

from conchk import (
    BOTTOM,
    PLACEHOLDER,
    HistoryError,
    Operation,
    Relation,
    build_history,
    concur_writes,
    execution,
    happens_before,
    per_object_happens_before,
    read,
    write,
)


class TestOperationInvariants:
    def test_pending_markers_travel_together(self):
        with pytest.raises(HistoryError, match="op 0"):
            Operation(0, "pa", "wr", "x", 1, None, 0, 10)
        with pytest.raises(HistoryError, match="op 1"):
            Operation(1, "pa", "wr", "x", 1, "ok", 0, None)

    def test_return_before_start_rejected(self):
        with pytest.raises(HistoryError, match="rtime 5 precedes"):
            write(3, "pa", "x", 1, 10, 5)

    def test_reads_carry_placeholder_input(self):
        with pytest.raises(HistoryError):
            Operation(0, "pa", "rd", "x", 1, 1, 0, 10)
        with pytest.raises(HistoryError):
            Operation(0, "pa", "wr", "x", PLACEHOLDER, "ok", 0, 10)

    def test_zero_length_interval_allowed(self):
        op = write(0, "pa", "x", 1, 5, 5)
        assert op.stime == op.rtime


class TestBuildHistory:
    def test_empty_history(self):
        h = build_history([])
        assert len(h) == 0
        assert h.rb.pairs == frozenset()
        assert h.so.pairs == frozenset()
        assert h.concur.pairs == frozenset()

    def test_sequential_write_read(self, write_then_read):
        h = write_then_read
        assert h.rb.pairs == {(0, 1)}
        assert {(0, 0), (1, 1)} <= h.ss.pairs
        assert (0, 1) not in h.ss.pairs
        assert h.so.pairs == frozenset()
        assert {(0, 1), (1, 0)} <= h.ob.pairs
        assert h.concur.pairs == frozenset()

    def test_overlapping_ops_are_concurrent(self):
        h = build_history([write(0, "pa", "x", 1, 0, 30), read(1, "pb", "x", 1, 10, 20)])
        assert h.rb.pairs == frozenset()
        assert h.concur.pairs == {(0, 1), (1, 0)}

    def test_duplicate_ids_rejected(self):
        with pytest.raises(HistoryError, match="duplicate operation id 7"):
            build_history([write(7, "pa", "x", 1, 0, 1), write(7, "pa", "x", 2, 2, 3)])


class TestRelationAlgebra:
    def setup_method(self):
        self.carrier = (0, 1, 2)

    def test_transitive_closure(self):
        r = Relation({(0, 1), (1, 2)}, self.carrier)
        assert r.transitive_closure().pairs == {(0, 1), (1, 2), (0, 2)}

    def test_two_cycle_not_acyclic(self):
        assert not Relation({(0, 1), (1, 0)}, self.carrier).is_acyclic()

    def test_compose(self):
        r1 = Relation({(0, 1)}, self.carrier)
        r2 = Relation({(1, 2)}, self.carrier)
        assert r1.compose(r2).pairs == {(0, 2)}

    def test_inverse_subset_total(self):
        r = Relation({(0, 1), (0, 2), (1, 2)}, self.carrier)
        assert r.inverse().pairs == {(1, 0), (2, 0), (2, 1)}
        assert Relation({(0, 1)}, self.carrier).is_subset(r)
        assert r.is_total_order(self.carrier)
        assert not Relation({(0, 1)}, self.carrier).is_total_order(self.carrier)

    def test_mismatched_carriers_rejected(self):
        from conchk.history import CarrierMismatchError

        r1 = Relation({(0, 1)}, (0, 1))
        r2 = Relation({(0, 1)}, (0, 1, 2))
        with pytest.raises(CarrierMismatchError):
            r1.compose(r2)

    def test_kind_restriction(self, write_then_read):
        h = write_then_read
        assert h.project(h.rb, "wr", "rd").pairs == {(0, 1)}
        assert h.project(h.rb, "rd", "wr").pairs == frozenset()


class TestConcurWrites:
    def test_single_op_sees_nothing(self):
        h = build_history([write(0, "pa", "x", 1, 0, 1)])
        assert concur_writes(h, h.by_id[0]) == frozenset()

    def test_overlapping_same_object_write(self):
        h = build_history([write(0, "pa", "x", 1, 0, 30), read(1, "pb", "x", 2, 10, 20)])
        assert {op.id for op in concur_writes(h, h.by_id[1])} == {0}

    def test_disjoint_objects_not_concurrent(self):
        h = build_history([write(0, "pa", "x", 1, 0, 30), read(1, "pb", "y", 2, 10, 20)])
        assert concur_writes(h, h.by_id[1]) == frozenset()

    def test_foreign_operation_rejected(self):
        h = build_history([write(0, "pa", "x", 1, 0, 1)])
        with pytest.raises(HistoryError):
            concur_writes(h, write(5, "pz", "x", 1, 0, 1))


class TestHappensBefore:
    def test_empty_relations(self):
        h = build_history([write(0, "pa", "x", 1, 0, 1), write(1, "pb", "x", 2, 0, 1)])
        a = execution(h, [], [0, 1])
        assert happens_before(a).pairs == frozenset()

    def test_closure_of_so_and_vis(self):
        h = build_history(
            [
                write(0, "pa", "x", 1, 0, 1),
                write(1, "pa", "x", 2, 2, 3),
                write(2, "pb", "x", 3, 4, 5),
            ]
        )
        a = execution(h, [(1, 2)], [0, 1, 2])
        hb = happens_before(a)
        assert {(0, 1), (1, 2), (0, 2)} <= hb.pairs

    def test_cyclic_happens_before_detected(self):
        h = build_history([write(0, "pa", "x", 1, 0, 1), write(1, "pa", "x", 2, 2, 3)])
        # session order 0 -> 1 plus a visibility back-edge 1 -> 0
        a = execution(h, [(1, 0)], [0, 1])
        assert not happens_before(a).is_acyclic()

    def test_per_object_drops_cross_object_session_edges(self):
        h = build_history([write(0, "pa", "x", 1, 0, 1), write(1, "pa", "y", 2, 2, 3)])
        a = execution(h, [], [0, 1])
        assert per_object_happens_before(a).pairs == frozenset()
        assert happens_before(a).pairs == {(0, 1)}

    def test_per_object_keeps_same_object_session_edges(self):
        h = build_history([write(0, "pa", "x", 1, 0, 1), write(1, "pa", "x", 2, 2, 3)])
        a = execution(h, [], [0, 1])
        assert (0, 1) in per_object_happens_before(a).pairs

    def test_per_object_keeps_cross_object_vis_edges(self):
        h = build_history([write(0, "pa", "x", 1, 0, 1), write(1, "pb", "y", 2, 2, 3)])
        a = execution(h, [(0, 1)], [0, 1])
        assert (0, 1) in per_object_happens_before(a).pairs


# -- property tests ---------------------------------------------------------


@st.composite
def small_histories(draw):
    n = draw(st.integers(1, 6))
    ops = []
    clocks = {}
    for i in range(n):
        proc = f"p{draw(st.integers(0, 2))}"
        obj = f"o{draw(st.integers(0, 1))}"
        start = clocks.get(proc, 0) + draw(st.integers(1, 3))
        dur = draw(st.integers(0, 4))
        pending = draw(st.booleans()) and draw(st.booleans())
        if draw(st.booleans()):
            oval = None if pending else draw(st.sampled_from([BOTTOM, 1, 2]))
            ops.append(read(i, proc, obj, oval, start, None if pending else start + dur))
        else:
            ops.append(
                write(i, proc, obj, draw(st.integers(1, 2)), start,
                      None if pending else start + dur)
            )
        clocks[proc] = start + dur if not pending else start + 100
    return build_history(ops)


@given(small_histories())
@settings(max_examples=150, deadline=None)
def test_relation_invariants(h):
    assert h.so.pairs <= h.rb.pairs
    assert h.so.pairs <= h.ss.pairs
    assert h.concur.pairs.isdisjoint(h.rb.pairs)
    # ss and ob are equivalences over the history
    for rel in (h.ss, h.ob):
        for i in h.ids:
            assert (i, i) in rel.pairs
        assert rel.inverse().pairs == rel.pairs
        assert rel.compose(rel).pairs <= rel.pairs
    # concur is symmetric
    assert h.concur.inverse().pairs == h.concur.pairs
    # never-returning operations have no rb successors
    for op in h.ops:
        if not op.returned:
            assert not h.rb.image((op.id,))


@given(small_histories())
@settings(max_examples=100, deadline=None)
def test_closure_idempotent_and_rb_semiorder(h):
    closed = h.rb.transitive_closure()
    assert closed.transitive_closure().pairs == closed.pairs
    assert closed.pairs == h.rb.pairs  # interval orders are already transitive


@given(small_histories(), st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_happens_before_contains_so_and_vis(h, rng):
    ids = list(h.ids)
    rng.shuffle(ids)
    pos = {x: k for k, x in enumerate(ids)}
    vis = {
        (a, b)
        for a in h.ids
        for b in h.ids
        if a != b and pos[a] < pos[b] and rng.random() < 0.4
    }
    a = execution(h, vis, ids)
    hb = happens_before(a)
    assert h.so.pairs <= hb.pairs
    assert vis <= hb.pairs
    assert per_object_happens_before(a).pairs <= hb.pairs
