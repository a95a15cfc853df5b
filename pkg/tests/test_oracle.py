"""The brute-force oracle and the exhaustive small-history space."""

import random

import pytest

from conchk import build_history, read, write
from conchk.checker import check_history
from conchk.oracle import (
    SMALL_SPACE_MODELS,
    all_executions,
    canonical_attr_rows,
    enumerate_small_histories,
    history_from_parts,
    interval_patterns,
    oracle_check,
    oracle_small_space_verdicts,
)


def test_all_executions_counts():
    h = build_history([write(0, "pa", "x", 1, 0, 1), read(1, "pb", "x", 1, 2, 3)])
    execs = list(all_executions(h))
    # 2 orders x 3 acyclic visibility relations over 2 nodes
    assert len(execs) == 6


def test_oracle_rejects_large_histories():
    h = build_history([write(i, "pa", "x", 1, 2 * i, 2 * i + 1) for i in range(5)])
    with pytest.raises(ValueError):
        oracle_check(h, "pram")


def test_oracle_evaluator_modes_agree(write_then_read, concurrent_unwritten_read):
    for h in (write_then_read, concurrent_unwritten_read):
        for model in ("linearizability", "regular", "safe", "causality"):
            assert oracle_check(h, model, evaluator="packed") == oracle_check(
                h, model, evaluator="reference"
            )


def test_interval_patterns_are_deduplicated_and_realizable():
    for n in (1, 2, 3):
        pats = interval_patterns(n)
        assert len({p.rb for p in pats}) == len(pats)
        for p in pats:
            for i in range(n):
                assert p.stimes[i] < p.rtimes[i]
            seen = sorted(p.stimes + p.rtimes)
            assert len(set(seen)) == 2 * n  # all endpoints distinct


def test_canonical_rows_are_orbit_minima():
    rows = canonical_attr_rows(2)
    # representatives are closed under being minimal: re-canonicalizing is a no-op
    again = canonical_attr_rows(2)
    assert (rows == again).all()
    assert len(rows) == 44


def test_small_space_counts():
    assert len(interval_patterns(1)) == 1
    assert len(interval_patterns(2)) == 2
    assert len(interval_patterns(3)) == 6
    assert len(interval_patterns(4)) == 24
    assert len(canonical_attr_rows(1)) == 3


def test_fast_sweep_matches_generic_oracle_exhaustively_small():
    models = SMALL_SPACE_MODELS
    count = 0
    for pattern, attrs, satmask in oracle_small_space_verdicts(models, max_ops=2):
        h = history_from_parts(pattern, attrs)
        for m, name in enumerate(models):
            assert oracle_check(h, name) == bool(satmask >> m & 1), (
                name, [op.describe() for op in h.ops])
        count += 1
    assert count == 3 + 2 * 44


def test_fast_sweep_matches_checker_sampled_n3():
    models = SMALL_SPACE_MODELS
    rng = random.Random(0)
    records = list(oracle_small_space_verdicts(models, max_ops=3))
    sample = rng.sample(records, 150)
    for pattern, attrs, satmask in sample:
        h = history_from_parts(pattern, attrs)
        for m, name in enumerate(models):
            got = check_history(h, name).verdict == "satisfied"
            assert got == bool(satmask >> m & 1), (
                name, [op.describe() for op in h.ops])


def test_enumerate_small_histories_yields_valid_histories():
    seen = 0
    for h in enumerate_small_histories(max_ops=2):
        assert 1 <= len(h) <= 2
        seen += 1
    assert seen == 91
