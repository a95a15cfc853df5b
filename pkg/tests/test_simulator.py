from conchk.checker import check_history
from conchk.simulator import (
    StoreConfig,
    Workload,
    WorkloadConfig,
    generate_workload,
    simulate_store,
    simulate_store_with_stats,
)

import pytest


class TestWorkload:
    def test_single_write(self):
        wl = generate_workload(WorkloadConfig(processes=1, ops=1, read_fraction=0.0), 0)
        assert len(wl.plans) == 1 and len(wl.plans[0]) == 1
        kind, obj, value = wl.plans[0][0]
        assert kind == "wr" and value == 1

    def test_same_seed_same_workload(self):
        cfg = WorkloadConfig(ops=10)
        assert generate_workload(cfg, 5) == generate_workload(cfg, 5)
        assert generate_workload(cfg, 5) != generate_workload(cfg, 6)

    def test_all_reads(self):
        wl = generate_workload(WorkloadConfig(ops=6, read_fraction=1.0), 1)
        assert all(kind == "rd" for plan in wl.plans for (kind, _o, _v) in plan)

    def test_write_values_unique_per_object(self):
        wl = generate_workload(WorkloadConfig(ops=20, read_fraction=0.2), 3)
        seen = set()
        for plan in wl.plans:
            for kind, obj, value in plan:
                if kind == "wr":
                    assert (obj, value) not in seen
                    seen.add((obj, value))


class TestDeterminism:
    def test_byte_exact_history(self):
        from conchk.histfile import format_history

        wl = generate_workload(WorkloadConfig(ops=8), 7)
        cfg = StoreConfig(mode="causal")
        h1 = simulate_store(cfg, wl, 9)
        h2 = simulate_store(cfg, wl, 9)
        assert format_history(h1) == format_history(h2)

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError):
            StoreConfig(mode="paxos")
        with pytest.raises(ValueError):
            StoreConfig(delay_min=3, delay_max=1)
        with pytest.raises(ValueError):
            WorkloadConfig(ops=0)


class TestModeContracts:
    """Small-scale versions of the store guarantees; the acceptance suite
    runs the full-scale ones."""

    def _histories(self, mode, n=25, **kw):
        for seed in range(n):
            wl = generate_workload(WorkloadConfig(ops=8, think_max=2), seed)
            yield simulate_store(StoreConfig(mode=mode, **kw), wl, seed + 1)

    def test_linearizable_mode(self):
        for h in self._histories("linearizable"):
            assert check_history(h, "linearizability").verdict == "satisfied"

    def test_sequential_mode(self):
        for h in self._histories("sequential"):
            assert check_history(h, "sequential").verdict == "satisfied"

    def test_causal_mode(self):
        for h in self._histories("causal"):
            assert check_history(h, "causality").verdict == "satisfied"

    def test_pram_mode(self):
        for h in self._histories("pram"):
            assert check_history(h, "pram").verdict == "satisfied"

    def test_eventual_mode_converges(self):
        for seed in range(25):
            wl = generate_workload(WorkloadConfig(ops=8, think_max=2), seed)
            h, stats = simulate_store_with_stats(
                StoreConfig(mode="eventual", delay_min=0, delay_max=8), wl, seed
            )
            k = stats["max_visibility_lag"]
            r = check_history(h, "strong-eventual", params={"ev_slack": k})
            assert r.verdict == "satisfied"

    def test_zero_delay_eventual_is_linearizable(self):
        for seed in range(25):
            wl = generate_workload(WorkloadConfig(ops=8), seed)
            h = simulate_store(
                StoreConfig(mode="eventual", delay_min=0, delay_max=0), wl, seed
            )
            assert check_history(h, "linearizability").verdict == "satisfied"

    def test_eventual_mode_eventually_diverges_from_linearizability(self):
        found = False
        for seed in range(200):
            wl = generate_workload(WorkloadConfig(ops=8, think_max=2), seed)
            h = simulate_store(
                StoreConfig(mode="eventual", delay_min=0, delay_max=8,
                            repl_delay_min=4, repl_delay_max=12),
                wl, seed + 500,
            )
            if check_history(h, "linearizability").verdict == "violated":
                found = True
                break
        assert found

    def test_causal_mode_eventually_diverges_from_sequential(self):
        found = False
        for seed in range(400):
            wl = generate_workload(WorkloadConfig(ops=8, think_max=2), seed)
            h = simulate_store(
                StoreConfig(mode="causal", delay_min=0, delay_max=2,
                            repl_delay_min=6, repl_delay_max=14),
                wl, seed,
            )
            if check_history(h, "sequential").verdict == "violated":
                found = True
                break
        assert found

    def test_non_sticky_pram_can_lose_read_your_writes(self):
        # with reads spread over replicas some run misses the session's own write
        from conchk.predicates import custom_model

        model = custom_model(("ReadYourWrites", "RVal"))
        vio = 0
        for seed in range(150):
            wl = generate_workload(WorkloadConfig(ops=8, think_max=1), seed)
            h = simulate_store(
                StoreConfig(mode="pram", sticky=False, delay_min=0, delay_max=2,
                            repl_delay_min=8, repl_delay_max=16),
                wl, seed,
            )
            if check_history(h, model).verdict == "violated":
                vio += 1
        assert vio > 0
