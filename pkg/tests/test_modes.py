"""Mode registry and arbitration engine tests.

Randomized cases are checked against the subset-enumeration oracle in
oracle.py, which was written first and never shares code with the engine.
"""
from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from powerprofiles.errors import (
    DuplicateModeId,
    DuplicatePriority,
    UnknownKnob,
    UnknownMode,
    ValueOutOfBounds,
)
from powerprofiles.knobs import (
    Knob,
    KnobAssignment,
    KnobDictionary,
    ValueKind,
    standard_knob_dictionary,
)
from powerprofiles.modes import (
    ConfigEntry,
    EffectiveConfig,
    ModeRegistry,
    Overlap,
    PerformanceMode,
    explain,
)

from .oracle import oracle_arbitrate


def mode(mode_id, priority, assignments=(), conflicts=(), **kw):
    return PerformanceMode(
        mode_id=mode_id,
        priority=priority,
        assignments=tuple(KnobAssignment(k, v) for k, v in assignments),
        conflicts_with=frozenset(conflicts),
        **kw,
    )


@pytest.fixture
def registry():
    return ModeRegistry(standard_knob_dictionary("B200"))


class TestRegistration:
    def test_conflict_symmetrized(self, registry):
        registry.register(mode("memory", 5))
        registry.register(mode("compute", 10, conflicts={"memory"}))
        assert "compute" in registry.conflicts_of("memory")
        assert "memory" in registry.conflicts_of("compute")

    def test_forward_conflict_reference_materializes_late(self, registry):
        registry.register(mode("compute", 10, conflicts={"memory"}))
        registry.register(mode("memory", 5))
        assert "compute" in registry.conflicts_of("memory")

    def test_duplicate_priority_rejected(self, registry):
        registry.register(mode("a", 10))
        with pytest.raises(DuplicatePriority):
            registry.register(mode("b", 10))

    def test_duplicate_id_rejected(self, registry):
        registry.register(mode("a", 10))
        with pytest.raises(DuplicateModeId):
            registry.register(mode("a", 11))

    def test_unknown_knob_rejected(self, registry):
        with pytest.raises(UnknownKnob):
            registry.register(mode("a", 10, assignments=[("NO_SUCH", 1)]))

    def test_tgp_above_tdp_rejected(self, registry):
        # B200 TGP knob is bounded by the 1000 W TDP
        with pytest.raises(ValueOutOfBounds):
            registry.register(mode("a", 10, assignments=[("TGP", 1200)]))

    def test_enum_knob_value_checked(self, registry):
        with pytest.raises(ValueOutOfBounds):
            registry.register(mode("a", 10, assignments=[("EDP", "turbo")]))

    def test_self_conflict_rejected(self):
        with pytest.raises(ValueError):
            mode("a", 10, conflicts={"a"})

    def test_double_assignment_of_one_knob_rejected(self):
        with pytest.raises(ValueError):
            mode("a", 10, assignments=[("TGP", 900), ("TGP", 800)])

    def test_unregister_removes_mode_and_enablement(self, registry):
        registry.register(mode("a", 10))
        registry.set_enabled("a", True)
        registry.unregister("a")
        assert registry.enabled == frozenset()
        with pytest.raises(UnknownMode):
            registry.unregister("a")


class TestEnablement:
    def test_enable_idempotent(self, registry):
        registry.register(mode("compute", 10))
        registry.set_enabled("compute", True)
        assert registry.set_enabled("compute", True) == frozenset({"compute"})

    def test_base_plus_modifier_coexist(self, registry):
        registry.register(mode("compute", 10))
        registry.register(mode("max_p", 20))
        registry.set_enabled("compute", True)
        registry.set_enabled("max_p", True)
        assert registry.enabled == frozenset({"compute", "max_p"})

    def test_disable_unregistered_raises(self, registry):
        with pytest.raises(UnknownMode):
            registry.set_enabled("ghost", False)


class TestArbitration:
    def test_overlap_merge(self, registry):
        registry.register(
            mode("compute", 10, assignments=[("TGP", 900), ("FMAX", 1800)])
        )
        registry.register(mode("max_p", 20, assignments=[("FMAX", 1965)]))
        registry.set_enabled("compute", True)
        registry.set_enabled("max_p", True)
        config = registry.arbitrate()
        assert config.entries == {
            "TGP": ConfigEntry(900, "compute"),
            "FMAX": ConfigEntry(1965, "max_p"),
        }
        assert config.overlaps == (Overlap("FMAX", "compute", "max_p"),)
        assert config.discarded == ()
        assert config.active_modes == ("max_p", "compute")

    def test_conflict_discards_lower_priority(self, registry):
        registry.register(
            mode("compute", 20, assignments=[("TGP", 900)], conflicts={"memory"})
        )
        registry.register(mode("memory", 10, assignments=[("MCLK", 3000)]))
        registry.set_enabled("compute", True)
        registry.set_enabled("memory", True)
        config = registry.arbitrate()
        assert [d.mode_id for d in config.discarded] == ["memory"]
        assert config.discarded[0].lost_to == "compute"
        assert set(config.entries) == {"TGP"}

    def test_single_mode_identity(self, registry):
        registry.register(mode("m", 7, assignments=[("TGP", 800), ("RBM", 50)]))
        registry.set_enabled("m", True)
        config = registry.arbitrate()
        assert config.entries == {
            "TGP": ConfigEntry(800, "m"),
            "RBM": ConfigEntry(50, "m"),
        }
        assert config.discarded == () and config.overlaps == ()

    def test_empty_enabled_yields_empty_config(self, registry):
        registry.register(mode("m", 7, assignments=[("TGP", 800)]))
        assert registry.arbitrate() == EffectiveConfig({}, (), (), ())

    def test_mode_blocked_only_by_discarded_mode_survives(self, registry):
        # a(30) -x- b(20) -x- c(10): b loses to a, so c never sees a blocker
        registry.register(mode("a", 30, conflicts={"b"}))
        registry.register(mode("b", 20, conflicts={"c"}))
        registry.register(mode("c", 10))
        for m in "abc":
            registry.set_enabled(m, True)
        config = registry.arbitrate()
        assert config.active_modes == ("a", "c")
        assert [d.mode_id for d in config.discarded] == ["b"]
        assert config.discarded[0].lost_to == "a"


class TestQueryPriorities:
    def test_sorted_descending(self, registry):
        registry.register(mode("a", 5))
        registry.register(mode("b", 9))
        assert [row[0] for row in registry.query_priorities()] == ["b", "a"]

    def test_empty(self, registry):
        assert registry.query_priorities() == []

    def test_includes_normalized_masks(self, registry):
        registry.register(mode("a", 5))
        registry.register(mode("b", 9, conflicts={"a"}))
        rows = {mid: mask for mid, _, mask in registry.query_priorities()}
        assert rows["a"] == frozenset({"b"})


class TestExplain:
    def _conflicted_config(self, registry):
        registry.register(
            mode("compute", 20, assignments=[("TGP", 900), ("FMAX", 1800)], conflicts={"memory"})
        )
        registry.register(mode("memory", 10, assignments=[("MCLK", 3000)]))
        registry.register(mode("max_p", 30, assignments=[("FMAX", 1965)]))
        for m in ("compute", "memory", "max_p"):
            registry.set_enabled(m, True)
        return registry.arbitrate()

    def test_report_names_discard_and_reason(self, registry):
        report = explain(self._conflicted_config(registry))
        assert "memory: conflict-lost-to compute" in report

    def test_golden_layout(self, registry):
        report = explain(self._conflicted_config(registry))
        assert report == (
            "active modes (highest priority first): max_p, compute\n"
            "knob assignments:\n"
            "  FMAX = 1965 (from max_p)\n"
            "  TGP = 900 (from compute)\n"
            "overlaps (lower-priority assignment superseded):\n"
            "  FMAX: compute superseded by max_p\n"
            "discarded modes:\n"
            "  memory: conflict-lost-to compute\n"
        )

    def test_no_conflicts_line(self, registry):
        registry.register(mode("m", 7, assignments=[("TGP", 800)]))
        registry.set_enabled("m", True)
        report = explain(registry.arbitrate())
        assert "no conflicts" in report

    def test_rendering_deterministic(self, registry):
        config = self._conflicted_config(registry)
        assert explain(config) == explain(config)


# ---------------------------------------------------------------------------
# Randomized comparison against the subset-enumeration oracle
# ---------------------------------------------------------------------------

TEST_KNOBS = KnobDictionary(
    [Knob(f"K{i}", ValueKind.RATIO_PERCENT, 0.0, 100.0) for i in range(4)]
)


def random_case(rng: random.Random, max_modes: int = 6, n_knobs: int = 4):
    n = rng.randint(0, max_modes)
    priorities = rng.sample(range(1, 100), n)
    modes = []
    for i in range(n):
        assignments = tuple(
            KnobAssignment(f"K{k}", rng.randint(0, 100))
            for k in range(n_knobs)
            if rng.random() < 0.5
        )
        conflicts = frozenset(
            f"m{j}" for j in range(n) if j != i and rng.random() < 0.25
        )
        modes.append(
            PerformanceMode(
                mode_id=f"m{i}",
                priority=priorities[i],
                assignments=assignments,
                conflicts_with=conflicts,
            )
        )
    enabled = [m.mode_id for m in modes if rng.random() < 0.75]
    return modes, enabled


def build_registry(modes, enabled):
    registry = ModeRegistry(TEST_KNOBS)
    for m in modes:
        registry.register(m)
    for mid in enabled:
        registry.set_enabled(mid, True)
    return registry


def assert_invariants(modes, enabled, config: EffectiveConfig):
    by_id = {m.mode_id: m for m in modes}
    active = set(config.active_modes)
    discarded_ids = [d.mode_id for d in config.discarded]
    # traceability: every entry is the winning mode's own assignment
    for knob_id, entry in config.entries.items():
        assert entry.mode_id in active
        owner = by_id[entry.mode_id]
        assert any(
            a.knob_id == knob_id and a.value == entry.value for a in owner.assignments
        )
    # discard totality: one record each, no knob entries from discarded modes
    assert len(discarded_ids) == len(set(discarded_ids))
    assert active.isdisjoint(discarded_ids)
    assert set(enabled) == active | set(discarded_ids)
    for entry in config.entries.values():
        assert entry.mode_id not in discarded_ids
    # survivor maximality: each discarded mode conflicts with a strictly
    # higher-priority survivor
    sym = {m.mode_id: set() for m in modes}
    for m in modes:
        for other in m.conflicts_with:
            if other in sym:
                sym[m.mode_id].add(other)
                sym[other].add(m.mode_id)
    for d in config.discarded:
        blockers = [a for a in active if a in sym[d.mode_id]]
        assert blockers
        assert max(by_id[b].priority for b in blockers) > by_id[d.mode_id].priority
        assert d.lost_to in blockers


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=300, deadline=None)
def test_engine_matches_oracle(seed):
    modes, enabled = random_case(random.Random(seed))
    config = build_registry(modes, enabled).arbitrate()
    assert config == oracle_arbitrate(modes, enabled)
    assert_invariants(modes, enabled, config)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_order_independence_and_idempotence(seed):
    rng = random.Random(seed)
    modes, enabled = random_case(rng)
    registry = build_registry(modes, enabled)
    reference = registry.arbitrate()
    assert registry.arbitrate() == reference  # idempotent

    # churn enable/disable in random orders, ending at the same set
    for _ in range(5):
        other = ModeRegistry(TEST_KNOBS)
        for m in modes:
            other.register(m)
        ops = [(mid, True) for mid in enabled]
        ops += [(m.mode_id, False) for m in modes if rng.random() < 0.4]
        rng.shuffle(ops)
        for mid, on in ops:
            other.set_enabled(mid, on)
        for mid in enabled:  # re-assert final membership
            other.set_enabled(mid, True)
        for m in modes:
            if m.mode_id not in enabled:
                other.set_enabled(m.mode_id, False)
        assert other.arbitrate() == reference
