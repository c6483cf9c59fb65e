"""Performance-mode registry and the priority/conflict arbitration engine.

A performance mode is a named set of knob assignments with a unique priority
and a conflict mask. Any number of modes may be enabled at once; arbitration
deterministically resolves the enabled set into one effective device
configuration in two phases:

1. Conflict resolution: walk enabled modes in descending priority; a mode
   survives iff it conflicts with no already-surviving mode, otherwise it is
   discarded with a reason naming the highest-priority survivor it lost to.
2. Merge: each knob assigned by at least one survivor takes its value from
   the highest-priority surviving assigner; lower-priority assignments of the
   same knob are reported as overlaps; disjoint knobs merge untouched.

Arbitration is a pure function of the registry snapshot: the result depends
only on the enabled *set*, never on the order of enable/disable calls.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import (
    DuplicateModeId,
    DuplicatePriority,
    UnknownMode,
)
from .knobs import KnobAssignment, KnobDictionary, KnobValue


@dataclass(frozen=True)
class PerformanceMode:
    """Named knob recipe with an arbitration priority and conflict mask."""

    mode_id: str
    priority: int
    assignments: tuple[KnobAssignment, ...] = ()
    conflicts_with: frozenset[str] = frozenset()
    display_name: str = ""
    provenance: str = ""

    def __post_init__(self) -> None:
        knob_ids = [a.knob_id for a in self.assignments]
        if len(knob_ids) != len(set(knob_ids)):
            raise ValueError(f"mode {self.mode_id}: multiple assignments for one knob")
        if self.mode_id in self.conflicts_with:
            raise ValueError(f"mode {self.mode_id}: conflicts with itself")

    def assignment_for(self, knob_id: str) -> KnobAssignment | None:
        for a in self.assignments:
            if a.knob_id == knob_id:
                return a
        return None


@dataclass(frozen=True)
class ConfigEntry:
    """Winning value for one knob, traceable to the mode that set it."""

    value: KnobValue
    mode_id: str


@dataclass(frozen=True)
class Discard:
    """A mode dropped in phase 1, with the survivor it lost to."""

    mode_id: str
    lost_to: str

    @property
    def reason(self) -> str:
        return f"conflict-lost-to {self.lost_to}"


@dataclass(frozen=True)
class Overlap:
    """A knob assigned by two survivors; the lower-priority one lost."""

    knob_id: str
    losing_mode_id: str
    winning_mode_id: str


@dataclass(frozen=True, eq=True)
class EffectiveConfig:
    """Arbitrated per-knob configuration with full traceability."""

    entries: dict[str, ConfigEntry] = field(default_factory=dict)
    discarded: tuple[Discard, ...] = ()
    overlaps: tuple[Overlap, ...] = ()
    active_modes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "entries": {
                k: {"value": e.value, "mode": e.mode_id}
                for k, e in sorted(self.entries.items())
            },
            "discarded": [
                {"mode": d.mode_id, "reason": d.reason} for d in self.discarded
            ],
            "overlaps": [
                {"knob": o.knob_id, "loser": o.losing_mode_id, "winner": o.winning_mode_id}
                for o in self.overlaps
            ],
            "active_modes": list(self.active_modes),
        }


class ModeRegistry:
    """Holds registered modes, the enabled set, and runs arbitration.

    Registration validates knob references/bounds and enforces unique ids and
    priorities. Conflict masks are symmetric after normalization: if A lists
    B, B effectively conflicts with A, whichever registered first.
    """

    def __init__(self, knobs: KnobDictionary):
        self.knobs = knobs
        self._modes: dict[str, PerformanceMode] = {}
        self._enabled: set[str] = set()

    # -- lifecycle ----------------------------------------------------------

    def register(self, mode: PerformanceMode) -> str:
        if mode.mode_id in self._modes:
            raise DuplicateModeId(f"mode {mode.mode_id!r} already registered")
        taken = {m.priority: m.mode_id for m in self._modes.values()}
        if mode.priority in taken:
            raise DuplicatePriority(
                f"priority {mode.priority} already used by {taken[mode.priority]!r}"
            )
        for a in mode.assignments:
            self.knobs.validate_assignment(a)
        self._modes[mode.mode_id] = mode
        return mode.mode_id

    def unregister(self, mode_id: str) -> None:
        if mode_id not in self._modes:
            raise UnknownMode(f"mode {mode_id!r} not registered")
        del self._modes[mode_id]
        self._enabled.discard(mode_id)

    def set_enabled(self, mode_id: str, on: bool) -> frozenset[str]:
        if mode_id not in self._modes:
            raise UnknownMode(f"mode {mode_id!r} not registered")
        if on:
            self._enabled.add(mode_id)
        else:
            self._enabled.discard(mode_id)
        return frozenset(self._enabled)

    # -- queries ------------------------------------------------------------

    @property
    def enabled(self) -> frozenset[str]:
        return frozenset(self._enabled)

    def mode_ids(self) -> list[str]:
        return list(self._modes)

    def get(self, mode_id: str) -> PerformanceMode:
        try:
            return self._modes[mode_id]
        except KeyError:
            raise UnknownMode(f"mode {mode_id!r} not registered") from None

    def conflicts_of(self, mode_id: str) -> frozenset[str]:
        """Declared conflicts plus reverse edges from other registered modes."""
        mode = self.get(mode_id)
        reverse = {
            m.mode_id
            for m in self._modes.values()
            if mode_id in m.conflicts_with
        }
        return frozenset(mode.conflicts_with | reverse)

    def query_priorities(self) -> list[tuple[str, int, frozenset[str]]]:
        """(mode_id, priority, normalized conflict mask), descending priority."""
        return [
            (m.mode_id, m.priority, self.conflicts_of(m.mode_id))
            for m in sorted(self._modes.values(), key=lambda m: -m.priority)
        ]

    # -- arbitration --------------------------------------------------------

    def _conflicts(self, a: PerformanceMode, b: PerformanceMode) -> bool:
        return b.mode_id in a.conflicts_with or a.mode_id in b.conflicts_with

    def arbitrate(self) -> EffectiveConfig:
        enabled_desc = sorted(
            (self._modes[mid] for mid in self._enabled), key=lambda m: -m.priority
        )

        survivors: list[PerformanceMode] = []
        discarded: list[Discard] = []
        for candidate in enabled_desc:
            blockers = [s for s in survivors if self._conflicts(candidate, s)]
            if blockers:
                # survivors are in descending priority; first blocker is the
                # highest-priority one
                discarded.append(Discard(candidate.mode_id, lost_to=blockers[0].mode_id))
            else:
                survivors.append(candidate)

        entries: dict[str, ConfigEntry] = {}
        overlaps: list[Overlap] = []
        assigners: dict[str, list[PerformanceMode]] = {}
        for m in survivors:
            for a in m.assignments:
                assigners.setdefault(a.knob_id, []).append(m)
        for knob_id in sorted(assigners):
            winner, *losers = assigners[knob_id]
            entries[knob_id] = ConfigEntry(
                value=winner.assignment_for(knob_id).value, mode_id=winner.mode_id
            )
            overlaps.extend(
                Overlap(knob_id, loser.mode_id, winner.mode_id) for loser in losers
            )

        return EffectiveConfig(
            entries=entries,
            discarded=tuple(discarded),
            overlaps=tuple(overlaps),
            active_modes=tuple(m.mode_id for m in survivors),
        )


def _fmt_value(value: KnobValue) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def explain(config: EffectiveConfig) -> str:
    """Human-readable conflict report; byte-stable for a given config."""
    lines = [
        "active modes (highest priority first): "
        + (", ".join(config.active_modes) if config.active_modes else "none")
    ]
    if config.entries:
        lines.append("knob assignments:")
        lines.extend(
            f"  {knob_id} = {_fmt_value(entry.value)} (from {entry.mode_id})"
            for knob_id, entry in sorted(config.entries.items())
        )
    if not config.overlaps and not config.discarded:
        lines.append("no conflicts")
    else:
        if config.overlaps:
            lines.append("overlaps (lower-priority assignment superseded):")
            lines.extend(
                f"  {o.knob_id}: {o.losing_mode_id} superseded by {o.winning_mode_id}"
                for o in config.overlaps
            )
        if config.discarded:
            lines.append("discarded modes:")
            lines.extend(f"  {d.mode_id}: {d.reason}" for d in config.discarded)
    return "\n".join(lines) + "\n"


def arbitrate(registry: ModeRegistry) -> EffectiveConfig:
    """Module-level convenience wrapper over ModeRegistry.arbitrate."""
    return registry.arbitrate()


def modes_from_pairs(
    pairs: Iterable[tuple[str, int, dict[str, KnobValue], set[str]]]
) -> list[PerformanceMode]:
    """Small helper for building mode lists in tests and fixtures."""
    return [
        PerformanceMode(
            mode_id=mid,
            priority=prio,
            assignments=tuple(KnobAssignment(k, v) for k, v in sorted(values.items())),
            conflicts_with=frozenset(conflicts),
        )
        for mid, prio, values, conflicts in pairs
    ]
