"""Device configuration knobs and their value domains.

A knob is one programmable control on the simulated GPU (power limit, clock,
interconnect power state, ...). The dictionary of known knobs is open for
extension: new ids can be added without touching the arbitration engine.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

from .errors import UnknownKnob, ValueOutOfBounds

KnobValue = Union[float, int, bool, str]


class ValueKind(Enum):
    WATTS = "watts"
    MEGAHERTZ = "megahertz"
    RATIO_PERCENT = "ratio-percent"
    POWER_STATE_LEVEL = "power-state-level"
    BOOLEAN = "boolean"
    ENUM_TOKEN = "enum-token"


NUMERIC_KINDS = frozenset(
    {ValueKind.WATTS, ValueKind.MEGAHERTZ, ValueKind.RATIO_PERCENT, ValueKind.POWER_STATE_LEVEL}
)


@dataclass(frozen=True)
class Knob:
    """One programmable device control.

    Numeric kinds carry an inclusive [min_value, max_value] range; enum kinds
    carry the accepted token set instead.
    """

    id: str
    value_kind: ValueKind
    min_value: float | None = None
    max_value: float | None = None
    tokens: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.value_kind in NUMERIC_KINDS:
            if self.min_value is None or self.max_value is None:
                raise ValueError(f"knob {self.id}: numeric kind requires bounds")
            if self.min_value > self.max_value:
                raise ValueError(f"knob {self.id}: min_value > max_value")
        if self.value_kind is ValueKind.ENUM_TOKEN and not self.tokens:
            raise ValueError(f"knob {self.id}: enum kind requires tokens")

    def validate(self, value: KnobValue) -> None:
        """Raise ValueOutOfBounds unless value fits this knob's domain."""
        kind = self.value_kind
        if kind in NUMERIC_KINDS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueOutOfBounds(f"knob {self.id}: expected a number, got {value!r}")
            if not (self.min_value <= value <= self.max_value):
                raise ValueOutOfBounds(
                    f"knob {self.id}: {value} outside [{self.min_value}, {self.max_value}]"
                )
        elif kind is ValueKind.BOOLEAN:
            if not isinstance(value, bool):
                raise ValueOutOfBounds(f"knob {self.id}: expected a boolean, got {value!r}")
        else:  # ENUM_TOKEN
            if value not in self.tokens:
                raise ValueOutOfBounds(
                    f"knob {self.id}: {value!r} not in {sorted(self.tokens)}"
                )

    def clamp(self, value: KnobValue) -> KnobValue:
        """Clamp a numeric value into bounds; non-numeric kinds pass through."""
        if self.value_kind in NUMERIC_KINDS and isinstance(value, (int, float)):
            return min(max(value, self.min_value), self.max_value)
        return value


@dataclass(frozen=True)
class KnobAssignment:
    """A concrete value for one knob, as carried by a performance mode."""

    knob_id: str
    value: KnobValue


class KnobDictionary:
    """The set of knobs a registry validates assignments against."""

    def __init__(self, knobs: Iterable[Knob]):
        self._knobs: dict[str, Knob] = {}
        for knob in knobs:
            if knob.id in self._knobs:
                raise ValueError(f"duplicate knob id {knob.id}")
            self._knobs[knob.id] = knob

    def __contains__(self, knob_id: str) -> bool:
        return knob_id in self._knobs

    def __iter__(self):
        return iter(self._knobs.values())

    def get(self, knob_id: str) -> Knob:
        try:
            return self._knobs[knob_id]
        except KeyError:
            raise UnknownKnob(f"unknown knob {knob_id!r}") from None

    def validate_assignment(self, assignment: KnobAssignment) -> None:
        self.get(assignment.knob_id).validate(assignment.value)

    def extended(self, *extra: Knob) -> "KnobDictionary":
        """New dictionary with extra knobs added (roadmap extension point)."""
        return KnobDictionary(list(self._knobs.values()) + list(extra))


# Canonical knob ids.
TGP = "TGP"
EDP = "EDP"
MCLK = "MCLK"
XBAR_GPC = "XBAR_GPC"
FMAX = "FMAX"
NVLINK_L1 = "NVLINK_L1"
RBM = "RBM"

EDP_TOKENS = frozenset({"off", "balanced", "aggressive"})

# Per-architecture TGP programming ranges; the floor is a plausible minimum
# board limit, the ceiling is the part's TDP.
_TGP_BOUNDS = {"B200": (200.0, 1000.0), "H100": (200.0, 700.0)}


def standard_knob_dictionary(arch: str = "B200") -> KnobDictionary:
    """The seven-knob dictionary for one GPU architecture."""
    try:
        tgp_min, tgp_max = _TGP_BOUNDS[arch]
    except KeyError:
        raise ValueError(f"unknown architecture {arch!r}") from None
    return KnobDictionary(
        [
            Knob(TGP, ValueKind.WATTS, tgp_min, tgp_max),
            Knob(EDP, ValueKind.ENUM_TOKEN, tokens=EDP_TOKENS),
            Knob(MCLK, ValueKind.MEGAHERTZ, 800.0, 3200.0),
            Knob(XBAR_GPC, ValueKind.RATIO_PERCENT, 0.0, 100.0),
            Knob(FMAX, ValueKind.MEGAHERTZ, 210.0, 2100.0),
            Knob(NVLINK_L1, ValueKind.POWER_STATE_LEVEL, 0, 3),
            Knob(RBM, ValueKind.RATIO_PERCENT, 0.0, 100.0),
        ]
    )
