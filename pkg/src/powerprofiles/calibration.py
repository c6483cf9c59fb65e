"""Calibration document: shipped mode recipes, profiles and response factors.

The document is a single YAML file. ``CalibrationDocument.load`` parses and
validates it once; everything downstream (catalog, fleet simulator, savings
reports) works off the in-memory structures defined here.

Response lookup resolves in order: exact ``(arch, application, profile)``
row, then the ``(arch, class, profile)`` class-average row for the
application's class, then :class:`~powerprofiles.errors.NoCalibrationRow`.
The ``DEFAULT`` profile always resolves to unit factors and needs no row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

import yaml

from .errors import NoCalibrationRow, RecipeFileMissing, UnknownKnob
from .knobs import KnobAssignment, standard_knob_dictionary
from .modes import PerformanceMode

#: Profile name meaning "leave every knob at hardware defaults".
DEFAULT_PROFILE = "DEFAULT"

#: Architectures the shipped knob dictionaries cover.
SUPPORTED_ARCHS = ("B200", "H100")

_FACTOR_MIN = 0.0
_FACTOR_MAX = 1.5


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class ModeRecipe:
    """A mode definition whose knob values may vary per architecture."""

    mode_id: str
    priority: int
    conflicts: tuple[str, ...]
    assignments: Mapping[str, object]  # knob id -> scalar or {arch: scalar}
    display_name: str = ""

    def value_for(self, knob_id: str, arch: str) -> object:
        raw = self.assignments[knob_id]
        if isinstance(raw, Mapping):
            if arch not in raw:
                raise ValueError(
                    f"mode {self.mode_id!r} assigns {knob_id} with no value for arch {arch!r}"
                )
            return raw[arch]
        return raw

    def materialize(self, arch: str) -> PerformanceMode:
        """Resolve per-arch values into a concrete :class:`PerformanceMode`."""
        assignments = tuple(
            KnobAssignment(knob_id, self.value_for(knob_id, arch))
            for knob_id in self.assignments
        )
        return PerformanceMode(
            mode_id=self.mode_id,
            priority=self.priority,
            assignments=assignments,
            conflicts_with=frozenset(self.conflicts),
            display_name=self.display_name or self.mode_id,
            provenance="calibration document",
        )


@dataclass(frozen=True)
class HintAdjustment:
    """Replace (``set``) or offset (``add``) one knob's value in a recipe."""

    knob_id: str
    set_value: Optional[object] = None
    add_value: Optional[float] = None

    def __post_init__(self) -> None:
        _require(
            (self.set_value is None) != (self.add_value is None),
            f"hint adjustment for {self.knob_id} must use exactly one of set/add",
        )


@dataclass(frozen=True)
class ProfileSpec:
    """One named profile: status, family, and the modes it expands to."""

    profile_id: str
    status: str
    workload_class: str
    goal: str
    description: str
    mode_ids: tuple[str, ...]
    hint_adjustments: Mapping[str, tuple[HintAdjustment, ...]] = field(
        default_factory=dict
    )

    def __post_init__(self) -> None:
        _require(self.status in {"released", "in_development"},
                 f"profile {self.profile_id}: bad status {self.status!r}")
        _require(self.goal in {"max_q", "max_p"},
                 f"profile {self.profile_id}: bad goal {self.goal!r}")
        _require(len(self.mode_ids) > 0,
                 f"profile {self.profile_id}: needs at least one mode")


@dataclass(frozen=True)
class ResponseEntry:
    """Perf/power factors for one (arch, application-or-class, profile)."""

    arch: str
    profile_id: str
    perf_factor: float
    gpu_power_factor: float
    system_power_factor: float
    application: Optional[str] = None
    workload_class: Optional[str] = None

    def __post_init__(self) -> None:
        _require(
            (self.application is None) != (self.workload_class is None),
            "response row must name exactly one of application/class",
        )
        for name in ("perf_factor", "gpu_power_factor", "system_power_factor"):
            value = getattr(self, name)
            _require(
                _FACTOR_MIN < value <= _FACTOR_MAX and math.isfinite(value),
                f"response row {self.application or self.workload_class}: "
                f"{name}={value} outside ({_FACTOR_MIN}, {_FACTOR_MAX}]",
            )

    @classmethod
    def unit(cls, arch: str, workload_class: str = "any") -> "ResponseEntry":
        return cls(
            arch=arch,
            profile_id=DEFAULT_PROFILE,
            perf_factor=1.0,
            gpu_power_factor=1.0,
            system_power_factor=1.0,
            workload_class=workload_class,
        )


class ResponseTable:
    """Indexed response rows with application -> class fallback."""

    def __init__(
        self,
        entries: Sequence[ResponseEntry],
        app_classes: Mapping[str, str],
    ) -> None:
        self._entries = tuple(entries)
        self._app_classes = {k.lower(): v for k, v in app_classes.items()}
        self._app_names = {k.lower(): k for k in app_classes}
        self._by_app: dict[tuple[str, str, str], ResponseEntry] = {}
        self._by_class: dict[tuple[str, str, str], ResponseEntry] = {}
        for entry in self._entries:
            if entry.application is not None:
                key = (entry.arch, entry.application.lower(), entry.profile_id)
                _require(key not in self._by_app, f"duplicate response row {key}")
                self._by_app[key] = entry
            else:
                key = (entry.arch, entry.workload_class, entry.profile_id)
                _require(key not in self._by_class, f"duplicate response row {key}")
                self._by_class[key] = entry

    @property
    def entries(self) -> tuple[ResponseEntry, ...]:
        return self._entries

    def known_applications(self) -> tuple[str, ...]:
        return tuple(sorted(self._app_names.values()))

    def class_of(self, application: str) -> Optional[str]:
        """Workload class for an application name (case-insensitive)."""
        return self._app_classes.get(application.lower())

    def known_classes(self) -> frozenset[str]:
        return frozenset(self._app_classes.values())

    def lookup(
        self,
        arch: str,
        profile_id: str,
        application: Optional[str] = None,
        workload_class: Optional[str] = None,
    ) -> ResponseEntry:
        """Resolve factors for a profile on an arch, most specific row first."""
        if profile_id == DEFAULT_PROFILE:
            return ResponseEntry.unit(arch, workload_class or "any")
        if application is not None:
            entry = self._by_app.get((arch, application.lower(), profile_id))
            if entry is not None:
                return entry
            if workload_class is None:
                workload_class = self.class_of(application)
        if workload_class is not None:
            entry = self._by_class.get((arch, workload_class, profile_id))
            if entry is not None:
                return entry
        raise NoCalibrationRow(
            f"no calibration row for arch={arch} profile={profile_id} "
            f"application={application!r} class={workload_class!r}"
        )

    def with_entry(self, entry: ResponseEntry) -> "ResponseTable":
        """A copy with one row added or replaced (test hook for overrides)."""
        keep = [
            e
            for e in self._entries
            if not (
                e.arch == entry.arch
                and e.profile_id == entry.profile_id
                and e.application == entry.application
                and e.workload_class == entry.workload_class
            )
        ]
        keep.append(entry)
        return ResponseTable(keep, {self._app_names[k]: v for k, v in self._app_classes.items()})


@dataclass(frozen=True)
class FrequencyScalingPoint:
    """One datacenter-level clock-scaling operating point."""

    arch: str
    dc_saving: float
    perf_factor: float
    power_factor: float

    def __post_init__(self) -> None:
        _require(0.0 < self.perf_factor <= 1.0, "perf factor must be in (0, 1]")
        _require(0.0 < self.power_factor <= 1.0, "power factor must be in (0, 1]")
        _require(0.0 <= self.dc_saving < 1.0, "dc saving must be in [0, 1)")


@dataclass(frozen=True)
class UncappedSamples:
    """Sampled (perf, gpu power) pairs with the perf/W gain band they span."""

    arch: str
    band: tuple[float, float]
    pairs: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        _require(0.0 < self.band[0] < self.band[1], "band must be increasing and positive")
        _require(len(self.pairs) >= 2, "need at least two sampled pairs")


@dataclass(frozen=True)
class CalibrationDocument:
    """Parsed, validated calibration file."""

    schema_version: int
    mode_recipes: Mapping[str, ModeRecipe]
    profiles: Mapping[str, ProfileSpec]
    responses: ResponseTable
    frequency_scaling: tuple[FrequencyScalingPoint, ...]
    uncapped_samples: UncappedSamples
    source: str = "<memory>"

    @staticmethod
    def default_path() -> Path:
        return Path(str(resources.files("powerprofiles") / "data" / "calibration.yaml"))

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "CalibrationDocument":
        """Load and validate a calibration file (the shipped one by default)."""
        target = Path(path) if path is not None else cls.default_path()
        if not target.is_file():
            raise RecipeFileMissing(f"calibration file not found: {target}")
        raw = yaml.safe_load(target.read_text(encoding="utf-8"))
        return cls.from_raw(raw, source=str(target))

    @classmethod
    def from_raw(cls, raw: Mapping, source: str = "<memory>") -> "CalibrationDocument":
        _require(isinstance(raw, Mapping), "calibration document must be a mapping")
        _require(raw.get("schema_version") == 1, "unsupported calibration schema_version")

        recipes: dict[str, ModeRecipe] = {}
        for mode_id, body in raw.get("modes", {}).items():
            recipes[mode_id] = ModeRecipe(
                mode_id=mode_id,
                priority=int(body["priority"]),
                conflicts=tuple(body.get("conflicts", ())),
                assignments=dict(body.get("assignments", {})),
                display_name=str(body.get("display_name", mode_id)),
            )

        profiles: dict[str, ProfileSpec] = {}
        for profile_id, body in raw.get("profiles", {}).items():
            hints: dict[str, tuple[HintAdjustment, ...]] = {}
            for hint_name, knob_map in (body.get("hint_adjustments") or {}).items():
                adjustments = []
                for knob_id, change in knob_map.items():
                    adjustments.append(
                        HintAdjustment(
                            knob_id=knob_id,
                            set_value=change.get("set"),
                            add_value=change.get("add"),
                        )
                    )
                hints[hint_name] = tuple(adjustments)
            profiles[profile_id] = ProfileSpec(
                profile_id=profile_id,
                status=str(body["status"]),
                workload_class=str(body["workload_class"]),
                goal=str(body["goal"]),
                description=str(body.get("description", "")),
                mode_ids=tuple(body["modes"]),
                hint_adjustments=hints,
            )

        app_classes = dict(raw.get("applications", {}))
        entries = []
        for row in raw.get("responses", ()):
            entries.append(
                ResponseEntry(
                    arch=str(row["arch"]),
                    profile_id=str(row["profile"]),
                    perf_factor=float(row["perf"]),
                    gpu_power_factor=float(row["gpu_power"]),
                    system_power_factor=float(row["system_power"]),
                    application=row.get("app"),
                    workload_class=row.get("class"),
                )
            )
        responses = ResponseTable(entries, app_classes)

        scaling = tuple(
            FrequencyScalingPoint(
                arch=str(row["arch"]),
                dc_saving=float(row["dc_saving"]),
                perf_factor=float(row["perf"]),
                power_factor=float(row["power"]),
            )
            for row in raw.get("frequency_scaling", ())
        )

        samples_raw = raw["uncapped_maxq_samples"]
        samples = UncappedSamples(
            arch=str(samples_raw["arch"]),
            band=(
                float(samples_raw["perf_per_watt_band"][0]),
                float(samples_raw["perf_per_watt_band"][1]),
            ),
            pairs=tuple(
                (float(p["perf"]), float(p["gpu_power"]))
                for p in samples_raw["pairs"]
            ),
        )

        document = cls(
            schema_version=1,
            mode_recipes=recipes,
            profiles=profiles,
            responses=responses,
            frequency_scaling=scaling,
            uncapped_samples=samples,
            source=source,
        )
        document.validate()
        return document

    def validate(self) -> None:
        """Cross-checks: references resolve, knob values pass every arch."""
        priorities: dict[int, str] = {}
        for recipe in self.mode_recipes.values():
            existing = priorities.get(recipe.priority)
            _require(
                existing is None,
                f"modes {existing} and {recipe.mode_id} share priority {recipe.priority}",
            )
            priorities[recipe.priority] = recipe.mode_id
            for other in recipe.conflicts:
                _require(
                    other in self.mode_recipes,
                    f"mode {recipe.mode_id} conflicts with unknown mode {other!r}",
                )
        for arch in SUPPORTED_ARCHS:
            dictionary = standard_knob_dictionary(arch)
            for recipe in self.mode_recipes.values():
                mode = recipe.materialize(arch)
                for assignment in mode.assignments:
                    try:
                        dictionary.validate_assignment(assignment)
                    except UnknownKnob:
                        raise ValueError(
                            f"mode {recipe.mode_id} assigns unknown knob "
                            f"{assignment.knob_id!r}"
                        ) from None
        for profile in self.profiles.values():
            for mode_id in profile.mode_ids:
                _require(
                    mode_id in self.mode_recipes,
                    f"profile {profile.profile_id} references unknown mode {mode_id!r}",
                )
            for hint_name, adjustments in profile.hint_adjustments.items():
                for adjustment in adjustments:
                    assigned = any(
                        adjustment.knob_id in self.mode_recipes[m].assignments
                        for m in profile.mode_ids
                    )
                    _require(
                        assigned,
                        f"profile {profile.profile_id} hint {hint_name} adjusts "
                        f"{adjustment.knob_id}, which none of its modes assign",
                    )
        for workload_class in self.responses.known_classes():
            _require(
                any(p.workload_class == workload_class for p in self.profiles.values()),
                f"application class {workload_class!r} has no profile",
            )


_shared_document: Optional[CalibrationDocument] = None


def shared_document() -> CalibrationDocument:
    """The shipped calibration document, loaded once per process."""
    global _shared_document
    if _shared_document is None:
        _shared_document = CalibrationDocument.load()
    return _shared_document
