"""Profile catalog: named profiles that expand to performance-mode sets.

A profile is the operator-facing unit ("MAX_Q_TRAINING"); each one expands
to a base mode for its workload class plus a goal modifier mode. Workload
hints tweak individual knob values inside that expansion — for HPC work the
boundedness hint also switches between the compute and memory profile
families, while for AI work hints never change the family.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional

from .calibration import (
    DEFAULT_PROFILE,
    CalibrationDocument,
    HintAdjustment,
    ProfileSpec,
    shared_document,
)
from .errors import UnknownProfileName, UnknownProfile
from .knobs import KnobAssignment, NUMERIC_KINDS, standard_knob_dictionary
from .modes import PerformanceMode


class WorkloadClass(str, Enum):
    AI_TRAINING = "ai_training"
    AI_INFERENCE = "ai_inference"
    HPC_COMPUTE = "hpc_compute"
    HPC_MEMORY = "hpc_memory"


class Goal(str, Enum):
    MAX_Q = "max_q"
    MAX_P = "max_p"


class ProfileStatus(str, Enum):
    RELEASED = "released"
    IN_DEVELOPMENT = "in_development"


_BOUNDEDNESS = ("memory_bound", "compute_bound")
_INTERCONNECT = ("nvlink_heavy", "nvlink_light")


@dataclass(frozen=True)
class WorkloadHints:
    """Optional workload traits that refine a profile's knob recipe."""

    boundedness: Optional[str] = None
    interconnect: Optional[str] = None

    def __post_init__(self) -> None:
        if self.boundedness is not None and self.boundedness not in _BOUNDEDNESS:
            raise ValueError(f"unknown boundedness hint {self.boundedness!r}")
        if self.interconnect is not None and self.interconnect not in _INTERCONNECT:
            raise ValueError(f"unknown interconnect hint {self.interconnect!r}")

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "WorkloadHints":
        """Build hints from a flat token list, e.g. CLI/API input."""
        boundedness = interconnect = None
        for token in tokens:
            name = token.strip().lower()
            if not name:
                continue
            if name in _BOUNDEDNESS:
                if boundedness is not None and boundedness != name:
                    raise ValueError(f"conflicting boundedness hints: {boundedness}, {name}")
                boundedness = name
            elif name in _INTERCONNECT:
                if interconnect is not None and interconnect != name:
                    raise ValueError(f"conflicting interconnect hints: {interconnect}, {name}")
                interconnect = name
            else:
                raise ValueError(f"unknown workload hint {token!r}")
        return cls(boundedness=boundedness, interconnect=interconnect)

    def tokens(self) -> tuple[str, ...]:
        return tuple(t for t in (self.boundedness, self.interconnect) if t)


@dataclass(frozen=True)
class ProfileInfo:
    """Directory entry for one profile."""

    profile_id: str
    status: ProfileStatus
    workload_class: WorkloadClass
    goal: Goal
    description: str


class ProfileCatalog:
    """Profile directory plus the class/goal/hints resolution rules."""

    def __init__(self, document: Optional[CalibrationDocument] = None) -> None:
        self._document = document if document is not None else shared_document()
        self._profiles = dict(self._document.profiles)
        self._canonical = {p.lower(): p for p in self._profiles}
        self._canonical[DEFAULT_PROFILE.lower()] = DEFAULT_PROFILE

    @property
    def document(self) -> CalibrationDocument:
        return self._document

    def list_profiles(self) -> tuple[ProfileInfo, ...]:
        """All profiles in catalog order."""
        return tuple(
            ProfileInfo(
                profile_id=spec.profile_id,
                status=ProfileStatus(spec.status),
                workload_class=WorkloadClass(spec.workload_class),
                goal=Goal(spec.goal),
                description=spec.description,
            )
            for spec in self._profiles.values()
        )

    def spec(self, profile_id: str) -> ProfileSpec:
        try:
            return self._profiles[profile_id]
        except KeyError:
            raise UnknownProfile(f"unknown profile {profile_id!r}") from None

    def normalize(self, name: str) -> str:
        """Canonical profile id for a case/hyphen-insensitive name.

        ``max-q-training``, ``MAX-Q-Training`` and ``MAX_Q_TRAINING`` all
        resolve to ``MAX_Q_TRAINING``; unknown names raise
        :class:`UnknownProfileName`.
        """
        key = name.strip().lower().replace("-", "_")
        try:
            return self._canonical[key]
        except KeyError:
            raise UnknownProfileName(f"unknown profile name {name!r}") from None

    def resolve_profile(
        self,
        workload_class: WorkloadClass | str,
        goal: Goal | str,
        hints: Optional[WorkloadHints] = None,
    ) -> str:
        """Profile id for a workload class and goal.

        HPC boundedness hints override the class's compute/memory variant;
        AI hints only tune knobs and never change the resolved profile.
        """
        workload_class = WorkloadClass(workload_class)
        goal = Goal(goal)
        hints = hints or WorkloadHints()
        if workload_class in (WorkloadClass.HPC_COMPUTE, WorkloadClass.HPC_MEMORY):
            if hints.boundedness == "memory_bound":
                workload_class = WorkloadClass.HPC_MEMORY
            elif hints.boundedness == "compute_bound":
                workload_class = WorkloadClass.HPC_COMPUTE
        suffix = {
            WorkloadClass.AI_TRAINING: "TRAINING",
            WorkloadClass.AI_INFERENCE: "INFERENCE",
            WorkloadClass.HPC_COMPUTE: "HPC_COMPUTE",
            WorkloadClass.HPC_MEMORY: "HPC_MEMORY",
        }[workload_class]
        prefix = "MAX_Q" if goal is Goal.MAX_Q else "MAX_P"
        profile_id = f"{prefix}_{suffix}"
        if profile_id not in self._profiles:
            raise UnknownProfile(f"resolved to unknown profile {profile_id!r}")
        return profile_id

    def profile_modes(
        self,
        profile_id: str,
        hints: Optional[WorkloadHints] = None,
        arch: str = "B200",
    ) -> tuple[PerformanceMode, ...]:
        """Concrete modes for a profile on one architecture.

        Hint adjustments apply only to knobs the profile's modes already
        assign; numeric results are clamped to the knob's bounds for the
        architecture. The DEFAULT profile expands to no modes.
        """
        if profile_id == DEFAULT_PROFILE:
            return ()
        spec = self.spec(profile_id)
        hints = hints or WorkloadHints()
        dictionary = standard_knob_dictionary(arch)
        modes = [self._document.mode_recipes[m].materialize(arch) for m in spec.mode_ids]

        adjustments: list[HintAdjustment] = []
        for token in hints.tokens():
            adjustments.extend(spec.hint_adjustments.get(token, ()))
        for adjustment in adjustments:
            for index, mode in enumerate(modes):
                current = mode.assignment_for(adjustment.knob_id)
                if current is None:
                    continue
                knob = dictionary.get(adjustment.knob_id)
                if adjustment.set_value is not None:
                    value = adjustment.set_value
                else:
                    value = current.value + adjustment.add_value
                if knob.value_kind in NUMERIC_KINDS:
                    value = knob.clamp(value)
                new_assignments = tuple(
                    KnobAssignment(adjustment.knob_id, value)
                    if a.knob_id == adjustment.knob_id
                    else a
                    for a in mode.assignments
                )
                modes[index] = replace(mode, assignments=new_assignments)
        for mode in modes:
            for assignment in mode.assignments:
                dictionary.validate_assignment(assignment)
        return tuple(modes)

    def profile_for_application(
        self, application: str, goal: Goal | str = Goal.MAX_Q
    ) -> str:
        """Profile id for a named application (via its workload class)."""
        workload_class = self._document.responses.class_of(application)
        if workload_class is None:
            raise UnknownProfile(
                f"application {application!r} is not mapped to a workload class"
            )
        return self.resolve_profile(workload_class, goal)


def shared_catalog() -> ProfileCatalog:
    """Catalog over the shipped calibration document."""
    return ProfileCatalog(shared_document())
