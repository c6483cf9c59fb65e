"""Exception types shared across the package.

Every error raised by the public surface derives from PowerProfilesError so
callers (service layer, CLI) can map them onto HTTP statuses / exit codes
without matching on message text.
"""


class PowerProfilesError(Exception):
    """Base class for all package errors."""


# --- mode engine ---

class DuplicateModeId(PowerProfilesError):
    pass


class DuplicatePriority(PowerProfilesError):
    pass


class UnknownKnob(PowerProfilesError):
    pass


class ValueOutOfBounds(PowerProfilesError):
    pass


class UnknownMode(PowerProfilesError):
    pass


# --- profile catalog ---

class UnknownProfile(PowerProfilesError):
    pass


class RecipeFileMissing(PowerProfilesError):
    pass


# --- fleet simulator ---

class NoCalibrationRow(PowerProfilesError):
    pass


class InsufficientNodes(PowerProfilesError):
    pass


class UnknownHierarchyNode(PowerProfilesError):
    pass


# --- control plane ---

class Unauthorized(PowerProfilesError):
    pass


class UnknownScope(PowerProfilesError):
    pass


class UnknownJob(PowerProfilesError):
    pass


class JobNotFinished(PowerProfilesError):
    pass


# --- scheduler shim ---

class MalformedDirective(PowerProfilesError):
    pass


class UnknownProfileName(PowerProfilesError):
    pass


class AdmissionRejected(PowerProfilesError):
    """Raised when run_job is asked to launch a spec that fails admission."""
