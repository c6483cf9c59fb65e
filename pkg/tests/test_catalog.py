"""Tests for the calibration document and the profile catalog."""
import copy

import pytest
import yaml

from powerprofiles.calibration import (
    DEFAULT_PROFILE,
    CalibrationDocument,
    ResponseEntry,
    shared_document,
)
from powerprofiles.catalog import (
    Goal,
    ProfileCatalog,
    ProfileStatus,
    WorkloadClass,
    WorkloadHints,
    shared_catalog,
)
from powerprofiles.errors import (
    NoCalibrationRow,
    RecipeFileMissing,
    UnknownProfile,
    UnknownProfileName,
)
from powerprofiles.knobs import standard_knob_dictionary
from powerprofiles.modes import ModeRegistry

ALL_PROFILES = (
    "MAX_P_TRAINING",
    "MAX_P_INFERENCE",
    "MAX_Q_TRAINING",
    "MAX_Q_INFERENCE",
    "MAX_P_HPC_COMPUTE",
    "MAX_P_HPC_MEMORY",
    "MAX_Q_HPC_COMPUTE",
    "MAX_Q_HPC_MEMORY",
)


@pytest.fixture(scope="module")
def catalog():
    return shared_catalog()


@pytest.fixture(scope="module")
def document():
    return shared_document()


def raw_document():
    return yaml.safe_load(CalibrationDocument.default_path().read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# document loading


def test_load_missing_file_raises():
    with pytest.raises(RecipeFileMissing):
        CalibrationDocument.load("/nonexistent/calibration.yaml")


def test_duplicate_priority_rejected():
    raw = raw_document()
    mode_ids = list(raw["modes"])
    raw["modes"][mode_ids[1]]["priority"] = raw["modes"][mode_ids[0]]["priority"]
    with pytest.raises(ValueError, match="share priority"):
        CalibrationDocument.from_raw(raw)


def test_unknown_conflict_reference_rejected():
    raw = raw_document()
    raw["modes"]["max_q_training"]["conflicts"].append("ghost_mode")
    with pytest.raises(ValueError, match="unknown mode"):
        CalibrationDocument.from_raw(raw)


def test_out_of_bounds_knob_value_rejected():
    raw = raw_document()
    raw["modes"]["max_q_training"]["assignments"]["TGP"] = 1200
    with pytest.raises(Exception, match="TGP"):
        CalibrationDocument.from_raw(raw)


def test_h100_tgp_bounds_enforced():
    # 850 W is valid on B200 but above the H100 ceiling, so a scalar value
    # that ignores the per-arch split must be rejected at load time.
    raw = raw_document()
    raw["modes"]["max_q_training"]["assignments"]["TGP"] = 850
    with pytest.raises(Exception, match="TGP"):
        CalibrationDocument.from_raw(raw)


def test_profile_referencing_unknown_mode_rejected():
    raw = raw_document()
    raw["profiles"]["MAX_Q_TRAINING"]["modes"] = ["ai_training_base", "ghost"]
    with pytest.raises(ValueError, match="unknown mode"):
        CalibrationDocument.from_raw(raw)


def test_response_factor_out_of_range_rejected():
    raw = raw_document()
    raw["responses"][0]["perf"] = 0.0
    with pytest.raises(ValueError, match="perf_factor"):
        CalibrationDocument.from_raw(raw)


def test_response_row_needs_app_xor_class():
    with pytest.raises(ValueError, match="exactly one"):
        ResponseEntry(
            arch="B200",
            profile_id="MAX_Q_TRAINING",
            perf_factor=0.99,
            gpu_power_factor=0.9,
            system_power_factor=0.9,
        )


# ---------------------------------------------------------------------------
# response lookup


def test_lookup_prefers_application_row(document):
    entry = document.responses.lookup("B200", "MAX_Q_HPC_COMPUTE", application="HPL")
    assert entry.application == "HPL"
    assert entry.perf_factor == pytest.approx(0.99)
    assert entry.system_power_factor == pytest.approx(0.87)


def test_lookup_is_case_insensitive_on_application(document):
    entry = document.responses.lookup("B200", "MAX_Q_HPC_COMPUTE", application="hpl")
    assert entry.application == "HPL"


def test_lookup_falls_back_to_class_row(document):
    # No application row exists for HPL under Max-P, so the class row wins.
    entry = document.responses.lookup("B200", "MAX_P_HPC_COMPUTE", application="HPL")
    assert entry.workload_class == "hpc_compute"
    assert entry.perf_factor == pytest.approx(1.025)


def test_lookup_default_profile_is_unit(document):
    entry = document.responses.lookup("B200", DEFAULT_PROFILE, application="HPL")
    assert entry.perf_factor == 1.0
    assert entry.gpu_power_factor == 1.0
    assert entry.system_power_factor == 1.0


def test_lookup_unknown_combination_raises(document):
    with pytest.raises(NoCalibrationRow):
        document.responses.lookup("H100", "MAX_P_TRAINING", application="NeMo_gpt3_5b")


def test_every_application_has_a_maxq_row_on_b200(document):
    catalog = ProfileCatalog(document)
    for app in document.responses.known_applications():
        profile = catalog.profile_for_application(app, Goal.MAX_Q)
        entry = document.responses.lookup("B200", profile, application=app)
        assert 0.0 < entry.perf_factor <= 1.0
        assert entry.system_power_factor < 1.0


# ---------------------------------------------------------------------------
# catalog directory


def test_list_profiles_has_eight_stable_entries(catalog):
    listed = catalog.list_profiles()
    assert tuple(p.profile_id for p in listed) == ALL_PROFILES
    assert listed == catalog.list_profiles()


def test_ai_profiles_released_hpc_in_development(catalog):
    for info in catalog.list_profiles():
        if info.workload_class in (WorkloadClass.AI_TRAINING, WorkloadClass.AI_INFERENCE):
            assert info.status is ProfileStatus.RELEASED
        else:
            assert info.status is ProfileStatus.IN_DEVELOPMENT


def test_normalize_accepts_hyphen_and_case_variants(catalog):
    assert catalog.normalize("MAX-Q-Training") == "MAX_Q_TRAINING"
    assert catalog.normalize("max-q-training") == "MAX_Q_TRAINING"
    assert catalog.normalize("max_q_training") == "MAX_Q_TRAINING"
    assert catalog.normalize("default") == DEFAULT_PROFILE


def test_normalize_rejects_unknown_name(catalog):
    with pytest.raises(UnknownProfileName):
        catalog.normalize("MAX-Q-TURBO")


# ---------------------------------------------------------------------------
# profile resolution


def test_resolve_ai_training_max_q(catalog):
    assert (
        catalog.resolve_profile(WorkloadClass.AI_TRAINING, Goal.MAX_Q, WorkloadHints())
        == "MAX_Q_TRAINING"
    )


def test_resolve_hpc_boundedness_overrides_variant(catalog):
    hints = WorkloadHints(boundedness="memory_bound")
    assert (
        catalog.resolve_profile(WorkloadClass.HPC_COMPUTE, Goal.MAX_P, hints)
        == "MAX_P_HPC_MEMORY"
    )
    hints = WorkloadHints(boundedness="compute_bound")
    assert (
        catalog.resolve_profile(WorkloadClass.HPC_MEMORY, Goal.MAX_Q, hints)
        == "MAX_Q_HPC_COMPUTE"
    )


def test_resolve_ai_hints_never_change_family(catalog):
    for hints in (
        WorkloadHints(boundedness="memory_bound"),
        WorkloadHints(boundedness="compute_bound", interconnect="nvlink_heavy"),
    ):
        assert (
            catalog.resolve_profile(WorkloadClass.AI_INFERENCE, Goal.MAX_Q, hints)
            == "MAX_Q_INFERENCE"
        )


def test_resolve_accepts_plain_strings(catalog):
    assert catalog.resolve_profile("hpc_compute", "max_p") == "MAX_P_HPC_COMPUTE"


def test_profile_for_application(catalog):
    assert catalog.profile_for_application("HPL") == "MAX_Q_HPC_COMPUTE"
    assert catalog.profile_for_application("RTM") == "MAX_Q_HPC_MEMORY"
    assert catalog.profile_for_application("Mistral_7B", Goal.MAX_P) == "MAX_P_INFERENCE"
    with pytest.raises(UnknownProfile):
        catalog.profile_for_application("SETI_at_home")


# ---------------------------------------------------------------------------
# mode expansion


def test_every_profile_expands_and_registers_cleanly(catalog):
    for arch in ("B200", "H100"):
        dictionary = standard_knob_dictionary(arch)
        for info in catalog.list_profiles():
            modes = catalog.profile_modes(info.profile_id, arch=arch)
            assert len(modes) == 2
            registry = ModeRegistry(dictionary)
            for mode in modes:
                registry.register(mode)
                registry.set_enabled(mode.mode_id, True)
            config = registry.arbitrate()
            assert config.discarded == ()
            assert set(config.active_modes) == {m.mode_id for m in modes}


def test_default_profile_expands_to_no_modes(catalog):
    assert catalog.profile_modes(DEFAULT_PROFILE) == ()


def test_unknown_profile_raises(catalog):
    with pytest.raises(UnknownProfile):
        catalog.profile_modes("MAX_Q_TURBO")


def test_max_q_training_reduces_tgp_and_enables_link_sleep(catalog):
    modes = catalog.profile_modes("MAX_Q_TRAINING", arch="B200")
    merged = {a.knob_id: a.value for m in modes for a in m.assignments}
    assert merged["TGP"] < 1000
    assert merged["FMAX"] < 1965
    assert merged["NVLINK_L1"] > 0


def test_arch_changes_wattage_knobs(catalog):
    b200 = catalog.profile_modes("MAX_Q_TRAINING", arch="B200")
    h100 = catalog.profile_modes("MAX_Q_TRAINING", arch="H100")
    tgp = {
        arch: next(
            a.value for m in modes for a in m.assignments if a.knob_id == "TGP"
        )
        for arch, modes in (("B200", b200), ("H100", h100))
    }
    assert tgp["B200"] == 850
    assert tgp["H100"] == 595
    assert tgp["H100"] <= 700


def test_interconnect_hint_sets_link_state(catalog):
    modes = catalog.profile_modes(
        "MAX_Q_TRAINING", WorkloadHints(interconnect="nvlink_heavy")
    )
    link = next(a.value for m in modes for a in m.assignments if a.knob_id == "NVLINK_L1")
    assert link == 0
    modes = catalog.profile_modes(
        "MAX_Q_TRAINING", WorkloadHints(interconnect="nvlink_light")
    )
    link = next(a.value for m in modes for a in m.assignments if a.knob_id == "NVLINK_L1")
    assert link == 3


def test_boundedness_hint_offsets_memory_clock(catalog):
    base = catalog.profile_modes("MAX_Q_INFERENCE")
    tuned = catalog.profile_modes(
        "MAX_Q_INFERENCE", WorkloadHints(boundedness="memory_bound")
    )
    mclk = lambda modes: next(  # noqa: E731
        a.value for m in modes for a in m.assignments if a.knob_id == "MCLK"
    )
    assert mclk(tuned) == mclk(base) + 200


def test_hint_adjustment_clamps_to_knob_bounds():
    raw = raw_document()
    raw["modes"]["max_q_inference"]["assignments"]["MCLK"] = 3100
    document = CalibrationDocument.from_raw(raw)
    catalog = ProfileCatalog(document)
    tuned = catalog.profile_modes(
        "MAX_Q_INFERENCE", WorkloadHints(boundedness="memory_bound")
    )
    mclk = next(a.value for m in tuned for a in m.assignments if a.knob_id == "MCLK")
    assert mclk == 3200  # 3100 + 200 clamped to the MCLK ceiling


def test_hints_do_not_leak_between_calls(catalog):
    before = catalog.profile_modes("MAX_Q_TRAINING")
    catalog.profile_modes("MAX_Q_TRAINING", WorkloadHints(interconnect="nvlink_heavy"))
    after = catalog.profile_modes("MAX_Q_TRAINING")
    assert before == after


# ---------------------------------------------------------------------------
# hints parsing


def test_hints_from_tokens():
    hints = WorkloadHints.from_tokens(["memory_bound", "nvlink_light"])
    assert hints == WorkloadHints(boundedness="memory_bound", interconnect="nvlink_light")
    assert WorkloadHints.from_tokens([]) == WorkloadHints()


def test_hints_reject_unknown_or_conflicting_tokens():
    with pytest.raises(ValueError, match="unknown workload hint"):
        WorkloadHints.from_tokens(["gpu_bound"])
    with pytest.raises(ValueError, match="conflicting boundedness"):
        WorkloadHints.from_tokens(["memory_bound", "compute_bound"])


def test_frequency_scaling_and_uncapped_samples_present(document):
    assert any(p.arch == "B200" for p in document.frequency_scaling)
    point = document.frequency_scaling[0]
    assert point.dc_saving == pytest.approx(0.05)
    assert point.perf_factor == pytest.approx(0.90)
    assert point.power_factor == pytest.approx(0.95)
    samples = document.uncapped_samples
    assert samples.arch == "H100"
    assert samples.band == (0.12, 0.32)
    assert len(samples.pairs) == 4
