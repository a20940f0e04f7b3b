import numpy as np
import pytest

from nv_magnetometry.sequences.plan import (
    BLOCK_AXES,
    PulseDurations,
    PulseSpec,
    SequencePlan,
    build_sequence,
    combine_phase_cycle,
    dump_plan,
    load_plan,
    phase_cycle_pair,
    readout_axis,
)
from nv_magnetometry.utilities.errors import ArtifactIOError, DomainError
from .sequences_test_cases import label_cases, plans


@pytest.mark.parametrize("plan, labels", label_cases)
def test_build_sequence(plan, labels):
    assert build_sequence(plan).labels == labels


def test_xy16_second_half_negated():
    pulses = build_sequence(SequencePlan("xy16", 1.0, n_pulses=16)).pulses
    pis = [pulse.axis for pulse in pulses if pulse.is_pi]
    assert pis[8:] == ["-x", "-y", "-x", "-y", "-y", "-x", "-y", "-x"]


@pytest.mark.parametrize("kind", ["xy4", "xy8", "xy16"])
def test_xy_blocks_balanced(kind):
    axes = BLOCK_AXES[kind]
    x = sum(1 for axis in axes if axis[1] == "x")
    assert x == len(axes) - x


def test_xy8_palindromic():
    assert BLOCK_AXES["xy8"] == tuple(reversed(BLOCK_AXES["xy8"]))


def test_invalid_block_count():
    with pytest.raises(DomainError):
        SequencePlan("xy8", 1.0, n_pulses=12)
    with pytest.raises(DomainError):
        SequencePlan("cpmg", 1.0, n_pulses=0)
    with pytest.raises(DomainError):
        SequencePlan("xy4", 0.0, n_pulses=4)
    with pytest.raises(DomainError):
        SequencePlan("correlation-multipulse", 1.0, n_pulses=4)


def test_from_label():
    plan = SequencePlan.from_label("XY16-64", 0.5)
    assert plan.kind == "xy16"
    assert plan.n_pulses == 64
    assert plan.label == "XY16-64"
    assert SequencePlan.from_label("XY8", 1.0).n_pulses == 8
    with pytest.raises(DomainError):
        SequencePlan.from_label("XY5-10", 1.0)


def test_pulse_spec_validation():
    with pytest.raises(DomainError):
        PulseSpec("+z", np.pi)
    with pytest.raises(DomainError):
        PulseSpec("+x", np.pi / 3)
    with pytest.raises(DomainError):
        PulseSpec("+x", np.pi, duration=-1.0)


def test_rotation_is_unitary():
    for axis in ("+x", "+y", "-x", "-y"):
        for angle in (np.pi / 2, np.pi):
            r = PulseSpec(axis, angle).rotation()
            assert np.allclose(r.conj().T @ r, np.eye(2))


def test_readout_axis():
    assert readout_axis(SequencePlan("ramsey", 1.0)) == "+x"
    assert readout_axis(SequencePlan("ramsey", 1.0, readout="-x")) == "-x"
    assert readout_axis(SequencePlan("hahn", 1.0)) == "+x"
    assert readout_axis(SequencePlan("cp", 1.0, n_pulses=2)) == "-x"
    assert readout_axis(SequencePlan("cp", 1.0, n_pulses=3)) == "+x"
    assert readout_axis(SequencePlan("cpmg", 1.0, n_pulses=1)) == "-x"


@pytest.mark.parametrize("plan", plans)
def test_nucleus_free_readout_returns_home(plan):
    total = np.eye(2)
    for pulse in build_sequence(plan).pulses:
        total = pulse.rotation() @ total
    if plan.kind == "ramsey":
        assert abs(total[0, 0]) ** 2 == pytest.approx(0.0, abs=1e-12)
    else:
        assert abs(total[0, 0]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_phase_cycle_pair():
    plus, minus = phase_cycle_pair(SequencePlan("ramsey", 1.0))
    assert build_sequence(plus).labels[-1] == "X/2"
    assert build_sequence(minus).labels[-1] == "-X/2"


def test_combine_phase_cycle():
    assert combine_phase_cycle(0.7, 0.3) == pytest.approx(0.7)
    assert combine_phase_cycle(0.4, 0.6) == pytest.approx(0.4)
    p_plus, p_minus = 0.83, 0.21
    assert combine_phase_cycle(p_plus, p_minus) == pytest.approx(
        combine_phase_cycle(1 - p_minus, 1 - p_plus)
    )


def test_durations_presets():
    calibrated = PulseDurations.calibrated()
    assert calibrated.half_pi == 31.5
    assert calibrated.pi == 122.1
    assert calibrated.pi_shape == "cosine-square"
    assert PulseDurations.ideal().is_ideal


@pytest.mark.parametrize("plan", plans)
def test_plan_file(tmp_path, plan):
    path = dump_plan(plan, tmp_path / "plan.json")
    assert load_plan(path) == plan


def test_invalid_plan_file(tmp_path):
    path = tmp_path / "plan.json"
    path.write_text(
        '{"schema": "nv-magnetometry/plan@1", "kind": "xy8", "tau_us": 1.0,'
        ' "n_pulses": 3}'
    )
    with pytest.raises(ArtifactIOError):
        load_plan(path)
