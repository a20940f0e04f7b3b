import math
from dataclasses import replace

import numpy as np
import pytest

from nv_magnetometry.analytic.decay import revival_times
from nv_magnetometry.physics.frequencies import (
    conditional_precession_frequencies,
)
from nv_magnetometry.physics.spins import (
    MAX_NUCLEI,
    HyperfineCoupling,
    NuclearSpin,
    SpinRegister,
    literature_register,
    nitrogen_mixture,
)
from nv_magnetometry.sequences.plan import (
    PulseDurations,
    SequencePlan,
    build_sequence,
)
from nv_magnetometry.sequences.timing import expand_timing
from nv_magnetometry.simulator.register_evolution import (
    RegisterPropagators,
    RegisterState,
    evolve_ideal,
    propagate_state,
    simulate_sweep,
)
from nv_magnetometry.utilities.errors import CapacityError, DomainError
from .oracle_utilities import train_p0
from .simulator_test_cases import factorization_plans, oracle_plans

EMPTY = SpinRegister(4.7)


def ideal_timing(plan):
    return expand_timing(
        build_sequence(plan),
        PulseDurations.ideal(),
        laser_init=0.0,
        laser_readout=0.0,
    )


def test_ramsey_starts_at_zero():
    assert evolve_ideal(EMPTY, SequencePlan("ramsey", 0.0)) == pytest.approx(
        0.0, abs=1e-12
    )


def test_ramsey_starts_at_zero_with_nitrogen_mixture():
    register = SpinRegister(4.7, nitrogen=nitrogen_mixture("14N"))
    assert evolve_ideal(register, SequencePlan("ramsey", 0.0)) == (
        pytest.approx(0.0, abs=1e-12)
    )


@pytest.mark.parametrize(
    "tau, expected", [(0.25, 0.5), (0.5, 1.0), (1.0, 0.0)]
)
def test_ramsey_fringe_at_detuning(tau, expected):
    p0 = evolve_ideal(EMPTY, SequencePlan("ramsey", tau), detuning=1.0)
    assert p0 == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("tau", [0.5, 10.0, 123.4])
def test_hahn_without_nuclei(tau):
    assert evolve_ideal(EMPTY, SequencePlan("hahn", tau)) == pytest.approx(
        1.0, abs=1e-12
    )


@pytest.mark.parametrize("plan", oracle_plans)
def test_matches_reference_overlap(plan):
    register = literature_register(("A", "D"))
    nuclei = [
        (n.gamma, n.coupling.a_parallel, n.coupling.a_perpendicular)
        for n in register.nuclei
    ]
    expected = train_p0(nuclei, register.b0, plan.tau, plan.n_pulses)
    assert evolve_ideal(register, plan) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("plan", factorization_plans)
def test_zero_couplings_reproduce_empty_register(plan):
    uncoupled = literature_register().without_couplings()
    assert evolve_ideal(uncoupled, plan) == pytest.approx(
        evolve_ideal(EMPTY, plan), abs=1e-10
    )


def test_two_nuclei_combine_as_product():
    plan = SequencePlan("xy8", 2.1, n_pulses=16)
    p_a = evolve_ideal(literature_register(("A",)), plan)
    p_d = evolve_ideal(literature_register(("D",)), plan)
    p_ad = evolve_ideal(literature_register(("A", "D")), plan)
    expected = 2 * (p_a - 0.5) * (p_d - 0.5)
    assert p_ad - 0.5 == pytest.approx(expected, abs=1e-10)


def test_readout_branches_are_complementary():
    register = literature_register(("A",))
    plus = SequencePlan("xy4", 3.5, n_pulses=8, phase_cycling=False)
    minus = replace(plus, readout="-x")
    cycled = replace(plus, phase_cycling=True)
    p_plus = evolve_ideal(register, plus)
    assert p_plus + evolve_ideal(register, minus) == pytest.approx(1.0)
    assert evolve_ideal(register, cycled) == pytest.approx(p_plus)


def test_hahn_symmetric_in_transverse_sign():
    plan = SequencePlan("hahn", 4.3)
    positive = SpinRegister(
        4.7, (NuclearSpin("13C", HyperfineCoupling(60.0, 80.0)),)
    )
    negative = SpinRegister(
        4.7, (NuclearSpin("13C", HyperfineCoupling.from_signed(60.0, -80.0)),)
    )
    assert evolve_ideal(positive, plan) == pytest.approx(
        evolve_ideal(negative, plan), abs=1e-12
    )


def test_echo_revivals():
    register = SpinRegister(
        4.7, (NuclearSpin("13C", HyperfineCoupling(0.2, 0.2)),)
    )
    revivals = revival_times("13C", 4.7, count=3)
    trace = simulate_sweep(
        register, SequencePlan("hahn", 1.0), "tau", revivals
    )
    assert np.all(trace.y >= 0.999)
    np.testing.assert_allclose(revivals[0], 1000.0 / 50.3135, rtol=1e-4)


def test_state_norm_preserved():
    register = literature_register()
    plan = SequencePlan("xy8", 2.7, n_pulses=24)
    propagators = RegisterPropagators(register)
    for index in range(2 ** len(register.nuclei)):
        state = RegisterState.sensor_ground(len(register.nuclei), index)
        final = propagate_state(state, ideal_timing(plan), propagators)
        assert final.norm == pytest.approx(1.0, abs=1e-12)
        assert final.sensor_population(0) + final.sensor_population(1) == (
            pytest.approx(1.0, abs=1e-12)
        )


def test_propagate_state_rejects_storage():
    register = literature_register(("A",))
    plan = SequencePlan("correlation", 3.72, n_pulses=4, t_corr=5.0)
    state = RegisterState.sensor_ground(1)
    with pytest.raises(DomainError):
        propagate_state(
            state, ideal_timing(plan), RegisterPropagators(register)
        )


def test_propagate_state_checks_dimension():
    plan = SequencePlan("cpmg", 2.0, n_pulses=2)
    with pytest.raises(DomainError):
        propagate_state(
            RegisterState.sensor_ground(2),
            ideal_timing(plan),
            RegisterPropagators(literature_register(("A",))),
        )


def test_register_state_validation():
    with pytest.raises(DomainError):
        RegisterState([1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        RegisterState([1.0, 1.0])
    state = RegisterState.sensor_ground(2, nuclear_index=3)
    assert state.n_nuclei == 2
    assert state.sensor_population(0) == 1.0


def test_capacity():
    nuclei = tuple(NuclearSpin("13C") for _ in range(MAX_NUCLEI + 1))
    with pytest.raises(CapacityError):
        SpinRegister(4.7, nuclei)


def test_correlation_trace_is_two_tone():
    register = literature_register(("A",))
    f0, f1 = conditional_precession_frequencies(
        register.nuclei[0], register.b0
    )
    grid = np.arange(0.0, 40.0, 0.5)
    trace = simulate_sweep(
        register, SequencePlan("correlation", 3.72, n_pulses=4), "t_corr", grid
    )
    columns = [np.ones_like(grid)]
    for frequency in (f0, f1):
        phase = 2 * math.pi * 1e-3 * frequency * grid
        columns.extend([np.cos(phase), np.sin(phase)])
    design = np.column_stack(columns)
    coefficients = np.linalg.lstsq(design, trace.y, rcond=None)[0]
    assert np.max(np.abs(design @ coefficients - trace.y)) < 1e-9
    assert np.hypot(*coefficients[3:5]) > 1e-3


def test_sweep_independent_of_threads():
    register = literature_register()
    plan = SequencePlan("xy4", 3.0, n_pulses=4)
    grid = np.linspace(2.0, 5.0, 12)
    serial = simulate_sweep(register, plan, "tau", grid)
    parallel = simulate_sweep(register, plan, "tau", grid, threads=3)
    np.testing.assert_array_equal(serial.y, parallel.y)
    assert serial.metadata == parallel.metadata
    assert serial.metadata["plan"]["kind"] == "xy4"


def test_n_sweep_records_axis():
    register = literature_register(("A",))
    plan = SequencePlan("cpmg", 3.72, n_pulses=2)
    trace = simulate_sweep(register, plan, "n_pulses", [2, 4, 6, 8])
    assert trace.axis == "n_pulses"
    assert trace.metadata["plan"]["tau_us"] == 3.72


@pytest.mark.parametrize(
    "axis, grid",
    [("tau", [3.0, 2.0]), ("tau", []), ("detuning", [1.0, 2.0])],
)
def test_sweep_rejects_bad_grids(axis, grid):
    with pytest.raises(DomainError):
        simulate_sweep(EMPTY, SequencePlan("hahn", 1.0), axis, grid)
