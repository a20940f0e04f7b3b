import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from functools import reduce
from typing import Dict, List, Sequence

import numpy as np
from scipy.linalg import expm

from nv_magnetometry.physics.frequencies import build_conditional_hamiltonians
from nv_magnetometry.physics.spins import (
    MAX_NUCLEI,
    SpinRegister,
    register_hash,
)
from nv_magnetometry.sequences.plan import (
    SequencePlan,
    build_sequence,
    combine_phase_cycle,
    phase_cycle_pair,
    plan_to_document,
)
from nv_magnetometry.sequences.timing import TimedEventList, expand_timing
from nv_magnetometry.utilities.errors import CapacityError, DomainError
from nv_magnetometry.utilities.traces import MeasurementTrace

logger = logging.getLogger(__name__)

# plan field swept by each sweep axis
SWEEP_FIELDS = {
    "tau": "tau",
    "n_pulses": "n_pulses",
    "t_corr": "t_corr",
    "inner_pulses": "inner_pulses",
}


class RegisterState:
    """Pure state of the sensor qubit and its nuclei.

    The basis is ordered with the sensor as the slowest index: entry
    `s * 2**n + k` is sensor level `s` (0 for m_S = 0, 1 for m_S = -1) with
    the nuclei in computational state `k`, the first nucleus being the most
    significant nuclear bit.

    :param np.ndarray vector: Normalized complex amplitudes of length
        2**(1 + n).
    """

    def __init__(self, vector):
        vector = np.asarray(vector, dtype=complex)
        dimension = len(vector)
        if vector.ndim != 1 or dimension < 2 or dimension & (dimension - 1):
            raise DomainError("state length must be a power of two >= 2")
        if abs(np.linalg.norm(vector) - 1.0) > 1e-12:
            raise DomainError("state must be normalized")
        self._vector = vector

    @classmethod
    def sensor_ground(cls, n_nuclei: int, nuclear_index: int = 0):
        """m_S = 0 with the nuclei in the computational state
        `nuclear_index`."""
        vector = np.zeros(2 ** (1 + n_nuclei), dtype=complex)
        vector[nuclear_index] = 1.0
        return cls(vector)

    @property
    def vector(self) -> np.ndarray:
        return self._vector

    @property
    def n_nuclei(self) -> int:
        return len(self._vector).bit_length() - 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self._vector))

    def sensor_population(self, level: int = 0) -> float:
        half = len(self._vector) // 2
        part = self._vector[level * half:(level + 1) * half]
        return float(np.vdot(part, part).real)

    def evolve(self, unitary: np.ndarray) -> "RegisterState":
        return RegisterState(unitary @ self._vector)


def _embed(operator: np.ndarray, index: int, n: int) -> np.ndarray:
    factors = [np.eye(2)] * n
    factors[index] = operator
    return reduce(np.kron, factors)


class RegisterPropagators:
    """Free-evolution and pulse operators of one register at one sensor
    detuning, with free propagators cached by duration.

    :param SpinRegister register: The register.
    :param float detuning: Sensor detuning in MHz.
    """

    def __init__(self, register: SpinRegister, detuning: float = 0.0):
        n = len(register.nuclei)
        if n > MAX_NUCLEI:
            raise CapacityError("at most {} nuclei".format(MAX_NUCLEI))
        self._n = n
        self._nuclear_dimension = 2 ** n
        h0 = np.zeros((2 ** n, 2 ** n), dtype=complex)
        h1 = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for index, nucleus in enumerate(register.nuclei):
            c0, c1 = build_conditional_hamiltonians(nucleus, register.b0)
            h0 += _embed(c0, index, n)
            h1 += _embed(c1, index, n)
        # MHz -> kHz on the m_S = -1 branch
        h1 += 1000.0 * detuning * np.eye(2 ** n)
        self._branches = (h0, h1)
        self._cache: Dict[Fraction, np.ndarray] = {}

    @property
    def nuclear_dimension(self) -> int:
        return self._nuclear_dimension

    @property
    def hamiltonians(self):
        """(H for m_S = 0, H for m_S = -1), nuclear blocks in kHz."""
        return self._branches

    def free(self, duration: Fraction) -> np.ndarray:
        """Block-diagonal propagator exp(-2πi H t) for `duration` ns."""
        cached = self._cache.get(duration)
        if cached is not None:
            return cached
        d = self._nuclear_dimension
        unitary = np.zeros((2 * d, 2 * d), dtype=complex)
        # kHz * ns = 1e-6 cycles
        scale = -2j * np.pi * 1e-6 * float(duration)
        unitary[:d, :d] = expm(scale * self._branches[0])
        unitary[d:, d:] = expm(scale * self._branches[1])
        self._cache[duration] = unitary
        return unitary

    def pulse(self, rotation: np.ndarray) -> np.ndarray:
        return np.kron(rotation, np.eye(self._nuclear_dimension))


def _dephase_sensor(columns: np.ndarray) -> np.ndarray:
    # incoherent sum of the two sensor branches
    half = columns.shape[0] // 2
    upper = columns.copy()
    upper[half:] = 0
    lower = columns.copy()
    lower[:half] = 0
    return np.hstack([upper, lower])


def run_schedule(
    timed: TimedEventList, propagators: RegisterPropagators
) -> float:
    """P(m_S = 0) after a timed sequence of ideal pulses, the nuclei
    starting maximally mixed.

    The mixed initial state is carried as the columns |0>|k>, one per
    nuclear basis state; a storage window replaces every column by its two
    sensor-branch projections.
    """

    d = propagators.nuclear_dimension
    columns = np.zeros((2 * d, d), dtype=complex)
    columns[:d, :d] = np.eye(d)

    cursor = timed.events[0].center if timed.events else Fraction(0)
    for event in timed.events:
        gap = event.center - cursor
        if gap:
            columns = propagators.free(gap) @ columns
        columns = propagators.pulse(event.pulse.rotation()) @ columns
        cursor = event.center
        if event.role == "store":
            columns = _dephase_sensor(columns)

    population = np.sum(np.abs(columns[:d]) ** 2) / d
    return float(min(max(population, 0.0), 1.0))


def propagate_state(
    state: RegisterState,
    timed: TimedEventList,
    propagators: RegisterPropagators,
) -> RegisterState:
    """Pure-state evolution through a schedule without storage windows."""

    if timed.storage:
        raise DomainError("a storage window does not keep the state pure")
    if len(state.vector) != 2 * propagators.nuclear_dimension:
        raise DomainError("state and register dimensions differ")
    cursor = timed.events[0].center if timed.events else Fraction(0)
    for event in timed.events:
        gap = event.center - cursor
        if gap:
            state = state.evolve(propagators.free(gap))
        state = state.evolve(propagators.pulse(event.pulse.rotation()))
        cursor = event.center
    return state


def _single_readout(
    register: SpinRegister, plan: SequencePlan, detuning: float
) -> float:
    timed = expand_timing(
        build_sequence(plan),
        plan.durations.ideal(),
        laser_init=0.0,
        laser_readout=0.0,
    )
    total = 0.0
    for offset, weight in register.detuning_components():
        propagators = RegisterPropagators(register, offset + detuning)
        total += weight * run_schedule(timed, propagators)
    return total


def evolve_ideal(
    register: SpinRegister, plan: SequencePlan, detuning: float = 0.0
) -> float:
    """Probability of m_S = 0 at the end of `plan`, with instantaneous
    pulses and exact conditional free evolution of the nuclei.

    Args:
        register (SpinRegister): Sensor, nuclei and nitrogen mixture.
        plan (SequencePlan): The sequence; phase-cycled when
            `plan.phase_cycling` is set.
        detuning (float): Microwave detuning (MHz) added to every mixture
            component.

    Returns:
        float: P0 in [0, 1], weight-averaged over the nitrogen mixture.
    """

    if len(register.nuclei) > MAX_NUCLEI:
        raise CapacityError("at most {} nuclei".format(MAX_NUCLEI))
    if plan.phase_cycling:
        plus, minus = phase_cycle_pair(plan)
        return float(
            combine_phase_cycle(
                _single_readout(register, plus, detuning),
                _single_readout(register, minus, detuning),
            )
        )
    return _single_readout(register, plan, detuning)


def simulate_sweep(
    register: SpinRegister,
    plan: SequencePlan,
    axis: str,
    grid: Sequence[float],
    threads: int = 1,
    detuning: float = 0.0,
) -> MeasurementTrace:
    """Evaluate `evolve_ideal` over a grid of one plan parameter.

    Points are independent and may run on `threads` workers; results are
    assembled in grid order.
    """

    if axis not in SWEEP_FIELDS:
        raise DomainError("cannot sweep '{}'".format(axis))
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise DomainError("sweep grid must be a nonempty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("sweep grid must be increasing")

    name = SWEEP_FIELDS[axis]
    integral = name in ("n_pulses", "inner_pulses")
    plans: List[SequencePlan] = [
        replace(plan, **{name: int(value) if integral else float(value)})
        for value in grid
    ]

    logger.info(
        "simulating %d points of %s over %s with %d thread(s)",
        len(plans),
        plan.label,
        axis,
        threads,
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            values = list(
                executor.map(
                    lambda item: evolve_ideal(register, item, detuning), plans
                )
            )
    else:
        values = [evolve_ideal(register, item, detuning) for item in plans]

    return MeasurementTrace(
        x=grid,
        y=np.array(values),
        axis=axis,
        metadata={
            "plan": plan_to_document(plan),
            "register_hash": register_hash(register),
            "detuning_MHz": detuning,
            "source": "simulation",
        },
    )
