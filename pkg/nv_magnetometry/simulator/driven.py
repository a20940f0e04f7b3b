import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from nv_magnetometry.utilities.errors import DomainError, NumericalError
from nv_magnetometry.utilities.traces import MeasurementTrace
from nv_magnetometry.waveform.envelopes import (
    COSINE_SQUARE,
    SQUARE,
    EnvelopeSpec,
    chirp_frequency,
    envelope_value,
)

logger = logging.getLogger(__name__)

TOLERANCE = 1e-6
MAX_REFINEMENTS = 14


def _step_unitaries(delta, rabi, dt) -> np.ndarray:
    """exp(-2πi H dt) for H = (Δσz + Ωσx)/2, all in MHz and ns, one 2x2
    matrix per entry of `delta` and `rabi`."""

    omega = 0.5 * np.hypot(delta, rabi)
    angle = 2 * np.pi * 1e-3 * omega * dt
    cos = np.cos(angle)
    # sin(angle)/omega with the omega -> 0 limit
    safe = np.where(omega > 0, omega, 1.0)
    sinc = np.where(omega > 0, np.sin(angle) / safe, 2 * np.pi * 1e-3 * dt)
    unitaries = np.empty((len(delta), 2, 2), dtype=complex)
    unitaries[:, 0, 0] = cos - 0.5j * sinc * delta
    unitaries[:, 1, 1] = cos + 0.5j * sinc * delta
    unitaries[:, 0, 1] = -0.5j * sinc * rabi
    unitaries[:, 1, 0] = -0.5j * sinc * rabi
    return unitaries


def _ordered_product(unitaries: np.ndarray) -> np.ndarray:
    # pairwise reduction, later steps to the left
    while len(unitaries) > 1:
        if len(unitaries) % 2:
            unitaries = np.concatenate(
                [unitaries, np.eye(2, dtype=complex)[None]]
            )
        unitaries = unitaries[1::2] @ unitaries[0::2]
    return unitaries[0]


def _propagate(spec: EnvelopeSpec, detuning, peak_rabi, steps: int):
    dt = spec.duration / steps
    midpoints = (np.arange(steps) + 0.5) * dt
    rabi = peak_rabi * envelope_value(spec, midpoints)
    delta = detuning - chirp_frequency(spec, midpoints)
    return _ordered_product(_step_unitaries(delta, rabi, dt))


def evolve_driven(
    detuning: float,
    peak_rabi: float,
    spec: EnvelopeSpec,
    step: float = 1.0,
    initial: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Final two-level state after a shaped microwave pulse.

    Integrates H(t) = (Δ(t)σz + Ω(t)σx)/2 in the rotating frame with
    piecewise-constant exact exponentials sampled at the step midpoints.
    Δ(t) is the detuning minus the instantaneous chirp of the pulse and
    Ω(t) the peak Rabi frequency times the envelope. The step is halved
    until P(m_S = 0) changes by less than 1e-6.

    Args:
        detuning (float): Sensor resonance minus carrier, MHz.
        peak_rabi (float): Rabi frequency at unit envelope, MHz.
        spec (EnvelopeSpec): Pulse envelope.
        step (float): Initial integration step, ns.
        initial (Optional[np.ndarray]): Initial state, m_S = 0 by default.

    Returns:
        np.ndarray: The state (amplitude of m_S = 0, amplitude of m_S = -1).
    """

    if not step > 0:
        raise DomainError("integration step must be positive")
    if peak_rabi < 0:
        raise DomainError("Rabi frequency must be nonnegative")
    state = np.array([1.0, 0.0], dtype=complex) if initial is None else (
        np.asarray(initial, dtype=complex)
    )

    steps = max(2, int(math.ceil(spec.duration / step)))
    final = _propagate(spec, detuning, peak_rabi, steps) @ state
    for _ in range(MAX_REFINEMENTS):
        steps *= 2
        refined = _propagate(spec, detuning, peak_rabi, steps) @ state
        change = abs(abs(refined[0]) ** 2 - abs(final[0]) ** 2)
        final = refined
        if change < TOLERANCE:
            return final
    raise NumericalError(
        "step refinement did not converge below {} after {} halvings".format(
            TOLERANCE, MAX_REFINEMENTS
        ),
        (abs(final[0]) ** 2, abs(refined[0]) ** 2),
    )


def flip_probability(state: np.ndarray) -> float:
    return float(abs(state[1]) ** 2)


def calibrate_pulse_duration(
    shape: str, peak_rabi: float, angle: float = math.pi
) -> float:
    """Duration (ns) of a resonant pulse rotating the sensor by `angle`."""

    if not peak_rabi > 0:
        raise DomainError("Rabi frequency must be positive")
    square = angle / (2 * math.pi * 1e-3 * peak_rabi)
    if shape == SQUARE:
        return square
    if shape == COSINE_SQUARE:
        # half the area of a square pulse
        return 2 * square
    raise DomainError("no closed-form calibration for '{}'".format(shape))


def rabi_curve(
    durations: Sequence[float],
    shape: str = SQUARE,
    peak_rabi: float = 10.0,
    detuning: float = 0.0,
) -> MeasurementTrace:
    values = []
    for duration in durations:
        spec = EnvelopeSpec(shape, duration)
        state = evolve_driven(detuning, peak_rabi, spec)
        values.append(1.0 - flip_probability(state))
    return MeasurementTrace(
        x=np.asarray(durations, dtype=float),
        y=np.array(values),
        axis="duration",
        metadata={
            "shape": shape,
            "peak_rabi_MHz": peak_rabi,
            "detuning_MHz": detuning,
            "source": "simulation",
        },
    )


def pulsed_odmr_profile(
    pi_duration: float,
    detunings: Sequence[float],
    mixture: Sequence[Tuple[float, float]] = (),
    shape: str = SQUARE,
) -> MeasurementTrace:
    """P0 versus microwave detuning for a π pulse calibrated on resonance,
    weight-averaged over the nitrogen mixture."""

    detunings = np.asarray(detunings, dtype=float)
    if detunings.ndim != 1 or len(detunings) == 0:
        raise DomainError("detuning grid must be a nonempty 1-D sequence")
    components = tuple(mixture) or ((0.0, 1.0),)
    peak_rabi = calibrate_pulse_duration(shape, 1.0) / pi_duration
    spec = EnvelopeSpec(shape, pi_duration)

    values = np.zeros(len(detunings))
    for offset, weight in components:
        for index, detuning in enumerate(detunings):
            state = evolve_driven(detuning + offset, peak_rabi, spec)
            values[index] += weight * (1.0 - flip_probability(state))
    logger.info(
        "pulsed ODMR: %d detunings, %d mixture components, π = %s ns",
        len(detunings),
        len(components),
        pi_duration,
    )
    return MeasurementTrace(
        x=detunings,
        y=values,
        axis="detuning",
        metadata={
            "pi_duration_ns": pi_duration,
            "shape": shape,
            "peak_rabi_MHz": peak_rabi,
            "mixture": [list(item) for item in components],
            "source": "simulation",
        },
    )
