import logging
import math
from dataclasses import dataclass

import numpy as np

from nv_magnetometry.utilities.errors import DomainError
from .envelopes import EnvelopeSpec, chirp_phase, render_envelope

logger = logging.getLogger(__name__)

# sample magnitudes may exceed 1 by rounding only
AMPLITUDE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class IQWaveform:
    """Two-channel baseband waveform.

    :param float sample_rate: Samples per ns (GS/s).
    :param float if_frequency: Intermediate frequency f_IF in MHz.
    :param float if_phase: Intermediate phase θ_IF in degrees.
    :param np.ndarray i: In-phase samples.
    :param np.ndarray q: Quadrature samples.
    """

    sample_rate: float
    if_frequency: float
    if_phase: float
    i: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.i, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if i.shape != q.shape or i.ndim != 1:
            raise DomainError("I and Q must be 1-D arrays of equal length")
        if not self.sample_rate > 0:
            raise DomainError("sample rate must be positive")
        if len(i) and max(np.max(np.abs(i)), np.max(np.abs(q))) > (
            1.0 + AMPLITUDE_TOLERANCE
        ):
            raise DomainError("IQ samples must lie within [-1, 1]")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "q", q)

    def __len__(self):
        return len(self.i)

    @property
    def duration(self) -> float:
        """Length in ns."""
        return len(self.i) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.i)) / self.sample_rate


def carrier_phase(frequency: float, phase_deg: float, t) -> np.ndarray:
    """Phase (rad) of a carrier at `frequency` MHz and `phase_deg` degrees at
    absolute times `t` (ns)."""

    return 2 * np.pi * 1e-3 * frequency * np.asarray(t) + math.radians(
        phase_deg
    )


def synthesize_iq(
    spec: EnvelopeSpec,
    if_frequency: float,
    if_phase: float,
    sample_rate: float,
    start_time: float = 0.0,
) -> IQWaveform:
    """Single-sideband IQ pair of one pulse.

    I[n] = A(t) cos(2π f_IF t + θ_IF + φ_chirp(t)), Q[n] the sine. The
    carrier is referenced to the absolute time `start_time + n / rate`
    while the envelope and the chirp run from the rising edge.

    Args:
        spec (EnvelopeSpec): The pulse envelope.
        if_frequency (float): f_IF in MHz.
        if_phase (float): θ_IF in degrees.
        sample_rate (float): GS/s.
        start_time (float): Absolute time (ns) of the first sample.

    Returns:
        IQWaveform: The pulse samples.
    """

    amplitude = render_envelope(spec, sample_rate)
    local = np.arange(len(amplitude)) / sample_rate
    phase = carrier_phase(if_frequency, if_phase, start_time + local)
    phase = phase + 2 * np.pi * chirp_phase(spec, local)
    return IQWaveform(
        sample_rate,
        if_frequency,
        if_phase,
        amplitude * np.cos(phase),
        amplitude * np.sin(phase),
    )


def upconvert(
    iq: IQWaveform,
    lo_frequency: float,
    lo_phase: float,
    output_rate: float,
) -> np.ndarray:
    """Mix an IQ pair with a local oscillator into one real channel.

    output(t) = I(t) cos(2π f_LO t + θ_LO) - Q(t) sin(2π f_LO t + θ_LO).

    The output rate must be an integer multiple of the IQ rate. The baseband
    envelope (the IQ pair with its IF carrier removed) is held between IQ
    samples while both carriers are evaluated at every output instant.
    """

    ratio = output_rate / iq.sample_rate
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9:
        raise DomainError(
            "output rate {} GS/s is not an integer multiple of the IQ rate "
            "{} GS/s".format(output_rate, iq.sample_rate)
        )
    highest = abs(lo_frequency) + abs(iq.if_frequency)
    if not highest * 1e-3 < output_rate / 2:
        raise DomainError(
            "f_LO + f_IF = {} MHz violates the Nyquist limit of {} GS/s"
            .format(highest, output_rate)
        )
    if len(iq) == 0:
        return np.zeros(0)

    if_carrier = np.exp(
        1j * carrier_phase(iq.if_frequency, iq.if_phase, iq.times)
    )
    baseband = (iq.i + 1j * iq.q) / if_carrier
    held = np.repeat(baseband, factor)
    t = np.arange(len(held)) / output_rate
    remodulated = held * np.exp(
        1j * carrier_phase(iq.if_frequency, iq.if_phase, t)
    )
    lo = carrier_phase(lo_frequency, lo_phase, t)
    logger.debug(
        "upconverted %d IQ samples to %d output samples", len(iq), len(held)
    )
    return remodulated.real * np.cos(lo) - remodulated.imag * np.sin(lo)
