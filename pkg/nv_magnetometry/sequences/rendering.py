import logging
import math

import numpy as np

from nv_magnetometry.utilities.errors import CapacityError, DomainError
from nv_magnetometry.waveform.envelopes import EnvelopeSpec, sample_count
from nv_magnetometry.waveform.iq import IQWaveform, synthesize_iq
from .timing import TimedEventList

logger = logging.getLogger(__name__)

# longest sequence the AWG memory holds at 1 GS/s, ns
MAX_SEQUENCE_DURATION = 16.2e6


def sequence_to_waveform(
    timed: TimedEventList,
    if_frequency: float = 100.0,
    if_phase: float = 0.0,
    sample_rate: float = 1.0,
    max_duration: float = MAX_SEQUENCE_DURATION,
) -> IQWaveform:
    """Render a timed sequence as one IQ waveform.

    Each pulse is synthesized at its rounded start sample with
    θ_IF = `if_phase` plus the phase of its rotation axis (0°, 90°, 180°,
    270° for +x, +y, -x, -y); the carrier is referenced to the start of the
    waveform, so pulses about one axis share a phase. Samples outside
    pulses are zero.
    """

    if float(timed.end) > max_duration:
        raise CapacityError(
            "sequence of {} ns exceeds the maximum of {} ns".format(
                float(timed.end), max_duration
            )
        )
    total = int(math.ceil(float(timed.end) * sample_rate - 1e-9))
    i = np.zeros(total)
    q = np.zeros(total)

    occupied_until = 0
    for event in timed.events:
        pulse = event.pulse
        if pulse.duration == 0:
            raise DomainError("ideal pulses cannot be rendered")
        first = int(round(float(event.start) * sample_rate))
        count = sample_count(pulse.duration, sample_rate)
        if first < occupied_until:
            raise DomainError(
                "pulse {} at {} ns overlaps the previous pulse after "
                "sampling".format(pulse.label, float(event.start))
            )
        segment = synthesize_iq(
            EnvelopeSpec(pulse.shape, pulse.duration),
            if_frequency,
            if_phase + pulse.phase,
            sample_rate,
            start_time=first / sample_rate,
        )
        if first + count > total:
            i = np.concatenate([i, np.zeros(first + count - total)])
            q = np.concatenate([q, np.zeros(first + count - total)])
            total = first + count
        i[first:first + count] = segment.i
        q[first:first + count] = segment.q
        occupied_until = first + count

    logger.info(
        "rendered %d pulses into %d samples at %s GS/s",
        len(timed),
        total,
        sample_rate,
    )
    return IQWaveform(sample_rate, if_frequency, if_phase, i, q)
