import logging
from dataclasses import replace
from typing import Optional

import numpy as np

from nv_magnetometry.simulator.decoherence import (
    MULTIPULSE,
    DecoherenceEnvelope,
    decay_time,
)
from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.fit_result import FitResult
from nv_magnetometry.utilities.traces import MeasurementTrace
from .fitting import fit_model

logger = logging.getLogger(__name__)

# envelope values below this cannot be divided out
ENVELOPE_FLOOR = 1e-6


def _mask(trace: MeasurementTrace, mask) -> np.ndarray:
    if mask is None:
        return np.ones(len(trace), dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != trace.x.shape:
        raise DomainError("the mask must have one entry per trace point")
    return mask


def fit_envelope(
    trace: MeasurementTrace,
    mask=None,
    kind: str = MULTIPULSE,
    n_pulses: Optional[int] = None,
    tau: Optional[float] = None,
    initial_time_constant: Optional[float] = None,
) -> FitResult:
    """Fit a stretched-exponential envelope ½ + ½·exp[-(t/T)^p] to the
    signal-free points of a trace.

    Args:
        trace (MeasurementTrace): The measured trace.
        mask: Boolean selection of the signal-free points, all points when
            omitted.
        kind (str): Envelope kind, which fixes the decay time t.
        n_pulses (Optional[int]): π count of a τ sweep.
        tau (Optional[float]): π spacing of an N sweep, µs.
        initial_time_constant (Optional[float]): Start value of T, µs;
            the 1/e crossing of the data by default.

    Returns:
        FitResult: `time_constant` (µs) and `exponent`.
    """

    mask = _mask(trace, mask) & np.isfinite(trace.y)
    unit_envelope = DecoherenceEnvelope(kind, 1.0)
    times = decay_time(trace, unit_envelope, n_pulses, tau)[mask]
    coherence = 2.0 * trace.y[mask] - 1.0
    if len(times) < 3:
        return FitResult.failure(
            ("time_constant", "exponent"),
            {},
            "fewer than three signal-free points",
        )
    if initial_time_constant is None:
        below = times[coherence < np.exp(-1)]
        initial_time_constant = (
            float(np.min(below)) if len(below) else float(np.max(times))
        )

    def model(t, time_constant, exponent):
        return np.exp(-((t / time_constant) ** exponent))

    return fit_model(
        model,
        times,
        coherence,
        {"time_constant": initial_time_constant, "exponent": 1.0},
        bounds={"time_constant": (1e-9, np.inf), "exponent": (0.1, 5.0)},
        provenance={"kind": kind, "points": int(len(times))},
    )


def normalize_by_envelope(
    trace: MeasurementTrace,
    envelope,
    mask=None,
    n_pulses: Optional[int] = None,
    tau: Optional[float] = None,
) -> MeasurementTrace:
    """Divide the coherent part of a trace by a decay envelope:
    P0 -> ½ + (P0 − ½)/E, so the signal-free baseline sits at 1.

    Args:
        trace (MeasurementTrace): The measured trace.
        envelope: A `DecoherenceEnvelope`, or the envelope values sampled
            on the trace.
        mask: The points where the envelope must be divisible, all points
            when omitted.

    Returns:
        MeasurementTrace: The normalized trace; points outside the mask
            where the envelope vanishes are NaN and flagged.

    Raises:
        DomainError: The envelope vanishes at a masked point.
    """

    if isinstance(envelope, DecoherenceEnvelope):
        values = envelope.factor(decay_time(trace, envelope, n_pulses, tau))
    else:
        values = np.broadcast_to(
            np.asarray(envelope, dtype=float), trace.y.shape
        )
    mask = _mask(trace, mask)
    if np.any(np.abs(values[mask]) < ENVELOPE_FLOOR):
        raise DomainError("the envelope vanishes inside the mask")

    small = np.abs(values) < ENVELOPE_FLOOR
    normalized = np.full(len(trace), np.nan)
    np.divide(trace.y - 0.5, values, out=normalized, where=~small)
    normalized = normalized + 0.5
    if np.any(small):
        logger.warning(
            "%d point(s) with a vanishing envelope flagged",
            int(np.count_nonzero(small)),
        )
    return replace(
        trace.with_y(normalized, normalized=True), flags=trace.flags | small
    )
