import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import fft
from scipy.signal import find_peaks, peak_widths
from scipy.signal.windows import hann

from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.traces import MeasurementTrace

logger = logging.getLogger(__name__)

NO_WINDOW = "none"
HANN = "hann"
WINDOWS = (NO_WINDOW, HANN)

JACOBSEN = "jacobsen"
LOG_PARABOLIC = "log-parabolic"

# time axis -> (scale from 1/x_unit to the frequency unit, frequency unit)
FREQUENCY_UNITS = {
    "tau": (1000.0, "kHz"),
    "t_corr": (1000.0, "kHz"),
    "n_tau": (1000.0, "kHz"),
    "delay": (1000.0, "MHz"),
    "duration": (1000.0, "MHz"),
}

# amplitudes below this are numerical noise
AMPLITUDE_FLOOR = 1e-9


@dataclass(frozen=True)
class SpectrumPeak:
    """A refined spectral peak: `frequency` and `half_width` in the unit of
    the spectrum, `amplitude` the single-sided amplitude of the tone."""

    frequency: float
    amplitude: float
    half_width: float
    method: str


@dataclass(frozen=True, eq=False)
class Spectrum:
    frequencies: np.ndarray
    amplitudes: np.ndarray
    unit: str
    window: str
    peaks: Tuple[SpectrumPeak, ...]

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def to_trace(self, **metadata) -> MeasurementTrace:
        return MeasurementTrace(
            x=self.frequencies,
            y=self.amplitudes,
            axis="frequency",
            x_unit=self.unit,
            y_label="amplitude",
            metadata=dict(metadata, window=self.window),
        )


def _jacobsen_offset(transform: np.ndarray, k: int, n: int) -> float:
    # three-bin complex estimator with the finite-length bias correction
    correction = np.tan(np.pi / n) / (np.pi / n)
    left, center, right = transform[k - 1], transform[k], transform[k + 1]
    denominator = 2 * center - left - right
    if denominator == 0:
        return 0.0
    return float(correction * np.real((left - right) / denominator))


def _log_parabolic_offset(magnitude: np.ndarray, k: int) -> float:
    values = magnitude[k - 1:k + 2]
    if np.any(values <= 0):
        return 0.0
    a, b, c = np.log(values)
    denominator = 4 * b - 2 * a - 2 * c
    if denominator == 0:
        return 0.0
    return float((c - a) / denominator)


def spectrum(
    trace: MeasurementTrace,
    window: str = NO_WINDOW,
    prominence: float = 0.1,
) -> Spectrum:
    """Single-sided amplitude spectrum of a uniformly sampled trace.

    The mean is removed before the transform so the DC bin carries no
    peak. Local maxima whose prominence exceeds `prominence` times the
    largest amplitude are reported, each refined from the three bins
    around it: the Jacobsen complex estimator without a window, a parabola
    through the log magnitudes with the Hann window. Peaks are ordered by
    decreasing amplitude, the lower frequency first on ties.

    Args:
        trace (MeasurementTrace): Trace on a τ, t_corr, Nτ, delay or
            duration axis.
        window (str): "none" or "hann".
        prominence (float): Relative prominence threshold.

    Returns:
        Spectrum: Frequencies, amplitudes and peaks; kHz for axes in µs,
            MHz for axes in ns.
    """

    if window not in WINDOWS:
        raise DomainError("unknown window '{}'".format(window))
    if trace.axis not in FREQUENCY_UNITS:
        raise DomainError(
            "a '{}' axis has no Fourier dual".format(trace.axis)
        )
    if not trace.is_uniform():
        raise DomainError("the trace is not uniformly sampled")
    if np.any(~np.isfinite(trace.y)):
        raise DomainError("the trace holds non-finite values")

    scale, unit = FREQUENCY_UNITS[trace.axis]
    n = len(trace)
    step = float(trace.x[1] - trace.x[0])
    taper = hann(n, sym=False) if window == HANN else np.ones(n)
    signal = (trace.y - np.mean(trace.y)) * taper
    transform = fft.rfft(signal)
    magnitude = np.abs(transform)
    amplitudes = 2.0 * magnitude / np.sum(taper)
    frequencies = fft.rfftfreq(n, d=step) * scale
    bin_width = float(frequencies[1] - frequencies[0])

    top = float(np.max(amplitudes[1:])) if n > 2 else 0.0
    peaks = []
    if top > AMPLITUDE_FLOOR:
        indices, _ = find_peaks(amplitudes, prominence=prominence * top)
        indices = [k for k in indices if amplitudes[k] > AMPLITUDE_FLOOR]
        widths = (
            peak_widths(amplitudes, np.array(indices), rel_height=0.5)[0]
            if indices
            else []
        )
        for k, width in zip(indices, widths):
            if window == HANN:
                offset = _log_parabolic_offset(magnitude, k)
                method = LOG_PARABOLIC
            else:
                offset = _jacobsen_offset(transform, k, n)
                method = JACOBSEN
            offset = min(max(offset, -0.5), 0.5)
            peaks.append(
                SpectrumPeak(
                    frequency=float((k + offset) * bin_width),
                    amplitude=float(amplitudes[k]),
                    half_width=float(0.5 * width * bin_width),
                    method=method,
                )
            )
    peaks.sort(key=lambda peak: (-peak.amplitude, peak.frequency))
    logger.info(
        "spectrum of %d points on %s: %d peak(s), bin %.4g %s",
        n,
        trace.axis,
        len(peaks),
        bin_width,
        unit,
    )
    return Spectrum(frequencies, amplitudes, unit, window, tuple(peaks))
