import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.traces import MeasurementTrace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReadoutModel:
    """Photon-counting readout of the sensor.

    :param float bright: Mean photons per shot from m_S = 0.
    :param float dark: Mean photons per shot from m_S = -1.
    :param int shots: Repetitions summed into one point.
    :param int seed: Master seed; point `i` draws from the generator seeded
        with (seed, i).
    """

    bright: float
    dark: float
    shots: int
    seed: int = 0

    def __post_init__(self):
        if not self.bright > self.dark > 0:
            raise DomainError("photon rates must satisfy bright > dark > 0")
        if self.shots < 1:
            raise DomainError("at least one shot per point is needed")
        if self.seed < 0:
            raise DomainError("the seed must be nonnegative")

    def mean_counts(self, p0) -> np.ndarray:
        p0 = np.asarray(p0, dtype=float)
        return self.shots * (self.dark + p0 * (self.bright - self.dark))


def estimator_std(p0, model: ReadoutModel) -> np.ndarray:
    """Standard deviation of the referenced P0 estimate, propagated from
    the Poisson variances of the signal and of both references."""

    p0 = np.asarray(p0, dtype=float)
    bright = model.shots * model.bright
    dark = model.shots * model.dark
    variance = (
        model.mean_counts(p0) + p0 ** 2 * bright + (1.0 - p0) ** 2 * dark
    ) / (bright - dark) ** 2
    return np.sqrt(variance)


def sample_photons(
    trace: MeasurementTrace, model: ReadoutModel, expected: bool = False
) -> Tuple[MeasurementTrace, MeasurementTrace]:
    """Turn a P0 trace into photon counts and a referenced P0 estimate.

    Each point draws Poisson counts of mean shots·(dark + P0·(bright −
    dark)) together with a bright and a dark reference, and estimates
    P0 = (counts − dark_ref)/(bright_ref − dark_ref). A draw with
    bright_ref = dark_ref leaves the estimate NaN and flags the point.

    Args:
        trace (MeasurementTrace): The noiseless P0 trace.
        model (ReadoutModel): Photon rates, shots and seed.
        expected (bool): Use the mean counts instead of random draws.

    Returns:
        Tuple[MeasurementTrace, MeasurementTrace]: The signal counts and
            the estimated P0, both carrying the seed in their metadata.
    """

    p0 = np.clip(trace.y, 0.0, 1.0)
    mean = model.mean_counts(p0)
    bright_mean = model.shots * model.bright
    dark_mean = model.shots * model.dark

    if expected:
        counts = mean
        bright = np.full(len(trace), bright_mean)
        dark = np.full(len(trace), dark_mean)
    else:
        counts = np.empty(len(trace))
        bright = np.empty(len(trace))
        dark = np.empty(len(trace))
        for index in range(len(trace)):
            rng = np.random.default_rng([model.seed, index])
            counts[index] = rng.poisson(mean[index])
            bright[index] = rng.poisson(bright_mean)
            dark[index] = rng.poisson(dark_mean)

    contrast = bright - dark
    degenerate = contrast == 0
    estimate = np.full(len(trace), np.nan)
    np.divide(counts - dark, contrast, out=estimate, where=~degenerate)
    flags = trace.flags | degenerate
    if np.any(degenerate):
        logger.warning(
            "%d point(s) with equal bright and dark references flagged",
            int(np.count_nonzero(degenerate)),
        )

    metadata = dict(trace.metadata)
    metadata.update(
        {
            "seed": model.seed,
            "shots": model.shots,
            "bright_per_shot": model.bright,
            "dark_per_shot": model.dark,
            "expected": expected,
        }
    )
    counts_trace = MeasurementTrace(
        x=trace.x,
        y=counts,
        axis=trace.axis,
        x_unit=trace.x_unit,
        y_label="counts",
        metadata=dict(metadata),
        flags=flags,
    )
    estimate_trace = MeasurementTrace(
        x=trace.x,
        y=estimate,
        axis=trace.axis,
        x_unit=trace.x_unit,
        y_label="P0",
        metadata=metadata,
        flags=flags,
    )
    return counts_trace, estimate_trace
