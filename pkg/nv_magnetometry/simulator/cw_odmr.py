import logging
from typing import Sequence

import numpy as np

from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.traces import MeasurementTrace

logger = logging.getLogger(__name__)


def lorentzian(frequencies, center: float, linewidth: float) -> np.ndarray:
    """Unit-height Lorentzian of full width `linewidth`; a zero width
    gives 1 exactly at `center` and 0 elsewhere."""

    frequencies = np.asarray(frequencies, dtype=float)
    if linewidth == 0:
        return (frequencies == center).astype(float)
    half = 0.5 * linewidth
    return half ** 2 / ((frequencies - center) ** 2 + half ** 2)


def synth_cw_odmr(
    resonances: Sequence[float],
    linewidths: Sequence[float],
    contrasts: Sequence[float],
    frequencies: Sequence[float],
) -> MeasurementTrace:
    """Synthetic CW ODMR contrast, the product of one Lorentzian dip
    1 − c·L(f) per resonance. Frequencies and widths in MHz."""

    frequencies = np.asarray(frequencies, dtype=float)
    if frequencies.ndim != 1 or len(frequencies) == 0:
        raise DomainError("frequency grid must be a nonempty 1-D sequence")
    if not len(resonances) == len(linewidths) == len(contrasts):
        raise DomainError("one linewidth and contrast per resonance")

    signal = np.ones(len(frequencies))
    for center, width, contrast in zip(resonances, linewidths, contrasts):
        if width < 0:
            raise DomainError("linewidth must be nonnegative")
        if not 0 <= contrast <= 1:
            raise DomainError("contrast must lie in [0, 1]")
        signal *= 1.0 - contrast * lorentzian(frequencies, center, width)

    logger.debug("synthesized CW ODMR with %d resonances", len(resonances))
    return MeasurementTrace(
        x=frequencies,
        y=signal,
        axis="frequency",
        x_unit="MHz",
        y_label="contrast",
        metadata={
            "resonances_MHz": list(map(float, resonances)),
            "linewidths_MHz": list(map(float, linewidths)),
            "contrasts": list(map(float, contrasts)),
            "source": "synthetic",
        },
    )
