import math
from dataclasses import dataclass

import numpy as np

from nv_magnetometry.utilities.errors import DomainError

SQUARE = "square"
COSINE_SQUARE = "cosine-square"
COSINE_SQUARE_LITERAL = "cosine-square-literal"
WURST_STANDARD = "wurst-standard"
WURST_LITERAL = "wurst-literal"

SHAPES = (
    SQUARE,
    COSINE_SQUARE,
    COSINE_SQUARE_LITERAL,
    WURST_STANDARD,
    WURST_LITERAL,
)
WURST_SHAPES = (WURST_STANDARD, WURST_LITERAL)


@dataclass(frozen=True)
class EnvelopeSpec:
    """Amplitude envelope of one microwave pulse.

    :param str shape: One of `SHAPES`.
    :param float duration: Pulse length in ns, from rising to falling edge.
    :param float exponent: WURST exponent, ignored by the other shapes.
    :param float span: Full chirp span in MHz (WURST only), swept
        symmetrically from -span/2 to +span/2.
    """

    shape: str
    duration: float
    exponent: float = 20.0
    span: float = 0.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError("unknown envelope shape '{}'".format(self.shape))
        if not self.duration > 0:
            raise DomainError("pulse duration must be positive")
        if not self.exponent > 0:
            raise DomainError("WURST exponent must be positive")
        if self.span != 0 and self.shape not in WURST_SHAPES:
            raise DomainError(
                "only WURST pulses carry a chirp, got span {} MHz for '{}'"
                .format(self.span, self.shape)
            )

    @property
    def is_chirped(self) -> bool:
        return self.shape in WURST_SHAPES and self.span != 0


def sample_count(duration: float, sample_rate: float) -> int:
    """Number of samples a pulse of `duration` ns occupies at `sample_rate`
    GS/s. Products within 1e-9 of an integer are not rounded up."""

    product = duration * sample_rate
    nearest = round(product)
    if abs(product - nearest) < 1e-9:
        return int(nearest)
    return int(math.ceil(product))


def envelope_value(spec: EnvelopeSpec, t):
    """Continuous envelope A(t) for `t` in ns measured from the rising edge.
    Zero outside [0, T)."""

    t = np.asarray(t, dtype=float)
    x = t / spec.duration
    if spec.shape == SQUARE:
        amplitude = np.ones_like(x)
    elif spec.shape == COSINE_SQUARE:
        amplitude = np.sin(np.pi * x) ** 2
    elif spec.shape == COSINE_SQUARE_LITERAL:
        amplitude = np.cos(2 * np.pi * x) ** 2
    elif spec.shape == WURST_STANDARD:
        amplitude = 1.0 - np.abs(np.cos(np.pi * x)) ** spec.exponent
    else:
        amplitude = 1.0 - np.abs(np.sin(2 * np.pi * x)) ** spec.exponent
    return np.where((x >= 0) & (x < 1), amplitude, 0.0)


def chirp_phase(spec: EnvelopeSpec, t):
    """Phase (cycles) accumulated by the linear frequency ramp
    f(t) = -span/2 + span t/T, integrated exactly from the rising edge."""

    t = np.asarray(t, dtype=float)
    if not spec.is_chirped:
        return np.zeros_like(t)
    # MHz * ns = 1e-3 cycles
    return 1e-3 * spec.span * (-0.5 * t + 0.5 * t ** 2 / spec.duration)


def chirp_frequency(spec: EnvelopeSpec, t):
    t = np.asarray(t, dtype=float)
    if not spec.is_chirped:
        return np.zeros_like(t)
    return spec.span * (t / spec.duration - 0.5)


def render_envelope(spec: EnvelopeSpec, sample_rate: float) -> np.ndarray:
    """Sample the envelope of `spec` at `sample_rate` (GS/s).

    Args:
        spec (EnvelopeSpec): The pulse envelope.
        sample_rate (float): Samples per ns.

    Returns:
        np.ndarray: ceil(T * rate) samples A[n] = A(n / rate).
    """

    if not sample_rate > 0:
        raise DomainError("sample rate must be positive")
    count = sample_count(spec.duration, sample_rate)
    if count < 2:
        raise DomainError(
            "a {} ns pulse is not resolvable at {} GS/s".format(
                spec.duration, sample_rate
            )
        )
    return envelope_value(spec, np.arange(count) / sample_rate)
