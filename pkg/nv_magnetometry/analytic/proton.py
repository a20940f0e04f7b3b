import logging
import math
from dataclasses import dataclass

import numpy as np

from nv_magnetometry.physics.frequencies import larmor_frequency
from nv_magnetometry.utilities.constants import CONSTANTS
from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.traces import MeasurementTrace

logger = logging.getLogger(__name__)

# proton density of immersion oil, m^-3
OIL_PROTON_DENSITY = 6e28


def _check_layer(density: float, depth: float):
    if not density > 0:
        raise DomainError("nuclear density must be positive")
    if not depth > 0:
        raise DomainError("NV depth must be positive")


def b_rms(density: float, depth: float) -> float:
    """RMS field (nT) at an NV `depth` nm below a semi-infinite layer of
    statistically polarized protons of `density` per m³."""

    _check_layer(density, depth)
    gamma_h = CONSTANTS.gamma_h1 * 1e6  # Hz/T
    d = depth * 1e-9
    field = (
        CONSTANTS.mu0_over_4pi
        * CONSTANTS.planck_h
        * gamma_h
        * math.sqrt(5 * math.pi * density / (96 * d ** 3))
    )
    return field * 1e9


def proton_count(density: float, depth: float) -> float:
    """Protons in the d³ volume the NV senses."""
    _check_layer(density, depth)
    return density * (depth * 1e-9) ** 3


def statistical_polarization(density: float, depth: float) -> float:
    return math.sqrt(proton_count(density, depth))


@dataclass(frozen=True)
class ProtonLayerModel:
    """Proton layer above the sensor and the decoupling train probing it.

    :param float density: Proton density, m^-3.
    :param float depth: NV depth below the surface, nm.
    :param int n_pulses: π count N.
    :param float larmor: Proton Larmor frequency f_h, kHz.
    """

    density: float
    depth: float
    n_pulses: int
    larmor: float

    def __post_init__(self):
        _check_layer(self.density, self.depth)
        if self.n_pulses < 1:
            raise DomainError("N must be at least 1")
        if not self.larmor > 0:
            raise DomainError("Larmor frequency must be positive")

    @classmethod
    def at_field(cls, density, depth, n_pulses, b0):
        return cls(density, depth, n_pulses, larmor_frequency("1H", b0))

    @property
    def b_rms(self) -> float:
        return b_rms(self.density, self.depth)


def proton_contrast(field_nT, n_pulses, tau, larmor):
    """C(τ) = exp[-8(γe B_rms Nτ)² sinc²(πNτ(f_h − 1/(2τ)))], with the
    unnormalized sinc sin(x)/x."""

    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise DomainError("τ must be positive")
    n_tau = n_pulses * tau * 1e-6  # s
    gamma_e = CONSTANTS.gamma_e * 1e9  # Hz/T
    phase = gamma_e * field_nT * 1e-9 * n_tau
    offset = (larmor - 1000.0 / (2.0 * tau)) * 1e3  # Hz
    # np.sinc(x) = sin(πx)/(πx)
    filter_ = np.sinc(n_tau * offset)
    return np.exp(-8.0 * phase ** 2 * filter_ ** 2)


def proton_signal(model: ProtonLayerModel, taus) -> MeasurementTrace:
    """Proton NMR signal of a decoupling τ sweep.

    Args:
        model (ProtonLayerModel): Layer and sequence.
        taus: π spacings, µs.

    Returns:
        MeasurementTrace: C(τ) on the τ axis, minimal at τ = 1/(2 f_h).
    """

    taus = np.asarray(taus, dtype=float)
    field = model.b_rms
    values = proton_contrast(field, model.n_pulses, taus, model.larmor)
    logger.debug(
        "proton signal: B_rms = %.1f nT, N = %d", field, model.n_pulses
    )
    return MeasurementTrace(
        x=taus,
        y=values,
        axis="tau",
        y_label="C",
        metadata={
            "density_m3": model.density,
            "depth_nm": model.depth,
            "n_pulses": model.n_pulses,
            "larmor_kHz": model.larmor,
            "b_rms_nT": field,
            "source": "closed-form",
        },
    )
