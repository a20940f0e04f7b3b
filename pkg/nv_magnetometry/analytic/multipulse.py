import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from nv_magnetometry.physics.frequencies import (
    conditional_precession_frequencies,
)
from nv_magnetometry.physics.spins import HyperfineCoupling, SpinRegister
from nv_magnetometry.utilities.errors import (
    DomainError,
    InconsistentInputsError,
    InversionUndefinedError,
)
from nv_magnetometry.utilities.traces import MeasurementTrace

logger = logging.getLogger(__name__)

FORWARD = "forward"
INVERSION = "inversion"

# tolerated excess of |cos φ_r| over 1 before it is an error
CLAMP_TOLERANCE = 1e-9
SINGULAR_TOLERANCE = 1e-12


@dataclass(frozen=True)
class RotationAngles:
    """Nuclear rotation angles of one τ/2-π-τ-π-τ/2 unit, in radians.

    φ0 = π f0 τ and φ1 = π f1 τ. In the forward context φ_r is the
    half-angle of the unit rotation; in the inversion context it is
    π − 2π f_r τ, with f_r the oscillation measured against N·τ.
    `clamped` marks points where |cos φ_r| exceeded 1 by rounding.
    """

    phi0: np.ndarray
    phi1: np.ndarray
    phi_r: np.ndarray
    context: str = FORWARD
    clamped: np.ndarray = None

    def __post_init__(self):
        if self.context not in (FORWARD, INVERSION):
            raise DomainError(
                "unknown angle context '{}'".format(self.context)
            )
        for name in ("phi0", "phi1", "phi_r"):
            value = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(value)):
                raise DomainError("{} must be finite".format(name))
            object.__setattr__(self, name, value)
        if self.clamped is None:
            object.__setattr__(
                self, "clamped", np.zeros(self.phi_r.shape, dtype=bool)
            )


def _phase(frequency, tau):
    # kHz * µs = 1e-3 cycles
    return np.pi * 1e-3 * np.asarray(frequency, dtype=float) * tau


def rotation_angles(
    coupling: HyperfineCoupling, f0: float, f1: float, tau, literal=False
) -> RotationAngles:
    """Forward rotation angles for π spacing `tau` (µs).

    cos φ_r = cos φ0 cos φ1 − ((a∥ + f0)/f1) sin φ0 sin φ1; with `literal`
    the first product reads cos φ0 sin φ1.
    """

    tau = np.asarray(tau, dtype=float)
    phi0 = _phase(f0, tau)
    phi1 = _phase(f1, tau)
    ratio = (coupling.a_parallel + f0) / f1 if f1 else 0.0
    first = np.cos(phi0) * (np.sin(phi1) if literal else np.cos(phi1))
    cos_r = first - ratio * np.sin(phi0) * np.sin(phi1)

    excess = np.abs(cos_r) - 1.0
    if np.any(excess > CLAMP_TOLERANCE):
        raise DomainError(
            "cos φ_r = {} lies outside [-1, 1]".format(
                float(cos_r.flat[np.argmax(excess)])
            )
        )
    clamped = excess > 0
    if np.any(clamped):
        logger.warning(
            "clamped cos φ_r at %d point(s)", int(np.count_nonzero(clamped))
        )
    phi_r = np.arccos(np.clip(cos_r, -1.0, 1.0))
    return RotationAngles(phi0, phi1, phi_r, FORWARD, clamped)


def invert_hyperfine(
    f0: float, f1: float, f_r: float, tau: float
) -> HyperfineCoupling:
    """Hyperfine components from the conditional precession frequencies
    and the nuclear Rabi frequency.

    Args:
        f0 (float): Precession frequency with the sensor in m_S = 0, kHz.
        f1 (float): Precession frequency with the sensor in m_S = -1, kHz.
        f_r (float): Oscillation frequency of P0 against N·τ, kHz.
        tau (float): π spacing of the measurement, µs.

    Returns:
        HyperfineCoupling: a∥ and a⊥ in kHz.

    Raises:
        InversionUndefinedError: sin φ0 · sin φ1 vanishes.
        InconsistentInputsError: f1² < (f0 + a∥)²; the negative radicand
            is attached.
    """

    phi0 = float(_phase(f0, tau))
    phi1 = float(_phase(f1, tau))
    phi_r = math.pi - 2 * math.pi * 1e-3 * f_r * tau
    denominator = math.sin(phi0) * math.sin(phi1)
    if abs(denominator) < SINGULAR_TOLERANCE:
        raise InversionUndefinedError(
            "sin φ0 · sin φ1 = {} for f0 = {}, f1 = {}, τ = {}".format(
                denominator, f0, f1, tau
            )
        )
    ratio = (math.cos(phi0) * math.cos(phi1) - math.cos(phi_r)) / denominator
    a_parallel = ratio * f1 - f0
    radicand = f1 ** 2 - (f0 + a_parallel) ** 2
    if radicand < 0:
        raise InconsistentInputsError(
            "no coupling reproduces f0 = {}, f1 = {}, f_r = {} at τ = {} "
            "(radicand {})".format(f0, f1, f_r, tau, radicand),
            radicand,
        )
    coupling = HyperfineCoupling(a_parallel, math.sqrt(radicand))
    logger.debug(
        "inverted (%s, %s, %s kHz, %s us) -> a_par = %s, a_perp = %s",
        f0,
        f1,
        f_r,
        tau,
        coupling.a_parallel,
        coupling.a_perpendicular,
    )
    return coupling


def single_nucleus_dip(
    coupling: HyperfineCoupling,
    f0: float,
    f1: float,
    tau,
    n_pulses: int,
    literal: bool = False,
):
    """P0 after `n_pulses` ideal π pulses at spacing `tau` (µs) with one
    nucleus, the readout returning an uncoupled sensor to m_S = 0.

    P0 = 1 − (a⊥ sin(φ0/2) sin(φ1/2) sin(Nφ_r/2) / (f1 cos(φ_r/2)))².
    `literal` puts a∥ in the numerator and cos φ0 sin φ1 in cos φ_r.

    Raises:
        DomainError: odd or negative `n_pulses`, or |cos φ_r| > 1.
    """

    if n_pulses < 0 or n_pulses % 2:
        raise DomainError(
            "the closed form needs an even number of π pulses, got {}".format(
                n_pulses
            )
        )
    scalar = np.ndim(tau) == 0
    angles = rotation_angles(coupling, f0, f1, tau, literal)
    if f1 == 0:
        values = np.ones(angles.phi_r.shape)
        return float(values) if scalar else values

    half = np.cos(angles.phi_r / 2)
    safe = np.where(np.abs(half) > SINGULAR_TOLERANCE, half, 1.0)
    # sin(Nφ/2)/cos(φ/2) -> ±N as φ -> π for even N
    ratio = np.where(
        np.abs(half) > SINGULAR_TOLERANCE,
        np.sin(n_pulses * angles.phi_r / 2) / safe,
        float(n_pulses),
    )
    amplitude = (
        coupling.a_parallel if literal else coupling.a_perpendicular
    )
    values = 1.0 - (
        amplitude
        * np.sin(angles.phi0 / 2)
        * np.sin(angles.phi1 / 2)
        * ratio
        / f1
    ) ** 2
    if not literal:
        values = np.clip(values, 0.0, 1.0)
    return float(values) if scalar else values


def combine_nuclei(dips: Sequence[np.ndarray], decay, literal=False):
    """P0 of independent nuclei, ½ + 2^(n−1)·decay·Π(P0_i − ½); the
    `literal` normalization drops the 2^(n−1)."""

    decay = np.asarray(decay, dtype=float)
    if not dips:
        return 0.5 + 0.5 * decay
    product = np.ones(np.shape(dips[0]))
    for dip in dips:
        product = product * (np.asarray(dip) - 0.5)
    scale = 1.0 if literal else 2.0 ** (len(dips) - 1)
    return 0.5 + scale * decay * product


def spectrum_values(
    register: SpinRegister,
    taus,
    n_pulses: int,
    t2: float = math.inf,
    exponent: float = 1.0,
    literal: bool = False,
) -> np.ndarray:
    """Closed-form P0 of a register at every π spacing of `taus`, in the
    order given."""

    taus = np.asarray(taus, dtype=float)
    dips = []
    for nucleus in register.nuclei:
        f0, f1 = conditional_precession_frequencies(nucleus, register.b0)
        dips.append(
            single_nucleus_dip(
                nucleus.coupling, f0, f1, taus, n_pulses, literal
            )
        )
    decay = np.exp(-((n_pulses * taus / t2) ** exponent))
    return combine_nuclei(dips, decay, literal)


def full_spectrum(
    register: SpinRegister,
    taus,
    n_pulses: int,
    t2: float = math.inf,
    exponent: float = 1.0,
    literal: bool = False,
) -> MeasurementTrace:
    """Closed-form multipulse spectrum of a register of independent nuclei
    on the (2τ)^-1 axis.

    Args:
        register (SpinRegister): Nuclei and bias field; the nitrogen
            mixture is ignored.
        taus: π spacings, µs.
        n_pulses (int): Even π count.
        t2 (float): Sensor decoherence time, µs; the coherent part decays
            as exp[-(Nτ/T2)^p].
        exponent (float): Stretch exponent p.
        literal (bool): Use the printed dip and product forms.

    Returns:
        MeasurementTrace: P0 against (2τ)^-1 in kHz, ascending.
    """

    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or len(taus) == 0 or np.any(taus <= 0):
        raise DomainError("τ grid must be a nonempty list of positive values")
    if not t2 > 0 or not exponent > 0:
        raise DomainError("T2 and p must be positive")

    values = spectrum_values(
        register, taus, n_pulses, t2, exponent, literal
    )
    logger.info(
        "closed-form spectrum: %d nuclei, N = %d, %d points",
        len(register.nuclei),
        n_pulses,
        len(taus),
    )
    trace = MeasurementTrace(
        x=taus,
        y=values,
        axis="tau",
        metadata={
            "n_pulses": n_pulses,
            "t2_us": t2,
            "exponent": exponent,
            "literal": literal,
            "source": "closed-form",
        },
    )
    return trace.to_inverse_2tau()
