import math
from typing import Tuple, Optional

import numpy as np

from nv_magnetometry.utilities.constants import CONSTANTS, SPECIES_GAMMA
from nv_magnetometry.utilities.errors import DomainError
from .spins import NuclearSpin

TRANSITION_MINUS = "0<->-1"
TRANSITION_PLUS = "0<->+1"

# spin-1/2 operators
IX = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
IY = np.array([[0, -0.5j], [0.5j, 0]], dtype=complex)
IZ = np.array([[0.5, 0], [0, -0.5]], dtype=complex)


def _check_field(b0: float):
    if not b0 >= 0:
        raise DomainError("B0 must be nonnegative, got {}".format(b0))


def nv_transition_frequency(b0: float, which: str = TRANSITION_MINUS) -> float:
    """Frequency (MHz) of one of the two sensor transitions for a bias field
    `b0` (mT) applied along the symmetry axis.

    Args:
        b0 (float): Bias field in mT.
        which (str): `TRANSITION_MINUS` or `TRANSITION_PLUS`.

    Returns:
        float: D - γe·B0 for 0<->-1, D + γe·B0 for 0<->+1.
    """

    _check_field(b0)
    if which == TRANSITION_MINUS:
        return CONSTANTS.D_zfs - CONSTANTS.gamma_e * b0
    if which == TRANSITION_PLUS:
        return CONSTANTS.D_zfs + CONSTANTS.gamma_e * b0
    raise DomainError("unknown transition '{}'".format(which))


def larmor_frequency(
    species: str, b0: float, gamma: Optional[float] = None
) -> float:
    """Larmor frequency (kHz) of a nuclear species at `b0` (mT). An explicit
    `gamma` (kHz/mT) is needed for species missing from the table."""

    _check_field(b0)
    if gamma is None:
        if species not in SPECIES_GAMMA:
            raise DomainError(
                "unknown species '{}' without explicit gyromagnetic "
                "ratio".format(species)
            )
        gamma = SPECIES_GAMMA[species]
    return gamma * b0


def conditional_precession_frequencies(
    nuclear: NuclearSpin, b0: float
) -> Tuple[float, float]:
    """Precession frequencies (kHz) of a nucleus while the sensor sits in
    m_S = 0 (f0) and in m_S = -1 (f1)."""

    f0 = larmor_frequency(nuclear.species, b0, nuclear.gamma)
    coupling = nuclear.coupling
    f1 = math.hypot(f0 + coupling.a_parallel, coupling.a_perpendicular)
    return f0, f1


def build_conditional_hamiltonians(
    nuclear: NuclearSpin, b0: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Nuclear Hamiltonians (kHz, 2x2 Hermitian) conditioned on the sensor
    state.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (H for m_S = 0, H for m_S = -1).
    """

    f0 = larmor_frequency(nuclear.species, b0, nuclear.gamma)
    coupling = nuclear.coupling
    h_ms0 = -f0 * IZ
    # S_z = -1 in the m_S = -1 branch
    h_ms1 = h_ms0 - (coupling.a_perpendicular * IX + coupling.a_parallel * IZ)
    return h_ms0, h_ms1


def eigen_splitting(hamiltonian: np.ndarray) -> float:
    energies = np.linalg.eigvalsh(hamiltonian)
    return float(energies[-1] - energies[0])
