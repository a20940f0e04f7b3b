from dataclasses import dataclass, fields

from scipy import constants as sc

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants of the NV magnetometer.

    Frequencies are stored in the units they are quoted in: the zero-field
    splitting in MHz, the electron ratio in MHz/mT, nuclear ratios in kHz/mT.
    """

    planck_h: float = sc.h
    mu0_over_4pi: float = sc.mu_0 / (4 * sc.pi)
    D_zfs: float = 2870.0
    gamma_e: float = 28.0
    gamma_c13: float = 10.705
    gamma_h1: float = 42.577

    def __post_init__(self):
        for item in fields(self):
            if not getattr(self, item.name) > 0:
                raise DomainError(
                    "{} must be strictly positive".format(item.name)
                )


CONSTANTS = PhysicalConstants()

# gyromagnetic ratios of the known nuclear species, kHz/mT
SPECIES_GAMMA = {
    "13C": CONSTANTS.gamma_c13,
    "1H": CONSTANTS.gamma_h1,
}
