import math
from dataclasses import dataclass, field
from typing import Tuple, Optional, Dict, Any, Sequence

from nv_magnetometry.utilities.constants import SPECIES_GAMMA
from nv_magnetometry.utilities.documents import (
    content_hash,
    dump_document,
    load_document,
)
from nv_magnetometry.utilities.errors import (
    DomainError,
    CapacityError,
    ArtifactIOError,
)

REGISTER_SCHEMA = "nv-magnetometry/register@1"
MAX_NUCLEI = 5

# 14N hyperfine splitting of the sensor transition, MHz
NITROGEN14_SPLITTING = 2.16
# 15N doublet separation, MHz
NITROGEN15_SEPARATION = 3.0


@dataclass(frozen=True)
class HyperfineCoupling:
    """Hyperfine coupling of a nucleus to the sensor, in kHz.

    The sign of the transverse component is absorbed into the choice of the
    transverse axis, so `a_perpendicular` is never negative.
    """

    a_parallel: float
    a_perpendicular: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.a_parallel)
                and math.isfinite(self.a_perpendicular)):
            raise DomainError("hyperfine components must be finite")
        if self.a_perpendicular < 0:
            raise DomainError(
                "a_perpendicular must be nonnegative, got {}".format(
                    self.a_perpendicular
                )
            )

    @classmethod
    def from_signed(cls, a_parallel: float, a_perpendicular: float):
        return cls(a_parallel, abs(a_perpendicular))


@dataclass(frozen=True)
class NuclearSpin:
    """A spin-1/2 nucleus coupled to the sensor.

    `gamma` (kHz/mT) may be omitted for a known species tag, in which case
    the tabulated value is used; for a known tag an explicit value must
    agree with the table.
    """

    species: str
    coupling: HyperfineCoupling = field(
        default_factory=lambda: HyperfineCoupling(0.0, 0.0)
    )
    gamma: Optional[float] = None

    def __post_init__(self):
        known = SPECIES_GAMMA.get(self.species)
        if self.gamma is None:
            if known is None:
                raise DomainError(
                    "unknown species '{}' requires an explicit "
                    "gyromagnetic ratio".format(self.species)
                )
            object.__setattr__(self, "gamma", known)
        elif known is not None and not math.isclose(
            self.gamma, known, rel_tol=1e-9
        ):
            raise DomainError(
                "gyromagnetic ratio {} does not match species '{}' "
                "({})".format(self.gamma, self.species, known)
            )
        if not self.gamma > 0:
            raise DomainError("gyromagnetic ratio must be positive")


@dataclass(frozen=True)
class SpinRegister:
    """The sensor qubit with its nuclear spins at the bias field `b0` (mT).

    `nitrogen` is an optional classical mixture of sensor detunings
    (MHz, weight) standing for the host nitrogen hyperfine lines.
    """

    b0: float
    nuclei: Tuple[NuclearSpin, ...] = ()
    nitrogen: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.b0 >= 0:
            raise DomainError("B0 must be nonnegative, got {}".format(self.b0))
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        if len(self.nuclei) > MAX_NUCLEI:
            raise CapacityError(
                "a register holds at most {} nuclei, got {}".format(
                    MAX_NUCLEI, len(self.nuclei)
                )
            )
        mixture = tuple(
            (float(detuning), float(weight))
            for detuning, weight in self.nitrogen
        )
        if mixture:
            if any(weight < 0 for _, weight in mixture):
                raise DomainError("mixture weights must be nonnegative")
            if abs(math.fsum(weight for _, weight in mixture) - 1.0) > 1e-12:
                raise DomainError("mixture weights must sum to 1")
        object.__setattr__(self, "nitrogen", mixture)

    @property
    def dimension(self) -> int:
        return 2 ** (1 + len(self.nuclei))

    def detuning_components(self) -> Tuple[Tuple[float, float], ...]:
        """The (detuning, weight) pairs to average over, a single resonant
        component when no mixture is set."""
        return self.nitrogen if self.nitrogen else ((0.0, 1.0),)

    def without_couplings(self) -> "SpinRegister":
        return SpinRegister(
            self.b0,
            tuple(
                NuclearSpin(n.species, HyperfineCoupling(0.0, 0.0), n.gamma)
                for n in self.nuclei
            ),
            self.nitrogen,
        )


def nitrogen_mixture(
    isotope: Optional[str],
) -> Tuple[Tuple[float, float], ...]:
    """Detuning mixture produced by the host nitrogen nucleus.

    Args:
        isotope (Optional[str]): "14N" (triplet), "15N" (doublet) or None.

    Returns:
        Tuple[Tuple[float, float], ...]: (detuning MHz, weight) pairs.
    """

    if isotope is None:
        return ()
    if isotope == "14N":
        a = NITROGEN14_SPLITTING
        return ((-a, 1 / 3), (0.0, 1 / 3), (a, 1 / 3))
    if isotope == "15N":
        half = NITROGEN15_SEPARATION / 2
        return ((-half, 0.5), (half, 0.5))
    raise DomainError("unknown nitrogen isotope '{}'".format(isotope))


# couplings of the individually resolved 13C nuclei, kHz
LITERATURE_COUPLINGS = {
    "A": HyperfineCoupling(-226.2, 242.8),
    "D": HyperfineCoupling(357.0, 270.2),
    "E": HyperfineCoupling(348.2, 248.7),
}


def literature_register(
    names: Sequence[str] = ("A", "D", "E"), b0: float = 4.7
) -> SpinRegister:
    return SpinRegister(
        b0, tuple(NuclearSpin("13C", LITERATURE_COUPLINGS[n]) for n in names)
    )


def register_to_document(register: SpinRegister) -> Dict[str, Any]:
    return {
        "schema": REGISTER_SCHEMA,
        "b0_mT": register.b0,
        "nuclei": [
            {
                "species": nucleus.species,
                "gamma_kHz_per_mT": nucleus.gamma,
                "a_parallel_kHz": nucleus.coupling.a_parallel,
                "a_perpendicular_kHz": nucleus.coupling.a_perpendicular,
            }
            for nucleus in register.nuclei
        ],
        "nitrogen": [
            {"detuning_MHz": detuning, "weight": weight}
            for detuning, weight in register.nitrogen
        ],
    }


def register_from_document(document: Dict[str, Any]) -> SpinRegister:
    if document.get("schema") != REGISTER_SCHEMA:
        raise DomainError(
            "expected a '{}' document".format(REGISTER_SCHEMA)
        )
    nuclei = tuple(
        NuclearSpin(
            item["species"],
            HyperfineCoupling(
                float(item.get("a_parallel_kHz", 0.0)),
                float(item.get("a_perpendicular_kHz", 0.0)),
            ),
            item.get("gamma_kHz_per_mT"),
        )
        for item in document.get("nuclei", [])
    )
    nitrogen = document.get("nitrogen", [])
    # the mixture may also be given by isotope name
    if isinstance(nitrogen, str):
        mixture = nitrogen_mixture(nitrogen)
    else:
        mixture = tuple(
            (item["detuning_MHz"], item["weight"]) for item in nitrogen
        )
    return SpinRegister(float(document["b0_mT"]), nuclei, mixture)


def register_hash(register: SpinRegister) -> str:
    return content_hash(register_to_document(register))


def dump_register(register: SpinRegister, path):
    return dump_document(register_to_document(register), path)


def load_register(path) -> SpinRegister:
    document = load_document(path, REGISTER_SCHEMA)
    try:
        return register_from_document(document)
    except (KeyError, TypeError, ValueError) as error:
        raise ArtifactIOError(
            "invalid register description ({})".format(error), path
        )
