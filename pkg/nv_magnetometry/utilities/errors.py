from typing import Optional


class NVMagnetometryError(Exception):
    """Base class of every error raised by the toolkit."""


class DomainError(NVMagnetometryError, ValueError):
    """An input lies outside the domain of the requested operation."""


class CapacityError(NVMagnetometryError):
    """A register or a waveform exceeds the supported size."""


class InversionUndefinedError(DomainError):
    """The hyperfine inversion is singular (sin φ0 · sin φ1 = 0)."""


class InconsistentInputsError(DomainError):
    """The measured frequencies do not describe a physical coupling.

    :param str message: Human readable description.
    :param float radicand: The negative value found under the square root
        of the transverse-coupling formula.
    """

    def __init__(self, message: str, radicand: float):
        super().__init__(message)
        self.radicand = radicand


class NumericalError(NVMagnetometryError):
    """An adaptive numerical procedure did not reach its tolerance.

    :param str message: Human readable description.
    :param tuple estimates: The last two estimates which were compared.
    """

    def __init__(self, message: str, estimates: Optional[tuple] = None):
        super().__init__(message)
        self.estimates = estimates


class ArtifactIOError(NVMagnetometryError, OSError):
    """Reading or writing a file failed, or the file is malformed.

    :param str message: Human readable description.
    :param path: The file involved.
    """

    def __init__(self, message: str, path=None):
        super().__init__("{}: {}".format(path, message) if path else message)
        self.path = path
