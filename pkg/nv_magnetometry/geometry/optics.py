from nv_magnetometry.utilities.errors import DomainError


# Abbe limit of the confocal spot
def diffraction_limit(wavelength: float, numerical_aperture: float) -> float:
    if not (wavelength > 0 and numerical_aperture > 0):
        raise DomainError("wavelength and numerical aperture must be positive")
    return wavelength / (2.0 * numerical_aperture)
