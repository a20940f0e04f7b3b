import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect, least_squares

from nv_magnetometry.physics.frequencies import nv_transition_frequency
from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.fit_result import FitResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CylindricalMagnet:
    """Axially magnetized cylinder: remanence `remanence` (mT), radius
    `radius` (mm), height `height` (mm)."""

    remanence: float
    radius: float
    height: float

    def __post_init__(self):
        for name in ("remanence", "radius", "height"):
            if not getattr(self, name) > 0:
                raise DomainError("{} must be positive".format(name))


@dataclass(frozen=True)
class StageGeometry:
    """Magnet stage: `tilt` (degrees) of the sample plate, plate thickness
    `plate_thickness` (mm), actuator travel `travel` (mm)."""

    plate_thickness: float = 5.0
    travel: float = 25.0
    tilt: float = 35.0

    def __post_init__(self):
        if not 0 < self.tilt < 90:
            raise DomainError("tilt must lie in (0, 90) degrees")
        if self.plate_thickness < 0:
            raise DomainError("plate thickness must be nonnegative")
        if not self.travel > 0:
            raise DomainError("actuator travel must be positive")


MAGNET_1 = CylindricalMagnet(remanence=1270.0, radius=10.0, height=5.0)
MAGNET_2 = CylindricalMagnet(remanence=1270.0, radius=10.0, height=20.0)
DEFAULT_STAGE = StageGeometry()


def _axial_profile(radius: float, height: float, d):
    # field per unit remanence
    d = np.asarray(d, dtype=float)
    return 0.5 * (
        (height + d) / np.sqrt(radius ** 2 + (height + d) ** 2)
        - d / np.sqrt(radius ** 2 + d ** 2)
    )


def magnet_field(magnet: CylindricalMagnet, d):
    """On-axis field (mT) at the distance `d` (mm) from the centre of the top
    surface of the magnet. Accepts scalars and arrays."""

    if np.any(np.asarray(d) < 0):
        raise DomainError("distance must be nonnegative")
    field = magnet.remanence * _axial_profile(magnet.radius, magnet.height, d)
    return float(field) if np.ndim(field) == 0 else field


def minimum_distance(geom: StageGeometry, magnet: CylindricalMagnet) -> float:
    """Smallest reachable distance (mm): the rim of the tilted magnet touches
    the back side of the sample plate."""

    tilt = math.radians(geom.tilt)
    return magnet.radius / math.tan(tilt) + geom.plate_thickness / math.sin(
        tilt
    )


def attainable_range(
    geom: StageGeometry, magnet: CylindricalMagnet
) -> Tuple[float, float]:
    """Fields (mT) reachable over the actuator travel, (lowest, highest)."""

    d_min = minimum_distance(geom, magnet)
    return (
        magnet_field(magnet, d_min + geom.travel),
        magnet_field(magnet, d_min),
    )


def field_to_distance(
    magnet: CylindricalMagnet, b0: float, tolerance: float = 1e-6
) -> float:
    """Distance (mm) at which the magnet produces `b0` (mT), by bisection on
    the monotone on-axis profile.

    Args:
        magnet (CylindricalMagnet): The magnet.
        b0 (float): Target field in mT.
        tolerance (float): Allowed field error in mT.

    Returns:
        float: The distance in mm.
    """

    surface = magnet_field(magnet, 0.0)
    if not 0 < b0 < surface:
        raise DomainError(
            "B0 = {} mT is outside the attainable range (0, {:.6g}) mT".format(
                b0, surface
            )
        )

    upper = max(1.0, magnet.height)
    while magnet_field(magnet, upper) > b0:
        upper *= 2.0

    def mismatch(d):
        return magnet_field(magnet, d) - b0

    distance = bisect(mismatch, 0.0, upper, xtol=1e-13, maxiter=500)
    if abs(mismatch(distance)) > tolerance:
        raise DomainError("bisection did not reach the field tolerance")
    return distance


def field_table(
    magnet: CylindricalMagnet, distances: Sequence[float]
) -> List[Tuple[float, float, float]]:
    rows = []
    for d in distances:
        b0 = magnet_field(magnet, d)
        rows.append((float(d), b0, nv_transition_frequency(b0)))
    return rows


def calibrate_remanence(
    samples: Sequence[Tuple[float, float]], radius: float, height: float
) -> FitResult:
    """Fit the remanence (mT) of a magnet of known geometry to measured
    (distance mm, field mT) pairs.

    At least two distinct distances are needed; otherwise a failed
    `FitResult` is returned.
    """

    names = ("remanence",)
    samples = [(float(d), float(b)) for d, b in samples]
    distinct = {d for d, _ in samples}
    if len(samples) < 2 or len(distinct) < 2:
        logger.warning(
            "remanence calibration needs two distinct distances, got %s",
            sorted(distinct),
        )
        return FitResult.failure(
            names,
            {},
            "at least two samples at distinct distances are required",
            {"samples": samples},
        )

    d = np.array([item[0] for item in samples])
    measured = np.array([item[1] for item in samples])
    profile = _axial_profile(radius, height, d)

    # linear in the remanence: the least-squares start is already the optimum
    start = float(profile @ measured / (profile @ profile))
    solution = least_squares(
        lambda p: p[0] * profile - measured, x0=[start], method="lm"
    )
    residuals = solution.fun
    dof = len(samples) - 1
    variance = float(residuals @ residuals) / dof
    sigma = math.sqrt(variance / float(profile @ profile))
    result = FitResult(
        names=names,
        values={"remanence": float(solution.x[0])},
        uncertainties={"remanence": sigma},
        residual_norm=float(np.linalg.norm(residuals)),
        iterations=int(solution.nfev),
        converged=bool(solution.success),
        message=solution.message,
        provenance={
            "radius_mm": radius,
            "height_mm": height,
            "samples": samples,
        },
    )
    logger.info(
        "calibrated remanence %.6g +- %.2g mT from %d samples",
        result["remanence"],
        sigma,
        len(samples),
    )
    return result
