import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.fit_result import FitResult

logger = logging.getLogger(__name__)

# relative distance to a finite bound at which a parameter counts as pinned
BOUND_TOLERANCE = 1e-6


@dataclass(frozen=True)
class FitParameter:
    name: str
    initial: float
    lower: float = -math.inf
    upper: float = math.inf
    fixed: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(
                "bounds of '{}' are inconsistent: [{}, {}]".format(
                    self.name, self.lower, self.upper
                )
            )
        if not self.lower <= self.initial <= self.upper:
            raise DomainError(
                "initial value of '{}' lies outside its bounds".format(
                    self.name
                )
            )

    def at_bound(self, value: float) -> bool:
        for bound in (self.lower, self.upper):
            if math.isfinite(bound) and abs(value - bound) <= (
                BOUND_TOLERANCE * max(1.0, abs(bound))
            ):
                return True
        return False


@dataclass(frozen=True)
class FitProblem:
    """A model y = model(x, **parameters) to be fitted to data.

    :param Callable model: Vectorized over `x`, keyword arguments named
        after the parameters.
    :param tuple parameters: The parameters, free or fixed.
    :param np.ndarray x: Independent variable.
    :param np.ndarray y: Data.
    :param np.ndarray sigma: Optional per-point standard deviations;
        residuals are divided by them.
    """

    model: Callable[..., np.ndarray]
    parameters: Tuple[FitParameter, ...]
    x: np.ndarray
    y: np.ndarray
    sigma: Optional[np.ndarray] = None
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise DomainError("x and y must be 1-D arrays of equal length")
        keep = np.isfinite(y)
        sigma = self.sigma
        if sigma is not None:
            sigma = np.broadcast_to(
                np.asarray(sigma, dtype=float), y.shape
            )
            if np.any(sigma[keep] <= 0):
                raise DomainError("standard deviations must be positive")
            sigma = sigma[keep]
        object.__setattr__(self, "x", x[keep])
        object.__setattr__(self, "y", y[keep])
        object.__setattr__(self, "sigma", sigma)

        names = [item.name for item in self.parameters]
        if len(set(names)) != len(names):
            raise DomainError("parameter names must be unique")
        if len(self.free) > len(self.y):
            raise DomainError(
                "{} free parameters for {} data points".format(
                    len(self.free), len(self.y)
                )
            )

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(item.name for item in self.parameters)

    @property
    def free(self) -> Tuple[FitParameter, ...]:
        return tuple(item for item in self.parameters if not item.fixed)

    def values(self, free_values: Sequence[float]) -> Dict[str, float]:
        values = {}
        position = 0
        for item in self.parameters:
            if item.fixed:
                values[item.name] = item.initial
            else:
                values[item.name] = float(free_values[position])
                position += 1
        return values

    def residuals(self, free_values: Sequence[float]) -> np.ndarray:
        predicted = self.model(self.x, **self.values(free_values))
        residuals = np.asarray(predicted, dtype=float) - self.y
        if self.sigma is not None:
            residuals = residuals / self.sigma
        return residuals


def fit(
    problem: FitProblem, max_evaluations: Optional[int] = None
) -> FitResult:
    """Least-squares fit of a problem with finite-difference Jacobians.

    Args:
        problem (FitProblem): Model, parameters and data.
        max_evaluations (Optional[int]): Cap on model evaluations.

    Returns:
        FitResult: Best parameters with covariance-based uncertainties.
            A fit that stops without meeting its tolerances, produces a
            non-finite residual or leaves a parameter pinned at a bound
            is returned with `converged=False`.
    """

    free = problem.free
    names = problem.names
    initial = {item.name: item.initial for item in problem.parameters}
    if not free:
        residuals = problem.residuals([])
        return FitResult(
            names=names,
            values=problem.values([]),
            uncertainties={name: 0.0 for name in names},
            residual_norm=float(np.linalg.norm(residuals)),
            iterations=1,
            converged=True,
            message="no free parameters",
            provenance=dict(problem.provenance),
        )

    start = np.array([item.initial for item in free])
    lower = np.array([item.lower for item in free])
    upper = np.array([item.upper for item in free])
    try:
        solution = least_squares(
            problem.residuals,
            x0=start,
            jac="2-point",
            bounds=(lower, upper),
            method="trf",
            x_scale="jac",
            ftol=1e-12,
            xtol=1e-12,
            gtol=1e-12,
            max_nfev=max_evaluations,
        )
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as error:
        logger.warning("fit aborted: %s", error)
        return FitResult.failure(
            names, initial, str(error), problem.provenance
        )

    residuals = solution.fun
    values = problem.values(solution.x)
    m, n = len(residuals), len(free)
    uncertainties = {name: 0.0 for name in names}
    ssr = float(residuals @ residuals)
    if m > n:
        jacobian = np.atleast_2d(solution.jac)
        covariance = np.linalg.pinv(jacobian.T @ jacobian) * ssr / (m - n)
        for item, variance in zip(free, np.diag(covariance)):
            uncertainties[item.name] = float(math.sqrt(max(variance, 0.0)))
    else:
        for item in free:
            uncertainties[item.name] = math.nan

    converged = bool(solution.success) and bool(np.isfinite(ssr))
    message = solution.message
    pinned = [item.name for item in free if item.at_bound(values[item.name])]
    if pinned:
        converged = False
        message = "parameter(s) {} at a bound".format(", ".join(pinned))

    result = FitResult(
        names=names,
        values=values,
        uncertainties=uncertainties,
        residual_norm=math.sqrt(ssr),
        iterations=int(solution.nfev),
        converged=converged,
        message=message,
        provenance=dict(problem.provenance),
    )
    if converged:
        logger.info(
            "fit converged after %d evaluations, residual %.3g",
            result.iterations,
            result.residual_norm,
        )
    else:
        logger.warning("fit did not converge: %s", message)
    return result


def fit_model(
    model: Callable[..., np.ndarray],
    x,
    y,
    initial: Dict[str, float],
    bounds: Optional[Dict[str, Tuple[float, float]]] = None,
    fixed: Sequence[str] = (),
    sigma=None,
    provenance: Optional[Dict[str, Any]] = None,
) -> FitResult:
    """Build a `FitProblem` from plain dictionaries and fit it."""

    bounds = bounds or {}
    parameters = tuple(
        FitParameter(
            name,
            float(value),
            *bounds.get(name, (-math.inf, math.inf)),
            fixed=name in fixed
        )
        for name, value in initial.items()
    )
    return fit(
        FitProblem(model, parameters, x, y, sigma, dict(provenance or {}))
    )
