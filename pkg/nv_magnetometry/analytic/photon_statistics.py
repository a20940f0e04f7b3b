import numpy as np

from nv_magnetometry.utilities.errors import DomainError


def g2_model(delay, zeta, eta, gamma1, gamma2):
    """Second-order photon correlation of a single emitter with a
    metastable shelving state.

    g²(τ_d) = 1 − ζη e^{−γ1|τ_d|} + ζ(η − 1) e^{−γ2|τ_d|}, delays in ns
    and rates in ns^-1. g²(0) = 1 − ζ; η > 1 produces bunching.
    """

    if gamma1 < 0 or gamma2 < 0:
        raise DomainError("decay rates must be nonnegative")
    delay = np.abs(np.asarray(delay, dtype=float))
    return (
        1.0
        - zeta * eta * np.exp(-gamma1 * delay)
        + zeta * (eta - 1.0) * np.exp(-gamma2 * delay)
    )


def zeta_from_g2_zero(g2_zero: float) -> float:
    return 1.0 - g2_zero
