import numpy as np

from nv_magnetometry.physics.frequencies import larmor_frequency
from nv_magnetometry.utilities.errors import DomainError


def _check_decay(time_constant: float, exponent: float):
    if not time_constant > 0:
        raise DomainError("time constant must be positive")
    if not exponent > 0:
        raise DomainError("stretch exponent must be positive")


def ramsey_model(tau, t2_star, exponent, a0, a1, a2, a3):
    """Ramsey fringe
    P0 = ½ − exp[-(τ/T2*)^p]·[α0 + α1 cos(2π α2 τ + α3)].

    τ and T2* in µs, the fringe frequency α2 in MHz, the phase α3 in
    radians.
    """

    _check_decay(t2_star, exponent)
    tau = np.asarray(tau, dtype=float)
    envelope = np.exp(-((tau / t2_star) ** exponent))
    return 0.5 - envelope * (a0 + a1 * np.cos(2 * np.pi * a2 * tau + a3))


def echo_model(tau, t2, exponent):
    """Hahn echo P0 = ½[1 + exp(-(2τ/T2)^p)], τ and T2 in µs."""

    _check_decay(t2, exponent)
    tau = np.asarray(tau, dtype=float)
    return 0.5 * (1.0 + np.exp(-((2.0 * tau / t2) ** exponent)))


def revival_times(species: str, b0: float, count: int = 3) -> np.ndarray:
    """Echo revivals τ = m/f_L (µs), m = 1..count, for a bath of `species`
    at `b0` (mT)."""

    f_larmor = larmor_frequency(species, b0)
    if not f_larmor > 0:
        raise DomainError("revivals need a nonzero Larmor frequency")
    return 1000.0 * np.arange(1, count + 1) / f_larmor
