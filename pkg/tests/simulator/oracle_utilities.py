"""Reference P0 of ideal decoupling trains computed from the overlap of the
two conditional nuclear propagators, independently of the package
simulator.

A nucleus is described by (gamma kHz/mT, a_parallel kHz, a_perpendicular
kHz). The two sensor branches swap at every π pulse, so the nuclei follow
U_a along the path starting in m_S = 0 and U_b along the other one; with a
readout that returns an uncoupled sensor to m_S = 0,
P0 = (1 + Re Tr(U_a U_b^†)/d)/2.
"""

from functools import reduce

import numpy as np
from scipy.linalg import expm

IX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
IZ = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)


def embed(operator, index, n):
    factors = [np.eye(2, dtype=complex)] * n
    factors[index] = operator
    return reduce(np.kron, factors)


def conditional_pair(nuclei, b0):
    n = len(nuclei)
    d = 2 ** n
    h0 = np.zeros((d, d), dtype=complex)
    h1 = np.zeros((d, d), dtype=complex)
    for index, (gamma, a_parallel, a_perpendicular) in enumerate(nuclei):
        f0 = gamma * b0
        h0 += embed(f0 * IZ, index, n)
        h1 += embed((f0 + a_parallel) * IZ + a_perpendicular * IX, index, n)
    return h0, h1


def train_overlap(nuclei, b0, tau, n_pulses):
    """Tr(U_a U_b^†)/d after `n_pulses` π pulses spaced `tau` µs."""

    if n_pulses < 1:
        raise ValueError("the train needs at least one π pulse")
    h0, h1 = conditional_pair(nuclei, b0)
    d = h0.shape[0]
    segments = [tau / 2] + [tau] * (n_pulses - 1) + [tau / 2]
    u_a = np.eye(d, dtype=complex)
    u_b = np.eye(d, dtype=complex)
    for k, length in enumerate(segments):
        first, second = (h0, h1) if k % 2 == 0 else (h1, h0)
        # kHz * µs = 1e-3 cycles
        u_a = expm(-2j * np.pi * 1e-3 * length * first) @ u_a
        u_b = expm(-2j * np.pi * 1e-3 * length * second) @ u_b
    return np.trace(u_a @ u_b.conj().T) / d


def train_p0(nuclei, b0, tau, n_pulses):
    return 0.5 * (1.0 + train_overlap(nuclei, b0, tau, n_pulses).real)


def random_couplings(count, seed, bound=400.0):
    rng = np.random.default_rng(seed)
    return [
        (rng.uniform(-bound, bound), rng.uniform(0.0, bound))
        for _ in range(count)
    ]
