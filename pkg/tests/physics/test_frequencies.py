import math

import numpy as np
import pytest

from nv_magnetometry.physics.frequencies import (
    TRANSITION_MINUS,
    TRANSITION_PLUS,
    build_conditional_hamiltonians,
    conditional_precession_frequencies,
    eigen_splitting,
    larmor_frequency,
    nv_transition_frequency,
)
from nv_magnetometry.physics.spins import HyperfineCoupling, NuclearSpin
from nv_magnetometry.utilities.constants import CONSTANTS
from nv_magnetometry.utilities.errors import DomainError
from .physics_test_cases import (
    transition_cases,
    larmor_cases,
    f1_cases,
    random_nuclei,
)


@pytest.mark.parametrize("b0, expected", transition_cases)
def test_nv_transition_frequency(b0, expected):
    assert nv_transition_frequency(b0) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("b0", [0.0, 0.3, 4.7, 17.25, 30.0])
def test_transition_pair_sums_to_twice_zfs(b0):
    total = nv_transition_frequency(b0, TRANSITION_MINUS)
    total += nv_transition_frequency(b0, TRANSITION_PLUS)
    assert total == pytest.approx(2 * CONSTANTS.D_zfs, abs=1e-9)


def test_zero_field_degeneracy():
    assert nv_transition_frequency(0.0, TRANSITION_PLUS) == 2870.0
    assert nv_transition_frequency(0.0, TRANSITION_MINUS) == 2870.0


def test_negative_field():
    with pytest.raises(DomainError):
        nv_transition_frequency(-1.0)
    with pytest.raises(DomainError):
        larmor_frequency("13C", -0.1)


def test_unknown_transition():
    with pytest.raises(DomainError):
        nv_transition_frequency(1.0, "0<->+2")


@pytest.mark.parametrize("species, b0, expected, tolerance", larmor_cases)
def test_larmor_frequency(species, b0, expected, tolerance):
    assert larmor_frequency(species, b0) == pytest.approx(
        expected, abs=tolerance
    )


def test_larmor_unknown_species():
    with pytest.raises(DomainError):
        larmor_frequency("29Si", 1.0)
    assert larmor_frequency("29Si", 2.0, gamma=8.465) == pytest.approx(16.93)


@pytest.mark.parametrize("nucleus, b0, expected, tolerance", f1_cases)
def test_conditional_precession_frequencies(nucleus, b0, expected, tolerance):
    f0, f1 = conditional_precession_frequencies(nucleus, b0)
    assert f0 == pytest.approx(larmor_frequency("13C", b0))
    assert f1 == pytest.approx(expected, abs=tolerance)


def test_f1_transverse_sign_invariance():
    plus = NuclearSpin("13C", HyperfineCoupling.from_signed(-226.2, 242.8))
    minus = NuclearSpin("13C", HyperfineCoupling.from_signed(-226.2, -242.8))
    assert conditional_precession_frequencies(
        plus, 4.7
    ) == conditional_precession_frequencies(minus, 4.7)


def test_uncoupled_hamiltonians_coincide():
    nucleus = NuclearSpin("13C")
    h0, h1 = build_conditional_hamiltonians(nucleus, 4.7)
    assert np.array_equal(h0, h1)


def test_spin_a_splitting():
    nucleus = NuclearSpin("13C", HyperfineCoupling(-226.2, 242.8))
    _, h1 = build_conditional_hamiltonians(nucleus, 4.7)
    assert eigen_splitting(h1) == pytest.approx(299.8, abs=0.1)


def test_pure_transverse_coupling_at_zero_field():
    nucleus = NuclearSpin("13C", HyperfineCoupling(0.0, 123.4))
    h0, h1 = build_conditional_hamiltonians(nucleus, 0.0)
    assert eigen_splitting(h0) == pytest.approx(0.0, abs=1e-12)
    assert eigen_splitting(h1) == pytest.approx(123.4, rel=1e-12)


def test_hamiltonians_are_hermitian():
    nucleus = NuclearSpin("1H", HyperfineCoupling(12.0, 30.0))
    for h in build_conditional_hamiltonians(nucleus, 23.5):
        assert np.allclose(h, h.conj().T)


def test_eigen_splittings_match_closed_form():
    for nucleus, b0 in random_nuclei(1000):
        f0, f1 = conditional_precession_frequencies(nucleus, b0)
        h0, h1 = build_conditional_hamiltonians(nucleus, b0)
        assert math.isclose(eigen_splitting(h0), f0, rel_tol=1e-9, abs_tol=1e-9)
        assert math.isclose(eigen_splitting(h1), f1, rel_tol=1e-9, abs_tol=1e-9)
