import numpy as np
import pytest

from nv_magnetometry.analytic.proton import (
    OIL_PROTON_DENSITY,
    ProtonLayerModel,
    b_rms,
    proton_contrast,
    proton_count,
    proton_signal,
    statistical_polarization,
)
from nv_magnetometry.physics.frequencies import larmor_frequency
from nv_magnetometry.utilities.errors import DomainError
from .analytic_test_cases import b_rms_cases


@pytest.mark.parametrize("density, depth, expected, tolerance", b_rms_cases)
def test_b_rms(density, depth, expected, tolerance):
    assert b_rms(density, depth) == pytest.approx(expected, rel=tolerance)


def test_b_rms_scaling():
    base = b_rms(OIL_PROTON_DENSITY, 6.26)
    assert b_rms(OIL_PROTON_DENSITY, 12.52) == pytest.approx(
        base * 2 ** -1.5
    )
    assert b_rms(4 * OIL_PROTON_DENSITY, 6.26) == pytest.approx(2 * base)


def test_proton_count():
    assert proton_count(6e28, 6.26) == pytest.approx(6e28 * 6.26e-9 ** 3)
    assert statistical_polarization(6e28, 6.26) == pytest.approx(
        np.sqrt(6e28 * 6.26e-9 ** 3)
    )


def test_contrast_on_resonance():
    # 1/(2τ) = f_h makes the filter unity
    assert proton_contrast(560.0, 64, 0.5, 1000.0) == pytest.approx(
        0.13, abs=0.01
    )


def test_contrast_without_field():
    taus = np.linspace(0.45, 0.55, 11)
    np.testing.assert_array_equal(proton_contrast(0.0, 64, taus, 1000.0), 1)


def test_contrast_even_in_field():
    taus = np.linspace(0.45, 0.55, 11)
    np.testing.assert_allclose(
        proton_contrast(200.0, 64, taus, 1000.0),
        proton_contrast(-200.0, 64, taus, 1000.0),
    )


def test_contrast_rejects_nonpositive_tau():
    with pytest.raises(DomainError):
        proton_contrast(200.0, 64, [0.0, 0.5], 1000.0)


def test_signal_minimum_at_larmor():
    model = ProtonLayerModel.at_field(OIL_PROTON_DENSITY, 6.26, 64, 23.5)
    assert model.larmor == pytest.approx(larmor_frequency("1H", 23.5))
    frequencies = np.linspace(950.0, 1050.0, 1001)
    trace = proton_signal(model, 1000.0 / (2 * frequencies))
    deepest = 1000.0 / (2 * trace.x[np.argmin(trace.y)])
    # the growing Nτ pulls the minimum a few hundred Hz below f_h
    assert deepest == pytest.approx(model.larmor, abs=0.5)
    assert trace.y_label == "C"
    assert trace.metadata["larmor_kHz"] == model.larmor
    assert trace.metadata["b_rms_nT"] == pytest.approx(model.b_rms)


@pytest.mark.parametrize(
    "density, depth, n_pulses, larmor",
    [(0.0, 6.0, 64, 1000.0), (6e28, 0.0, 64, 1000.0),
     (6e28, 6.0, 0, 1000.0), (6e28, 6.0, 64, 0.0)],
)
def test_invalid_layer(density, depth, n_pulses, larmor):
    with pytest.raises(DomainError):
        ProtonLayerModel(density, depth, n_pulses, larmor)
