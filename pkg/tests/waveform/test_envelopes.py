import numpy as np
import pytest

from nv_magnetometry.waveform.envelopes import (
    COSINE_SQUARE,
    SQUARE,
    WURST_STANDARD,
    EnvelopeSpec,
    envelope_value,
    render_envelope,
    sample_count,
)
from nv_magnetometry.utilities.errors import DomainError
from .waveform_test_cases import specs


def test_square_pulse():
    samples = render_envelope(EnvelopeSpec(SQUARE, 48.0), 1.0)
    assert len(samples) == 48
    assert np.all(samples == 1.0)


@pytest.mark.parametrize("duration", [48.0, 64.0, 122.1, 200.0])
def test_area_ratio(duration):
    square = render_envelope(EnvelopeSpec(SQUARE, duration), 1.0)
    cosine = render_envelope(EnvelopeSpec(COSINE_SQUARE, duration), 1.0)
    assert len(square) == len(cosine)
    assert np.sum(cosine) / np.sum(square) == pytest.approx(
        0.5, abs=1.0 / len(square)
    )


def test_wurst_edges_and_center():
    spec = EnvelopeSpec(WURST_STANDARD, 2000.0, span=20.0)
    assert envelope_value(spec, 0.0) == pytest.approx(0.0)
    assert envelope_value(spec, 1000.0) == pytest.approx(1.0)
    assert envelope_value(spec, 1999.999999) == pytest.approx(0.0, abs=1e-6)
    assert envelope_value(spec, 2000.0) == 0.0


@pytest.mark.parametrize("spec", specs)
def test_envelope_bounded(spec):
    samples = render_envelope(spec, 1.0)
    assert np.all(samples >= 0.0)
    assert np.all(samples <= 1.0)


def test_sample_count():
    assert sample_count(122.1, 1.0) == 123
    assert sample_count(48.0, 1.0) == 48
    assert sample_count(31.5, 2.0) == 63


def test_unresolvable_pulse():
    with pytest.raises(DomainError):
        render_envelope(EnvelopeSpec(SQUARE, 1.0), 1.0)


def test_invalid_specs():
    with pytest.raises(DomainError):
        EnvelopeSpec("gaussian", 10.0)
    with pytest.raises(DomainError):
        EnvelopeSpec(SQUARE, 0.0)
    with pytest.raises(DomainError):
        EnvelopeSpec(SQUARE, 10.0, span=5.0)
    with pytest.raises(DomainError):
        EnvelopeSpec(WURST_STANDARD, 10.0, exponent=0.0)
