import numpy as np
import pytest

from nv_magnetometry.estimation.spectrum import (
    HANN,
    JACOBSEN,
    LOG_PARABOLIC,
    NO_WINDOW,
    spectrum,
)
from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.traces import MeasurementTrace

T_CORR = np.arange(0.0, 100.0, 0.5)


def tones(x, *pairs, offset=0.3, axis="t_corr"):
    y = np.full(len(x), offset)
    for frequency, amplitude in pairs:
        y = y + amplitude * np.cos(2 * np.pi * 1e-3 * frequency * x + 0.4)
    return MeasurementTrace(x, y, axis)


@pytest.mark.parametrize("window, method", [(NO_WINDOW, JACOBSEN),
                                            (HANN, LOG_PARABOLIC)])
@pytest.mark.parametrize("frequency", [50.0, 53.3, 297.1])
def test_pure_tone(window, method, frequency):
    result = spectrum(tones(T_CORR, (frequency, 0.2)), window)
    assert result.unit == "kHz"
    assert result.bin_width == pytest.approx(10.0)
    if window == HANN:
        assert len(result.peaks) == 1
    peak = result.peaks[0]
    assert peak.method == method
    tolerance = result.bin_width / 10
    assert peak.frequency == pytest.approx(frequency, abs=tolerance)


@pytest.mark.parametrize("window", [NO_WINDOW, HANN])
def test_on_bin_amplitude(window):
    result = spectrum(tones(T_CORR, (100.0, 0.25)), window)
    assert result.peaks[0].amplitude == pytest.approx(0.25, rel=1e-9)


def test_constant_has_no_peaks():
    trace = MeasurementTrace(T_CORR, np.full(len(T_CORR), 0.7), "t_corr")
    assert spectrum(trace).peaks == ()
    assert spectrum(trace, HANN).peaks == ()


def test_peaks_ordered_by_amplitude():
    trace = tones(T_CORR, (100.0, 0.1), (300.0, 0.3), (200.0, 0.2))
    result = spectrum(trace, NO_WINDOW)
    frequencies = [peak.frequency for peak in result.peaks]
    np.testing.assert_allclose(frequencies, [300.0, 200.0, 100.0],
                               atol=1e-6)


def test_prominence_threshold():
    trace = tones(T_CORR, (100.0, 0.5), (300.0, 0.02))
    assert len(spectrum(trace, prominence=0.1).peaks) == 1
    assert len(spectrum(trace, prominence=0.01).peaks) == 2


def test_nanosecond_axis_in_megahertz():
    delays = np.arange(0.0, 200.0, 1.0)
    trace = MeasurementTrace(
        delays, np.cos(2 * np.pi * 0.05 * delays), "delay"
    )
    result = spectrum(trace)
    assert result.unit == "MHz"
    assert result.peaks[0].frequency == pytest.approx(50.0, abs=0.5)


def test_to_trace():
    result = spectrum(tones(T_CORR, (50.0, 0.2)), HANN)
    trace = result.to_trace(source="test")
    assert trace.axis == "frequency"
    assert trace.x_unit == "kHz"
    assert trace.metadata == {"source": "test", "window": HANN}


def test_invalid_traces():
    uneven = MeasurementTrace(np.array([0.0, 1.0, 3.0, 4.0]),
                              np.zeros(4), "t_corr")
    with pytest.raises(DomainError):
        spectrum(uneven)
    with pytest.raises(DomainError):
        spectrum(MeasurementTrace(T_CORR, np.zeros(len(T_CORR)),
                                  "inverse_2tau"))
    with pytest.raises(DomainError):
        spectrum(tones(T_CORR, (50.0, 0.2)), window="blackman")
    broken = tones(T_CORR, (50.0, 0.2))
    broken.y[3] = np.nan
    with pytest.raises(DomainError):
        spectrum(broken)
