import numpy as np
import pytest

from nv_magnetometry.analytic.decay import echo_model
from nv_magnetometry.analytic.proton import (
    OIL_PROTON_DENSITY,
    ProtonLayerModel,
    proton_signal,
)
from nv_magnetometry.estimation.normalization import (
    fit_envelope,
    normalize_by_envelope,
)
from nv_magnetometry.simulator.decoherence import (
    ECHO,
    MULTIPULSE,
    DecoherenceEnvelope,
    apply_envelope,
)
from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.traces import MeasurementTrace
from .estimation_test_cases import (
    echo_taus,
    proton_field,
    proton_frequencies,
    proton_pulses,
)


def proton_trace():
    model = ProtonLayerModel.at_field(
        OIL_PROTON_DENSITY, 6.26, proton_pulses, proton_field
    )
    signal = proton_signal(model, 1000.0 / (2 * proton_frequencies))
    return signal.with_y(0.5 * (1.0 + signal.y)), model


def test_unit_envelope_is_identity():
    trace = MeasurementTrace(
        np.linspace(1.0, 2.0, 11), np.linspace(0.2, 0.9, 11), "tau"
    )
    normalized = normalize_by_envelope(trace, 1.0)
    np.testing.assert_allclose(normalized.y, trace.y, atol=1e-15)
    assert normalized.metadata["normalized"] is True


def test_proton_baseline_restored():
    trace, model = proton_trace()
    envelope = DecoherenceEnvelope(MULTIPULSE, 16.1, 0.97)
    damped = apply_envelope(trace, envelope, n_pulses=proton_pulses)
    assert np.max(damped.y) < 0.6

    normalized = normalize_by_envelope(
        damped, envelope, n_pulses=proton_pulses
    )
    # the filter zeros put the signal-free baseline back at 1
    assert np.max(normalized.y) == pytest.approx(1.0, abs=1e-3)
    far = np.abs(proton_frequencies - model.larmor) > 40.0
    assert np.min(normalized.y[far]) > 0.9
    np.testing.assert_allclose(normalized.y, trace.y, atol=1e-9)


def test_fit_echo_envelope():
    flat = MeasurementTrace(echo_taus, np.ones(len(echo_taus)), "tau")
    damped = apply_envelope(flat, DecoherenceEnvelope(ECHO, 364.0, 1.06))
    np.testing.assert_allclose(damped.y, echo_model(echo_taus, 364.0, 1.06))
    result = fit_envelope(damped, kind=ECHO)
    assert result.converged
    assert result.relative_error("time_constant", 364.0) < 1e-4
    assert result.relative_error("exponent", 1.06) < 1e-4


def test_fit_envelope_on_signal_free_points():
    taus = np.linspace(1.0, 10.0, 200)
    clean = MeasurementTrace(taus, np.ones(len(taus)), "tau")
    envelope = DecoherenceEnvelope(MULTIPULSE, 50.0, 0.9)
    damped = apply_envelope(clean, envelope, n_pulses=16)
    # a fake dip the mask must exclude
    dip = (taus > 4.0) & (taus < 5.0)
    y = damped.y.copy()
    y[dip] = 0.2
    result = fit_envelope(
        damped.with_y(y), mask=~dip, n_pulses=16,
        initial_time_constant=40.0,
    )
    assert result.relative_error("time_constant", 50.0) < 1e-4
    assert result.relative_error("exponent", 0.9) < 1e-4
    assert result.provenance["points"] == int(np.count_nonzero(~dip))


def test_fit_envelope_needs_points():
    trace = MeasurementTrace(
        np.array([1.0, 2.0, 3.0]), np.ones(3), "tau"
    )
    result = fit_envelope(trace, mask=[True, True, False], kind=ECHO)
    assert not result.converged


def test_vanishing_envelope():
    trace = MeasurementTrace(
        np.array([1.0, 2.0, 3.0]), np.array([0.4, 0.5, 0.6]), "tau"
    )
    values = np.array([1.0, 0.0, 0.5])
    with pytest.raises(DomainError):
        normalize_by_envelope(trace, values)
    normalized = normalize_by_envelope(
        trace, values, mask=[True, False, True]
    )
    assert np.isnan(normalized.y[1])
    np.testing.assert_array_equal(normalized.flags, [False, True, False])
    np.testing.assert_allclose(normalized.y[[0, 2]], [0.4, 0.7])


def test_mask_shape():
    trace = MeasurementTrace(np.array([1.0, 2.0]), np.ones(2), "tau")
    with pytest.raises(DomainError):
        normalize_by_envelope(trace, 1.0, mask=[True])
