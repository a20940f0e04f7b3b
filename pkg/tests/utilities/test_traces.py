import numpy as np
import pytest

from nv_magnetometry.utilities.errors import ArtifactIOError, DomainError
from nv_magnetometry.utilities.traces import (
    MeasurementTrace,
    format_trace,
    read_trace,
    write_trace,
)


def test_trace_validation():
    with pytest.raises(DomainError):
        MeasurementTrace([1.0, 2.0], [1.0], "tau")
    with pytest.raises(DomainError):
        MeasurementTrace([1.0], [1.0], "banana")


def test_default_unit_and_flags():
    trace = MeasurementTrace([1.0, 2.0], [0.5, 0.6], "n_pulses")
    assert trace.x_unit == "count"
    assert not trace.flags.any()
    assert len(trace) == 2


def test_is_uniform():
    assert MeasurementTrace(np.linspace(0, 1, 11), np.zeros(11), "tau").is_uniform()
    assert not MeasurementTrace([0.0, 1.0, 3.0], np.zeros(3), "tau").is_uniform()


def test_inverse_2tau():
    trace = MeasurementTrace([2.5, 5.0, 10.0], [0.1, 0.2, 0.3], "tau")
    relabelled = trace.to_inverse_2tau()
    assert relabelled.axis == "inverse_2tau"
    assert relabelled.x == pytest.approx([50.0, 100.0, 200.0])
    assert relabelled.y == pytest.approx([0.3, 0.2, 0.1])

    with pytest.raises(DomainError):
        relabelled.to_inverse_2tau()


def test_with_y_merges_metadata():
    trace = MeasurementTrace([1.0], [0.5], "tau", metadata={"seed": 1})
    other = trace.with_y([0.7], shots=10)
    assert other.y[0] == 0.7
    assert other.metadata == {"seed": 1, "shots": 10}
    assert trace.metadata == {"seed": 1}


def test_trace_file(tmp_path):
    x = np.linspace(0.1, 10.0, 7)
    y = np.sin(x) / 3
    flags = np.zeros(7, dtype=bool)
    flags[3] = True
    y[3] = np.nan
    trace = MeasurementTrace(
        x, y, "tau", metadata={"seed": 42, "plan": {"kind": "CPMG"}},
        flags=flags,
    )
    path = write_trace(trace, tmp_path / "trace.csv")
    assert path.read_text() == format_trace(trace)
    assert path.read_text().startswith("# schema: nv-magnetometry/trace@1")
    restored = read_trace(path)

    assert np.array_equal(restored.x, trace.x)
    assert np.array_equal(restored.y, trace.y, equal_nan=True)
    assert np.array_equal(restored.flags, flags)
    assert restored.metadata == trace.metadata
    assert restored.axis == "tau"


def test_read_trace_errors(tmp_path):
    with pytest.raises(ArtifactIOError):
        read_trace(tmp_path / "missing.csv")
    other = tmp_path / "other.csv"
    other.write_text("x,y\n1,2\n")
    with pytest.raises(ArtifactIOError):
        read_trace(other)
    binary = tmp_path / "binary.csv"
    binary.write_bytes(b"\xff\xfe\x00garbage")
    with pytest.raises(ArtifactIOError) as info:
        read_trace(binary)
    assert info.value.path == binary
    bad_meta = tmp_path / "meta.csv"
    bad_meta.write_text(
        "# schema: nv-magnetometry/trace@1\n# meta.seed: {\nx,y\n"
    )
    with pytest.raises(ArtifactIOError):
        read_trace(bad_meta)
