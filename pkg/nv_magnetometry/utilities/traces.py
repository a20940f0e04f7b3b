import csv
import io
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Any, Optional

import numpy as np

from .errors import ArtifactIOError, DomainError

logger = logging.getLogger(__name__)

TRACE_SCHEMA = "nv-magnetometry/trace@1"

# axis kind -> default unit of the independent variable
AXIS_UNITS = {
    "tau": "us",
    "inverse_2tau": "kHz",
    "n_pulses": "count",
    "n_tau": "us",
    "t_corr": "us",
    "inner_pulses": "count",
    "frequency": "kHz",
    "detuning": "MHz",
    "delay": "ns",
    "duration": "ns",
    "distance": "mm",
}


@dataclass(frozen=True, eq=False)
class MeasurementTrace:
    """An (x, y) series with the meaning of its axis and the metadata of
    the acquisition (seed, register hash, sequence parameters...).

    Points flagged by the acquisition (for instance a degenerate photon
    reference) are marked in `flags`; their y value is NaN.
    """

    x: np.ndarray
    y: np.ndarray
    axis: str
    x_unit: str = ""
    y_label: str = "P0"
    metadata: Dict[str, Any] = field(default_factory=dict)
    flags: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise DomainError(
                "x and y must be one-dimensional arrays of equal length"
            )
        if self.axis not in AXIS_UNITS:
            raise DomainError("unknown axis kind '{}'".format(self.axis))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if not self.x_unit:
            object.__setattr__(self, "x_unit", AXIS_UNITS[self.axis])
        if self.flags is None:
            object.__setattr__(self, "flags", np.zeros(x.shape, dtype=bool))
        else:
            object.__setattr__(
                self, "flags", np.asarray(self.flags, dtype=bool)
            )

    def __len__(self):
        return len(self.x)

    def with_y(self, y, **metadata) -> "MeasurementTrace":
        merged = dict(self.metadata)
        merged.update(metadata)
        return replace(self, y=np.asarray(y, dtype=float), metadata=merged)

    def is_uniform(self, rtol: float = 1e-6) -> bool:
        if len(self.x) < 2:
            return False
        steps = np.diff(self.x)
        return bool(
            np.all(steps > 0)
            and np.allclose(steps, steps[0], rtol=rtol, atol=0.0)
        )

    def to_inverse_2tau(self) -> "MeasurementTrace":
        """Relabel a τ sweep (µs) on the (2τ)^-1 axis (kHz), sorted by
        increasing frequency."""

        if self.axis != "tau":
            raise DomainError(
                "only a tau sweep can be relabelled on the (2tau)^-1 axis"
            )
        frequency = 1000.0 / (2.0 * self.x)
        order = np.argsort(frequency, kind="stable")
        return MeasurementTrace(
            x=frequency[order],
            y=self.y[order],
            axis="inverse_2tau",
            y_label=self.y_label,
            metadata=dict(self.metadata),
            flags=self.flags[order],
        )


def format_trace(trace: MeasurementTrace) -> str:
    """The CSV text of a trace, '#'-prefixed header lines first."""

    stream = io.StringIO()
    stream.write("# schema: {}\n".format(TRACE_SCHEMA))
    stream.write("# axis: {}\n".format(trace.axis))
    stream.write("# x_unit: {}\n".format(trace.x_unit))
    stream.write("# y_label: {}\n".format(trace.y_label))
    for key in sorted(trace.metadata):
        stream.write(
            "# meta.{}: {}\n".format(
                key, json.dumps(trace.metadata[key], sort_keys=True)
            )
        )
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["x", "y", "flag"])
    for x, y, flag in zip(trace.x, trace.y, trace.flags):
        writer.writerow([repr(float(x)), repr(float(y)), int(flag)])
    return stream.getvalue()


def write_trace(trace: MeasurementTrace, path) -> Path:
    """Write a trace as CSV with '#'-prefixed header lines.

    Args:
        trace (MeasurementTrace): The trace to be written.
        path: Destination file.

    Returns:
        Path: The path of the written file.
    """

    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as stream:
            stream.write(format_trace(trace))
    except OSError as error:
        raise ArtifactIOError(str(error), path) from error
    logger.debug("wrote %d trace points to %s", len(trace), path)
    return path


def read_trace(path) -> MeasurementTrace:
    path = Path(path)
    header = {}
    metadata = {}
    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as stream:
            for line in stream:
                if not line.startswith("#"):
                    rows.append(line)
                    continue
                key, _, value = line[1:].strip().partition(": ")
                if key.startswith("meta."):
                    metadata[key[len("meta."):]] = json.loads(value)
                else:
                    header[key] = value
    except OSError as error:
        raise ArtifactIOError(str(error), path) from error
    except UnicodeDecodeError as error:
        raise ArtifactIOError(str(error), path) from error
    except json.JSONDecodeError as error:
        raise ArtifactIOError("invalid metadata ({})".format(error), path)

    if header.get("schema") != TRACE_SCHEMA:
        raise ArtifactIOError("not a trace file", path)

    reader = csv.reader(rows)
    next(reader, None)
    x, y, flags = [], [], []
    try:
        for record in reader:
            if not record:
                continue
            x.append(float(record[0]))
            y.append(float(record[1]))
            flags.append(bool(int(record[2])) if len(record) > 2 else False)
    except (ValueError, IndexError) as error:
        raise ArtifactIOError("malformed row ({})".format(error), path)

    return MeasurementTrace(
        x=np.array(x),
        y=np.array(y),
        axis=header.get("axis", ""),
        x_unit=header.get("x_unit", ""),
        y_label=header.get("y_label", "P0"),
        metadata=metadata,
        flags=np.array(flags, dtype=bool),
    )
