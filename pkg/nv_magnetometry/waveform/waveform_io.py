import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from nv_magnetometry.utilities.errors import ArtifactIOError, DomainError
from .iq import IQWaveform

logger = logging.getLogger(__name__)

WAVEFORM_SCHEMA = "nv-magnetometry/waveform@1"
FORMATS = ("csv", "binary")
END_OF_HEADER = "# end-header\n"

# little-endian float32, I and Q interleaved
BINARY_DTYPE = np.dtype("<f4")


def _header(
    fmt: str, sample_rate, if_frequency, if_phase, count, metadata=None
) -> str:
    fields = [
        ("schema", WAVEFORM_SCHEMA),
        ("format", fmt),
        ("sample_rate_GSps", repr(float(sample_rate))),
        ("if_frequency_MHz", repr(float(if_frequency))),
        ("if_phase_deg", repr(float(if_phase))),
        ("channels", "2"),
        ("samples", str(int(count))),
    ]
    for key in sorted(metadata or {}):
        value = json.dumps(metadata[key], sort_keys=True)
        fields.append(("meta." + key, value))
    lines = ["# {}: {}\n".format(key, value) for key, value in fields]
    return "".join(lines) + END_OF_HEADER


def waveform_file_size(
    count: int,
    sample_rate: float = 1.0,
    if_frequency: float = 100.0,
    if_phase: float = 0.0,
    metadata: Optional[Dict[str, Any]] = None,
) -> int:
    """Size in bytes of a binary waveform file holding `count` samples per
    channel: the text header plus 8 bytes per sample pair. CSV files have
    no fixed size."""

    header = _header(
        "binary", sample_rate, if_frequency, if_phase, count, metadata
    )
    return len(header.encode("ascii")) + 2 * BINARY_DTYPE.itemsize * count


def export_waveform(
    iq: IQWaveform,
    path,
    fmt: str = "csv",
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write a two-channel waveform file.

    Args:
        iq (IQWaveform): The waveform.
        path: Destination file.
        fmt (str): "csv" (decimal, exact in float64) or "binary"
            (little-endian float32).
        metadata (Optional[Dict[str, Any]]): Extra header entries, written
            as JSON on "# meta.<key>" lines.

    Returns:
        Path: The written file.
    """

    if fmt not in FORMATS:
        raise DomainError("unknown waveform format '{}'".format(fmt))
    path = Path(path)
    header = _header(
        fmt, iq.sample_rate, iq.if_frequency, iq.if_phase, len(iq), metadata
    )
    try:
        if fmt == "csv":
            with open(path, "w", newline="", encoding="utf-8") as stream:
                stream.write(header)
                writer = csv.writer(stream, lineterminator="\n")
                writer.writerow(["I", "Q"])
                for i, q in zip(iq.i, iq.q):
                    writer.writerow([repr(float(i)), repr(float(q))])
        else:
            samples = np.empty(2 * len(iq), dtype=BINARY_DTYPE)
            samples[0::2] = iq.i
            samples[1::2] = iq.q
            with open(path, "wb") as stream:
                stream.write(header.encode("ascii"))
                stream.write(samples.tobytes())
    except OSError as error:
        raise ArtifactIOError(str(error), path) from error
    logger.info("exported %d %s samples to %s", len(iq), fmt, path)
    return path


def _parse_header(stream, path) -> Dict[str, str]:
    header = {}
    while True:
        line = stream.readline()
        if not line:
            raise ArtifactIOError("missing end of header", path)
        text = line.decode("ascii", errors="replace")
        if text == END_OF_HEADER:
            return header
        if not text.startswith("# "):
            raise ArtifactIOError("malformed header line", path)
        key, _, value = text[2:].rstrip("\n").partition(": ")
        header[key] = value


def import_waveform(path) -> IQWaveform:
    """Read a waveform file written by `export_waveform`; the format is taken
    from the header."""

    path = Path(path)
    try:
        with open(path, "rb") as stream:
            header = _parse_header(stream, path)
            payload = stream.read()
    except OSError as error:
        raise ArtifactIOError(str(error), path) from error

    if header.get("schema") != WAVEFORM_SCHEMA:
        raise ArtifactIOError("not a waveform file", path)
    try:
        count = int(header["samples"])
        sample_rate = float(header["sample_rate_GSps"])
        if_frequency = float(header["if_frequency_MHz"])
        if_phase = float(header["if_phase_deg"])
        fmt = header["format"]
    except (KeyError, ValueError) as error:
        raise ArtifactIOError("incomplete header ({})".format(error), path)

    if fmt == "binary":
        if len(payload) != 2 * BINARY_DTYPE.itemsize * count:
            raise ArtifactIOError(
                "expected {} samples per channel".format(count), path
            )
        samples = np.frombuffer(payload, dtype=BINARY_DTYPE)
        i, q = samples[0::2], samples[1::2]
    elif fmt == "csv":
        try:
            reader = csv.reader(io.StringIO(payload.decode("ascii")))
            next(reader, None)
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
        except (ValueError, IndexError) as error:
            # UnicodeDecodeError is a ValueError
            raise ArtifactIOError("malformed row ({})".format(error), path)
        if len(rows) != count:
            raise ArtifactIOError(
                "expected {} samples per channel, found {}".format(
                    count, len(rows)
                ),
                path,
            )
        i = np.array([r[0] for r in rows])
        q = np.array([r[1] for r in rows])
    else:
        raise ArtifactIOError("unknown format '{}'".format(fmt), path)

    logger.debug("imported %d %s samples from %s", count, fmt, path)
    return IQWaveform(
        sample_rate,
        if_frequency,
        if_phase,
        np.asarray(i, dtype=float),
        np.asarray(q, dtype=float),
    )
