import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from nv_magnetometry.utilities.errors import DomainError
from .plan import PulseDurations, PulseSpec, SymbolicSequence, Window

logger = logging.getLogger(__name__)

# laser pulse lengths, ns
LASER_INIT = 1000.0
LASER_READOUT = 1000.0


def exact_ns(value_us: float) -> Fraction:
    """Microseconds to exact rational nanoseconds, through the shortest
    decimal representation of the float."""
    return Fraction(repr(float(value_us))) * 1000


def _exact(value_ns: float) -> Fraction:
    return Fraction(repr(float(value_ns)))


@dataclass(frozen=True)
class TimedEvent:
    """A pulse placed on the absolute time axis (exact ns).

    `role` is one of "prepare", "pi", "store", "retrieve" or "readout";
    `window` is the index of the window a π pulse belongs to.
    """

    start: Fraction
    pulse: PulseSpec
    role: str
    window: Optional[int] = None

    @property
    def duration(self) -> Fraction:
        return _exact(self.pulse.duration)

    @property
    def end(self) -> Fraction:
        return self.start + self.duration

    @property
    def center(self) -> Fraction:
        return self.start + self.duration / 2


@dataclass(frozen=True)
class Marker:
    name: str
    start: Fraction
    duration: Fraction


@dataclass(frozen=True)
class TimedEventList:
    """Pulses of a sequence on the absolute time axis.

    :param tuple events: Time-ordered, non-overlapping events.
    :param Fraction origin: Rising edge of the first π/2 pulse.
    :param Fraction sensing_time: Total length of the non-storage windows.
    :param tuple windows: (open, close) times of every window.
    :param tuple storage: Indices of the storage windows.
    :param tuple markers: Laser initialization and readout markers.
    """

    events: Tuple[TimedEvent, ...]
    origin: Fraction
    sensing_time: Fraction
    windows: Tuple[Tuple[Fraction, Fraction], ...]
    storage: Tuple[int, ...] = ()
    markers: Tuple[Marker, ...] = ()

    def __post_init__(self):
        for previous, current in zip(self.events, self.events[1:]):
            if current.start < previous.end:
                raise DomainError(
                    "pulses {} and {} overlap".format(
                        previous.pulse.label, current.pulse.label
                    )
                )
        if self.events and self.events[0].start < 0:
            raise DomainError("event times must be nonnegative")

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def end(self) -> Fraction:
        return self.events[-1].end if self.events else self.origin

    def centers(self, role: Optional[str] = None) -> List[Fraction]:
        """Pulse centers relative to the origin, optionally for one role."""
        return [
            event.center - self.origin
            for event in self.events
            if role is None or event.role == role
        ]


def _check_window(window: Window, spacing: Fraction, d_pi: Fraction, index):
    if not window.pulses:
        return
    if len(window.pulses) > 1 and spacing - d_pi < d_pi:
        raise DomainError(
            "window {}: interior free gap of {} ns is shorter than the π "
            "duration ({} ns)".format(
                index, float(spacing - d_pi), float(d_pi)
            )
        )
    first_gap = spacing / 2 - d_pi / 2
    if first_gap < d_pi / 2:
        raise DomainError(
            "window {}: first free gap of {} ns is shorter than half a "
            "π duration ({} ns)".format(
                index, float(first_gap), float(d_pi / 2)
            )
        )


def expand_timing(
    sequence: SymbolicSequence,
    durations: Optional[PulseDurations] = None,
    laser_init: float = LASER_INIT,
    laser_readout: float = LASER_READOUT,
) -> TimedEventList:
    """Place the pulses of a symbolic sequence on the time axis.

    Every window opens at the falling edge of a π/2 pulse. Its π centers
    sit at spacing/2 + j·spacing and the next π/2 rises when the window
    closes, so adjacent π centers are τ apart and the sensing time of an
    N-pulse train is N·τ exactly.

    Args:
        sequence (SymbolicSequence): Output of `build_sequence`.
        durations (Optional[PulseDurations]): Overrides the pulse
            durations carried by `sequence`.
        laser_init (float): Initialization laser length (ns) preceding the
            first pulse.
        laser_readout (float): Readout laser length (ns) following the last
            pulse.

    Returns:
        TimedEventList: The timed events.
    """

    def sized(pulse: PulseSpec) -> PulseSpec:
        if durations is None:
            return pulse
        if pulse.is_pi:
            return PulseSpec(
                pulse.axis, pulse.angle, durations.pi_shape, durations.pi
            )
        return PulseSpec(
            pulse.axis, pulse.angle, durations.half_pi_shape, durations.half_pi
        )

    origin = _exact(laser_init)
    events = []
    windows = []
    storage = []
    sensing = Fraction(0)
    half_pulses = [sized(pulse) for pulse in sequence.half_pulses]
    count = len(half_pulses)

    cursor = origin
    for index, half in enumerate(half_pulses):
        if index == 0:
            role = "prepare"
        elif index == count - 1:
            role = "readout"
        elif index % 2:
            role = "store"
        else:
            role = "retrieve"
        events.append(TimedEvent(cursor, half, role))
        cursor = cursor + _exact(half.duration)
        if index == count - 1:
            break

        window = sequence.windows[index]
        spacing = exact_ns(window.spacing)
        length = exact_ns(window.length)
        pis = [sized(pulse) for pulse in window.pulses]
        d_pi = _exact(pis[0].duration) if pis else Fraction(0)
        _check_window(window, spacing, d_pi, index)
        if not pis and length < 0:
            raise DomainError("window {} has negative length".format(index))

        for j, pulse in enumerate(pis):
            center = cursor + spacing / 2 + j * spacing
            events.append(
                TimedEvent(center - d_pi / 2, pulse, "pi", window=index)
            )
        windows.append((cursor, cursor + length))
        if window.storage:
            storage.append(index)
        else:
            sensing += length
        cursor = cursor + length

    readout_end = cursor + _exact(half_pulses[-1].duration)
    markers = (
        Marker("laser-init", Fraction(0), _exact(laser_init)),
        Marker("laser-readout", readout_end, _exact(laser_readout)),
    )
    timed = TimedEventList(
        events=tuple(events),
        origin=origin,
        sensing_time=sensing,
        windows=tuple(windows),
        storage=tuple(storage),
        markers=markers,
    )
    logger.debug(
        "expanded %s into %d events, sensing time %s ns",
        sequence.kind,
        len(timed),
        sensing,
    )
    return timed


def format_timing_table(timed: TimedEventList) -> str:
    """Human readable table of the events, times in ns from the origin."""

    header = "{:>4}  {:<9} {:<5} {:>14} {:>14} {:>14}".format(
        "#", "role", "pulse", "start", "center", "end"
    )
    lines = [header, "-" * len(header)]
    for index, event in enumerate(timed.events):
        lines.append(
            "{:>4}  {:<9} {:<5} {:>14.3f} {:>14.3f} {:>14.3f}".format(
                index,
                event.role,
                event.pulse.label,
                float(event.start - timed.origin),
                float(event.center - timed.origin),
                float(event.end - timed.origin),
            )
        )
    for marker in timed.markers:
        lines.append(
            "      {:<15} {:>14.3f} {:>14} {:>14.3f}".format(
                marker.name,
                float(marker.start - timed.origin),
                "",
                float(marker.start + marker.duration - timed.origin),
            )
        )
    lines.append("sensing time: {:.3f} ns".format(float(timed.sensing_time)))
    return "\n".join(lines)
