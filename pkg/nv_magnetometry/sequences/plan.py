import logging
import math
import re
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from nv_magnetometry.utilities.documents import dump_document, load_document
from nv_magnetometry.utilities.errors import ArtifactIOError, DomainError
from nv_magnetometry.waveform.envelopes import COSINE_SQUARE, SQUARE

logger = logging.getLogger(__name__)

PLAN_SCHEMA = "nv-magnetometry/plan@1"

HALF_PI = math.pi / 2
PI = math.pi

# rotation axis -> phase (degrees) of the microwave in the rotating frame
AXIS_PHASES = {"+x": 0.0, "+y": 90.0, "-x": 180.0, "-y": 270.0}
PULSE_SHAPES = (SQUARE, COSINE_SQUARE)

RAMSEY = "ramsey"
HAHN = "hahn"
CP = "cp"
CPMG = "cpmg"
XY4 = "xy4"
XY8 = "xy8"
XY16 = "xy16"
CORRELATION = "correlation"
CORRELATION_MULTIPULSE = "correlation-multipulse"

DECOUPLING_KINDS = (CP, CPMG, XY4, XY8, XY16)
CORRELATION_KINDS = (CORRELATION, CORRELATION_MULTIPULSE)
KINDS = (RAMSEY, HAHN) + DECOUPLING_KINDS + CORRELATION_KINDS

# axes of the pi pulses of one repetition block
_XY4 = ("+x", "+y", "+x", "+y")
_XY8 = _XY4 + tuple(reversed(_XY4))
_NEGATED = {"+x": "-x", "+y": "-y", "-x": "+x", "-y": "+y"}
BLOCK_AXES = {
    CP: ("+x",),
    CPMG: ("+y",),
    XY4: _XY4,
    XY8: _XY8,
    XY16: _XY8 + tuple(_NEGATED[axis] for axis in _XY8),
}

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


@dataclass(frozen=True)
class PulseSpec:
    """A rotation of the sensor qubit.

    :param str axis: "+x", "+y", "-x" or "-y".
    :param float angle: Rotation angle in radians, π/2 or π.
    :param str shape: Envelope used when the pulse is rendered.
    :param float duration: Length in ns, 0 for an instantaneous pulse.
    """

    axis: str
    angle: float
    shape: str = SQUARE
    duration: float = 0.0

    def __post_init__(self):
        if self.axis not in AXIS_PHASES:
            raise DomainError("unknown rotation axis '{}'".format(self.axis))
        if not (
            math.isclose(self.angle, HALF_PI) or math.isclose(self.angle, PI)
        ):
            raise DomainError("pulse angle must be π/2 or π")
        if self.shape not in PULSE_SHAPES:
            raise DomainError("unknown pulse shape '{}'".format(self.shape))
        if not self.duration >= 0:
            raise DomainError("pulse duration must be nonnegative")

    @property
    def is_pi(self) -> bool:
        return math.isclose(self.angle, PI)

    @property
    def phase(self) -> float:
        return AXIS_PHASES[self.axis]

    @property
    def label(self) -> str:
        name = self.axis[1].upper()
        if self.axis[0] == "-":
            name = "-" + name
        return name if self.is_pi else name + "/2"

    def rotation(self) -> np.ndarray:
        """SU(2) matrix of the ideal rotation on the sensor qubit."""
        phi = math.radians(self.phase)
        generator = math.cos(phi) * _PAULI_X + math.sin(phi) * _PAULI_Y
        return (
            math.cos(self.angle / 2) * np.eye(2)
            - 1j * math.sin(self.angle / 2) * generator
        )


@dataclass(frozen=True)
class PulseDurations:
    """Durations (ns) and shapes of the π/2 and π pulses."""

    half_pi: float = 0.0
    pi: float = 0.0
    half_pi_shape: str = SQUARE
    pi_shape: str = COSINE_SQUARE

    def __post_init__(self):
        if self.half_pi < 0 or self.pi < 0:
            raise DomainError("pulse durations must be nonnegative")

    @classmethod
    def ideal(cls) -> "PulseDurations":
        return cls(0.0, 0.0)

    @classmethod
    def calibrated(cls) -> "PulseDurations":
        # square π/2 and cosine-square π of the reference setup
        return cls(31.5, 122.1, SQUARE, COSINE_SQUARE)

    @property
    def is_ideal(self) -> bool:
        return self.half_pi == 0 and self.pi == 0

    def half_pi_pulse(self, axis: str) -> PulseSpec:
        return PulseSpec(axis, HALF_PI, self.half_pi_shape, self.half_pi)

    def pi_pulse(self, axis: str) -> PulseSpec:
        return PulseSpec(axis, PI, self.pi_shape, self.pi)


@dataclass(frozen=True)
class SequencePlan:
    """Parameters of one measurement sequence.

    `n_pulses` is the total π count of one decoupling block train (the N
    of "XY8-N"); `block_kind` selects the decoupling block used inside the
    correlation kinds. `inner_tau` (µs) overrides the π spacing of the
    storage train of the multipulse correlation variant.
    """

    kind: str
    tau: float
    n_pulses: int = 1
    block_kind: Optional[str] = None
    t_corr: float = 0.0
    inner_pulses: int = 0
    inner_tau: Optional[float] = None
    readout: str = "+x"
    phase_cycling: bool = True
    durations: PulseDurations = field(default_factory=PulseDurations)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError("unknown sequence kind '{}'".format(self.kind))
        if self.readout not in ("+x", "-x"):
            raise DomainError("readout must be '+x' or '-x'")
        if self.kind == RAMSEY:
            if not self.tau >= 0:
                raise DomainError("tau must be nonnegative")
        elif not self.tau > 0:
            raise DomainError("tau must be positive")

        if self.kind in CORRELATION_KINDS:
            if self.block_kind is None:
                object.__setattr__(self, "block_kind", XY4)
            if self.block_kind not in DECOUPLING_KINDS:
                raise DomainError(
                    "unknown correlation block '{}'".format(self.block_kind)
                )
            if self.kind == CORRELATION and not self.t_corr >= 0:
                raise DomainError("t_corr must be nonnegative")
            if self.kind == CORRELATION_MULTIPULSE and self.inner_pulses < 1:
                raise DomainError("the multipulse variant needs M >= 1")
            if self.inner_tau is not None and not self.inner_tau > 0:
                raise DomainError("inner tau must be positive")
        elif self.kind in DECOUPLING_KINDS:
            object.__setattr__(self, "block_kind", self.kind)

        if self.block_kind is not None:
            k = len(BLOCK_AXES[self.block_kind])
            if self.n_pulses < 1:
                raise DomainError("N must be at least 1")
            if self.n_pulses % k:
                raise DomainError(
                    "N = {} is not a multiple of the {} block size {}".format(
                        self.n_pulses, self.block_kind, k
                    )
                )

    @property
    def block_size(self) -> int:
        if self.block_kind is None:
            return 1
        return len(BLOCK_AXES[self.block_kind])

    @property
    def storage_tau(self) -> float:
        return self.tau if self.inner_tau is None else self.inner_tau

    @property
    def label(self) -> str:
        if self.kind in DECOUPLING_KINDS:
            return "{}-{}".format(self.kind.upper(), self.n_pulses)
        if self.kind in CORRELATION_KINDS:
            return "{}[{}-{}]".format(
                self.kind, self.block_kind.upper(), self.n_pulses
            )
        return self.kind

    @classmethod
    def from_label(cls, label: str, tau: float, **kwargs) -> "SequencePlan":
        """Plan for a decoupling label such as "XY16-64", "CPMG-8" or
        "XY8" (one block)."""

        match = re.fullmatch(
            r"(cp|cpmg|xy4|xy8|xy16)(?:-(\d+))?", label.lower()
        )
        if match is None:
            raise DomainError("unrecognized sequence label '{}'".format(label))
        kind = match.group(1)
        n = int(match.group(2)) if match.group(2) else len(BLOCK_AXES[kind])
        return cls(kind, tau, n_pulses=n, **kwargs)


@dataclass(frozen=True)
class Window:
    """Free evolution between two π/2 pulses.

    :param tuple pulses: The π pulses inside the window.
    :param float spacing: Center-to-center π spacing in µs; the first π
        center sits spacing/2 after the window opens.
    :param float length: Window length in µs.
    :param bool storage: The sensor stores a population, not a coherence.
    """

    pulses: Tuple[PulseSpec, ...]
    spacing: float
    length: float
    storage: bool = False


@dataclass(frozen=True)
class SymbolicSequence:
    """π/2 pulses interleaved with evolution windows:
    half_pulses[0], windows[0], half_pulses[1], ..., half_pulses[-1]."""

    kind: str
    half_pulses: Tuple[PulseSpec, ...]
    windows: Tuple[Window, ...]

    def __post_init__(self):
        if len(self.half_pulses) != len(self.windows) + 1:
            raise DomainError("each window must be enclosed by π/2 pulses")

    @property
    def pulses(self) -> Tuple[PulseSpec, ...]:
        ordered = [self.half_pulses[0]]
        for window, closing in zip(self.windows, self.half_pulses[1:]):
            ordered.extend(window.pulses)
            ordered.append(closing)
        return tuple(ordered)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(pulse.label for pulse in self.pulses)

    def with_readout(self, pulse: PulseSpec) -> "SymbolicSequence":
        return replace(self, half_pulses=self.half_pulses[:-1] + (pulse,))


def _train(block_kind: str, n: int, durations: PulseDurations):
    axes = BLOCK_AXES[block_kind] * (n // len(BLOCK_AXES[block_kind]))
    return tuple(durations.pi_pulse(axis) for axis in axes)


def _build_literal(plan: SequencePlan) -> SymbolicSequence:
    d = plan.durations
    x2 = d.half_pi_pulse("+x")
    y2 = d.half_pi_pulse("+y")
    if plan.kind == RAMSEY:
        return SymbolicSequence(RAMSEY, (x2, x2), (Window((), 0.0, plan.tau),))
    if plan.kind == HAHN:
        window = Window((d.pi_pulse("+x"),), 2 * plan.tau, 2 * plan.tau)
        return SymbolicSequence(HAHN, (x2, x2), (window,))

    n = plan.n_pulses
    block = Window(
        _train(plan.block_kind, n, d), plan.tau, n * plan.tau
    )
    if plan.kind in DECOUPLING_KINDS:
        return SymbolicSequence(plan.kind, (x2, x2), (block,))

    if plan.kind == CORRELATION:
        storage = Window((), 0.0, plan.t_corr, storage=True)
    else:
        m = plan.inner_pulses
        storage = Window(
            tuple(d.pi_pulse("+y") for _ in range(m)),
            plan.storage_tau,
            m * plan.storage_tau,
            storage=True,
        )
    return SymbolicSequence(
        plan.kind, (x2, y2, y2, x2), (block, storage, block)
    )


def _net_rotation(sequence: SymbolicSequence) -> np.ndarray:
    # later pulses act from the left
    total = np.eye(2, dtype=complex)
    for pulse in sequence.pulses:
        total = pulse.rotation() @ total
    return total


def readout_axis(plan: SequencePlan) -> str:
    """Physical axis of the final π/2 pulse.

    Ramsey reads out with a literal X/2 (X̄/2 for the "-x" branch). Every
    other kind uses as "+x" readout the ±x π/2 after which a nucleus-free
    sensor is back in m_S = 0 under ideal pulses; "-x" is the opposite axis.
    """

    if plan.kind == RAMSEY:
        return plan.readout
    sequence = _build_literal(plan)
    trial = sequence.with_readout(plan.durations.half_pi_pulse("+x"))
    p0 = abs(_net_rotation(trial)[0, 0]) ** 2
    home = "+x" if p0 > 0.5 else "-x"
    if plan.readout == "+x":
        return home
    return "-x" if home == "+x" else "+x"


def build_sequence(plan: SequencePlan) -> SymbolicSequence:
    """Symbolic pulse list of a plan.

    Args:
        plan (SequencePlan): The plan.

    Returns:
        SymbolicSequence: π/2 pulses and evolution windows, the final π/2
            about the readout axis of the plan.
    """

    sequence = _build_literal(plan)
    readout = plan.durations.half_pi_pulse(readout_axis(plan))
    return sequence.with_readout(readout)


def phase_cycle_pair(plan: SequencePlan) -> Tuple[SequencePlan, SequencePlan]:
    return replace(plan, readout="+x"), replace(plan, readout="-x")


def combine_phase_cycle(p_plus, p_minus):
    """Average of the "+x" branch and the complement of the "-x" branch."""
    return 0.5 * (np.asarray(p_plus) + 1.0 - np.asarray(p_minus))


def plan_to_document(plan: SequencePlan) -> Dict[str, Any]:
    d = plan.durations
    return {
        "schema": PLAN_SCHEMA,
        "kind": plan.kind,
        "tau_us": plan.tau,
        "n_pulses": plan.n_pulses,
        "block_kind": plan.block_kind,
        "t_corr_us": plan.t_corr,
        "inner_pulses": plan.inner_pulses,
        "inner_tau_us": plan.inner_tau,
        "readout": plan.readout,
        "phase_cycling": plan.phase_cycling,
        "durations": {
            "half_pi_ns": d.half_pi,
            "pi_ns": d.pi,
            "half_pi_shape": d.half_pi_shape,
            "pi_shape": d.pi_shape,
        },
    }


def plan_from_document(document: Dict[str, Any]) -> SequencePlan:
    durations = document.get("durations") or {}
    block_kind = document.get("block_kind")
    if document["kind"] not in CORRELATION_KINDS:
        block_kind = None
    return SequencePlan(
        kind=document["kind"],
        tau=float(document["tau_us"]),
        n_pulses=int(document.get("n_pulses", 1)),
        block_kind=block_kind,
        t_corr=float(document.get("t_corr_us", 0.0)),
        inner_pulses=int(document.get("inner_pulses", 0)),
        inner_tau=document.get("inner_tau_us"),
        readout=document.get("readout", "+x"),
        phase_cycling=bool(document.get("phase_cycling", True)),
        durations=PulseDurations(
            float(durations.get("half_pi_ns", 0.0)),
            float(durations.get("pi_ns", 0.0)),
            durations.get("half_pi_shape", SQUARE),
            durations.get("pi_shape", COSINE_SQUARE),
        ),
    )


def dump_plan(plan: SequencePlan, path):
    return dump_document(plan_to_document(plan), path)


def load_plan(path) -> SequencePlan:
    document = load_document(path, PLAN_SCHEMA)
    try:
        return plan_from_document(document)
    except (KeyError, TypeError, ValueError) as error:
        raise ArtifactIOError("invalid plan ({})".format(error), path)
