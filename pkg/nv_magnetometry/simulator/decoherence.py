import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.traces import MeasurementTrace

logger = logging.getLogger(__name__)

RAMSEY = "ramsey"
ECHO = "echo"
MULTIPULSE = "multipulse"
ENVELOPE_KINDS = (RAMSEY, ECHO, MULTIPULSE)


@dataclass(frozen=True)
class DecoherenceEnvelope:
    """Stretched-exponential decay exp[-(t/T)^p] of the coherent signal.

    The decay time t depends on the kind: τ for a Ramsey fringe, the total
    free time 2τ for a Hahn echo and N·τ for a decoupling train.

    :param str kind: "ramsey", "echo" or "multipulse".
    :param float time_constant: T2* (ramsey) or T2, µs. `math.inf` disables
        the decay.
    :param float exponent: Stretch exponent p.
    """

    kind: str
    time_constant: float
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in ENVELOPE_KINDS:
            raise DomainError("unknown envelope kind '{}'".format(self.kind))
        if not self.time_constant > 0:
            raise DomainError("time constant must be positive")
        if not self.exponent > 0:
            raise DomainError("stretch exponent must be positive")

    def factor(self, time) -> np.ndarray:
        time = np.asarray(time, dtype=float)
        return np.exp(-((time / self.time_constant) ** self.exponent))


def _plan_value(trace: MeasurementTrace, key: str) -> Optional[float]:
    plan = trace.metadata.get("plan")
    if isinstance(plan, dict) and plan.get(key) is not None:
        return float(plan[key])
    return None


def decay_time(
    trace: MeasurementTrace,
    envelope: DecoherenceEnvelope,
    n_pulses: Optional[int],
    tau: Optional[float],
) -> np.ndarray:
    axis = trace.axis
    if envelope.kind in (RAMSEY, ECHO):
        if axis == "tau":
            taus = trace.x
        elif axis == "inverse_2tau":
            taus = 1000.0 / (2.0 * trace.x)
        else:
            raise DomainError(
                "a {} envelope needs a tau axis, not '{}'".format(
                    envelope.kind, axis
                )
            )
        return taus if envelope.kind == RAMSEY else 2.0 * taus

    if axis == "n_tau":
        return trace.x
    if axis in ("tau", "inverse_2tau"):
        n = n_pulses
        if n is None:
            n = _plan_value(trace, "n_pulses")
        if n is None and trace.metadata.get("n_pulses") is not None:
            n = float(trace.metadata["n_pulses"])
        if n is None:
            raise DomainError("the pulse count of the trace is unknown")
        taus = trace.x if axis == "tau" else 1000.0 / (2.0 * trace.x)
        return n * taus
    if axis == "n_pulses":
        if tau is None:
            tau = _plan_value(trace, "tau_us")
        if tau is None:
            raise DomainError("the pulse spacing of the trace is unknown")
        return trace.x * tau
    raise DomainError(
        "a multipulse envelope does not apply to a '{}' axis".format(axis)
    )


def apply_envelope(
    trace: MeasurementTrace,
    envelope: DecoherenceEnvelope,
    n_pulses: Optional[int] = None,
    tau: Optional[float] = None,
) -> MeasurementTrace:
    """Damp the coherent part of a trace: P0 -> ½ + E(t)·(P0 − ½).

    Args:
        trace (MeasurementTrace): A simulated trace on a τ, (2τ)^-1, Nτ or
            N axis.
        envelope (DecoherenceEnvelope): The decay law.
        n_pulses (Optional[int]): π count of a τ sweep; read from the plan
            in the trace metadata when omitted.
        tau (Optional[float]): π spacing (µs) of an N sweep; read from the
            plan in the trace metadata when omitted.

    Returns:
        MeasurementTrace: The damped trace, with the envelope recorded in
            its metadata.
    """

    decay = envelope.factor(decay_time(trace, envelope, n_pulses, tau))
    logger.debug(
        "applying %s envelope, T = %s us, p = %s",
        envelope.kind,
        envelope.time_constant,
        envelope.exponent,
    )
    return trace.with_y(
        0.5 + decay * (trace.y - 0.5),
        envelope={
            "kind": envelope.kind,
            "time_constant_us": envelope.time_constant,
            "exponent": envelope.exponent,
        },
    )
