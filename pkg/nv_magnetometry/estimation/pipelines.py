import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from nv_magnetometry.analytic.decay import echo_model, ramsey_model
from nv_magnetometry.analytic.multipulse import (
    invert_hyperfine,
    single_nucleus_dip,
    spectrum_values,
)
from nv_magnetometry.analytic.photon_statistics import g2_model
from nv_magnetometry.analytic.proton import b_rms, proton_contrast
from nv_magnetometry.physics.spins import (
    HyperfineCoupling,
    NuclearSpin,
    SpinRegister,
    register_hash,
)
from nv_magnetometry.utilities.constants import CONSTANTS
from nv_magnetometry.utilities.errors import DomainError
from nv_magnetometry.utilities.fit_result import FitResult
from nv_magnetometry.utilities.traces import MeasurementTrace
from .fitting import fit_model
from .spectrum import HANN, spectrum

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "nv-magnetometry/report@1"

OK = "ok"
UNDERDETERMINED = "underdetermined"
UNCOUPLED = "uncoupled"
INCONSISTENT = "inconsistent"

# tones weaker than this are treated as absent
MIN_TONE_AMPLITUDE = 1e-3
# a fitted depth this close (relative) to its upper bound means no signal
DEPTH_PIN_FRACTION = 0.01


def _taus(trace: MeasurementTrace) -> np.ndarray:
    if trace.axis == "tau":
        return trace.x
    if trace.axis == "inverse_2tau":
        return 1000.0 / (2.0 * trace.x)
    raise DomainError(
        "expected a tau or (2tau)^-1 axis, got '{}'".format(trace.axis)
    )


def _plan_entry(trace: MeasurementTrace, key: str):
    plan = trace.metadata.get("plan")
    if isinstance(plan, dict):
        return plan.get(key)
    return None


def _pulse_count(trace: MeasurementTrace, n_pulses: Optional[int]) -> int:
    if n_pulses is None:
        n_pulses = trace.metadata.get("n_pulses")
    if n_pulses is None:
        n_pulses = _plan_entry(trace, "n_pulses")
    if n_pulses is None:
        raise DomainError("the pulse count of the trace is unknown")
    return int(n_pulses)


def _finite(trace: MeasurementTrace) -> MeasurementTrace:
    keep = np.isfinite(trace.y)
    if np.all(keep):
        return trace
    return replace(trace, x=trace.x[keep], y=trace.y[keep],
                   flags=trace.flags[keep])


def _tones_model(count: int):
    def model(x, **values):
        y = np.full(np.shape(x), values["offset"], dtype=float)
        for i in range(count):
            phase = 2 * np.pi * 1e-3 * values["f{}".format(i)] * x
            y = y + values["c{}".format(i)] * np.cos(phase)
            y = y + values["s{}".format(i)] * np.sin(phase)
        return y

    return model


def refine_tones(
    x, y, frequencies: Sequence[float], bin_width: float
) -> FitResult:
    """Least-squares refinement of coarse tone frequencies (kHz) in a
    signal sampled at `x` (µs): a constant plus one cosine and one sine per
    tone, each frequency free within one bin of its coarse value.

    The amplitudes are seeded by a linear least-squares solve at the coarse
    frequencies.
    """

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    columns = [np.ones_like(x)]
    for frequency in frequencies:
        phase = 2 * np.pi * 1e-3 * frequency * x
        columns.extend([np.cos(phase), np.sin(phase)])
    coefficients = np.linalg.lstsq(np.column_stack(columns), y, rcond=None)[0]

    initial = {"offset": float(coefficients[0])}
    bounds = {}
    for i, frequency in enumerate(frequencies):
        initial["f{}".format(i)] = float(frequency)
        initial["c{}".format(i)] = float(coefficients[1 + 2 * i])
        initial["s{}".format(i)] = float(coefficients[2 + 2 * i])
        bounds["f{}".format(i)] = (
            max(frequency - bin_width, 0.0),
            frequency + bin_width,
        )
    return fit_model(
        _tones_model(len(frequencies)),
        x,
        y,
        initial,
        bounds=bounds,
        provenance={"coarse_kHz": [float(f) for f in frequencies]},
    )


def _strong_peaks(trace, window, prominence, min_amplitude):
    result = spectrum(trace, window, prominence)
    peaks = [peak for peak in result.peaks if peak.amplitude >= min_amplitude]
    return result, peaks


def _peak_document(peak) -> Dict[str, Any]:
    return {
        "frequency_kHz": peak.frequency,
        "amplitude": peak.amplitude,
        "half_width_kHz": peak.half_width,
        "method": peak.method,
    }


def rabi_candidates(
    measured: float, step: float, tau: float
) -> Tuple[float, ...]:
    """Nuclear Rabi frequencies (kHz) compatible with an oscillation seen
    at `measured` kHz in an N sweep sampled every `step` µs of N·τ, within
    the unambiguous band [0, 1/(2τ)], in increasing order."""

    sampling = 1000.0 / step
    ceiling = 1000.0 / (2.0 * tau)
    values = set()
    k = 0
    while k * sampling - measured <= ceiling:
        for value in (k * sampling - measured, k * sampling + measured):
            if 0.0 <= value <= ceiling:
                values.add(round(value, 12))
        k += 1
    return tuple(sorted(values))


def _n_sweep_residual(
    coupling: HyperfineCoupling,
    f0: float,
    f1: float,
    tau: float,
    trace: MeasurementTrace,
) -> float:
    """Residual norm of the N sweep predicted for `coupling`; infinite when
    the sweep holds an odd π count."""

    clean = _finite(trace)
    try:
        predicted = [
            single_nucleus_dip(coupling, f0, f1, tau, int(round(n)))
            for n in clean.x
        ]
    except DomainError:
        return math.inf
    return float(np.linalg.norm(clean.y - np.array(predicted)))


@dataclass(frozen=True)
class HyperfineExtraction:
    """Outcome of the hyperfine pipeline.

    `coupling` is None unless the status is "ok" or "uncoupled"; `report`
    holds every intermediate number (dip, spectra peaks, refined
    frequencies, candidate Rabi frequencies) of the run.
    """

    coupling: Optional[HyperfineCoupling]
    status: str
    report: Dict[str, Any] = field(default_factory=dict)

    def to_document(self) -> Dict[str, Any]:
        coupling = None
        if self.coupling is not None:
            coupling = {
                "a_parallel_kHz": self.coupling.a_parallel,
                "a_perpendicular_kHz": self.coupling.a_perpendicular,
            }
        return {
            "schema": REPORT_SCHEMA,
            "pipeline": "hyperfine",
            "status": self.status,
            "coupling": coupling,
            "report": self.report,
        }


def extract_hyperfine_pipeline(
    dip_trace: Optional[MeasurementTrace],
    correlation_trace: MeasurementTrace,
    n_sweep_trace: MeasurementTrace,
    tau: Optional[float] = None,
    larmor: Optional[float] = None,
    window: str = HANN,
    prominence: float = 0.1,
    min_amplitude: float = MIN_TONE_AMPLITUDE,
) -> HyperfineExtraction:
    """Hyperfine coupling of one nucleus from a dip, a correlation trace
    and an N sweep at the dip.

    The dip minimum gives the resonant spacing; the two strongest tones of
    the correlation trace give f0 and f1; the strongest tone of the N sweep
    against N·τ gives f_r. Refined frequencies feed `invert_hyperfine`. An
    even-N sweep cannot tell f_r from its aliases; when several candidates
    invert consistently, the one whose predicted N sweep is closest to the
    data is kept. Without correlation tones the nucleus is "uncoupled" only
    if the N sweep is flat as well, "underdetermined" otherwise.

    Args:
        dip_trace (Optional[MeasurementTrace]): τ sweep around the dip.
        correlation_trace (MeasurementTrace): Trace on the t_corr axis.
        n_sweep_trace (MeasurementTrace): Trace on the n_pulses axis.
        tau (Optional[float]): π spacing of the N sweep, µs; the plan of
            the N sweep, then the dip, by default.
        larmor (Optional[float]): Bare Larmor frequency, kHz; the tone
            nearest to it is f0. The lower tone otherwise.
        window (str): Spectrum window.
        prominence (float): Relative peak prominence.
        min_amplitude (float): Smallest tone amplitude taken as a signal.

    Returns:
        HyperfineExtraction: The coupling with its status and report.
    """

    report: Dict[str, Any] = {"window": window, "prominence": prominence}

    if dip_trace is not None:
        clean = _finite(dip_trace)
        taus = _taus(clean)
        index = int(np.argmin(clean.y))
        report["dip"] = {
            "tau_us": float(taus[index]),
            "frequency_kHz": float(1000.0 / (2.0 * taus[index])),
            "p0": float(clean.y[index]),
        }
    if tau is None:
        tau = _plan_entry(n_sweep_trace, "tau_us")
    if tau is None and "dip" in report:
        tau = report["dip"]["tau_us"]
    if tau is None:
        raise DomainError("the π spacing of the N sweep is unknown")
    tau = float(tau)
    report["tau_us"] = tau

    if correlation_trace.axis != "t_corr":
        raise DomainError("the correlation trace needs a t_corr axis")
    if n_sweep_trace.axis != "n_pulses":
        raise DomainError("the N sweep needs an n_pulses axis")
    scaled = MeasurementTrace(
        x=n_sweep_trace.x * tau, y=n_sweep_trace.y, axis="n_tau"
    )
    sweep_spectrum, sweep_peaks = _strong_peaks(
        scaled, window, prominence, min_amplitude
    )

    corr_spectrum, peaks = _strong_peaks(
        correlation_trace, window, prominence, min_amplitude
    )
    report["correlation"] = {
        "bin_kHz": corr_spectrum.bin_width,
        "peaks": [_peak_document(peak) for peak in peaks],
    }
    if not peaks:
        if sweep_peaks:
            # the nucleus rotates but τ misses the correlation resonance
            logger.warning(
                "no correlation tones while the N sweep oscillates"
            )
            report["n_sweep"] = {
                "bin_kHz": sweep_spectrum.bin_width,
                "peaks": [_peak_document(peak) for peak in sweep_peaks],
            }
            return HyperfineExtraction(None, UNDERDETERMINED, report)
        logger.info("no correlation tones: the nucleus is uncoupled")
        return HyperfineExtraction(
            HyperfineCoupling(0.0, 0.0), UNCOUPLED, report
        )
    if len(peaks) < 2:
        logger.warning("a single correlation tone: f0 and f1 unresolved")
        return HyperfineExtraction(None, UNDERDETERMINED, report)

    tones = refine_tones(
        correlation_trace.x,
        correlation_trace.y,
        [peaks[0].frequency, peaks[1].frequency],
        corr_spectrum.bin_width,
    )
    refined = sorted((tones["f0"], tones["f1"]))
    if larmor is not None:
        refined.sort(key=lambda value: abs(value - larmor))
    f0, f1 = refined
    report["correlation"].update(
        {"fit": tones.to_document(), "f0_kHz": f0, "f1_kHz": f1}
    )

    report["n_sweep"] = {
        "bin_kHz": sweep_spectrum.bin_width,
        "peaks": [_peak_document(peak) for peak in sweep_peaks],
    }
    if not sweep_peaks:
        logger.warning("no oscillation in the N sweep: f_r undetermined")
        return HyperfineExtraction(None, UNDERDETERMINED, report)

    tone = refine_tones(
        scaled.x,
        scaled.y,
        [sweep_peaks[0].frequency],
        sweep_spectrum.bin_width,
    )
    measured = tone["f0"]
    step = float(scaled.x[1] - scaled.x[0])
    candidates = rabi_candidates(measured, step, tau)
    report["n_sweep"].update(
        {
            "fit": tone.to_document(),
            "measured_kHz": measured,
            "candidates_kHz": list(candidates),
        }
    )

    rejected = []
    accepted = []
    for f_r in candidates:
        try:
            coupling = invert_hyperfine(f0, f1, f_r, tau)
        except DomainError as error:
            rejected.append(
                {"f_r_kHz": f_r, "reason": str(error),
                 "radicand": getattr(error, "radicand", None)}
            )
            continue
        accepted.append((f_r, coupling))
    report["rejected"] = rejected
    if not accepted:
        logger.warning("no Rabi frequency candidate inverts consistently")
        return HyperfineExtraction(None, INCONSISTENT, report)

    f_r, coupling = accepted[0]
    if len(accepted) > 1:
        scores = [
            _n_sweep_residual(candidate, f0, f1, tau, n_sweep_trace)
            for _, candidate in accepted
        ]
        report["n_sweep"]["alternatives"] = [
            {
                "f_r_kHz": value,
                "a_parallel_kHz": candidate.a_parallel,
                "a_perpendicular_kHz": candidate.a_perpendicular,
                "residual": score,
            }
            for (value, candidate), score in zip(accepted, scores)
        ]
        if all(math.isfinite(score) for score in scores):
            f_r, coupling = accepted[int(np.argmin(scores))]
    report["n_sweep"]["f_r_kHz"] = f_r
    logger.info(
        "hyperfine pipeline: a_par = %.2f kHz, a_perp = %.2f kHz",
        coupling.a_parallel,
        coupling.a_perpendicular,
    )
    return HyperfineExtraction(coupling, OK, report)


def _initial_depth(contrast, n_tau_s, density, bounds) -> float:
    c_min = min(max(float(np.nanmin(contrast)), 1e-6), 1.0)
    if c_min >= 1.0 - 1e-9:
        return bounds[1]
    field_t = math.sqrt(-math.log(c_min) / 8.0) / (
        CONSTANTS.gamma_e * 1e9 * n_tau_s
    )
    # B_rms scales as d^-3/2
    reference = 10.0
    return reference * (
        b_rms(density, reference) * 1e-9 / field_t
    ) ** (2.0 / 3.0)


def extract_depth_pipeline(
    trace: MeasurementTrace,
    density: float,
    n_pulses: int,
    larmor: Optional[float] = None,
    free_larmor: bool = False,
    depth_bounds: Tuple[float, float] = (0.5, 100.0),
    initial_depth: Optional[float] = None,
) -> FitResult:
    """NV depth from a normalized proton NMR trace.

    The contrast 2·P0 − 1 of the normalized trace is fitted with the
    proton filter model, the RMS field tied to the depth through the layer
    density; the depth is the single free parameter unless `free_larmor`.

    Args:
        trace (MeasurementTrace): Normalized trace on the τ or (2τ)^-1
            axis.
        density (float): Proton density, m^-3.
        n_pulses (int): π count of the decoupling train.
        larmor (Optional[float]): Proton Larmor frequency, kHz; the dip
            position by default.
        free_larmor (bool): Fit the Larmor frequency too.
        depth_bounds (tuple): Search interval of the depth, nm.
        initial_depth (Optional[float]): Start value, nm; estimated from
            the dip depth by default.

    Returns:
        FitResult: `depth` (nm) and `larmor` (kHz). A depth at the upper
            bound, as for a trace without proton signal, is not converged.
    """

    clean = _finite(trace)
    taus = _taus(clean)
    contrast = 2.0 * clean.y - 1.0
    lower, upper = depth_bounds
    if not 0 < lower < upper:
        raise DomainError("depth bounds must satisfy 0 < lower < upper")

    if larmor is None:
        larmor = float(1000.0 / (2.0 * taus[int(np.argmin(contrast))]))
    index = int(np.argmin(np.abs(1000.0 / (2.0 * taus) - larmor)))
    n_tau_s = n_pulses * taus[index] * 1e-6
    if initial_depth is None:
        initial_depth = _initial_depth(
            contrast, n_tau_s, density, depth_bounds
        )
    initial_depth = min(max(initial_depth, lower * 1.001), upper * 0.999)

    def model(tau, depth, larmor):
        return proton_contrast(b_rms(density, depth), n_pulses, tau, larmor)

    provenance = {
        "density_m3": density,
        "n_pulses": n_pulses,
        "initial_depth_nm": initial_depth,
        "c_min": float(np.min(contrast)),
    }
    result = fit_model(
        model,
        taus,
        contrast,
        {"depth": initial_depth, "larmor": larmor},
        bounds={"depth": depth_bounds},
        fixed=() if free_larmor else ("larmor",),
        provenance=provenance,
    )
    depth = result["depth"]
    provenance = dict(result.provenance)
    if math.isfinite(depth):
        provenance["b_rms_nT"] = b_rms(density, depth)
    result = replace(result, provenance=provenance)
    if math.isfinite(depth) and depth >= upper * (1.0 - DEPTH_PIN_FRACTION):
        logger.warning("depth ran to the upper bound: no proton signal")
        result = replace(
            result,
            converged=False,
            message="depth at the upper bound {} nm".format(upper),
        )
    logger.info("depth pipeline: d = %.3f nm", depth)
    return result


def _g2_initial(delays, values) -> Dict[str, float]:
    order = np.argsort(np.abs(delays))
    nearest = np.abs(delays[order[0]])
    zero = float(np.mean(values[np.abs(delays) <= nearest + 1e-12]))
    zeta = min(max(1.0 - zero, 0.01), 1.0)
    peak = float(np.max(values))
    eta = 1.0 + 2.0 * max(0.0, peak - 1.0) / zeta + 0.05

    target = zero + (1.0 - math.exp(-1.0)) * (peak - zero)
    above = np.abs(delays[values >= target])
    rise = float(np.min(above) if len(above) else np.max(np.abs(delays)))
    gamma1 = 1.0 / max(rise, 1e-3)
    return {"zeta": zeta, "eta": eta, "gamma1": gamma1, "gamma2": gamma1 / 8}


def fit_g2(
    trace: MeasurementTrace, initial: Optional[Dict[str, float]] = None
) -> FitResult:
    """Fit the three-level g² model to a normalized coincidence trace on
    the delay axis (ns). The trace may be one-sided or symmetric.

    The provenance carries g²(0) = 1 − ζ and its uncertainty.
    """

    if trace.axis != "delay":
        raise DomainError("a g2 trace needs a delay axis")
    clean = _finite(trace)
    start = dict(_g2_initial(clean.x, clean.y))
    start.update(initial or {})
    result = fit_model(
        g2_model,
        clean.x,
        clean.y,
        start,
        bounds={
            "zeta": (0.0, 2.0),
            "eta": (0.0, 50.0),
            "gamma1": (0.0, 10.0),
            "gamma2": (0.0, 10.0),
        },
        provenance={"initial": start},
    )
    provenance = dict(result.provenance)
    provenance["g2_zero"] = 1.0 - result["zeta"]
    provenance["g2_zero_uncertainty"] = result.uncertainties["zeta"]
    return replace(result, provenance=provenance)


def _ramsey_envelope_time(taus, values) -> float:
    deviation = np.abs(values - np.mean(values[-max(len(values) // 10, 1):]))
    envelope = np.maximum.accumulate(deviation[::-1])[::-1]
    below = taus[envelope < envelope[0] * math.exp(-1.0)]
    return float(below[0]) if len(below) else float(taus[-1])


def fit_ramsey_trace(trace: MeasurementTrace) -> FitResult:
    """Fit a Ramsey fringe on the τ axis.

    The fringe frequency is seeded from the strongest spectrum peak and
    T2* from the 1/e point of the oscillation envelope; α0, α1 and α3 come
    from a linear solve. Fits are started at 0.9, 1 and 1.1 times the
    fringe frequency with p = 1 and 2, and the smallest residual wins.
    α1 is reported nonnegative with α3 in (−π, π].
    """

    if trace.axis != "tau":
        raise DomainError("a Ramsey trace needs a tau axis")
    clean = _finite(trace)
    taus, samples = clean.x, clean.y
    peaks = spectrum(clean, HANN).peaks
    fringe = peaks[0].frequency / 1000.0 if peaks else 0.0
    t2_star = max(_ramsey_envelope_time(taus, samples), 1e-3)

    best = None
    for scale in (0.9, 1.0, 1.1):
        for exponent in (1.0, 2.0):
            frequency = fringe * scale
            envelope = np.exp(-((taus / t2_star) ** exponent))
            phase = 2 * np.pi * frequency * taus
            design = np.column_stack(
                [envelope, envelope * np.cos(phase),
                 -envelope * np.sin(phase)]
            )
            a0, a, b = np.linalg.lstsq(design, 0.5 - samples, rcond=None)[0]
            start = {
                "t2_star": t2_star,
                "exponent": exponent,
                "a0": float(a0),
                "a1": float(math.hypot(a, b)),
                "a2": frequency,
                "a3": float(math.atan2(b, a)),
            }
            result = fit_model(
                ramsey_model,
                taus,
                samples,
                start,
                bounds={"t2_star": (1e-6, np.inf), "exponent": (0.1, 5.0)},
                provenance={"initial": start},
            )
            if best is None or (
                (result.converged, -result.residual_norm)
                > (best.converged, -best.residual_norm)
            ):
                best = result

    values = dict(best.values)
    if values["a1"] < 0:
        values["a1"] = -values["a1"]
        values["a3"] += math.pi
    values["a3"] = math.pi - (math.pi - values["a3"]) % (2 * math.pi)
    logger.info(
        "Ramsey fit: T2* = %.4g us, p = %.3g", values["t2_star"],
        values["exponent"],
    )
    return replace(best, values=values)


def fit_echo_trace(trace: MeasurementTrace) -> FitResult:
    """Fit the Hahn echo decay on the τ axis, T2 seeded from the first
    point where the coherence 2·P0 − 1 falls below 1/e."""

    if trace.axis != "tau":
        raise DomainError("an echo trace needs a tau axis")
    clean = _finite(trace)
    coherence = 2.0 * clean.y - 1.0
    below = clean.x[coherence < math.exp(-1.0)]
    t2 = 2.0 * float(below[0] if len(below) else clean.x[-1])
    return fit_model(
        echo_model,
        clean.x,
        clean.y,
        {"t2": t2, "exponent": 1.0},
        bounds={"t2": (1e-9, np.inf), "exponent": (0.1, 5.0)},
        provenance={"initial_t2_us": t2},
    )


def _fit_decoherence_time(
    register: SpinRegister,
    taus,
    values,
    n_pulses: int,
    exponent: float,
    initial_t2: float,
) -> FitResult:
    def model(tau, t2):
        return spectrum_values(register, tau, n_pulses, t2, exponent)

    return fit_model(
        model,
        taus,
        values,
        {"t2": initial_t2},
        bounds={"t2": (1e-6, np.inf)},
        provenance={"register_hash": register_hash(register)},
    )


def _default_t2(taus, n_pulses: int) -> float:
    return 10.0 * n_pulses * float(np.median(taus))


@dataclass(frozen=True)
class RabiSearch:
    """Residual table of a grid search over an unknown Rabi frequency.

    Each row holds the candidate f_r (kHz), the inverted coupling, the
    fitted T2 (µs) and the residual norm; candidates that do not invert
    consistently carry a `reason` instead.
    """

    rows: Tuple[Dict[str, Any], ...]
    best: Optional[Dict[str, Any]]

    def to_document(self) -> Dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "pipeline": "rabi-search",
            "rows": list(self.rows),
            "best": self.best,
        }


def search_rabi_frequency(
    trace: MeasurementTrace,
    register: SpinRegister,
    index: int,
    f0: float,
    f1: float,
    tau: float,
    candidates: Sequence[float],
    n_pulses: Optional[int] = None,
    exponent: float = 1.0,
    initial_t2: Optional[float] = None,
) -> RabiSearch:
    """Score candidate Rabi frequencies of one nucleus against a measured
    spectrum.

    Each candidate f_r is inverted with the measured (f0, f1) at the
    spacing `tau`; the nucleus at `index` of the register is given the
    resulting coupling, T2 is fitted to the closed-form spectrum and the
    residual norm recorded.

    Args:
        trace (MeasurementTrace): Spectrum on the τ or (2τ)^-1 axis.
        register (SpinRegister): Register holding the other nuclei.
        index (int): Position of the nucleus under search.
        f0 (float): Measured f0, kHz.
        f1 (float): Measured f1, kHz.
        tau (float): Spacing at which f_r refers, µs.
        candidates: The f_r grid, kHz.
        n_pulses (Optional[int]): π count; from the trace by default.
        exponent (float): Stretch exponent of the decay, held fixed.
        initial_t2 (Optional[float]): Start value of T2, µs.

    Returns:
        RabiSearch: The residual table and its best row.
    """

    if not 0 <= index < len(register.nuclei):
        raise DomainError("no nucleus at index {}".format(index))
    clean = _finite(trace)
    taus = _taus(clean)
    n_pulses = _pulse_count(trace, n_pulses)
    initial_t2 = initial_t2 or _default_t2(taus, n_pulses)

    rows: List[Dict[str, Any]] = []
    for f_r in candidates:
        try:
            coupling = invert_hyperfine(f0, f1, f_r, tau)
        except DomainError as error:
            rows.append({"f_r_kHz": float(f_r), "reason": str(error)})
            continue
        nuclei = list(register.nuclei)
        nucleus = nuclei[index]
        nuclei[index] = NuclearSpin(nucleus.species, coupling, nucleus.gamma)
        candidate = replace(register, nuclei=tuple(nuclei))
        result = _fit_decoherence_time(
            candidate, taus, clean.y, n_pulses, exponent, initial_t2
        )
        rows.append(
            {
                "f_r_kHz": float(f_r),
                "a_parallel_kHz": coupling.a_parallel,
                "a_perpendicular_kHz": coupling.a_perpendicular,
                "t2_us": result["t2"],
                "residual_norm": result.residual_norm,
                "converged": result.converged,
            }
        )

    scored = [row for row in rows if "residual_norm" in row
              and math.isfinite(row["residual_norm"])]
    best = min(scored, key=lambda row: row["residual_norm"], default=None)
    logger.info(
        "Rabi search: %d candidates, %d consistent", len(rows), len(scored)
    )
    return RabiSearch(tuple(rows), best)


def compare_hypotheses(
    trace: MeasurementTrace,
    register_a: SpinRegister,
    register_b: SpinRegister,
    n_pulses: Optional[int] = None,
    exponent: float = 1.0,
    initial_t2: Optional[float] = None,
    labels: Tuple[str, str] = ("a", "b"),
) -> Dict[str, Any]:
    """Fit T2 of two register hypotheses to the same spectrum and report
    both residual norms side by side. No verdict is drawn."""

    clean = _finite(trace)
    taus = _taus(clean)
    n_pulses = _pulse_count(trace, n_pulses)
    initial_t2 = initial_t2 or _default_t2(taus, n_pulses)

    hypotheses = []
    for label, register in zip(labels, (register_a, register_b)):
        result = _fit_decoherence_time(
            register, taus, clean.y, n_pulses, exponent, initial_t2
        )
        hypotheses.append(
            {
                "label": label,
                "register_hash": register_hash(register),
                "nuclei": len(register.nuclei),
                "t2_us": result["t2"],
                "residual_norm": result.residual_norm,
                "converged": result.converged,
            }
        )
    return {
        "schema": REPORT_SCHEMA,
        "pipeline": "hypotheses",
        "n_pulses": n_pulses,
        "hypotheses": hypotheses,
    }
