"""Command-line front end.

Every subcommand reads plain files, delegates to the library and writes one
artifact (CSV or JSON) stamped with the tool version, the subcommand, the
effective configuration and the seed. Exit status: 0 on success, including
fits that did not converge; 2 on usage and domain errors; 1 otherwise.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from nv_magnetometry import __version__
from nv_magnetometry.analytic.multipulse import spectrum_values
from nv_magnetometry.analytic.proton import OIL_PROTON_DENSITY
from nv_magnetometry.estimation.normalization import fit_envelope
from nv_magnetometry.estimation.pipelines import (
    REPORT_SCHEMA,
    compare_hypotheses,
    extract_depth_pipeline,
    extract_hyperfine_pipeline,
    fit_echo_trace,
    fit_g2,
    fit_ramsey_trace,
    search_rabi_frequency,
)
from nv_magnetometry.estimation.spectrum import (
    HANN,
    NO_WINDOW,
    WINDOWS,
    spectrum,
)
from nv_magnetometry.geometry.magnet import (
    MAGNET_1,
    MAGNET_2,
    CylindricalMagnet,
    StageGeometry,
    attainable_range,
    calibrate_remanence,
    field_table,
    minimum_distance,
)
from nv_magnetometry.physics.spins import (
    LITERATURE_COUPLINGS,
    SpinRegister,
    literature_register,
    load_register,
    register_hash,
)
from nv_magnetometry.sequences.plan import (
    DECOUPLING_KINDS,
    CPMG,
    HAHN,
    KINDS,
    RAMSEY,
    PulseDurations,
    SequencePlan,
    build_sequence,
    load_plan,
)
from nv_magnetometry.sequences.rendering import (
    MAX_SEQUENCE_DURATION,
    sequence_to_waveform,
)
from nv_magnetometry.sequences.timing import (
    LASER_INIT,
    LASER_READOUT,
    expand_timing,
    format_timing_table,
)
from nv_magnetometry.simulator.decoherence import (
    ECHO,
    ENVELOPE_KINDS,
    MULTIPULSE,
    DecoherenceEnvelope,
    apply_envelope,
)
from nv_magnetometry.simulator.readout import ReadoutModel, sample_photons
from nv_magnetometry.simulator.register_evolution import (
    SWEEP_FIELDS,
    simulate_sweep,
)
from nv_magnetometry.utilities.documents import canonical_json, load_document
from nv_magnetometry.utilities.errors import (
    ArtifactIOError,
    CapacityError,
    DomainError,
)
from nv_magnetometry.utilities.traces import (
    MeasurementTrace,
    format_trace,
    read_trace,
)
from nv_magnetometry.waveform.envelopes import SHAPES, EnvelopeSpec
from nv_magnetometry.waveform.iq import synthesize_iq
from nv_magnetometry.waveform.waveform_io import FORMATS, export_waveform

logger = logging.getLogger(__name__)

PROG = "nv-magnetometry"
RUN_CONFIG_SCHEMA = "nv-magnetometry/run-config@1"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
ORACLE_TOLERANCE = 1e-6

MAGNETS = {"1": MAGNET_1, "2": MAGNET_2}
FIT_MODELS = ("ramsey", "echo", "g2", "envelope")
PIPELINES = ("hyperfine", "depth", "rabi-search", "hypotheses")

# namespace entries that steer the process and stay out of artifacts
_PROCESS_OPTIONS = ("command", "handler", "config", "log_level", "verbose")


def _required(args: argparse.Namespace, name: str, flag: bool = True):
    value = getattr(args, name)
    if value is None:
        label = name.replace("_", "-")
        raise DomainError(
            "{}{} is required".format("--" if flag else "", label)
        )
    return value


def _grid(spec: Sequence[float]) -> np.ndarray:
    """The grid START, START + STEP, ... up to STOP included."""

    if len(spec) != 3:
        raise DomainError("a grid is given as START STOP STEP")
    start, stop, step = (float(value) for value in spec)
    if not step > 0 or stop < start:
        raise DomainError("a grid needs START <= STOP and STEP > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _sweep_values(args: argparse.Namespace) -> np.ndarray:
    if args.values is not None:
        return np.array([float(value) for value in args.values])
    return _grid(_required(args, "grid"))


def _effective_config(args: argparse.Namespace) -> Dict[str, Any]:
    config = {}
    for key, value in sorted(vars(args).items()):
        if key in _PROCESS_OPTIONS:
            continue
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, (list, tuple)):
            value = [str(v) if isinstance(v, Path) else v for v in value]
        config[key] = value
    return config


def _run_record(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "tool": PROG,
        "version": __version__,
        "subcommand": args.command,
        "config": _effective_config(args),
        "seed": getattr(args, "seed", None),
    }


def _emit(text: str, output: Optional[Path]):
    if output is None:
        sys.stdout.write(text)
        return
    try:
        Path(output).write_text(text, encoding="utf-8")
    except OSError as error:
        raise ArtifactIOError(str(error), output) from error
    logger.info("wrote %s", output)


def _emit_document(document: Dict[str, Any], args: argparse.Namespace):
    document = dict(document, run=_run_record(args))
    _emit(canonical_json(document) + "\n", args.output)


def _format_table(
    header: Dict[str, Any], columns: Sequence[str], rows: Iterable[tuple]
) -> str:
    stream = io.StringIO()
    for key, value in header.items():
        stream.write(
            "# {}: {}\n".format(key, json.dumps(value, sort_keys=True))
        )
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(
            [
                repr(float(value))
                if isinstance(value, (float, np.floating))
                else value
                for value in row
            ]
        )
    return stream.getvalue()


def _read_samples(path) -> List[Tuple[float, float]]:
    """(distance, field) pairs of a CSV file; '#' lines and a leading
    column header are skipped."""

    path = Path(path)
    samples = []
    try:
        with open(path, newline="", encoding="utf-8") as stream:
            lines = [line for line in stream if not line.startswith("#")]
    except OSError as error:
        raise ArtifactIOError(str(error), path) from error
    except UnicodeDecodeError as error:
        raise ArtifactIOError(str(error), path) from error
    for record in csv.reader(lines):
        if not record:
            continue
        try:
            samples.append((float(record[0]), float(record[1])))
        except (ValueError, IndexError):
            if samples:
                raise ArtifactIOError("malformed row {}".format(record), path)
    return samples


def _register(args: argparse.Namespace) -> SpinRegister:
    if args.register is not None:
        return load_register(args.register)
    if args.literature is not None:
        unknown = set(args.literature) - set(LITERATURE_COUPLINGS)
        if unknown:
            raise DomainError(
                "unknown literature nuclei {}".format(sorted(unknown))
            )
        return literature_register(tuple(args.literature), args.b0)
    raise DomainError("a register is required: --register or --literature")


def _plan(args: argparse.Namespace) -> SequencePlan:
    if args.plan is not None:
        return load_plan(args.plan)
    if args.kind is None or args.tau is None:
        raise DomainError("a plan is required: --plan or --kind with --tau")
    if args.durations == "calibrated":
        durations = PulseDurations.calibrated()
    else:
        durations = PulseDurations.ideal()
    return SequencePlan(
        args.kind,
        args.tau,
        n_pulses=args.n_pulses,
        block_kind=args.block_kind,
        t_corr=args.t_corr,
        inner_pulses=args.inner_pulses,
        inner_tau=args.inner_tau,
        readout=args.readout,
        phase_cycling=not args.no_phase_cycling,
        durations=durations,
    )


def _envelope_kind(plan: SequencePlan) -> str:
    if plan.kind == RAMSEY:
        return RAMSEY
    if plan.kind == HAHN:
        return ECHO
    return MULTIPULSE


def _pulse_count(args: argparse.Namespace, trace: MeasurementTrace) -> int:
    if args.n_pulses is not None:
        return int(args.n_pulses)
    plan = trace.metadata.get("plan")
    if isinstance(plan, dict) and plan.get("n_pulses") is not None:
        return int(plan["n_pulses"])
    if trace.metadata.get("n_pulses") is not None:
        return int(trace.metadata["n_pulses"])
    raise DomainError("--n-pulses is required for this trace")


def cmd_magnet(args: argparse.Namespace) -> int:
    if args.calibrate is not None:
        if args.magnet is not None:
            radius = MAGNETS[str(args.magnet)].radius
            height = MAGNETS[str(args.magnet)].height
        elif args.radius is not None and args.height is not None:
            radius, height = args.radius, args.height
        else:
            raise DomainError(
                "calibration needs --magnet or --radius with --height"
            )
        result = calibrate_remanence(
            _read_samples(args.calibrate), radius, height
        )
        _emit_document(result.to_document(), args)
        return 0

    if args.magnet is not None:
        magnet = MAGNETS[str(args.magnet)]
    elif None not in (args.remanence, args.radius, args.height):
        magnet = CylindricalMagnet(args.remanence, args.radius, args.height)
    else:
        raise DomainError(
            "a magnet is required: --magnet or --remanence, --radius and "
            "--height"
        )
    stage = StageGeometry(args.plate_thickness, args.travel, args.tilt)
    d_min = minimum_distance(stage, magnet)
    if args.distances is not None:
        distances = _grid(args.distances)
    else:
        distances = _grid((math.ceil(d_min), d_min + stage.travel, 1.0))
    low, high = attainable_range(stage, magnet)

    header = {
        "magnet": {
            "remanence_mT": magnet.remanence,
            "radius_mm": magnet.radius,
            "height_mm": magnet.height,
        },
        "d_min_mm": d_min,
        "attainable_mT": [low, high],
        "run": _run_record(args),
    }
    table = _format_table(
        header, ("d_mm", "B0_mT", "f_NV_MHz"), field_table(magnet, distances)
    )
    _emit(table, args.output)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.threads < 1:
        raise DomainError("--threads must be at least 1")
    register = _register(args)
    plan = _plan(args)
    trace = simulate_sweep(
        register,
        plan,
        args.axis,
        _sweep_values(args),
        threads=args.threads,
        detuning=args.detuning,
    )
    if args.t2 is not None:
        envelope = DecoherenceEnvelope(
            _envelope_kind(plan), args.t2, args.exponent
        )
        trace = apply_envelope(trace, envelope)
    if args.shots is not None:
        model = ReadoutModel(args.bright, args.dark, args.shots, args.seed)
        _, trace = sample_photons(trace, model)
    if args.inverse_axis:
        trace = trace.to_inverse_2tau()
    trace = trace.with_y(trace.y, run=_run_record(args))
    _emit(format_trace(trace), args.output)
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    trace = read_trace(_required(args, "trace"))
    result = spectrum(trace, args.window, args.prominence)
    if args.amplitudes is not None:
        _emit(
            format_trace(result.to_trace(run=_run_record(args))),
            args.amplitudes,
        )
    header = {
        "schema": REPORT_SCHEMA,
        "unit": result.unit,
        "window": result.window,
        "bin_width": result.bin_width,
        "run": _run_record(args),
    }
    rows = [
        (peak.frequency, peak.amplitude, peak.half_width, peak.method)
        for peak in result.peaks
    ]
    table = _format_table(
        header, ("frequency", "amplitude", "half_width", "method"), rows
    )
    _emit(table, args.output)
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    model = _required(args, "model", flag=False)
    trace = read_trace(_required(args, "trace"))
    if model == "ramsey":
        result = fit_ramsey_trace(trace)
    elif model == "echo":
        result = fit_echo_trace(trace)
    elif model == "g2":
        result = fit_g2(trace)
    elif model == "envelope":
        result = fit_envelope(
            trace, kind=args.kind, n_pulses=args.n_pulses, tau=args.tau
        )
    else:
        raise DomainError("unknown model '{}'".format(model))
    if not result.converged:
        logger.warning("%s fit did not converge: %s", model, result.message)
    _emit_document(result.to_document(), args)
    return 0


def _extract_hyperfine(args: argparse.Namespace) -> Dict[str, Any]:
    dip = read_trace(args.dip) if args.dip is not None else None
    result = extract_hyperfine_pipeline(
        dip,
        read_trace(_required(args, "correlation")),
        read_trace(_required(args, "n_sweep")),
        tau=args.tau,
        larmor=args.larmor,
        window=args.window,
        prominence=args.prominence,
    )
    return result.to_document()


def _extract_depth(args: argparse.Namespace) -> Dict[str, Any]:
    trace = read_trace(_required(args, "trace"))
    result = extract_depth_pipeline(
        trace,
        args.density,
        _pulse_count(args, trace),
        larmor=args.larmor,
        free_larmor=args.free_larmor,
        depth_bounds=tuple(float(value) for value in args.depth_bounds),
    )
    return result.to_document()


def _extract_rabi_search(args: argparse.Namespace) -> Dict[str, Any]:
    search = search_rabi_frequency(
        read_trace(_required(args, "trace")),
        _register(args),
        args.index,
        _required(args, "f0"),
        _required(args, "f1"),
        _required(args, "tau"),
        _grid(_required(args, "candidates")),
        n_pulses=args.n_pulses,
        exponent=args.exponent,
    )
    return search.to_document()


def _extract_hypotheses(args: argparse.Namespace) -> Dict[str, Any]:
    return compare_hypotheses(
        read_trace(_required(args, "trace")),
        _register(args),
        load_register(_required(args, "register_b")),
        n_pulses=args.n_pulses,
        exponent=args.exponent,
    )


EXTRACTORS = {
    "hyperfine": _extract_hyperfine,
    "depth": _extract_depth,
    "rabi-search": _extract_rabi_search,
    "hypotheses": _extract_hypotheses,
}


def cmd_extract(args: argparse.Namespace) -> int:
    pipeline = _required(args, "pipeline", flag=False)
    if pipeline not in EXTRACTORS:
        raise DomainError("unknown pipeline '{}'".format(pipeline))
    _emit_document(EXTRACTORS[pipeline](args), args)
    return 0


def cmd_waveform(args: argparse.Namespace) -> int:
    output = _required(args, "output")
    if args.pulse is not None:
        spec = EnvelopeSpec(
            args.pulse, _required(args, "duration"), args.wurst_exponent,
            args.span,
        )
        iq = synthesize_iq(
            spec, args.if_frequency, args.if_phase, args.sample_rate
        )
    else:
        timed = expand_timing(
            build_sequence(_plan(args)),
            laser_init=args.laser_init,
            laser_readout=args.laser_readout,
        )
        if args.timing:
            sys.stdout.write(format_timing_table(timed) + "\n")
        iq = sequence_to_waveform(
            timed,
            args.if_frequency,
            args.if_phase,
            args.sample_rate,
            args.max_duration,
        )
    export_waveform(iq, output, args.format, {"run": _run_record(args)})
    return 0


def cmd_oracle_compare(args: argparse.Namespace) -> int:
    if args.threads < 1:
        raise DomainError("--threads must be at least 1")
    register = _register(args)
    taus = _grid(_required(args, "grid"))
    plan = SequencePlan(
        args.kind, float(taus[0]), n_pulses=args.n_pulses,
        durations=PulseDurations.ideal(),
    )
    oracle = simulate_sweep(
        register, plan, "tau", taus, threads=args.threads
    ).y

    forms = []
    for name, literal in (("corrected", False), ("literal", True)):
        analytic = spectrum_values(register, taus, args.n_pulses,
                                   literal=literal)
        deviation = np.abs(analytic - oracle)
        worst = int(np.argmax(deviation))
        verdict = "pass" if deviation[worst] <= args.tolerance else "fail"
        logger.info(
            "%s form: max deviation %.3g at tau = %s us (%s)",
            name, deviation[worst], taus[worst], verdict,
        )
        forms.append(
            {
                "form": name,
                "max_deviation": float(deviation[worst]),
                "at_tau_us": float(taus[worst]),
                "verdict": verdict,
            }
        )

    document = {
        "schema": REPORT_SCHEMA,
        "pipeline": "oracle-compare",
        "register_hash": register_hash(register),
        "sequence": plan.label,
        "points": len(taus),
        "tolerance": args.tolerance,
        "forms": forms,
    }
    _emit_document(document, args)
    return 0


def _add_register_options(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("register")
    group.add_argument("--register", type=Path,
                       help="register document (JSON)")
    group.add_argument("--literature", nargs="*", metavar="NAME",
                       help="published nuclei, e.g. A D E")
    group.add_argument("--b0", type=float, default=4.7,
                       help="bias field of --literature, mT")


def _add_plan_options(parser: argparse.ArgumentParser, durations: str):
    group = parser.add_argument_group("sequence")
    group.add_argument("--plan", type=Path, help="plan document (JSON)")
    group.add_argument("--kind", choices=KINDS)
    group.add_argument("--tau", type=float, help="π spacing, µs")
    group.add_argument("--n-pulses", type=int, default=1)
    group.add_argument("--block-kind", choices=DECOUPLING_KINDS)
    group.add_argument("--t-corr", type=float, default=0.0,
                       help="correlation delay, µs")
    group.add_argument("--inner-pulses", type=int, default=0)
    group.add_argument("--inner-tau", type=float)
    group.add_argument("--readout", choices=("+x", "-x"), default="+x")
    group.add_argument("--no-phase-cycling", action="store_true")
    group.add_argument("--durations", choices=("ideal", "calibrated"),
                       default=durations)


def _build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, Any]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path,
                        help="run-config document; flags override it")
    common.add_argument("--log-level", choices=LOG_LEVELS,
                        default="WARNING")
    common.add_argument("-v", "--verbose", action="store_true",
                        help="shorthand for --log-level INFO")
    common.add_argument("-o", "--output", type=Path,
                        help="artifact path, standard output by default")

    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Simulate, synthesize and analyse NV magnetometry "
        "experiments.",
    )
    parser.add_argument("--version", action="version",
                        version="%(prog)s " + __version__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    commands = {}

    magnet = subparsers.add_parser(
        "magnet", parents=[common], help="bias field table of a magnet"
    )
    magnet.add_argument("--magnet", choices=sorted(MAGNETS))
    magnet.add_argument("--remanence", type=float, help="mT")
    magnet.add_argument("--radius", type=float, help="mm")
    magnet.add_argument("--height", type=float, help="mm")
    magnet.add_argument("--plate-thickness", type=float, default=5.0)
    magnet.add_argument("--travel", type=float, default=25.0)
    magnet.add_argument("--tilt", type=float, default=35.0)
    magnet.add_argument("--distances", type=float, nargs=3,
                        metavar=("START", "STOP", "STEP"))
    magnet.add_argument("--calibrate", type=Path,
                        help="CSV of (distance mm, field mT) samples")
    magnet.set_defaults(handler=cmd_magnet)
    commands["magnet"] = magnet

    simulate = subparsers.add_parser(
        "simulate", parents=[common], help="simulated sweep as a trace CSV"
    )
    _add_register_options(simulate)
    _add_plan_options(simulate, "ideal")
    simulate.add_argument("--axis", choices=sorted(SWEEP_FIELDS),
                          default="tau")
    simulate.add_argument("--grid", type=float, nargs=3,
                          metavar=("START", "STOP", "STEP"))
    simulate.add_argument("--values", type=float, nargs="+")
    simulate.add_argument("--detuning", type=float, default=0.0,
                          help="MHz")
    simulate.add_argument("--threads", type=int, default=1)
    simulate.add_argument("--t2", type=float,
                          help="decay time constant, µs")
    simulate.add_argument("--exponent", type=float, default=1.0)
    simulate.add_argument("--shots", type=int,
                          help="photon readout shots per point")
    simulate.add_argument("--bright", type=float, default=0.3)
    simulate.add_argument("--dark", type=float, default=0.21)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--inverse-axis", action="store_true",
                          help="report a tau sweep against (2 tau)^-1")
    simulate.set_defaults(handler=cmd_simulate)
    commands["simulate"] = simulate

    spectrum_parser = subparsers.add_parser(
        "spectrum", parents=[common], help="peak list of a trace"
    )
    spectrum_parser.add_argument("--trace", type=Path)
    spectrum_parser.add_argument("--window", choices=WINDOWS,
                                 default=NO_WINDOW)
    spectrum_parser.add_argument("--prominence", type=float, default=0.1)
    spectrum_parser.add_argument("--amplitudes", type=Path,
                                 help="also write the amplitude spectrum")
    spectrum_parser.set_defaults(handler=cmd_spectrum)
    commands["spectrum"] = spectrum_parser

    fit_parser = subparsers.add_parser(
        "fit", parents=[common], help="fit a decay or g2 model"
    )
    fit_parser.add_argument("model", nargs="?", choices=FIT_MODELS)
    fit_parser.add_argument("--trace", type=Path)
    fit_parser.add_argument("--kind", choices=ENVELOPE_KINDS,
                            default=MULTIPULSE)
    fit_parser.add_argument("--n-pulses", type=int)
    fit_parser.add_argument("--tau", type=float)
    fit_parser.set_defaults(handler=cmd_fit)
    commands["fit"] = fit_parser

    extract = subparsers.add_parser(
        "extract", parents=[common], help="run an analysis pipeline"
    )
    extract.add_argument("pipeline", nargs="?", choices=PIPELINES)
    extract.add_argument("--trace", type=Path)
    extract.add_argument("--dip", type=Path)
    extract.add_argument("--correlation", type=Path)
    extract.add_argument("--n-sweep", type=Path)
    extract.add_argument("--tau", type=float, help="µs")
    extract.add_argument("--larmor", type=float, help="kHz")
    extract.add_argument("--window", choices=WINDOWS, default=HANN)
    extract.add_argument("--prominence", type=float, default=0.1)
    extract.add_argument("--density", type=float,
                         default=OIL_PROTON_DENSITY, help="m^-3")
    extract.add_argument("--n-pulses", type=int)
    extract.add_argument("--free-larmor", action="store_true")
    extract.add_argument("--depth-bounds", type=float, nargs=2,
                         default=(0.5, 100.0), metavar=("LOW", "HIGH"))
    _add_register_options(extract)
    extract.add_argument("--register-b", type=Path,
                         help="competing register hypothesis")
    extract.add_argument("--index", type=int, default=0)
    extract.add_argument("--f0", type=float, help="kHz")
    extract.add_argument("--f1", type=float, help="kHz")
    extract.add_argument("--candidates", type=float, nargs=3,
                         metavar=("START", "STOP", "STEP"))
    extract.add_argument("--exponent", type=float, default=1.0)
    extract.set_defaults(handler=cmd_extract)
    commands["extract"] = extract

    waveform = subparsers.add_parser(
        "waveform", parents=[common], help="render an IQ waveform file"
    )
    waveform.add_argument("--pulse", choices=SHAPES,
                          help="render a single pulse of this shape")
    waveform.add_argument("--duration", type=float, help="ns")
    waveform.add_argument("--wurst-exponent", type=float, default=20.0)
    waveform.add_argument("--span", type=float, default=0.0, help="MHz")
    _add_plan_options(waveform, "calibrated")
    waveform.add_argument("--sample-rate", type=float, default=1.0,
                          help="GS/s")
    waveform.add_argument("--if-frequency", type=float, default=100.0,
                          help="MHz")
    waveform.add_argument("--if-phase", type=float, default=0.0,
                          help="degrees")
    waveform.add_argument("--laser-init", type=float, default=LASER_INIT)
    waveform.add_argument("--laser-readout", type=float,
                          default=LASER_READOUT)
    waveform.add_argument("--max-duration", type=float,
                          default=MAX_SEQUENCE_DURATION, help="ns")
    waveform.add_argument("--format", choices=FORMATS, default="csv")
    waveform.add_argument("--timing", action="store_true",
                          help="print the timing table")
    waveform.set_defaults(handler=cmd_waveform)
    commands["waveform"] = waveform

    oracle = subparsers.add_parser(
        "oracle-compare", parents=[common],
        help="closed-form spectra against the simulator",
    )
    _add_register_options(oracle)
    oracle.add_argument("--kind", choices=DECOUPLING_KINDS, default=CPMG)
    oracle.add_argument("--n-pulses", type=int, default=8)
    oracle.add_argument("--grid", type=float, nargs=3,
                        metavar=("START", "STOP", "STEP"),
                        help="π spacings, µs")
    oracle.add_argument("--tolerance", type=float,
                        default=ORACLE_TOLERANCE)
    oracle.add_argument("--threads", type=int, default=1)
    oracle.set_defaults(handler=cmd_oracle_compare)
    commands["oracle-compare"] = oracle

    return parser, commands


def _apply_config(parser, commands, argv, args) -> argparse.Namespace:
    """Re-parse `argv` with the options of the run-config file as
    defaults, so that flags on the command line win."""

    if args.config is None:
        return args
    document = load_document(args.config, RUN_CONFIG_SCHEMA)
    subcommand = document.get("subcommand")
    if subcommand is not None and subcommand != args.command:
        raise DomainError(
            "{} holds a '{}' configuration, not '{}'".format(
                args.config, subcommand, args.command
            )
        )
    options = document.get("options", {})
    known = set(vars(args)) - {"command", "handler", "config"}
    unknown = set(options) - known
    if unknown:
        raise DomainError(
            "unknown options in {}: {}".format(args.config, sorted(unknown))
        )
    commands[args.command].set_defaults(**options)
    return parser.parse_args(argv)


def _configure_logging(args: argparse.Namespace):
    level = "INFO" if args.verbose else args.log_level
    logging.basicConfig(
        level=getattr(logging, level),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(parser, commands, argv, args)
        _configure_logging(args)
        return args.handler(args)
    except (DomainError, CapacityError, ArtifactIOError) as error:
        sys.stderr.write("{} {}: error: {}\n".format(PROG, args.command,
                                                      error))
        return 2
    except Exception as error:
        logger.exception("internal error")
        sys.stderr.write("{} {}: internal error: {}\n".format(
            PROG, args.command, error))
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
