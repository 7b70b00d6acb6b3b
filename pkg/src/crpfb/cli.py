"""Command-line front end.

Every command resolves its configuration (JSON file, then flags, then the
seed from ``--seed`` or ``CRPFB_SEED``), writes a run manifest next to its
outputs, and only then computes and writes results. ``crpfb rerun
MANIFEST`` replays a manifest exactly; worker count and output directory
may differ without changing any byte of the results.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import os
import platform
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numba
import numpy as np
import scipy

from . import __version__, gev, harness, io
from .detector import detect
from .errors import EmptyPrior, PartitionError
from .harness import Scenario
from .signalgen import ComplexSeries, clean_signal

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
SEED_ENV = "CRPFB_SEED"
FIGURES = ("fig4b", "fig5", "fig6", "fig12", "fig13", "fig14")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: error: {message}")


def _number(text: str) -> float:
    """Float that also accepts fractions such as ``1/16``."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


# ---------------------------------------------------------- configuration

# flag dest -> (section, field) in the scenario document
OVERRIDES = {
    "kind": ("signal", "kind"),
    "b": ("signal", "b"),
    "T": ("model", "T"),
    "ts": ("model", "ts"),
    "dT": ("model", "dT"),
    "blocks": ("model", "blocks"),
    "M": ("bank", "m_filters"),
    "N": ("bank.crpf", "n_particles"),
    "q": ("bank.crpf", "q"),
    "shape": ("noise", "shape"),
    "baseline_particles": ("baseline", "n_particles"),
}
COMMON = {"config", "seed", "workers", *OVERRIDES}


def _add_common(p: argparse.ArgumentParser):
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="scenario JSON (model, bank, noise, signal, baseline sections)")
    g.add_argument("--seed", type=int, help=f"master seed (fallback: ${SEED_ENV}, then 0)")
    g.add_argument("--workers", type=int, help="worker processes (default: available CPUs)")
    g.add_argument("--kind", choices=("S1", "S2"))
    g.add_argument("--b", type=_number, help="S1 amplitude fluctuation / S2 frequency deviation")
    g.add_argument("--T", type=_number, help="observation time [s]")
    g.add_argument("--ts", type=_number, help="sampling interval [s]")
    g.add_argument("--dT", type=_number, help="subinterval length [s]")
    g.add_argument("--blocks", type=int, help="number of independent blocks")
    g.add_argument("--M", type=int, help="filters in the bank")
    g.add_argument("--N", type=int, help="particles per filter")
    g.add_argument("--q", type=int, help="resampling exponent")
    g.add_argument("--shape", type=_number, help="noise shape (1 = Gaussian)")
    g.add_argument("--baseline-particles", dest="baseline_particles", type=int)


def _scenario_doc(opts: argparse.Namespace) -> dict:
    doc = {}
    if opts.config:
        try:
            doc = io.read_json(opts.config)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {opts.config}: {exc}")
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    doc = {k: dict(v) if isinstance(v, dict) else v for k, v in doc.items()}
    doc.pop("seed", None)
    for dest, (section, key) in OVERRIDES.items():
        value = getattr(opts, dest, None)
        if value is None:
            continue
        if section == "bank.crpf":
            bank = doc.setdefault("bank", {})
            bank.setdefault("crpf", {})[key] = value
        else:
            doc.setdefault(section, {})[key] = value
    # keep the signal grid on the model grid unless the file says otherwise
    for key in ("T", "ts"):
        if getattr(opts, key, None) is not None:
            doc.setdefault("signal", {})[key] = getattr(opts, key)
    return doc


def _resolve_seed(opts: argparse.Namespace, doc_seed) -> int:
    if opts.seed is not None:
        return opts.seed
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"${SEED_ENV} is not an integer: {env!r}")
    return int(doc_seed) if doc_seed is not None else 0


def build_scenario(doc: dict) -> Scenario:
    try:
        return Scenario.from_dict(doc)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration: {exc}")


# ---------------------------------------------------------------- commands


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    add_args: Callable[[argparse.ArgumentParser], None]
    outputs: Callable[[argparse.Namespace], list[str]]
    run: Callable[[argparse.Namespace, Scenario, int, int], None]
    inputs: Callable[[argparse.Namespace], list[str]] = lambda o: []
    out_dir: bool = False


def _threshold_value(spec: str, key: str) -> float:
    """A number, or a calibration JSON from which ``key`` is read."""
    try:
        return float(Fraction(spec))
    except (ValueError, ZeroDivisionError):
        pass
    try:
        doc = io.read_json(spec)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read threshold {spec}: {exc}")
    if key not in doc:
        raise ConfigError(f"{spec} has no field {key!r}")
    return float(doc[key])


def _threshold_inputs(opts) -> list[str]:
    t = getattr(opts, "threshold", None)
    if t is None:
        return []
    try:
        float(Fraction(t))
        return []
    except (ValueError, ZeroDivisionError):
        return [t]


# gen-signal ---------------------------------------------------------------


def _gen_args(p):
    p.add_argument("--snr", type=_number, help="SNR [dB] (default: config signal.snr_db)")
    p.add_argument("--coefs", type=_number, nargs=4, metavar="A", help="S1 coefficients a1..a4")
    p.add_argument("--trial", type=int, default=0, help="trial index selecting the random streams")
    p.add_argument("--noise-free", dest="noise_free", action="store_true")
    p.add_argument("--out", required=True)


def _gen_run(opts, scn, seed, workers):
    snr = scn.signal.snr_db if opts.snr is None else opts.snr
    if opts.coefs is not None:
        scn = replace(scn, signal=replace(scn.signal, kind="S1", a=tuple(opts.coefs)))
    if opts.noise_free:
        spec = harness.trial_spec(scn, snr, seed, opts.trial)
        z = clean_signal(spec)
    else:
        _, z = harness.h1_record(scn, snr, seed, opts.trial)
    io.write_series(opts.out, ComplexSeries(0.0, scn.model.ts, z))


# detect -------------------------------------------------------------------


def _detect_args(p):
    p.add_argument("--in", dest="input", required=True, help="signal CSV (l,t,re,im)")
    p.add_argument("--threshold", required=True, help="number or calibration JSON")
    p.add_argument("--threshold-key", dest="threshold_key", default="v_t_gev",
                   choices=("v_t_gev", "v_t_empirical"))
    p.add_argument("--out", required=True)
    p.add_argument("--track-out", dest="track_out", help="also write the bank's selected track")


def _detect_run(opts, scn, seed, workers):
    vt = _threshold_value(opts.threshold, opts.threshold_key)
    try:
        series = io.read_series(opts.input)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read signal {opts.input}: {exc}")
    if series.samples.size != scn.model.n_samples or not math.isclose(series.dt, scn.model.ts, rel_tol=1e-9):
        raise ConfigError(
            f"{opts.input}: {series.samples.size} samples at dt={series.dt!r} do not match "
            f"the model grid ({scn.model.n_samples} samples at ts={scn.model.ts!r})"
        )
    decision, result = detect(series.samples, scn.model, replace(scn.bank, seed=seed), vt)
    io.write_json(opts.out, decision.to_json())
    if opts.track_out:
        io.write_json(opts.track_out, result.to_json())


# calibrate ----------------------------------------------------------------


def _cal_args(p):
    p.add_argument("--pfa", type=_number, default=1e-2)
    p.add_argument("--mc", type=int, default=10_000, help="noise-only records")
    p.add_argument("--nfit", type=int, default=1500, help="records used for the GEV fit")
    p.add_argument("--out", required=True)
    p.add_argument("--metrics-out", dest="metrics_out", help="also write every H0 metric as CSV")


def _cal_run(opts, scn, seed, workers):
    cal = harness.calibrate(scn, opts.pfa, opts.mc, opts.nfit, seed, workers)
    io.write_json(opts.out, cal.to_json())
    if opts.metrics_out:
        io.write_table(opts.metrics_out, ("index", "psi"), enumerate(cal.metrics))


# sweeps -------------------------------------------------------------------

SWEEP_TAIL = ("pd", "ci", "rmse_hz", "runtime_s", "vt")


def _write_sweep(path, first: str, rows):
    io.write_table(path, (first,) + SWEEP_TAIL, (r.as_tuple() for r in rows))


def _pd_args(p):
    p.add_argument("--snr", type=_number, nargs="+", default=[-14.0, -11.0, -8.0])
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("--threshold", help="number or calibration JSON (default: calibrate here)")
    p.add_argument("--threshold-key", dest="threshold_key", default="v_t_empirical",
                   choices=("v_t_gev", "v_t_empirical"))
    p.add_argument("--pfa", type=_number, default=1e-2, help="used when calibrating here")
    p.add_argument("--mc", type=int, default=10_000, help="used when calibrating here")
    p.add_argument("--timing", action="store_true", help="record wall-clock runtime (not reproducible)")
    p.add_argument("--out", required=True)


def _pd_run(opts, scn, seed, workers):
    if opts.threshold is not None:
        vt = _threshold_value(opts.threshold, opts.threshold_key)
    else:
        vt = harness.empirical_threshold(harness.h0_metrics(scn, opts.mc, seed, workers), opts.pfa)
    rows = harness.pd_sweep(scn, opts.snr, vt, opts.trials, seed, workers, timing=opts.timing)
    _write_sweep(opts.out, "snr_db", rows)


DEFAULT_PFA_GRID = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.5, 1.0]


def _roc_args(p):
    p.add_argument("--snr", type=_number, default=-11.0)
    p.add_argument("--pfa", type=_number, nargs="+", default=DEFAULT_PFA_GRID)
    p.add_argument("--mc", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("--out", required=True)


def _roc_run(opts, scn, seed, workers):
    rows = harness.roc(scn, opts.snr, opts.pfa, opts.mc, opts.trials, seed, workers)
    io.write_table(opts.out, ("pfa", "pd", "vt"), ((r.pfa, r.pd, r.threshold) for r in rows))


def _rmse_args(p):
    p.add_argument("--snr", type=_number, nargs="+", default=[-14.0, -11.0, -8.0])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--no-baseline", dest="no_baseline", action="store_true")
    p.add_argument("--timing", action="store_true")
    p.add_argument("--out", required=True)


def _rmse_run(opts, scn, seed, workers):
    rows = harness.rmse_sweep(scn, opts.snr, opts.trials, seed, workers, not opts.no_baseline, opts.timing)
    io.write_table(
        opts.out,
        ("snr_db", "method", "rmse_hz", "rmse_sd_hz", "runtime_s"),
        ((r.snr_db, r.method, r.rmse_hz, r.rmse_sd_hz, r.runtime_s) for r in rows),
    )


def _param_args(p):
    p.add_argument("--axis", required=True, choices=harness.AXES)
    p.add_argument("--values", type=_number, nargs="+", required=True)
    p.add_argument("--snr", type=_number, default=-11.0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mc", type=int, default=2000)
    p.add_argument("--pfa", type=_number, default=1e-2)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--out", required=True)


def _param_run(opts, scn, seed, workers):
    rows = harness.param_sweep(
        opts.axis, opts.values, scn, opts.snr, opts.trials, opts.mc, opts.pfa, seed, workers, opts.timing
    )
    _write_sweep(opts.out, opts.axis, rows)


# gev-diagnostics ----------------------------------------------------------

DIAG_FILES = ("diagnostics.csv", "probability.csv", "quantile.csv", "return_level.csv", "density.csv", "gev.json")


def _diag_args(p):
    p.add_argument("--metrics", help="H0 metrics CSV (index,psi); computed here when absent")
    p.add_argument("--mc", type=int, default=10_000)
    p.add_argument("--nfit", type=int, default=1500)
    p.add_argument("--bins", type=int)
    p.add_argument("--out-dir", dest="out_dir", required=True)


def _read_metrics(path) -> np.ndarray:
    try:
        header, rows = io.read_table(path)
        col = [h.strip() for h in header].index("psi")
        return np.array([float(r[col]) for r in rows])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read metrics {path}: {exc}")


def write_diagnostics(out_dir, metrics: np.ndarray, n_fit: int, bins: int | None):
    out = Path(out_dir)
    if not 50 <= n_fit <= metrics.size:
        raise ConfigError(f"nfit must lie in [50, {metrics.size}]")
    fit = gev.fit_mle(metrics[:n_fit])
    d = gev.diagnostics(fit, metrics, bins)
    io.write_table(out / "diagnostics.csv", gev.Diagnostics.HEADER, d.rows())
    io.write_table(out / "probability.csv", ("mc", "emp_p", "model_p"), zip(d.mc, d.emp_p, d.model_p))
    io.write_table(out / "quantile.csv", ("mc", "emp_q", "model_q"), zip(d.mc, d.emp_q, d.model_q))
    io.write_table(out / "return_level.csv", ("rl_x", "emp_q", "model_q"), zip(d.rl_x, d.emp_q, d.model_q))
    io.write_table(
        out / "density.csv", ("bin_center", "emp_density", "model_density"),
        zip(d.bin_centers, d.emp_density, d.model_density),
    )
    io.write_json(out / "gev.json", fit.to_json())
    return fit


def _diag_run(opts, scn, seed, workers):
    if opts.metrics:
        metrics = _read_metrics(opts.metrics)
    else:
        metrics = harness.h0_metrics(scn, opts.mc, seed, workers)
    write_diagnostics(opts.out_dir, metrics, opts.nfit, opts.bins)


# bench --------------------------------------------------------------------


def _bench_args(p):
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--serial-trials", dest="serial_trials", type=int, default=3)
    p.add_argument("--snr", type=_number, default=-11.0)
    p.add_argument("--out", required=True)


def _bench_run(opts, scn, seed, workers):
    report = harness.benchmark(scn, opts.trials, seed, opts.snr, opts.serial_trials)
    io.write_json(opts.out, report.to_json())


# reproduce ----------------------------------------------------------------

FIG_OUTPUTS = {
    "fig4b": ["calibration.json", "pd.csv"],
    "fig5": ["roc.csv"],
    "fig6": ["b.csv", "dT.csv", "q.csv"],
    "fig12": ["N.csv", "M.csv"],
    "fig13": list(DIAG_FILES),
    "fig14": ["thresholds.csv"],
}


def _scaled(base: float, scale: float, floor: int) -> int:
    return max(floor, int(round(base * scale)))


def _repro_args(p):
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--scale", type=_number, default=1.0, help="multiplies every trial count")
    p.add_argument("--out-dir", dest="out_dir", required=True)


def _repro_run(opts, scn, seed, workers):
    out = Path(opts.out_dir)
    s = opts.scale
    fig = opts.figure
    if fig == "fig4b":
        cal = harness.calibrate(scn, 1e-2, _scaled(1e4, s, 50), _scaled(1500, s, 50), seed, workers)
        io.write_json(out / "calibration.json", cal.to_json())
        rows = harness.pd_sweep(scn, [-17, -14, -11, -8, -5], cal.v_t_empirical, _scaled(300, s, 1), seed, workers)
        _write_sweep(out / "pd.csv", "snr_db", rows)
    elif fig == "fig5":
        rows = harness.roc(scn, -11.0, DEFAULT_PFA_GRID, _scaled(1e4, s, 10), _scaled(300, s, 1), seed, workers)
        io.write_table(out / "roc.csv", ("pfa", "pd", "vt"), ((r.pfa, r.pd, r.threshold) for r in rows))
    elif fig == "fig6":
        grids = {
            "b": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            "dT": [1 / 128, 1 / 64, 1 / 32, 1 / 16, 1 / 8, 1 / 4],
            "q": list(range(1, 11)),
        }
        for axis, values in grids.items():
            rows = harness.param_sweep(
                axis, values, scn, -11.0, _scaled(100, s, 1), _scaled(2000, s, 10), 1e-2, seed, workers
            )
            _write_sweep(out / f"{axis}.csv", axis, rows)
    elif fig == "fig12":
        grids = {"N": [1, 2, 5, 10], "M": [250, 500, 1000, 2000, 4000]}
        for axis, values in grids.items():
            rows = harness.rmse_vs_param(axis, values, scn, -10.0, _scaled(100, s, 1), seed, workers)
            io.write_table(
                out / f"{axis}.csv", (axis, "rmse_hz", "rmse_sd_hz"),
                ((r.value, r.rmse_hz, r.rmse_sd_hz) for r in rows),
            )
    elif fig == "fig13":
        m_c = _scaled(1e4, s, 50)
        metrics = harness.h0_metrics(scn, m_c, seed, workers)
        write_diagnostics(out, metrics, min(1500, m_c), None)
    elif fig == "fig14":
        m_c = _scaled(1e4, s, 50)
        metrics = harness.h0_metrics(scn, m_c, seed, workers)
        grid = sorted({min(n, m_c) for n in (250, 500, 1000, 1500, 2000) if min(n, m_c) >= 50})
        rows = harness.threshold_vs_nfit(metrics, [1e-2, 1e-3], grid, _scaled(20, s, 2), seed)
        io.write_table(
            out / "thresholds.csv",
            ("pfa", "n_fit", "vt_gev_mean", "vt_gev_sd", "vt_empirical", "failed_fits"),
            ((r.pfa, r.n_fit, r.vt_gev_mean, r.vt_gev_sd, r.vt_empirical, r.failed_fits) for r in rows),
        )


def _file_outputs(*dests):
    return lambda o: [getattr(o, d) for d in dests if getattr(o, d, None)]


COMMANDS = {
    c.name: c
    for c in [
        Command("gen-signal", "synthesize a test record", _gen_args, _file_outputs("out"), _gen_run),
        Command("detect", "run the bank on a record and compare Ψ with a threshold", _detect_args,
                _file_outputs("out", "track_out"), _detect_run,
                inputs=lambda o: [o.input] + _threshold_inputs(o)),
        Command("calibrate", "H0 thresholds: rank-based and GEV", _cal_args,
                _file_outputs("out", "metrics_out"), _cal_run),
        Command("pd-sweep", "detection probability against SNR", _pd_args, _file_outputs("out"), _pd_run,
                inputs=_threshold_inputs),
        Command("roc", "detection probability against false-alarm probability", _roc_args,
                _file_outputs("out"), _roc_run),
        Command("rmse-sweep", "IF RMSE against SNR, bank and monolithic filter", _rmse_args,
                _file_outputs("out"), _rmse_run),
        Command("param-sweep", "Pd and RMSE against b, dT, q, M or N", _param_args, _file_outputs("out"),
                _param_run),
        Command("gev-diagnostics", "probability/quantile/return-level/density tables", _diag_args,
                lambda o: [str(Path(o.out_dir) / f) for f in DIAG_FILES], _diag_run,
                inputs=lambda o: [o.metrics] if o.metrics else [], out_dir=True),
        Command("bench", "timing of one filter, the whole bank and the baseline", _bench_args,
                _file_outputs("out"), _bench_run),
        Command("reproduce", "desk-scaled recipe for one figure", _repro_args,
                lambda o: [str(Path(o.out_dir) / f) for f in FIG_OUTPUTS[o.figure]], _repro_run, out_dir=True),
    ]
}


# ---------------------------------------------------------------- manifest


def manifest_path(cmd: Command, opts) -> Path:
    if cmd.out_dir:
        return Path(opts.out_dir) / "manifest.json"
    return Path(str(opts.out) + ".manifest.json")


def _environment() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def make_manifest(cmd: Command, opts, scn: Scenario, seed: int, workers: int) -> dict:
    options = {k: v for k, v in sorted(vars(opts).items()) if k not in COMMON and k != "command"}
    inputs = {}
    for path in cmd.inputs(opts):
        try:
            inputs[path] = io.sha256(path)
        except OSError as exc:
            raise ConfigError(f"cannot read input {path}: {exc}")
    return {
        "tool": "crpfb",
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "command": cmd.name,
        "seed": seed,
        "workers": workers,
        "config": scn.to_dict(),
        "options": options,
        "inputs": inputs,
        "outputs": cmd.outputs(opts),
        "environment": _environment(),
    }


def _execute(cmd: Command, opts, scn: Scenario, seed: int, workers: int) -> int:
    io.write_json(manifest_path(cmd, opts), make_manifest(cmd, opts, scn, seed, workers))
    cmd.run(opts, scn, seed, workers)
    return EXIT_OK


def _rerun(opts) -> tuple[Command, argparse.Namespace, Scenario, int, int]:
    try:
        man = io.read_json(opts.manifest)
        cmd = COMMANDS[man["command"]]
        options = dict(man["options"])
        scn = build_scenario(man["config"])
        seed = int(man["seed"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot use manifest {opts.manifest}: {exc}")
    if opts.out_dir:
        dest = Path(opts.out_dir)
        if cmd.out_dir:
            options["out_dir"] = str(dest)
        else:
            for key in ("out", "track_out", "metrics_out"):
                if options.get(key):
                    options[key] = str(dest / Path(options[key]).name)
    for path, digest in man.get("inputs", {}).items():
        try:
            current = io.sha256(path)
        except OSError as exc:
            raise ConfigError(f"manifest input {path} is unavailable: {exc}")
        if current != digest:
            raise ConfigError(f"manifest input {path} has changed since the recorded run")
    workers = opts.workers if opts.workers else harness.default_workers()
    return cmd, argparse.Namespace(**options), scn, seed, workers


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crpfb", description="Particle filter bank track-before-detect simulator")
    parser.add_argument("--version", action="version", version=f"crpfb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS.values():
        p = sub.add_parser(cmd.name, help=cmd.help, description=cmd.help)
        cmd.add_args(p)
        _add_common(p)
    p = sub.add_parser("rerun", help="replay a run manifest", description="replay a run manifest")
    p.add_argument("manifest")
    p.add_argument("--workers", type=int)
    p.add_argument("--out-dir", dest="out_dir", help="write outputs here instead of the recorded paths")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        opts = build_parser().parse_args(argv)
        if opts.command == "rerun":
            cmd, opts, scn, seed, workers = _rerun(opts)
        else:
            cmd = COMMANDS[opts.command]
            doc = _scenario_doc(opts)
            seed = _resolve_seed(opts, io.read_json(opts.config).get("seed") if opts.config else None)
            scn = build_scenario(doc)
            workers = opts.workers if opts.workers else harness.default_workers()
        if workers < 1:
            raise ConfigError("--workers must be >= 1")
        return _execute(cmd, opts, scn, seed, workers)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except (PartitionError, EmptyPrior) as exc:
        print(f"crpfb: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:
        print(f"crpfb: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
