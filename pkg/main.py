"""
TWPAC design and simulation toolkit

A click command-line application that loads a device description, runs the
dispersion, coupled-mode, transient, phase-matching and noise-fit engines,
and writes CSV tables, SVG plots and a run manifest.

Architecture:
- One subcommand per engine, all driven by the same device file
- Sweeps dispatched to a process pool with deterministic merge order
- Exit codes: 0 success, 2 configuration error, 3 numerical failure
"""

import functools
import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
import matplotlib
import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from cme import (
    CmeOptions, Direction, DriveConfig, Tone, compression_sweep, power_to_current, sweep_spectrum, table_for_drive,
)
from config import ConfigurationError, config, load_device
from device import DeviceSpec, NumericalError, with_bias, with_supercells
from dispersion import build_dispersion_table, default_frequency_grid
from noisecal import NoiseSample, fit_by_frequency_bin, predict_nsys
from phasematch import Process, mismatch_curve, solve_pump_placement
from transient import expected_tones, output_spectrum, simulate_point, sweep_transient

__version__ = "1.0.0"

# Configure logging
logging.basicConfig(
    level=config.log_level if config.is_log_level_valid else logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "twpac"

EXIT_CONFIGURATION = 2
EXIT_NUMERICAL = 3

# === DATA MODELS ===

class RunManifest(BaseModel):
    """Everything needed to reproduce one output set."""

    command: str = Field(..., description="Subcommand name", min_length=1)
    device_path: Optional[str] = Field(None, description="Device file the run was driven by")
    parameters: Dict[str, Any] = Field(default_factory=dict, description="Subcommand parameters")
    output_dir: str = Field(..., description="Directory holding the outputs")
    outputs: List[str] = Field(default_factory=list, description="Files written by the run")
    seed: Optional[int] = Field(None, description="Seed of any stochastic generator")
    version: str = __version__

    def save(self, directory: Path) -> Path:
        path = Path(directory) / "manifest.json"
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

# === OUTPUT ===

def emit_csv(records: Sequence[Dict[str, Any]], path, columns: Optional[Sequence[str]] = None) -> Path:
    """
    Write records as CSV with a header and 9 significant digits.

    Args:
        records: Rows as dictionaries
        path: Destination file
        columns: Column order; defaults to the keys of the first record

    Returns:
        Path written

    Raises:
        ValueError: Empty record list (no file is created)
        ConfigurationError: Destination not writable
    """
    if not records:
        raise ValueError(f"No records to write to {path}")
    path = Path(path)
    frame = pd.DataFrame(list(records), columns=list(columns or records[0].keys()))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.9g")
    except OSError as e:
        raise ConfigurationError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path

Traces = Dict[str, Tuple[Sequence[float], Sequence[float]]]

def emit_panels(panels: Sequence[Tuple[str, Traces]], path, xlabel: str = "Frequency (GHz)",
                title: Optional[str] = None) -> Path:
    """
    Stacked line plots sharing the x axis, saved as SVG.

    Args:
        panels: (ylabel, traces) per panel, top to bottom
        path: Destination file
        xlabel: Label of the shared x axis
        title: Optional title above the first panel

    Returns:
        Path written

    Raises:
        ValueError: No panels, or a panel without traces
        ConfigurationError: Destination not writable
    """
    if not panels or any(not traces for _, traces in panels):
        raise ValueError(f"No traces to plot in {path}")
    path = Path(path)
    fig, axes = plt.subplots(len(panels), 1, figsize=(7, 1 + 3 * len(panels)), sharex=True, squeeze=False)
    for ax, (ylabel, traces) in zip(axes[:, 0], panels):
        for label, (x, y) in traces.items():
            ax.plot(x, y, label=label)
        ax.set_ylabel(ylabel)
        if len(traces) > 1:
            ax.legend()
        ax.grid(True, alpha=0.3)
    axes[-1, 0].set_xlabel(xlabel)
    if title:
        axes[0, 0].set_title(title)
    fig.tight_layout()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise ConfigurationError(f"Cannot write {path}: {e}") from e
    finally:
        plt.close(fig)
    return path

def emit_svg(traces: Traces, path, xlabel: str = "Frequency (GHz)", ylabel: str = "dB",
             title: Optional[str] = None) -> Path:
    """Line plot of labelled (x, y) traces saved as SVG."""
    return emit_panels([(ylabel, traces)], path, xlabel, title)

def _ghz_grid(start_ghz: float, stop_ghz: float, step_mhz: float) -> np.ndarray:
    if step_mhz <= 0 or stop_ghz < start_ghz:
        raise ConfigurationError("Frequency grid needs stop >= start and a positive step")
    return default_frequency_grid(start_ghz * 1e9, stop_ghz * 1e9, step_mhz * 1e6)

def _finish(ctx: click.Context, command: str, device_path: Optional[str], parameters: Dict[str, Any],
            outputs: List[Path], seed: Optional[int] = None) -> None:
    directory = ctx.obj["output_dir"]
    manifest = RunManifest(
        command=command, device_path=device_path, parameters=parameters, output_dir=str(directory),
        outputs=[path.name for path in outputs], seed=seed,
    )
    manifest.save(directory)
    click.echo(f"✅ {command}: wrote {', '.join(path.name for path in outputs)} to {directory}")

def handle_errors(func: Callable) -> Callable:
    """Map configuration and numerical failures to exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except ConfigurationError as e:
            logger.error(f"❌ Configuration error: {e}")
            click.echo(f"❌ {e}", err=True)
            ctx.exit(EXIT_CONFIGURATION)
        except NumericalError as e:
            logger.error(f"❌ Numerical failure: {e}")
            click.echo(f"❌ {e}", err=True)
            ctx.exit(EXIT_NUMERICAL)

    return wrapper

def _load(path: str, bias_ua: Optional[float] = None) -> DeviceSpec:
    device = load_device(path)
    if bias_ua is not None:
        try:
            device = with_bias(device, bias_ua * 1e-6)
        except ValueError as e:
            raise ConfigurationError(f"bias_uA: {e}") from e
    return device

# === DRIVE OPTIONS ===

def drive_options(func: Callable) -> Callable:
    """Pump and signal flags shared by the coupled-mode and transient commands."""
    options = [
        click.option("--pa-ghz", "--fa-ghz", "pa_ghz", type=float, default=14.5, show_default=True,
                     help="PA pump frequency"),
        click.option("--pa-dbm", type=float, default=-73.4, show_default=True, help="PA pump power"),
        click.option("--fc-ghz", type=float, default=4.7, show_default=True, help="FC pump frequency"),
        click.option("--fc-dbm", "--pc-dbm", "fc_dbm", type=float, default=-72.2, show_default=True,
                     help="FC pump power"),
        click.option("--signal-dbm", type=float, default=-133.0, show_default=True, help="Signal power"),
        click.option("--no-pa", "--pa-off", "no_pa", is_flag=True, help="Disable the PA pump"),
        click.option("--no-fc", "--fc-off", "no_fc", is_flag=True, help="Disable the FC pump"),
        click.option("--bias-ua", type=float, default=None, help="Override the device dc bias (uA)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func

def _drive(params: Dict[str, Any], signal_ghz: float) -> DriveConfig:
    return DriveConfig(
        pa_pump=Tone.from_ghz(params["pa_ghz"], params["pa_dbm"], enabled=not params["no_pa"]),
        fc_pump=Tone.from_ghz(params["fc_ghz"], params["fc_dbm"], enabled=not params["no_fc"]),
        signal=Tone.from_ghz(signal_ghz, params["signal_dbm"]),
    )

# === COMMANDS ===

@click.group()
@click.version_option(__version__)
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Logging level (default from TWPAC_LOG_LEVEL)")
@click.option("--workers", type=int, default=None, help="Worker processes (default from TWPAC_WORKERS)")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None,
              help="Output directory (default from TWPAC_OUTPUT_DIR)")
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str], workers: Optional[int], output_dir: Optional[str]):
    """Design and simulate dc-biased Josephson traveling-wave amplifiers and converters."""
    if log_level:
        logging.getLogger().setLevel(log_level.upper())
    try:
        worker_count = workers if workers is not None else config.workers
    except ConfigurationError as e:
        click.echo(f"❌ {e}", err=True)
        ctx.exit(EXIT_CONFIGURATION)
    if worker_count < 1:
        raise click.BadParameter("must be at least 1", param_hint="--workers")
    directory = Path(output_dir) if output_dir else config.output_dir
    ctx.obj = {"workers": worker_count, "output_dir": directory}

@cli.command()
@click.argument("device_path", type=click.Path(dir_okay=False))
@click.option("--start-ghz", type=float, default=0.02, show_default=True)
@click.option("--stop-ghz", type=float, default=16.0, show_default=True)
@click.option("--step-mhz", type=float, default=10.0, show_default=True)
@click.option("--bias-ua", type=float, default=None, help="Override the device dc bias (uA)")
@click.option("--loss-tangent", type=float, default=None, help="Override the dielectric loss tangent")
@click.pass_context
@handle_errors
def dispersion(ctx, device_path, start_ghz, stop_ghz, step_mhz, bias_ua, loss_tangent):
    """Linear transmission, wavenumber and impedance of the line."""
    device = _load(device_path, bias_ua)
    table = build_dispersion_table(device, _ghz_grid(start_ghz, stop_ghz, step_mhz), loss_tangent=loss_tangent)
    ghz = table.frequencies / (2 * math.pi) / 1e9
    frame = {
        "freq_GHz": ghz,
        "s21_db": table.s21_db,
        "s21_phase_rad": np.angle(table.s21),
        "k_rad_per_cell": table.wavenumber,
        "kstar_rad_per_cell": table.nonlinear_wavenumber,
        "re_Z_ohm": table.impedance.real,
        "im_Z_ohm": table.impedance.imag,
        "alpha_np_per_cell": table.attenuation,
    }
    records = pd.DataFrame(frame).to_dict("records")
    directory = ctx.obj["output_dir"]
    outputs = [
        emit_csv(records, directory / "dispersion.csv", columns=list(frame)),
        emit_panels([
            ("|S21| (dB)", {"|S21|": (ghz, table.s21_db)}),
            ("Wavenumber (rad/cell)", {"k": (ghz, table.wavenumber), "k*": (ghz, table.nonlinear_wavenumber)}),
            ("Impedance (Ohm)", {"Re Z": (ghz, table.impedance.real), "Im Z": (ghz, table.impedance.imag)}),
        ], directory / "dispersion.svg"),
    ]
    for lo, hi in table.stopbands:
        click.echo(f"Stopband {lo / (2 * math.pi) / 1e9:.3f} - {hi / (2 * math.pi) / 1e9:.3f} GHz")
    _finish(ctx, "dispersion", device_path, ctx.params, outputs)

@cli.command("cme-sweep")
@click.argument("device_path", type=click.Path(dir_okay=False))
@drive_options
@click.option("--fmin", "--start-ghz", "start_ghz", type=float, default=5.0, show_default=True,
              help="Lowest signal frequency (GHz)")
@click.option("--fmax", "--stop-ghz", "stop_ghz", type=float, default=9.0, show_default=True,
              help="Highest signal frequency (GHz)")
@click.option("--step", "--step-mhz", "step_mhz", type=float, default=20.0, show_default=True,
              help="Signal frequency step (MHz)")
@click.option("--direction", type=click.Choice([d.value for d in Direction]), default="forward", show_default=True)
@click.option("--overlay", is_flag=True, help="Also sweep the opposite direction and plot both gains")
@click.option("--no-4wm", is_flag=True, help="Drop the four-wave-mixing terms")
@click.option("--no-reflections", is_flag=True, help="Ignore port reflections")
@click.pass_context
@handle_errors
def cme_sweep(ctx, device_path, start_ghz, stop_ghz, step_mhz, direction, overlay, no_4wm, no_reflections,
              **drive_params):
    """Signal gain and terminal mode powers from the coupled-mode equations."""
    device = _load(device_path, drive_params["bias_ua"])
    grid = _ghz_grid(start_ghz, stop_ghz, step_mhz)
    drive = _drive(drive_params, start_ghz)
    options = CmeOptions(include_4wm=not no_4wm, include_reflections=not no_reflections)
    valid = [drive.with_signal(frequency=f) for f in grid if drive.fc_pump.frequency < f < drive.pa_pump.frequency]
    table = table_for_drive(device, valid or [drive])

    chosen = Direction(direction)
    directions = [chosen]
    if overlay:
        directions.append(Direction.BACKWARD if chosen == Direction.FORWARD else Direction.FORWARD)
    results = {
        d: sweep_spectrum(device, drive, grid, d, options, table, ctx.obj["workers"]) for d in directions
    }
    ghz = grid / (2 * math.pi) / 1e9
    directory = ctx.obj["output_dir"]
    outputs = [emit_csv(results[chosen].to_records(), directory / "cme_sweep.csv")]
    for d in directions[1:]:
        outputs.append(emit_csv(results[d].to_records(), directory / f"cme_sweep_{d.value}.csv"))
    outputs.append(emit_svg({d.value: (ghz, results[d].gain_db) for d in directions},
                            directory / "cme_sweep.svg", ylabel="Gain (dB)"))

    degenerate = int(np.count_nonzero(results[chosen].degenerate))
    if degenerate:
        click.echo(f"⚠️  {degenerate} degenerate points (signal at half the PA pump)")
    failed = sum(len(result.failures) for result in results.values())
    if failed:
        click.echo(f"⚠️  {failed} points failed; see the log")
    _finish(ctx, "cme-sweep", device_path, ctx.params, outputs)

@cli.command("cme-compression")
@click.argument("device_path", type=click.Path(dir_okay=False))
@drive_options
@click.option("--signal-ghz", type=float, default=7.0, show_default=True)
@click.option("--min-dbm", type=float, default=-140.0, show_default=True)
@click.option("--max-dbm", type=float, default=-90.0, show_default=True)
@click.option("--step-db", type=float, default=1.0, show_default=True)
@click.option("--no-4wm", is_flag=True, help="Drop the four-wave-mixing terms")
@click.pass_context
@handle_errors
def cme_compression(ctx, device_path, signal_ghz, min_dbm, max_dbm, step_db, no_4wm, **drive_params):
    """Gain versus signal power and the input 1 dB compression point."""
    if step_db <= 0 or max_dbm <= min_dbm:
        raise ConfigurationError("Power sweep needs max > min and a positive step")
    device = _load(device_path, drive_params["bias_ua"])
    powers = np.arange(min_dbm, max_dbm + 0.5 * step_db, step_db)
    result = compression_sweep(device, _drive(drive_params, signal_ghz), powers,
                               CmeOptions(include_4wm=not no_4wm))
    records = [{"signal_dbm": p, "gain_db": g} for p, g in zip(result.input_power_dbm, result.gain_db)]
    directory = ctx.obj["output_dir"]
    outputs = [
        emit_csv(records, directory / "cme_compression.csv"),
        emit_svg({"gain": (result.input_power_dbm, result.gain_db)}, directory / "cme_compression.svg",
                 xlabel="Signal power (dBm)", ylabel="Gain (dB)"),
    ]
    if result.input_p1db_dbm is None:
        click.echo("No 1 dB compression within the power range")
    else:
        click.echo(f"Input P1dB: {result.input_p1db_dbm:.2f} dBm")
    _finish(ctx, "cme-compression", device_path, ctx.params, outputs)

def _reduced(device: DeviceSpec, cells_override: Optional[int]) -> DeviceSpec:
    if cells_override is None:
        return device
    length = device.loading.supercell_length
    if cells_override <= 0 or cells_override % length:
        raise ConfigurationError(
            f"cells_override: {cells_override} must be a positive multiple of the supercell length {length}"
        )
    return with_supercells(device, cells_override // length)

@cli.command("transient-sweep")
@click.argument("device_path", type=click.Path(dir_okay=False))
@drive_options
@click.option("--start-ghz", type=float, default=0.02, show_default=True)
@click.option("--stop-ghz", type=float, default=12.0, show_default=True)
@click.option("--step-mhz", type=float, default=20.0, show_default=True)
@click.option("--cells-override", type=int, default=None, help="Simulate a shorter line with this many cells")
@click.pass_context
@handle_errors
def transient_sweep(ctx, device_path, start_ghz, stop_ghz, step_mhz, cells_override, **drive_params):
    """Forward and backward S21 from time-domain simulations of the ladder."""
    device = _reduced(_load(device_path, drive_params["bias_ua"]), cells_override)
    grid = _ghz_grid(start_ghz, stop_ghz, step_mhz)
    spectrum = sweep_transient(device, _drive(drive_params, start_ghz), grid, ctx.obj["workers"])
    records = spectrum.to_records()
    ghz = [record["freq_GHz"] for record in records]
    directory = ctx.obj["output_dir"]
    outputs = [
        emit_csv(records, directory / "transient_sweep.csv", columns=["freq_GHz", "s21_fwd_db", "s21_bwd_db"]),
        emit_svg({"forward": (ghz, [r["s21_fwd_db"] for r in records]),
                  "backward": (ghz, [r["s21_bwd_db"] for r in records])},
                 directory / "transient_sweep.svg", ylabel="|S21| (dB)"),
    ]
    if spectrum.failures:
        click.echo(f"⚠️  {len(spectrum.failures)} runs failed; see the log")
    _finish(ctx, "transient-sweep", device_path, ctx.params, outputs)

@cli.command("transient-spectrum")
@click.argument("device_path", type=click.Path(dir_okay=False))
@drive_options
@click.option("--signal-ghz", type=float, default=7.0, show_default=True)
@click.option("--direction", type=click.Choice([d.value for d in Direction]), default="forward", show_default=True)
@click.option("--cells-override", type=int, default=None, help="Simulate a shorter line with this many cells")
@click.pass_context
@handle_errors
def transient_spectrum(ctx, device_path, signal_ghz, direction, cells_override, **drive_params):
    """Output power spectrum of one time-domain run."""
    device = _reduced(_load(device_path, drive_params["bias_ua"]), cells_override)
    drive = _drive(drive_params, signal_ghz)
    result = simulate_point(device, drive, Direction(direction))
    spectrum = output_spectrum(result, tones=expected_tones(drive))
    directory = ctx.obj["output_dir"]
    ghz = spectrum.frequencies / (2 * math.pi) / 1e9
    outputs = [
        emit_csv(spectrum.to_records(), directory / "transient_spectrum.csv"),
        emit_svg({"output": (ghz, spectrum.power_dbm)}, directory / "transient_spectrum.svg",
                 ylabel="Power (dBm)"),
    ]
    for peak in spectrum.peaks:
        if peak.label:
            click.echo(f"{peak.label:>5}: {peak.frequency / (2 * math.pi) / 1e9:.4f} GHz, {peak.power_dbm:.1f} dBm")
    _finish(ctx, "transient-spectrum", device_path, ctx.params, outputs)

@cli.command("phase-match")
@click.argument("device_path", type=click.Path(dir_okay=False))
@click.option("--process", "process_name", type=click.Choice([p.value for p in Process]), default="pa",
              show_default=True)
@click.option("--target-ghz", type=float, default=None,
              help="Signal-idler detuning for pa (default 1), signal frequency otherwise (default 7.65)")
@click.option("--pump-dbm", type=float, default=None, help="Pump power for the Kerr correction")
@click.option("--bias-ua", type=float, default=None, help="Override the device dc bias (uA)")
@click.pass_context
@handle_errors
def phase_match(ctx, device_path, process_name, target_ghz, pump_dbm, bias_ua):
    """Place a pump frequency that phase-matches a mixing process."""
    process = Process(process_name)
    device = _load(device_path, bias_ua)
    target_ghz = target_ghz if target_ghz is not None else (1.0 if process == Process.PA else 7.65)
    amplitude = 0.0 if pump_dbm is None else power_to_current(pump_dbm, device.environment_impedance)
    table = build_dispersion_table(device)
    placement = solve_pump_placement(process, 2 * math.pi * target_ghz * 1e9, table, amplitude)
    pump, signal, partner = placement.triplet_ghz
    click.echo(f"pump {pump:.4f} GHz, signal {signal:.4f} GHz, partner {partner:.4f} GHz "
               f"(residual {placement.residual:.2e} rad/cell)")
    if process == Process.FC_UP:
        click.echo("Up-conversion mismatch is the linear term only")

    if process == Process.PA:
        lo, hi = placement.pump_frequency / 2, placement.pump_frequency
    elif process == Process.FC_DOWN:
        lo, hi = placement.pump_frequency, float(table.frequencies[-1])
    else:
        lo, hi = float(table.frequencies[0]), float(table.frequencies[-1]) - placement.pump_frequency
    grid = table.frequencies[(table.frequencies > lo) & (table.frequencies < hi)]
    curve = mismatch_curve(process, grid, placement.pump_frequency, table, amplitude)
    records = curve.to_records()
    if not records:
        raise ConfigurationError("Mismatch curve is empty; widen the dispersion grid")
    outputs = [emit_csv(records, ctx.obj["output_dir"] / "phase_match.csv")]
    _finish(ctx, "phase-match", device_path, ctx.params, outputs)

@cli.command("noise-fit")
@click.argument("samples_path", type=click.Path(dir_okay=False))
@click.option("--bin-mhz", type=float, default=100.0, show_default=True, help="Frequency bin width")
@click.pass_context
@handle_errors
def noise_fit(ctx, samples_path, bin_mhz):
    """Fit N_sys = N1 + N2/G per frequency bin from a CSV of measurements."""
    samples = _read_noise_samples(samples_path)
    fits = fit_by_frequency_bin(samples, bin_mhz * 1e6)
    if not fits:
        raise NumericalError("No frequency bin could be fitted")
    records = [
        {"dataset": dataset, "freq_GHz": centre / 1e9, "n1_quanta": fit.n1, "n2_quanta": fit.n2,
         "residual_norm": fit.residual_norm, "samples": fit.sample_count, "negative": fit.flagged_negative}
        for (dataset, centre), fit in fits.items()
    ]
    overlay = []
    for sample in samples:
        key = (sample.dataset, round(sample.frequency / (bin_mhz * 1e6)) * bin_mhz * 1e6)
        if key in fits:
            overlay.append({
                "dataset": sample.dataset, "freq_GHz": sample.frequency / 1e9,
                "gain_db": 10.0 * math.log10(sample.gain), "nsys_quanta": sample.nsys,
                "model_quanta": predict_nsys(fits[key], sample.gain),
            })
    directory = ctx.obj["output_dir"]
    outputs = [emit_csv(records, directory / "noise_fit.csv"), emit_csv(overlay, directory / "noise_overlay.csv")]
    for record in records:
        click.echo(f"{record['dataset'] or 'all'} @ {record['freq_GHz']:.3f} GHz: "
                   f"N1={record['n1_quanta']:.3f}, N2={record['n2_quanta']:.3f}")
    _finish(ctx, "noise-fit", None, {**ctx.params, "samples_path": samples_path}, outputs)

def _read_noise_samples(path: str) -> List[NoiseSample]:
    """CSV with columns freq_GHz, gain_db, nsys_quanta and an optional dataset column."""
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as e:
        raise ConfigurationError(f"Noise data file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigurationError(f"Cannot parse {path}: {e}") from e
    missing = {"freq_GHz", "gain_db", "nsys_quanta"} - set(frame.columns)
    if missing:
        raise ConfigurationError(f"Noise data file lacks columns: {', '.join(sorted(missing))}")
    try:
        return [
            NoiseSample.from_db(row.freq_GHz * 1e9, row.gain_db, row.nsys_quanta,
                                str(row.dataset) if "dataset" in frame.columns else "")
            for row in frame.itertuples(index=False)
        ]
    except ValueError as e:
        raise ConfigurationError(f"Invalid noise sample in {path}: {e}") from e

# === ENTRY POINT ===

if __name__ == "__main__":
    cli()
