"""CLI interface for atten-forge using Typer.

Each command loads a chip configuration, runs one stage of the design flow
(synthesis, compensation and tuning, calibration, sweep, report, export) and
writes its result as a config, CSV or Touchstone file.
"""

from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import typer
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from .attenuator import enumerate_states
from .design import (
    SweepResult,
    band_metrics,
    calibrate_continuous,
    continuous_curves,
    phase_objective,
    sweep,
    synth_ttype,
)
from .exceptions import AttenForgeError, ConfigError, TargetMissError
from .models import BandMetrics, ChipConfig, ReportTargets
from .parser import parse_config, write_config
from .tuning import TUNING_BAND_POINTS, run_tuning, tuning_margin
from .utils import configure_logging, default_config_path, ensure_directory
from .writer import write_calibration_csv, write_curves_csv, write_report_csv, write_touchstone

app = typer.Typer(
    help="Design and analysis of switch-type mm-wave step attenuators with capacitive compensation."
)
console = Console()

ALLOWED_STEPS = (0.5, 0.1)
CALIBRATION_STEP_DB = 0.1

ConfigOption = typer.Option(
    None, "--config", "-c", help="Chip configuration file (default: the shipped tuned design)"
)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable debug logging"),
) -> None:
    configure_logging(verbose)


@contextmanager
def _errors_to_exit() -> Iterator[None]:
    """Print atten-forge and I/O errors and exit with the matching code."""
    try:
        yield
    except AttenForgeError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(e.exit_code)
    except OSError as e:
        console.print(f"[red]I/O error: {e}[/red]")
        raise typer.Exit(1)


def _load_config(path: Optional[Path], synthesize: bool = False) -> ChipConfig:
    path = path or default_config_path()
    return parse_config(path.read_text(encoding="utf-8"), synthesize=synthesize)


def _emit_config(config: ChipConfig, out: Optional[Path]) -> None:
    text = write_config(config)
    if out is None:
        console.print(text, markup=False, highlight=False, end="")
        return
    ensure_directory(out.parent)
    out.write_text(text, encoding="utf-8")
    console.print(f"[green]✓ Configuration written to {out}[/green]")


def _resolve_step(step: Optional[float], config: ChipConfig) -> float:
    value = step if step is not None else config.run.step_db
    for allowed in ALLOWED_STEPS:
        if abs(value - allowed) < 1e-12:
            return allowed
    if step is None:
        raise ConfigError(f"step must be one of {ALLOWED_STEPS} dB, got {value}", key="run.step")
    raise typer.BadParameter(f"must be one of {ALLOWED_STEPS}, got {value}", param_hint="--step")


def _simulate(config: ChipConfig, step_db: float) -> tuple[SweepResult, BandMetrics]:
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task("Calibrating continuous unit...", total=None)
        table = calibrate_continuous(
            config.chip, f0=config.run.f0_hz, step_db=CALIBRATION_STEP_DB
        )
        states = enumerate_states(config.chip, step_db, config.run.f0_hz, table)
        progress.update(task, description=f"Sweeping {len(states)} states...")
        result = sweep(config.chip, states, config.grid)
        progress.update(task, description="Computing band metrics...")
        metrics = band_metrics(result)
    return result, metrics


@app.command(help="Synthesize T-pad r1/r2 from unit4.target and unit2.target.")
def synth(
    config_path: Optional[Path] = ConfigOption,
    out: Optional[Path] = typer.Option(
        None, "--out", "-o", help="Write the updated configuration here (default: print it)"
    ),
) -> None:
    with _errors_to_exit():
        config = _load_config(config_path, synthesize=True)
        targets = config.targets
        if targets.unit4_db is None or targets.unit2_db is None:
            missing = "unit4.target" if targets.unit4_db is None else "unit2.target"
            raise ConfigError("synth needs an attenuation target", key=missing)
        table = Table(title="Synthesized T-pad elements")
        for column in ("unit", "target (dB)", "r1 (ohm)", "r2 (ohm)"):
            table.add_column(column)
        for name, target in (("unit4", targets.unit4_db), ("unit2", targets.unit2_db)):
            r1, r2 = synth_ttype(target, config.chip.z0)
            table.add_row(name, f"{target:g}", f"{r1:.4f}", f"{r2:.4f}")
        console.print(table)
        _emit_config(config, out)


@app.command(help="Optimize c_comp of both switched units; --joint also tunes r2 and line lengths.")
def optimize(
    config_path: Optional[Path] = ConfigOption,
    joint: bool = typer.Option(
        False, "--joint", help="Run the full sequential tuning (r2, c_comp, line θ)"
    ),
    out: Optional[Path] = typer.Option(
        None, "--out", "-o", help="Write the updated configuration here (default: print it)"
    ),
) -> None:
    with _errors_to_exit():
        config = _load_config(config_path)
        band = config.grid.resampled(TUNING_BAND_POINTS)
        before = config.chip
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
            transient=True,
        ) as progress:
            progress.add_task("Tuning..." if joint else "Optimizing c_comp...", total=None)
            after, report = run_tuning(before, band, f0_hz=config.run.f0_hz, joint=joint)

        table = Table(title="Compensation")
        for column in ("unit", "c_comp before (fF)", "c_comp after (fF)", "RMS phase before (°)", "RMS phase after (°)"):
            table.add_column(column)
        for name in ("unit4", "unit2"):
            old, new = getattr(before, name), getattr(after, name)
            table.add_row(
                name,
                f"{old.c_comp * 1e15:.3f}",
                f"{new.c_comp * 1e15:.3f}",
                f"{phase_objective(old, old.c_comp, band, before.z0):.4f}",
                f"{phase_objective(new, new.c_comp, band, after.z0):.4f}",
            )
        console.print(table)
        if joint:
            targets = ReportTargets()
            console.print(
                f"Target margin: {tuning_margin(before, band, targets):.4f} → "
                f"{report.final_margin:.4f} (below 1 meets every threshold)"
            )
        _emit_config(config.model_copy(update={"chip": after}), out)


@app.command(help="Calibrate the continuous unit's control voltage at run.f0.")
def calibrate(
    config_path: Optional[Path] = ConfigOption,
    out: Path = typer.Option(..., "--out", "-o", help="Calibration table CSV"),
    curves: Optional[Path] = typer.Option(
        None, "--curves", help="Also write attenuation/phase vs. frequency per entry"
    ),
) -> None:
    with _errors_to_exit():
        config = _load_config(config_path)
        table = calibrate_continuous(config.chip, f0=config.run.f0_hz, step_db=CALIBRATION_STEP_DB)
        write_calibration_csv(table, out)
        console.print(
            f"[green]✓ {len(table.entries)} calibration entries written to {out}[/green]"
        )
        if curves is not None:
            write_curves_csv(continuous_curves(config.chip, table, config.grid), curves)
            console.print(f"[green]✓ Continuous-unit curves written to {curves}[/green]")


@app.command(name="sweep", help="Sweep every state and write state and metrics CSVs.")
def sweep_command(
    config_path: Optional[Path] = ConfigOption,
    step: Optional[float] = typer.Option(None, "--step", help="State pitch in dB: 0.5 or 0.1"),
    out: Path = typer.Option(..., "--out", "-o", help="State CSV; metrics go to <stem>_metrics.csv"),
) -> None:
    with _errors_to_exit():
        config = _load_config(config_path)
        result, metrics = _simulate(config, _resolve_step(step, config))
        metrics_path = write_report_csv(result, metrics, out)
        console.print(
            f"[green]✓ {len(result.states)} states x {len(result.grid)} frequencies "
            f"written to {out} and {metrics_path}[/green]"
        )


@app.command(help="Print the band summary and check it against report thresholds.")
def report(
    config_path: Optional[Path] = ConfigOption,
    step: Optional[float] = typer.Option(None, "--step", help="State pitch in dB: 0.5 or 0.1"),
    targets: Optional[str] = typer.Option(
        None,
        "--targets",
        help="Thresholds as name=value pairs, e.g. il_max=3.8,rms_amp=0.15,rms_phase=1.6,rl_min=11.5",
    ),
) -> None:
    with _errors_to_exit():
        thresholds = ReportTargets.from_option(targets)
        config = _load_config(config_path)
        result, metrics = _simulate(config, _resolve_step(step, config))
        summary = metrics.summary()
        verdicts = thresholds.evaluate(metrics)

        table = Table(
            title=f"Band summary: {len(result.states)} states, "
            f"{result.grid.points[0] / 1e9:g}-{result.grid.points[-1] / 1e9:g} GHz"
        )
        for column in ("metric", "value", "threshold", "verdict"):
            table.add_column(column)
        table.add_row("IL min (dB)", f"{summary['il_min']:.3f}", "", "")
        for name, label, bound in (
            ("il_max", "IL max (dB)", f"≤ {thresholds.il_max:g}"),
            ("rms_amp", "RMS amplitude error (dB)", f"≤ {thresholds.rms_amp:g}"),
            ("rms_phase", "RMS phase error (°)", f"≤ {thresholds.rms_phase:g}"),
            ("rl_min", "Worst return loss (dB)", f"≥ {thresholds.rl_min:g}"),
        ):
            value, passed = verdicts[name]
            verdict = "[green]PASS[/green]" if passed else "[red]FAIL[/red]"
            table.add_row(label, f"{value:.3f}", bound, verdict)
        console.print(table)

        failed = [name for name, (_, passed) in verdicts.items() if not passed]
        if failed:
            raise TargetMissError(f"missed report targets: {', '.join(failed)}")
        console.print("[green]✓ All report targets met[/green]")


@app.command(help="Write one state's S-parameters as a Touchstone file.")
def export(
    config_path: Optional[Path] = ConfigOption,
    state: str = typer.Option(..., "--state", help="State label, e.g. 0.0, 4.5 or 7.5"),
    out: Path = typer.Option(..., "--out", "-o", help="Touchstone (.s2p) output path"),
    step: Optional[float] = typer.Option(None, "--step", help="State pitch in dB: 0.5 or 0.1"),
) -> None:
    with _errors_to_exit():
        config = _load_config(config_path)
        result, _ = _simulate(config, _resolve_step(step, config))
        try:
            index = result.state_index(state)
        except KeyError:
            labels = ", ".join(s.label for s in result.states[:3])
            raise typer.BadParameter(
                f"unknown state {state!r} (labels look like {labels}, ...)", param_hint="--state"
            )
        write_touchstone(result, index, out)
        console.print(f"[green]✓ State {state} dB written to {out}[/green]")


@app.command()
def version():
    """Show version information."""
    from . import __version__

    console.print(f"atten-forge version {__version__}")


if __name__ == "__main__":
    app()
