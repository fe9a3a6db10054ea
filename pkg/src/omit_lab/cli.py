"""Command-line interface: ``omit-lab <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage, 3 validation,
4 convergence, 5 I/O, 70 internal. Errors print ``error[<category>]: ...``
on stderr.
"""
from __future__ import annotations

import dataclasses
import math
import sys as _sys
import warnings
from pathlib import Path

import click

from .checks import closed_form_vs_solve, envelope_check, full_frame_checks, nonlinear_check
from .config import ConfigWarning, load_bundled, load_config, normalize_gauge
from .emit import emit_plot, emit_table
from .errors import OmitError
from .params import TWO_PI
from .response import dressed_modes
from .steady import solve_steady_state
from .sweep import DEFAULT_ETA_VALUES, FIGURE_IDS, AxisSpec, SecondAxis, run_scenario

EXIT_CODES = {"verification": 1, "usage": 2, "validation": 3, "convergence": 4, "io": 5, "internal": 70}


class VerificationFailed(Exception):
    category = "verification"


def _scenario_from_options(config, points, eta, phi_over_pi, gauge, want_grid=False):
    run = load_config(config)
    sc = run.scenario
    changes = {}
    if points is not None:
        changes["axis"] = AxisSpec(sc.axis.start, sc.axis.stop, points)
    drive = sc.drive
    if eta is not None or phi_over_pi is not None:
        new_eta = eta if eta is not None else (drive.eta or 0.0)
        new_phi = phi_over_pi * math.pi if phi_over_pi is not None else drive.phi
        drive = drive.with_eta_phi(new_eta, new_phi)
        changes["drive"] = drive
    if gauge is not None:
        changes["gauge"] = normalize_gauge(gauge)
    if want_grid and sc.second_axis is None:
        changes["second_axis"] = SecondAxis("eta", DEFAULT_ETA_VALUES)
    if not want_grid:
        changes["second_axis"] = None
    return dataclasses.replace(sc, **changes), run.output


def _emit(result, name, out_dir, formats, overwrite):
    out_dir = Path(out_dir)
    written = []
    for fmt in formats:
        path = out_dir / f"{name}.{fmt}"
        if fmt in ("csv", "json"):
            emit_table(result, fmt, path, overwrite=overwrite)
            written.append(path)
        else:
            written.extend(emit_plot(result, path, overwrite=overwrite))
    for p in written:
        click.echo(f"wrote {p}")


def _formats(output_formats, fmt):
    if fmt is None:
        return output_formats
    return (fmt,) + tuple(f for f in output_formats if f == "svg")


common = [
    click.option("--config", "config", type=click.Path(dir_okay=False), required=True, help="INI run file."),
    click.option("--out", "out", type=click.Path(file_okay=False), default=None, help="Output directory."),
    click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Table format."),
    click.option("--points", type=click.IntRange(min=2), default=None, help="Detuning grid size."),
    click.option("--eta", type=float, default=None, help="Mechanical-to-probe drive ratio."),
    click.option("--phi-over-pi", "phi_over_pi", type=float, default=None, help="Drive phase in units of pi."),
    click.option("--gauge", type=click.Choice(["raw", "real-g"], case_sensitive=False), default=None),
    click.option("--overwrite", is_flag=True, help="Replace existing output files."),
]


def with_common(fn):
    for opt in reversed(common):
        fn = opt(fn)
    return fn


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Double-window optomechanically induced transparency spectra."""


@cli.command()
@with_common
def spectrum(config, out, fmt, points, eta, phi_over_pi, gauge, overwrite):
    """Probe spectrum over the normalized detuning axis."""
    sc, output = _scenario_from_options(config, points, eta, phi_over_pi, gauge)
    table = run_scenario(sc)
    _emit(table, output.name, out or output.directory, _formats(output.formats, fmt), overwrite)


@cli.command()
@with_common
def sweep2d(config, out, fmt, points, eta, phi_over_pi, gauge, overwrite):
    """Spectra over a second axis (eta or phi); eta 0..2 if the config has none."""
    sc, output = _scenario_from_options(config, points, eta, phi_over_pi, gauge, want_grid=True)
    grid = run_scenario(sc)
    _emit(grid, output.name, out or output.directory, _formats(output.formats, fmt), overwrite)


def _fmt_c(z):
    return f"{z.real:.17g}{z.imag:+.17g}j"


@cli.command()
@click.option("--config", type=click.Path(dir_okay=False), required=True)
@click.option("--gauge", type=click.Choice(["raw", "real-g"], case_sensitive=False), default=None)
def steady(config, gauge):
    """Print the pump-only steady state."""
    sc, _ = _scenario_from_options(config, None, None, None, gauge)
    ss = solve_steady_state(sc.system, sc.drive, gauge=sc.gauge, controls=sc.solver)
    for key in ("a_s", "b_s", "c_s", "G_om"):
        click.echo(f"{key} = {_fmt_c(getattr(ss, key))}")
    click.echo(f"photon_number = {ss.photon_number:.17g}")
    for key in ("Delta_a", "Delta_a_prime", "frequency_shift", "residual", "relative_residual", "rotation"):
        click.echo(f"{key} = {getattr(ss, key):.17g}")
    click.echo(f"gauge = {ss.gauge}")
    click.echo(f"method = {ss.method}")
    click.echo(f"multistable = {ss.multistable}")


@cli.command()
@click.option("--config", type=click.Path(dir_okay=False), required=True)
def dressed(config):
    """Print the dressed mechanical modes and their weights."""
    sc, _ = _scenario_from_options(config, None, None, None, None)
    ss = solve_steady_state(sc.system, sc.drive, gauge=sc.gauge, controls=sc.solver)
    m = dressed_modes(sc.system, ss)
    for key in ("lambda_plus", "lambda_minus", "A_plus", "A_minus"):
        click.echo(f"{key} = {_fmt_c(getattr(m, key))}")
    click.echo(f"lambda_plus_over_2pi_hz = {_fmt_c(m.lambda_plus / TWO_PI)}")
    click.echo(f"lambda_minus_over_2pi_hz = {_fmt_c(m.lambda_minus / TWO_PI)}")
    click.echo(f"regime = {m.regime}")


@cli.command()
@click.argument("fig_id", type=click.Choice(FIGURE_IDS))
@click.option("--out", type=click.Path(file_okay=False), default=".", help="Output directory.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--points", type=click.IntRange(min=2), default=None)
@click.option("--overwrite", is_flag=True)
def figure(fig_id, out, fmt, points, overwrite):
    """Run a bundled figure preset: table, provenance JSON and plot."""
    sc = load_bundled(fig_id).scenario
    if points is not None:
        sc = dataclasses.replace(sc, axis=AxisSpec(sc.axis.start, sc.axis.stop, points))
    result = run_scenario(sc)
    formats = (fmt, "json", "svg") if fmt == "csv" else ("json", "svg")
    _emit(result, fig_id, out, formats, overwrite)


@cli.command()
@click.option("--quick", is_flag=True, help="Envelope check only.")
@click.option("--seed", type=int, default=0, help="Seed of the randomized closed-form check.")
@click.option("--draws", type=click.IntRange(min=1), default=1000)
def verify(quick, seed, draws):
    """Cross-check closed forms against linear solves and time integration."""
    results = [closed_form_vs_solve(draws, seed), envelope_check()]
    if not quick:
        results += full_frame_checks()
        results.append(nonlinear_check())
    for r in results:
        click.echo(r.line())
    if not all(r.passed for r in results):
        raise VerificationFailed(f"{sum(not r.passed for r in results)} check(s) failed")


def main(argv=None):
    """Run the CLI and return its exit code instead of exiting."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", ConfigWarning)
            warnings.showwarning = _show_warning
            cli.main(args=argv, prog_name="omit-lab", standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("error[usage]: aborted", err=True)
        return EXIT_CODES["usage"]
    except click.UsageError as exc:
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        click.echo(f"error[usage]: {exc.format_message()}", err=True)
        return EXIT_CODES["usage"]
    except (OmitError, VerificationFailed) as exc:
        click.echo(f"error[{exc.category}]: {exc}", err=True)
        return EXIT_CODES.get(exc.category, 70)


def _show_warning(message, category, filename, lineno, file=None, line=None):
    click.echo(f"warning[{category.__name__}]: {message}", err=True)


def entry():
    _sys.exit(main())
