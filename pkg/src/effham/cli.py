"""
Command Line Interface for effham
"""
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np
from rich.console import Console
from rich.table import Table

from .config import load_config, set_settings
from .exceptions import EffHamError, PreconditionError
from .models.lindblad import LindbladModel
from .models.scan import ScanGrid
from .models.two_band import TwoBandParams
from .reporting.heatmap import render_heatmap
from .reporting.tables import trajectory_frame, two_band_frame
from .solvers.adiabatic import scan as run_scan
from .solvers.generalized import (
    ddfs_check_generalized,
    generalized_damping_basis,
    propagate_blocks,
)
from .solvers.geometric_phase import (
    default_invariant,
    geometric_phase_adiabatic,
    geometric_phase_cyclic,
    geometric_phase_noncyclic,
    propagate_invariant,
)
from .solvers.lindblad import damping_basis, ddfs_check, steady_states, trajectory
from .solvers.two_band import EXCITED, GROUND, ZERO, build_model, closed_form_solution
from .utils.data_loader import DataLoader
from .utils.logging_config import run_context, setup_logging

logger = logging.getLogger(__name__)

# Results go to stdout; everything for humans goes to stderr
console = Console(stderr=True)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class EffHamGroup(click.Group):
    """Command group that turns domain errors into JSON diagnostics (exit 1)"""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except EffHamError as e:
            click.echo(json.dumps(e.to_dict()), err=True)
            ctx.exit(1)
        except np.linalg.LinAlgError as e:
            click.echo(json.dumps({"error": "LINALG", "message": str(e), "field": None}), err=True)
            ctx.exit(1)


def _emit(text: str, out: Optional[str], loader: DataLoader) -> None:
    """Write ``text`` to ``out`` or to stdout"""
    if out:
        loader.write_text(out, text)
    else:
        click.echo(text, nl=False)


def _summary(title: str, rows: Dict[str, Any]) -> None:
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")
    for key, value in rows.items():
        table.add_row(key, str(value))
    console.print(table)


def _time_grid(t0: float, t1: float, steps: int) -> np.ndarray:
    if t1 < t0:
        raise PreconditionError(f"t1 ({t1}) must not precede t0 ({t0})", field="t1")
    return np.linspace(t0, t1, steps + 1)


@click.group(cls=EffHamGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="JSON file with tolerance overrides (default: config/effham.json if present)")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default="WARNING",
              show_default=True, help="Logging level")
@click.option("--log-json", is_flag=True, help="Emit JSON log records")
@click.option("--log-file", type=click.Path(dir_okay=False), default=None, help="Also log to this file")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], log_level: str, log_json: bool, log_file: Optional[str]) -> None:
    """effham - effective-Hamiltonian solver for open quantum systems"""
    ctx.ensure_object(dict)
    setup_logging(log_level=log_level, log_file=log_file, use_json=log_json)
    ctx.obj["correlation_id"] = ctx.with_resource(run_context())

    settings = load_config(config_path)
    set_settings(settings)
    ctx.obj["settings"] = settings
    ctx.obj["loader"] = DataLoader()
    logger.debug(f"Command {ctx.invoked_subcommand}", extra={"command": ctx.invoked_subcommand})


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False), help="Markovian model JSON")
@click.option("--initial", "initial_path", required=True, type=click.Path(dir_okay=False), help="Initial density matrix JSON")
@click.option("--t0", default=0.0, show_default=True, type=float, help="Start time")
@click.option("--t1", required=True, type=float, help="End time")
@click.option("--steps", default=100, show_default=True, type=click.IntRange(min=1), help="Number of time steps")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV output path (stdout if omitted)")
@click.pass_context
def solve(ctx: click.Context, model_path: str, initial_path: str, t0: float, t1: float, steps: int, out: Optional[str]) -> None:
    """Propagate a density matrix under a Markovian model"""
    loader: DataLoader = ctx.obj["loader"]
    model = loader.load_model(model_path)
    rho0 = loader.load_state(initial_path, dim=model.dim)
    times = _time_grid(t0, t1, steps)
    states = trajectory(model, rho0, times)
    _emit(loader.write_csv(trajectory_frame(times, states)), out, loader)

    if out:
        final = states[-1]
        _summary("Trajectory", {
            "N": model.dim,
            "steps": steps,
            "final trace": f"{np.trace(final).real:.12g}",
            "final purity": f"{np.trace(final @ final).real:.12g}",
            "output": out,
        })


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False), help="Markovian model JSON")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON output path")
@click.pass_context
def steady(ctx: click.Context, model_path: str, out: Optional[str]) -> None:
    """Steady states (zero modes of the effective Hamiltonian)"""
    loader: DataLoader = ctx.obj["loader"]
    model = loader.load_model(model_path)
    states = steady_states(model)
    _emit(loader.dumps({"steady_states": [s.to_dict() for s in states]}), out, loader)
    if out:
        _summary("Steady states", {
            "count": len(states),
            "traceless": sum(s.traceless for s in states),
            "output": out,
        })


def _load_either(loader: DataLoader, model_path: Optional[str], generalized_path: Optional[str]) -> Any:
    if bool(model_path) == bool(generalized_path):
        raise click.UsageError("Give exactly one of --model and --generalized-model")
    if model_path:
        return loader.load_model(model_path)
    return loader.load_generalized_model(generalized_path)  # type: ignore[arg-type]


@cli.command("damping-basis")
@click.option("--model", "model_path", type=click.Path(dir_okay=False), default=None, help="Markovian model JSON")
@click.option("--generalized-model", "generalized_path", type=click.Path(dir_okay=False), default=None,
              help="Generalized model JSON")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON output path")
@click.pass_context
def damping_basis_cmd(ctx: click.Context, model_path: Optional[str], generalized_path: Optional[str], out: Optional[str]) -> None:
    """Right/left eigen-operators and decay rates"""
    loader: DataLoader = ctx.obj["loader"]
    model = _load_either(loader, model_path, generalized_path)
    if isinstance(model, LindbladModel):
        basis: Any = damping_basis(model)
    else:
        basis = generalized_damping_basis(model)
    _emit(loader.dumps(basis.to_dict()), out, loader)
    if out:
        rates = sorted({round(float(lam.real), 9) for lam in basis.eigenvalues}, reverse=True)
        _summary("Damping basis", {"members": len(basis), "decay rates": rates, "output": out})


@cli.command("ddfs-check")
@click.option("--model", "model_path", type=click.Path(dir_okay=False), default=None, help="Markovian model JSON")
@click.option("--generalized-model", "generalized_path", type=click.Path(dir_okay=False), default=None,
              help="Generalized model JSON")
@click.option("--basis", "basis_path", required=True, type=click.Path(dir_okay=False), help="Candidate basis JSON")
@click.option("--tol", default=1e-10, show_default=True, type=float, help="Residual tolerance")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON output path")
@click.pass_context
def ddfs_check_cmd(ctx: click.Context, model_path: Optional[str], generalized_path: Optional[str],
                   basis_path: str, tol: float, out: Optional[str]) -> None:
    """Check whether a basis spans a decoherence-free subspace"""
    loader: DataLoader = ctx.obj["loader"]
    model = _load_either(loader, model_path, generalized_path)
    basis = loader.load_basis(basis_path)
    if isinstance(model, LindbladModel):
        report = ddfs_check(model, basis, tol)
    else:
        report = ddfs_check_generalized(model, basis, tol)
    _emit(loader.dumps(report.to_dict()), out, loader)
    if out:
        _summary("DDFS check", {
            "verdict": report.verdict,
            "max residual": f"{report.max_residual:.3e}",
            "output": out,
        })


@cli.command("geom-phase")
@click.option("--generator", "generator_path", required=True, type=click.Path(dir_okay=False),
              help="Sampled effective Hamiltonian JSON")
@click.option("--mode", type=click.Choice(["adiabatic", "cyclic", "noncyclic"]), default="adiabatic",
              show_default=True, help="Eigen-tracks of the generator or of a propagated invariant")
@click.option("--invariant", "invariant_path", type=click.Path(dir_okay=False), default=None,
              help="Initial invariant JSON (default: generator at the first time)")
@click.option("--resolver", "resolver_path", type=click.Path(dir_okay=False), default=None,
              help="Commuting operator trajectory splitting degenerate clusters (adiabatic mode)")
@click.option("--track", "tracks", type=int, multiple=True, help="Track index; repeatable (default: all)")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON output path")
@click.pass_context
def geom_phase(ctx: click.Context, generator_path: str, mode: str, invariant_path: Optional[str],
               resolver_path: Optional[str], tracks: Sequence[int], out: Optional[str]) -> None:
    """Geometric and dynamical phases along eigen-tracks"""
    loader: DataLoader = ctx.obj["loader"]
    gen = loader.load_generator(generator_path)
    selected: List[int] = list(tracks) or list(range(gen.dim))

    if mode == "adiabatic":
        resolver = loader.load_generator(resolver_path) if resolver_path else None

        def phase(j: int) -> Any:
            return geometric_phase_adiabatic(gen, j, resolver)
    else:
        i0 = loader.load_state(invariant_path, dim=gen.dim) if invariant_path else default_invariant(gen)
        traj = propagate_invariant(gen, i0)
        phase_fn = geometric_phase_cyclic if mode == "cyclic" else geometric_phase_noncyclic
        logger.info(f"Invariant defect {traj.defect:.3e}")

        def phase(j: int) -> Any:
            return phase_fn(traj, j)

    records: List[Dict[str, Any]] = []
    for j in selected:
        try:
            records.append(phase(j).to_dict())
        except EffHamError as e:
            if tracks:
                raise
            records.append({"track": j, **e.to_dict()})
            logger.warning(f"Track {j} skipped: {e.message}", extra={"track": j})

    _emit(loader.dumps({"mode": mode, "phases": records}), out, loader)
    if out:
        table = Table(title=f"Geometric phases ({mode})", header_style="bold magenta")
        for column in ("track", "geometric", "noncyclic", "dynamical_im"):
            table.add_column(column, style="cyan" if column == "track" else "green")
        for rec in records:
            if "error" in rec:
                table.add_row(str(rec["track"]), f"[red]{rec['error']}[/red]", "", "")
            else:
                table.add_row(str(rec["track"]), f"{rec['geometric']:.6f}", f"{rec['noncyclic']:.6f}",
                              f"{rec['dynamical_im']:.6f}")
        console.print(table)


@cli.command("scan")
@click.option("--config", "scan_path", required=True, type=click.Path(dir_okay=False), help="Scan configuration JSON")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV output path (stdout if omitted)")
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), default=None, help="Gamma heatmap SVG path")
@click.option("--svg-fidelity", "svg_fidelity_path", type=click.Path(dir_okay=False), default=None,
              help="1 - F heatmap SVG path")
@click.option("--jobs", default=1, show_default=True, type=click.IntRange(min=1), help="Worker processes")
@click.pass_context
def scan_cmd(ctx: click.Context, scan_path: str, out: Optional[str], svg_path: Optional[str],
             svg_fidelity_path: Optional[str], jobs: int) -> None:
    """Adiabaticity scan of the ramped two-band model"""
    loader: DataLoader = ctx.obj["loader"]
    config = loader.load_scan_config(scan_path)
    grid: ScanGrid = run_scan(config, jobs=jobs)

    _emit(loader.write_csv(grid.to_frame()), out, loader)
    if svg_path:
        loader.write_text(svg_path, render_heatmap(grid, "Gamma"))
    if svg_fidelity_path:
        loader.write_text(svg_fidelity_path, render_heatmap(grid, "OneMinusF"))

    if out:
        _summary("Adiabaticity scan", {
            "cells": grid.shape[0] * grid.shape[1],
            "failed cells": len(grid.errors),
            "max Gamma": f"{np.nanmax(grid.gamma_cap):.4g}" if np.isfinite(grid.gamma_cap).any() else "n/a",
            "max 1 - F": f"{np.nanmax(grid.infidelity):.4g}" if np.isfinite(grid.infidelity).any() else "n/a",
            "output": out,
        })


@cli.command("two-band")
@click.option("--gamma1", required=True, type=float, help="Rate gamma1 (upper to lower band)")
@click.option("--gamma2", required=True, type=float, help="Rate gamma2 (lower to upper band)")
@click.option("--initial-upper", default=1.0, show_default=True, type=click.FloatRange(0.0, 1.0),
              help="Initial excited-level population of the qubit")
@click.option("--initial-band", type=click.Choice(["lower", "upper"]), default="lower", show_default=True,
              help="Environment band holding the initial state")
@click.option("--t0", default=0.0, show_default=True, type=float, help="Start time")
@click.option("--t1", required=True, type=float, help="End time")
@click.option("--steps", default=100, show_default=True, type=click.IntRange(min=1), help="Number of time steps")
@click.option("--numeric", is_flag=True, help="Propagate the block generator instead of the closed form")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV output path (stdout if omitted)")
@click.pass_context
def two_band(ctx: click.Context, gamma1: float, gamma2: float, initial_upper: float, initial_band: str,
             t0: float, t1: float, steps: int, numeric: bool, out: Optional[str]) -> None:
    """Dissipative qubit coupled to a two-band environment"""
    loader: DataLoader = ctx.obj["loader"]
    params = TwoBandParams(gamma1=gamma1, gamma2=gamma2)
    rho = initial_upper * EXCITED + (1.0 - initial_upper) * GROUND
    rhos0 = (rho, ZERO) if initial_band == "lower" else (ZERO, rho)
    times = _time_grid(t0, t1, steps)

    if numeric:
        model = build_model(params)
        pairs = [tuple(propagate_blocks(model, rhos0, t - t0)) for t in times]
    else:
        pairs = [closed_form_solution(params, rhos0, t - t0) for t in times]

    frame = two_band_frame(times, pairs)  # type: ignore[arg-type]
    _emit(loader.write_csv(frame), out, loader)
    if out:
        last = frame.iloc[-1]
        _summary("Two-band model", {
            "gamma1": gamma1,
            "gamma2": gamma2,
            "method": "numeric" if numeric else "closed form",
            "rho1_ee(t1)": f"{last['rho1_ee']:.12g}",
            "rho2_gg(t1)": f"{last['rho2_gg']:.12g}",
            "output": out,
        })


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI and return its exit code

    0 on success, 1 on domain errors (JSON diagnostics on stderr), 2 on
    usage errors.
    """
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="effham", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return rv if isinstance(rv, int) else 0


def main() -> None:
    """Main entry point"""
    sys.exit(run())


if __name__ == "__main__":
    main()
