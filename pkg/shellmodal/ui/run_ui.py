"""
Run, analytical-table and verification commands with Rich UI.
"""

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from rich import box
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from ..core.material import BENDING_PRESETS, GRAPHENE_DENSITY
from ..errors import AnalyticalError
from ..services.analytical import PlateSpec, frequency_table
from ..services.scenarios import RunOutcome, run, run_worker
from ..services.solvers import ModalResult, ModalStep
from ..services.verification import CHECKS, run_checks
from ..utils.export import write_frequency_csv
from ..utils.formatting import (
    format_frequency,
    format_full_precision,
    format_relative_error,
    format_signed_frequency,
)
from .console import console, print_error

STATUS_STYLE = {"complete": "green", "unstable": "yellow", "failed": "red", "invalid": "red"}


# ==========================================
# run
# ==========================================
def _spectrum_table(step: ModalStep, title: str) -> Table:
    table = Table(title=title, box=box.ROUNDED, header_style="bold cyan")
    table.add_column("#", style="dim", width=4)
    table.add_column("Mode", style="bold white")
    table.add_column("f (THz)", justify="right")
    table.add_column("omega^2 (1/ps^2)", justify="right", style="dim")
    for index, (label, omega2) in enumerate(zip(step.labels, step.omega2), 1):
        text = format_signed_frequency(omega2)
        style = "bold red" if omega2 < 0.0 else "white"
        table.add_row(str(index), label, f"[{style}]{text}[/{style}]", f"{omega2:.6g}")
    return table


def _instability_table(result: ModalResult) -> Table:
    table = Table(title="Instabilities", box=box.ROUNDED, header_style="bold yellow")
    table.add_column("Mode", style="bold white")
    table.add_column("Kind", style="cyan")
    table.add_column(result.program.kind, justify="right")
    for item in result.instabilities:
        table.add_row(item.label, item.kind, f"{item.parameter:.6g}")
    return table


def display_outcome(outcome: RunOutcome, path: str) -> None:
    """Summary panel, last spectrum and flagged instabilities of one run."""
    if outcome.config is None:
        print_error(outcome.message, outcome.module, title=f"Invalid configuration: {path}")
        return
    style = STATUS_STYLE.get(outcome.status, "white")
    lines = [
        f"[bold]{outcome.config.name}[/bold]  ({outcome.config.scenario})",
        f"Status: [{style}]{outcome.status}[/{style}]   exit {outcome.exit_status}   {outcome.wall_time_s:.1f} s",
        f"Output: {outcome.directory}",
    ]
    console.print(Panel("\n".join(lines), title="Run", border_style=style, box=box.ROUNDED))

    if outcome.table:
        console.print(_table_view(outcome.table, "Analytical frequencies"))
    result = outcome.result
    if result is not None and result.steps:
        last = result.steps[-1]
        title = f"Spectrum at {result.program.kind} = {last.parameter:.6g} (step {last.index})"
        console.print(_spectrum_table(last, title))
        if result.instabilities:
            console.print(_instability_table(result))
    if outcome.status == "failed":
        print_error(outcome.message, outcome.module, title="Solver failure (partial outputs kept)")


def _run_parallel(paths: Sequence[str], output: Optional[str], jobs: int) -> int:
    table = Table(title=f"Runs ({len(paths)})", box=box.ROUNDED, header_style="bold cyan")
    table.add_column("Config", style="bold white")
    table.add_column("Status", justify="center")
    table.add_column("Exit", justify="right")
    table.add_column("Message", style="dim")
    worst = 0
    with console.status(f"[bold green]Running {len(paths)} configurations on {jobs} workers...", spinner="dots"):
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = [str(Path(output) / Path(p).stem) if output else None for p in paths]
            results = list(pool.map(run_worker, paths, outputs))
    for path, status, exit_status, message in results:
        style = STATUS_STYLE.get(status, "white")
        table.add_row(path, f"[{style}]{status}[/{style}]", str(exit_status), message[:80])
        worst = max(worst, exit_status)
    console.print(table)
    return worst


def cmd_run(paths: Sequence[str], output: Optional[str] = None, jobs: int = 1) -> int:
    """
    Run configuration files and show their summaries.

    Args:
        paths: Config files
        output: Output directory override (one subdirectory per config when several)
        jobs: Worker processes for several configs

    Returns:
        Highest exit status of the runs
    """
    if not paths:
        print_error("at least one config file is required", "cli")
        return 2
    if jobs > 1 and len(paths) > 1:
        return _run_parallel(paths, output, jobs)

    worst = 0
    for path in paths:
        target = None
        if output:
            target = Path(output) / Path(path).stem if len(paths) > 1 else Path(output)
        with console.status(f"[bold green]Running {path}...", spinner="dots") as status:

            def progress(step: ModalStep, status=status, path=path):
                status.update(f"[bold green]{path}: step {step.index} at {step.parameter:.6g}")

            outcome = run(path, target, progress)
        display_outcome(outcome, path)
        worst = max(worst, outcome.exit_status)
    return worst


# ==========================================
# analytical
# ==========================================
def _table_view(rows: List[Dict[str, float]], title: str) -> Table:
    table = Table(title=title, box=box.ROUNDED, header_style="bold cyan")
    table.add_column("m", justify="right")
    table.add_column("n", justify="right")
    table.add_column("gamma", justify="right", style="dim")
    table.add_column("omega (rad/ps)", justify="right")
    table.add_column("f (THz)", justify="right", style="bold white")
    for row in rows:
        gamma = "-" if row["gamma"] != row["gamma"] else f"{row['gamma']:.8f}"
        table.add_row(str(row["m"]), str(row["n"]), gamma, f"{row['omega']:.6f}", format_frequency(row["f_THz"]))
    return table


def cmd_analytical(options: Dict[str, str]) -> int:
    """
    Closed-form frequency table of a plate.

    Options: shape (rectangle | circle), size (edge or radius in nm), b,
    boundary, bending preset or c (nN nm), modes (row count), csv (output path).
    """
    try:
        bending = options.get("bending", "QM").upper()
        if bending not in BENDING_PRESETS:
            raise AnalyticalError(f"unknown bending preset '{bending}' (choose from {', '.join(BENDING_PRESETS)})")
        c_bend = float(options["c"]) if "c" in options else BENDING_PRESETS[bending]
        spec = PlateSpec(
            shape=options.get("shape", "rectangle"),
            a=float(options.get("size", 5.0)),
            b=float(options["b"]) if "b" in options else None,
            boundary=options.get("boundary", "simply-supported" if options.get("shape", "rectangle") == "rectangle" else "clamped"),
            c_bend=c_bend,
            rho=GRAPHENE_DENSITY,
        )
        rows = frequency_table(spec, int(options.get("modes", 9)))
    except ValueError as exc:
        print_error(f"invalid option value: {exc}", "cli")
        return 2
    except AnalyticalError as exc:
        print_error(exc.message, exc.module)
        return 2

    title = f"{spec.boundary} {spec.shape}, a = {spec.a:g} nm, c = {spec.c_bend:g} nN nm"
    console.print(_table_view(rows, title))
    if "csv" in options:
        path = write_frequency_csv(rows, options["csv"], ("m", "n", "gamma", "omega", "f_THz"))
        console.print(f"[dim]Wrote {path}[/dim]")
    return 0


# ==========================================
# verify
# ==========================================
def cmd_verify(names: Sequence[str] = ()) -> int:
    """Run the built-in oracle checks; exit 0 when all pass."""
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        print_error(f"unknown check(s): {', '.join(unknown)} (choose from {', '.join(CHECKS)})", "verification")
        return 2
    with console.status("[bold green]Running verification checks...", spinner="dots") as status:
        results = run_checks(names, on_result=lambda item: status.update(f"[bold green]{item.name}"))

    table = Table(title=f"Verification ({len(results)} checks)", box=box.ROUNDED, header_style="bold cyan")
    table.add_column("Group", style="dim")
    table.add_column("Check", style="bold white")
    table.add_column("Value", justify="right")
    table.add_column("Expected", justify="right")
    table.add_column("Deviation", justify="right")
    table.add_column("Result", justify="center")
    for item in results:
        verdict = "[bold green]PASS[/bold green]" if item.passed else "[bold red]FAIL[/bold red]"
        deviation = format_relative_error(item.value, item.expected) if item.expected else f"{item.value:.2e}"
        table.add_row(item.group, item.name, format_full_precision(item.value)[:12], f"{item.expected:.6g}", deviation, verdict)
        if item.detail:
            table.add_row("", Text(item.detail, style="red"), "", "", "", "")
    console.print(table)

    failed = sum(not item.passed for item in results)
    if failed:
        console.print(Panel(f"{failed} of {len(results)} checks failed", style="bold red", box=box.ROUNDED))
        return 1
    console.print(Panel(f"All {len(results)} checks passed", style="bold green", box=box.ROUNDED))
    return 0
