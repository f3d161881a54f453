from rich.table import Table

from ..core.logging import console
from ..models.schemas import SuiteReport, Verdict

VERDICT_STYLES = {
    Verdict.PASS: "green",
    Verdict.FAIL: "bold red",
    Verdict.REPORTED_ONLY: "yellow",
}


def render_summary(report: SuiteReport) -> None:
    """One line per check report, then the overall verdict"""
    table = Table(title=f"{report.scenario}", show_lines=False)
    table.add_column("identity")
    table.add_column("convention")
    table.add_column("state")
    table.add_column("relative", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("verdict")
    for r in report.reports:
        style = VERDICT_STYLES[r.verdict]
        table.add_row(
            r.identity.value,
            r.convention.value if r.convention else "-",
            r.state,
            f"{r.relative:.3e}",
            f"{r.tolerance:.1e}",
            f"[{style}]{r.verdict.value}[/{style}]",
        )
    console.print(table)
    style = VERDICT_STYLES[report.overall]
    console.print(f"overall: [{style}]{report.overall.value}[/{style}]")
