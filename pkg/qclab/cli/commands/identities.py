import argparse

from rich.table import Table

from ...core.logging import console
from ...models.schemas import CHECK_DESCRIPTIONS, CheckId, Convention
from ...services.correlation.conservation import is_pass_fail


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("list-identities", help="List every check with its equation")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    table = Table(title="qclab checks")
    table.add_column("id", style="bold")
    table.add_column("equation")
    table.add_column("printed_22")
    for check in CheckId:
        mode = "pass/fail" if is_pass_fail(check, Convention.PRINTED_22) else "reported-only"
        table.add_row(check.value, CHECK_DESCRIPTIONS[check], mode)
    console.print(table)
    return 0
