import argparse
import asyncio
import logging

from ...core.config import settings
from ...core.exceptions import IdentityEvaluationError, ReportIOError, ScenarioError
from ...models.schemas import ReportFormat, SuiteReport
from ...services.verification import harness_service
from ..display import render_summary

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("demo", help="Run every bundled scenario")
    parser.add_argument("--out", default=settings.REPORT_DIR, help="Report directory")
    parser.add_argument(
        "--format",
        choices=[fmt.value for fmt in ReportFormat],
        default=ReportFormat.JSON.value,
        help="Report format",
    )
    parser.set_defaults(handler=handle)


async def run_bundled() -> list[SuiteReport]:
    reports = []
    for name in harness_service.bundled_names():
        scenario = harness_service.load_bundled(name)
        reports.append(await harness_service.run_suite(scenario))
    return reports


def handle(args: argparse.Namespace) -> int:
    try:
        reports = asyncio.run(run_bundled())
        for report in reports:
            harness_service.emit_report(report, ReportFormat(args.format), args.out)
    except (ScenarioError, ReportIOError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2
    except IdentityEvaluationError as e:
        logger.error(f"Check could not be evaluated: {e}")
        return 1

    for report in reports:
        render_summary(report)
    return harness_service.exit_code(reports)
