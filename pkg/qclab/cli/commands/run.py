import argparse
import asyncio
import logging

from ...core.config import settings
from ...core.exceptions import IdentityEvaluationError, ReportIOError, ScenarioError
from ...models.schemas import ReportFormat
from ...services.verification import harness_service
from ..display import render_summary

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("run", help="Run the checks of one scenario file")
    parser.add_argument("scenario", help="Path to a scenario JSON file")
    parser.add_argument("--out", default=settings.REPORT_DIR, help="Report directory")
    parser.add_argument(
        "--format",
        choices=[fmt.value for fmt in ReportFormat],
        default=ReportFormat.JSON.value,
        help="Report format",
    )
    parser.add_argument("--tol", type=float, default=None, help="Override the analytic tolerance")
    parser.add_argument("--seed", type=int, default=None, help="Override the sampling seed")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    try:
        scenario = harness_service.load_scenario(args.scenario)
        scenario = harness_service.apply_overrides(scenario, args.tol, args.seed)
        report = asyncio.run(harness_service.run_suite(scenario))
        harness_service.emit_report(report, ReportFormat(args.format), args.out)
    except (ScenarioError, ReportIOError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2
    except IdentityEvaluationError as e:
        logger.error(f"Check could not be evaluated: {e}")
        return 1

    render_summary(report)
    return harness_service.exit_code([report])
