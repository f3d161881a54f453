import asyncio
import csv
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from pydantic import ValidationError

from ...core.config import settings
from ...core.exceptions import (
    IdentityEvaluationError,
    QCLabError,
    ReportIOError,
    ScenarioError,
)
from ...models.schemas import (
    CONTINUITY_IDS,
    CURL_IDS,
    DIVERGENCE_IDS,
    BoxRegion,
    CheckId,
    Convention,
    EnvironmentStamp,
    ReportFormat,
    ResidualReport,
    Scenario,
    SpacetimePoint,
    StateKind,
    StateSpec,
    SuiteReport,
    Verdict,
)
from ..correlation.conservation import (
    AngularSplit,
    CoherenceTensors,
    angular_split,
    angular_split_report,
    build_report,
    continuity_residual,
    curl_divergence_residual,
    helicity_residual,
    integral_balance,
    operator_maxwell_residual,
    potential_residual,
    sandwich_residual,
)
from ..correlation.correlators import (
    FixedSlotProducts,
    coherent_factorized,
    evaluate,
    evaluate_many,
    wick_gaussian,
)
from ..quantum.fock import DensityOperator, FockSpace, build_fock_space, make_state
from ..quantum.modes import ModeSet, mode_set_from_spec
from .oracle import DenseTraceOracle, fd_energy_continuity, grid_integral, nyquist_grid

logger = logging.getLogger(__name__)

T = TypeVar("T")

CSV_COLUMNS = [
    "scenario",
    "identity",
    "convention",
    "state",
    "point_index",
    "residual",
    "scale",
    "relative",
    "tolerance",
    "verdict",
]
BUNDLED_PACKAGE = "qclab.scenarios"
INTEGRAL_SAMPLES = 9
FD_ORACLE_POINTS = 3
NAMED = ("E", "H", "M", "N")
# checks evaluated once per (state, convention) on its coherence tensors
TENSOR_CHECKS = [
    check for check in CheckId if check not in (CheckId.EQ2_5, CheckId.HELICITY)
]


@dataclass(frozen=True, eq=False)
class SuiteContext:
    scenario: Scenario
    space: FockSpace
    ms: ModeSet
    sample_points: List[SpacetimePoint]
    times: List[float]
    products: FixedSlotProducts

    @property
    def fixed_points(self) -> List[SpacetimePoint]:
        return self.scenario.fixed_points


@dataclass(frozen=True, eq=False)
class StateJob:
    name: str
    spec: StateSpec
    rho: DensityOperator
    convention: Convention


@dataclass(frozen=True, eq=False)
class JobResult:
    job: StateJob
    reports: List[ResidualReport]
    split: Optional[AngularSplit]


def _fmt(value: float) -> str:
    return f"{value:.17g}"


class HarnessService:
    """Loads scenarios, runs their check suites and writes reports"""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or settings.MAX_WORKERS

    def load_scenario(self, path: str | Path) -> Scenario:
        """Read and validate a scenario file"""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            logger.error(f"Cannot read scenario {path}: {e}")
            raise ScenarioError(f"cannot read {path}: {e}") from e
        return self._parse(text, str(path))

    def load_bundled(self, name: str) -> Scenario:
        resource = resources.files(BUNDLED_PACKAGE) / f"{name}.json"
        if not resource.is_file():
            raise ScenarioError(f"no bundled scenario named '{name}'")
        return self._parse(resource.read_text(encoding="utf-8"), name)

    def bundled_names(self) -> List[str]:
        return sorted(
            entry.name[: -len(".json")]
            for entry in resources.files(BUNDLED_PACKAGE).iterdir()
            if entry.name.endswith(".json")
        )

    def _parse(self, text: str, source: str) -> Scenario:
        try:
            scenario = Scenario.model_validate_json(text)
        except ValidationError as e:
            first = e.errors()[0]
            field_path = ".".join(str(part) for part in first["loc"]) or None
            logger.error(f"Invalid scenario {source}: {field_path}: {first['msg']}")
            raise ScenarioError(first["msg"], field_path) from e
        logger.info(f"Loaded scenario '{scenario.name}' from {source}")
        return scenario

    def apply_overrides(
        self, scenario: Scenario, tolerance: Optional[float] = None, seed: Optional[int] = None
    ) -> Scenario:
        """Command-line overrides: --tol replaces the analytic tolerance, --seed the sampling seed"""
        update = {}
        if tolerance is not None:
            if not tolerance > 0:
                raise ScenarioError(f"must be positive, got {tolerance}", "tolerances.analytic")
            update["tolerances"] = scenario.tolerances.model_copy(update={"analytic": tolerance})
        if seed is not None:
            update["sampling"] = scenario.sampling.model_copy(update={"seed": seed})
        return scenario.model_copy(update=update)

    def _sample_points(self, scenario: Scenario, ms: ModeSet) -> List[SpacetimePoint]:
        if scenario.sample_points is not None:
            return list(scenario.sample_points)
        rng = np.random.default_rng(scenario.sampling.seed)
        count = scenario.sampling.count
        positions = rng.uniform(0.0, ms.box_length, size=(count, 3))
        times = rng.uniform(0.0, ms.longest_period, size=count)
        return [
            SpacetimePoint(r=tuple(float(x) for x in r), t=float(t))
            for r, t in zip(positions, times)
        ]

    def _context(self, scenario: Scenario) -> SuiteContext:
        try:
            ms = mode_set_from_spec(scenario.mode_set)
        except QCLabError as e:
            raise ScenarioError(str(e), "mode_set.modes") from e
        try:
            space = build_fock_space(len(ms), scenario.cutoffs)
        except QCLabError as e:
            raise ScenarioError(str(e), "cutoffs") from e
        times = scenario.integral_times or list(
            np.linspace(0.0, ms.longest_period, INTEGRAL_SAMPLES)
        )
        return SuiteContext(
            scenario=scenario,
            space=space,
            ms=ms,
            sample_points=self._sample_points(scenario, ms),
            times=[float(t) for t in times],
            products=FixedSlotProducts(space, ms),
        )

    def _states(self, context: SuiteContext) -> List[Tuple[str, StateSpec, DensityOperator]]:
        states = []
        for index, named in enumerate(context.scenario.states):
            try:
                rho = make_state(context.space, named.spec)
            except QCLabError as e:
                raise ScenarioError(str(e), f"states.{index}.spec") from e
            states.append((named.name, named.spec, rho))
        return states

    async def run_suite(self, scenario: Scenario) -> SuiteReport:
        """Run every selected check for every state and convention of the scenario"""
        context = self._context(scenario)
        states = self._states(context)
        checks = scenario.selected_checks()
        conventions = scenario.conventions.expand()
        logger.info(
            f"Running '{scenario.name}': {len(states)} states, {len(conventions)} conventions, "
            f"{len(checks)} checks, dim {context.space.dim}"
        )

        reports: List[ResidualReport] = []
        if CheckId.EQ2_5 in checks:
            reports.append(
                self._guarded(
                    CheckId.EQ2_5,
                    "*",
                    operator_maxwell_residual,
                    context.space,
                    context.ms,
                    context.sample_points,
                    scenario.tolerances.identity,
                )
            )

        jobs = [
            StateJob(name, spec, rho, convention)
            for name, spec, rho in states
            for convention in conventions
        ]
        semaphore = asyncio.Semaphore(self.max_workers)

        async def dispatch(job: StateJob) -> JobResult:
            async with semaphore:
                return await asyncio.to_thread(self._run_job, context, job, checks)

        results = await asyncio.gather(*(dispatch(job) for job in jobs))
        for result in results:
            reports.extend(result.reports)

        if CheckId.HELICITY in checks:
            reports.extend(self._helicity_reports(scenario, results))

        reports = self._ordered(reports, scenario)
        failed = any(report.verdict is Verdict.FAIL for report in reports)
        overall = Verdict.FAIL if failed else Verdict.PASS
        logger.info(f"Scenario '{scenario.name}' finished: {overall.value} ({len(reports)} reports)")
        return SuiteReport(
            scenario=scenario.name,
            reports=reports,
            environment=EnvironmentStamp(
                version=settings.VERSION,
                c=context.ms.c,
                hbar=context.ms.hbar,
                amplitude_convention=context.ms.convention,
                continuity_sign=settings.CONTINUITY_SIGN,
            ),
            overall=overall,
        )

    def _guarded(self, check: CheckId, label: str, run: Callable[..., T], *args: Any) -> T:
        try:
            return run(*args)
        except QCLabError as e:
            logger.error(f"Check {check.value} failed on {label}: {e}")
            raise IdentityEvaluationError(check.value, e) from e

    def _run_job(self, context: SuiteContext, job: StateJob, checks: Sequence[CheckId]) -> JobResult:
        label = f"{job.name}/{job.convention.value}"
        tensors = CoherenceTensors.build(
            job.convention,
            job.rho,
            context.space,
            context.ms,
            context.fixed_points,
            context.products,
        )
        split = None
        if CheckId.EQ35 in checks or CheckId.HELICITY in checks:
            split = self._guarded(
                CheckId.EQ35, label, angular_split, tensors, context.scenario.r0
            )

        reports = []
        for check in checks:
            if check not in TENSOR_CHECKS:
                continue
            report = self._guarded(
                check, label, self._run_check, check, context, job, tensors, split
            )
            if report is not None:
                reports.append(report)
        logger.debug(f"Finished {label}: {len(reports)} reports")
        return JobResult(job=job, reports=reports, split=split)

    def _run_check(
        self,
        check: CheckId,
        context: SuiteContext,
        job: StateJob,
        tensors: CoherenceTensors,
        split: Optional[AngularSplit],
    ) -> Optional[ResidualReport]:
        tolerances = context.scenario.tolerances
        points = context.sample_points
        if check in CURL_IDS or check in DIVERGENCE_IDS:
            return curl_divergence_residual(check, tensors, points, tolerances.identity, job.name)
        if check in (CheckId.EQ2_SANDWICH, CheckId.EQ3_SANDWICH):
            return sandwich_residual(check, tensors, points, tolerances.identity, job.name)
        if check in CONTINUITY_IDS:
            return continuity_residual(
                check, tensors, points, tolerances.analytic, context.scenario.r0, state=job.name
            )
        if check in (CheckId.EQ24, CheckId.EQ28):
            region = BoxRegion.FULL_BOX if check is CheckId.EQ24 else BoxRegion.HALF_BOX
            report = integral_balance(
                check,
                tensors,
                region,
                context.times,
                tolerances.analytic,
                tolerances.fd_order_window,
                context.scenario.fd_step,
                state=job.name,
            )
            if check is CheckId.EQ24:
                report = self._with_grid_crosscheck(report, tensors, context)
            return report
        if check is CheckId.EQ29:
            return potential_residual(tensors, tolerances.potential, job.name)
        if check is CheckId.EQ35:
            return angular_split_report(split, job.convention, tolerances.analytic, job.name)
        if check is CheckId.ORACLE_DENSE:
            return self._dense_report(context, job, tensors)
        if check is CheckId.ORACLE_FACTORIZED:
            return self._factorized_report(context, job, tensors)
        if check is CheckId.ORACLE_WICK:
            return self._wick_report(context, job, tensors)
        if check is CheckId.ORACLE_FD_EQ23:
            return self._fd_report(context, job)
        return None

    def _with_grid_crosscheck(
        self, report: ResidualReport, tensors: CoherenceTensors, context: SuiteContext
    ) -> ResidualReport:
        """Rectangle-rule energy integral at the first time next to the exact one"""
        t0 = context.times[0]

        def energy(points: List[SpacetimePoint]) -> np.ndarray:
            e = evaluate_many(tensors.ebb, points)
            s = evaluate_many(tensors.sbb, points)
            passive = tuple(range(1, e.ndim))
            return np.sum(np.abs(e) ** 2, axis=passive) + np.sum(np.abs(s) ** 2, axis=passive)

        grid = float(grid_integral(energy, context.ms.box_length, nyquist_grid(context.ms), t0))
        exact = report.extras["initial_norm"]
        extras = dict(report.extras)
        extras["grid_integral"] = grid
        extras["grid_relative_difference"] = abs(grid - exact) / exact if exact else abs(grid)
        return report.model_copy(update={"extras": extras})

    def _compare(
        self,
        check: CheckId,
        job: StateJob,
        context: SuiteContext,
        tensors: CoherenceTensors,
        reference,
        tolerance: float,
    ) -> ResidualReport:
        """Per-point comparison of the named tensors against another evaluation path"""
        residuals = []
        scale = 0.0
        for p in context.sample_points:
            worst = 0.0
            for name in NAMED:
                main = evaluate(tensors.fields[name], p)
                other = reference(name, [p, *context.fixed_points])
                worst = max(worst, float(np.linalg.norm(main - other)))
                scale = max(scale, float(np.linalg.norm(main)), float(np.linalg.norm(other)))
            residuals.append(worst)
        return build_report(
            check,
            job.convention,
            job.name,
            max(residuals, default=0.0),
            scale,
            tolerance,
            points=context.sample_points,
            point_residuals=residuals,
        )

    def _dense_report(
        self, context: SuiteContext, job: StateJob, tensors: CoherenceTensors
    ) -> ResidualReport:
        oracle = DenseTraceOracle(job.rho, context.space, context.ms)

        def reference(name: str, points: List[SpacetimePoint]) -> np.ndarray:
            return oracle.correlator(tensors.fields[name].pattern, points)

        return self._compare(
            CheckId.ORACLE_DENSE, job, context, tensors, reference, context.scenario.tolerances.oracle
        )

    def _factorized_report(
        self, context: SuiteContext, job: StateJob, tensors: CoherenceTensors
    ) -> Optional[ResidualReport]:
        if job.spec.kind is not StateKind.COHERENT:
            return None
        amplitudes = [complex(re, im) for re, im in job.spec.amplitudes]

        def reference(name: str, points: List[SpacetimePoint]) -> np.ndarray:
            return coherent_factorized(amplitudes, context.ms, tensors.fields[name].pattern, points)

        return self._compare(
            CheckId.ORACLE_FACTORIZED,
            job,
            context,
            tensors,
            reference,
            context.scenario.tolerances.factorization,
        )

    def _wick_report(
        self, context: SuiteContext, job: StateJob, tensors: CoherenceTensors
    ) -> Optional[ResidualReport]:
        if job.spec.kind is StateKind.THERMAL:
            moments = np.diag(np.asarray(job.spec.mean_photons, dtype=complex))
        elif job.spec.kind is StateKind.VACUUM:
            moments = np.zeros((len(context.ms), len(context.ms)), dtype=complex)
        else:
            return None

        def reference(name: str, points: List[SpacetimePoint]) -> np.ndarray:
            return wick_gaussian(moments, context.ms, tensors.fields[name].pattern, points)

        return self._compare(
            CheckId.ORACLE_WICK, job, context, tensors, reference, context.scenario.tolerances.wick
        )

    def _fd_report(self, context: SuiteContext, job: StateJob) -> ResidualReport:
        oracle = DenseTraceOracle(job.rho, context.space, context.ms)
        low, high = context.scenario.tolerances.fd_order_window
        points = context.sample_points[:FD_ORACLE_POINTS]
        extras: Dict[str, float] = {}
        finest = []
        passed = True
        for index, p in enumerate(points):
            result = fd_energy_continuity(oracle, job.convention, context.fixed_points, p)
            finest.append(result.residuals[-1])
            estimate = result.estimate
            if estimate.floor_reached:
                extras[f"floor_reached_{index}"] = 1.0
            else:
                extras[f"order_{index}"] = estimate.order
                passed = passed and low <= estimate.order <= high
        return build_report(
            CheckId.ORACLE_FD_EQ23,
            job.convention,
            job.name,
            max(finest, default=0.0),
            1.0,
            context.scenario.tolerances.analytic,
            points=points,
            point_residuals=finest,
            extras=extras,
            passed=passed,
            note="residuals are relative at the finest step; verdict is the convergence order",
        )

    def _helicity_reports(
        self, scenario: Scenario, results: Sequence[JobResult]
    ) -> List[ResidualReport]:
        splits = {(r.job.name, r.job.convention): r.split for r in results}
        reports = []
        for first, second in scenario.helicity_pairs:
            for convention in scenario.conventions.expand():
                left, right = splits.get((first, convention)), splits.get((second, convention))
                if left is None or right is None:
                    continue
                reports.append(
                    helicity_residual(
                        left, right, convention, (first, second), scenario.tolerances.analytic
                    )
                )
        return reports

    def _ordered(self, reports: List[ResidualReport], scenario: Scenario) -> List[ResidualReport]:
        check_order = {check: i for i, check in enumerate(CheckId)}
        state_order = {"*": -1}
        state_order.update({named.name: i for i, named in enumerate(scenario.states)})
        for offset, pair in enumerate(scenario.helicity_pairs):
            state_order[f"{pair[0]}|{pair[1]}"] = len(scenario.states) + offset
        convention_order = {None: 0, Convention.PRINTED_22: 1, Convention.DERIVATION_13: 2}
        return sorted(
            reports,
            key=lambda r: (
                check_order[r.identity],
                state_order.get(r.state, len(state_order)),
                convention_order[r.convention],
            ),
        )

    def emit_report(self, report: SuiteReport, fmt: ReportFormat, out_dir: str | Path) -> Path:
        """Write `report` as <out_dir>/<scenario>.<fmt> and return the path"""
        out_dir = Path(out_dir)
        path = out_dir / f"{report.scenario}.{fmt.value}"
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            if fmt is ReportFormat.JSON:
                path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
            else:
                with path.open("w", newline="", encoding="utf-8") as handle:
                    writer = csv.writer(handle, lineterminator="\n")
                    writer.writerow(CSV_COLUMNS)
                    writer.writerows(self.csv_rows(report))
        except OSError as e:
            logger.error(f"Failed to write report {path}: {e}")
            raise ReportIOError(f"cannot write {path}: {e}") from e
        logger.info(f"Wrote {fmt.value} report to {path}")
        return path

    def csv_rows(self, report: SuiteReport) -> List[List[str]]:
        """One row per evaluated point; point-free checks give a single row"""
        rows = []
        for r in report.reports:
            head = [
                report.scenario,
                r.identity.value,
                r.convention.value if r.convention else "",
                r.state,
            ]
            tail = [_fmt(r.tolerance), r.verdict.value]
            if r.point_residuals:
                for index, residual in enumerate(r.point_residuals):
                    relative = residual / r.scale if r.scale else residual
                    rows.append(
                        head + [str(index), _fmt(residual), _fmt(r.scale), _fmt(relative)] + tail
                    )
            else:
                rows.append(
                    head + ["", _fmt(r.residual_norm), _fmt(r.scale), _fmt(r.relative)] + tail
                )
        return rows

    @staticmethod
    def exit_code(reports: Sequence[SuiteReport]) -> int:
        return 1 if any(report.overall is Verdict.FAIL for report in reports) else 0


harness_service = HarnessService()
