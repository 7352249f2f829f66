"""Monte Carlo orchestration: config loading, trial pool, sweeps, summaries and checks."""

import asyncio
import logging
import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import uuid
from dataclasses import dataclass, field
from importlib import resources
try:
    from importlib.resources.abc import Traversable
except ModuleNotFoundError:  # Python < 3.11
    from importlib.abc import Traversable
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd
import tomli_w
from pydantic import ValidationError

from .channel import generate_scenario_channels, rayleigh_channel_set
from .classes import CSV_COLUMNS, ResultRow, ScenarioConfig, TrialInput
from .classes.config import SweepParameter
from .errors import ConfigParseError, ConfigValidationError, NonmonotoneDetected
from .graph import TrialGraph
from .lipschitz import empirical_lipschitz_ratio, product_difference_gap, lipschitz_bound, random_feasible_point
from .objective import (
    ChannelSet,
    LinkBudget,
    MultiHopChannels,
    ParallelChannels,
    achievable_rate,
    composite_channel,
    evaluate,
    grad_F,
    grad_phi_multihop,
    grad_phi_parallel,
    objective_f,
)
from .optimizer import InitialPoint, OptimizerConfig, RunReport, jpr_mapg, jpr_pg
from .services.progress import ProgressManager
from .services.results import read_results
from .utils.seeding import make_rng, trial_seed

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 4
GRADIENT_TOLERANCE = 1e-5
FD_STEP = 1e-5
RESIDUAL_DECAY_TARGET = 1e-6
# Sweeps that leave the geometry alone reuse each trial's channels across values
COMMON_CHANNEL_PARAMETERS = ("p_tx_dbm", "quant_bits")
NO_SWEEP = ("none", "-")
NUMERIC_COLUMNS = ("rate_bps_hz", "rate_quantized_bps_hz", "iterations", "lipschitz_L", "alpha", "wall_ms")

__all__ = [
    "ResultRow",
    "load_config",
    "dump_config",
    "validate_config",
    "apply_sweep_value",
    "run_monte_carlo",
    "sweep",
    "summarize",
    "check_gradients",
    "audit_properties",
]


def default_workers() -> int:
    value = os.getenv("RIS_OPT_WORKERS")
    if not value:
        return DEFAULT_WORKERS
    try:
        return max(1, int(value))
    except ValueError:
        logger.warning(f"Ignoring non-integer RIS_OPT_WORKERS={value!r}")
        return DEFAULT_WORKERS


def resolve_config_path(path: str | Path) -> Path | Traversable:
    """Path on disk, or a bundled preset looked up by bare name."""
    candidate = Path(path)
    if candidate.exists():
        return candidate
    name = candidate.name if candidate.suffix == ".toml" else f"{candidate.name}.toml"
    preset = resources.files("risopt.presets") / name
    if preset.is_file():
        return preset
    raise ConfigParseError(f"Config file {path} not found (and no bundled preset named {name})")


def validate_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        paths = [".".join(str(part) for part in err["loc"]) for err in e.errors()]
        raise ConfigValidationError(f"Invalid scenario config: {e}", paths) from e


def load_config(path: str | Path) -> ScenarioConfig:
    source = resolve_config_path(path)
    try:
        data = tomllib.loads(source.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as e:
        raise ConfigParseError(f"Cannot parse {path}: {e}") from e
    cfg = validate_config(data)
    logger.info(f"Loaded scenario {cfg.name!r} from {path}")
    return cfg


def dump_config(cfg: ScenarioConfig) -> str:
    """Fully defaulted TOML; loading it back gives an equal config."""
    return tomli_w.dumps(cfg.model_dump(mode="json", exclude_none=True))


def _is_inf(value: float | str) -> bool:
    return value == "inf" or (isinstance(value, float) and math.isinf(value))


def apply_sweep_value(cfg: ScenarioConfig, parameter: SweepParameter, value: float | str) -> ScenarioConfig:
    """Copy of cfg with one sweep parameter set; the result is re-validated."""
    data = cfg.model_dump()
    if parameter == "quant_bits":
        if _is_inf(value):
            data["optimizer"]["quant_bits"] = None
        else:
            if float(value) != int(float(value)):
                raise ConfigValidationError(f"quant_bits must be integral, got {value}", ["sweep.values"])
            data["optimizer"]["quant_bits"] = int(float(value))
        return validate_config(data)
    if _is_inf(value):
        raise ConfigValidationError(f"'inf' is only meaningful for quant_bits, not {parameter}", ["sweep.values"])

    value = float(value)
    if parameter == "p_tx_dbm":
        data["link_budget"]["p_tx_dbm"] = value
        data["link_budget"]["p_tx_w"] = None
    elif parameter == "n_ris":
        side = math.isqrt(int(value))
        if side * side != value or side == 0:
            raise ConfigValidationError(f"n_ris sweep values must be positive perfect squares, got {value}", ["sweep.values"])
        for panel in data["panels"]:
            panel["rows"] = panel["cols"] = side
    elif parameter == "user_distance":
        z = cfg.receiver.xyz[2]
        data["receiver"]["position"] = [value, cfg.user_path.y_offset_m, z]
    elif parameter == "n_panels":
        count = int(value)
        if count != value or not 0 <= count <= len(cfg.panels):
            raise ConfigValidationError(
                f"n_panels must be an integer between 0 and {len(cfg.panels)}, got {value}", ["sweep.values"]
            )
        data["panels"] = data["panels"][:count]
    else:
        raise ConfigValidationError(f"Unknown sweep parameter {parameter!r}", ["sweep.parameter"])
    return validate_config(data)


@dataclass(frozen=True)
class TrialJob:
    config: ScenarioConfig
    trial: int
    seed: int
    sweep_param: str
    sweep_value: float | str


def trial_jobs(cfg: ScenarioConfig, parameter: str | None = None, values: Iterable[float | str] = ()) -> list[TrialJob]:
    """Every (value, trial) of a run in output order, with its stream seed."""
    if parameter is None:
        return [TrialJob(cfg, t, trial_seed(cfg.master_seed, t), *NO_SWEEP) for t in range(cfg.trials)]
    jobs = []
    for index, value in enumerate(values):
        valued = apply_sweep_value(cfg, parameter, value)
        value_index = None if parameter in COMMON_CHANNEL_PARAMETERS else index
        for t in range(cfg.trials):
            jobs.append(TrialJob(valued, t, trial_seed(cfg.master_seed, t, value_index), parameter, value))
    return jobs


def job_seeds(jobs: list[TrialJob]) -> dict[str, int]:
    return {f"{job.sweep_param}={job.sweep_value}/trial={job.trial}": job.seed for job in jobs}


async def _run_jobs(
    jobs: list[TrialJob], workers: int, timing: bool, progress: ProgressManager, job_id: str
) -> list[ResultRow]:
    graph = TrialGraph().compile()
    semaphore = asyncio.Semaphore(workers)

    async def run_one(job: TrialJob) -> list[ResultRow]:
        async with semaphore:
            trial_input = TrialInput(
                config=job.config,
                trial=job.trial,
                seed=job.seed,
                sweep_param=job.sweep_param,
                sweep_value=job.sweep_value,
                timing=timing,
                progress=progress,
                job_id=job_id,
            )
            try:
                state = await graph.ainvoke(trial_input)
                return state["rows"]
            except Exception as e:
                logger.error(f"Trial {job.trial} ({job.sweep_param}={job.sweep_value}) failed: {str(e)}", exc_info=True)
                await progress.send_status_update(job_id, status="trial_error", message=f"Trial {job.trial}", error=str(e))
                return [
                    ResultRow.error(job.sweep_param, job.sweep_value, job.trial, name, e)
                    for name in dict.fromkeys(job.config.algorithms)
                ]

    progress.start_job(job_id, len(jobs))
    # gather keeps submission order, so output order does not depend on scheduling
    results = await asyncio.gather(*(run_one(job) for job in jobs))
    progress.finish_job(job_id)
    return [row for rows in results for row in rows]


def run_jobs(
    jobs: list[TrialJob], workers: int | None = None, timing: bool = False, progress: ProgressManager | None = None
) -> list[ResultRow]:
    workers = workers or default_workers()
    progress = progress or ProgressManager()
    job_id = uuid.uuid4().hex[:8]
    logger.info(f"Running {len(jobs)} trials on {workers} workers (job {job_id})")
    return asyncio.run(_run_jobs(jobs, workers, timing, progress, job_id))


def run_monte_carlo(
    cfg: ScenarioConfig, workers: int | None = None, timing: bool = False, progress: ProgressManager | None = None
) -> list[ResultRow]:
    """One row per (trial, algorithm), ordered by trial then configured algorithm order."""
    return run_jobs(trial_jobs(cfg), workers, timing, progress)


def sweep(
    cfg: ScenarioConfig,
    parameter: SweepParameter,
    values: Iterable[float | str],
    workers: int | None = None,
    timing: bool = False,
    progress: ProgressManager | None = None,
) -> list[ResultRow]:
    """Monte Carlo at every sweep value; rows ordered by (value, trial, algorithm)."""
    return run_jobs(trial_jobs(cfg, parameter, list(values)), workers, timing, progress)


def rows_frame(rows: list[ResultRow]) -> pd.DataFrame:
    """Rows as the frame read_results would give for their CSV."""
    frame = pd.DataFrame([row.__dict__ for row in rows], columns=list(CSV_COLUMNS))
    frame["sweep_value"] = [row.csv_fields()[1] for row in rows]
    for column in NUMERIC_COLUMNS:
        frame[column] = pd.to_numeric(frame[column])
    return frame


def summarize(results: pd.DataFrame | str | Path) -> pd.DataFrame:
    """Mean, std, standard error and count of the rate per (sweep value, algorithm).

    Error rows are excluded. Groups keep the order in which they first appear.
    """
    frame = results if isinstance(results, pd.DataFrame) else read_results(results)
    frame = frame[~frame["status"].astype(str).str.startswith("error")]
    keys = ["sweep_param", "sweep_value", "algorithm"]
    grouped = frame.groupby(keys, sort=False)
    summary = grouped["rate_bps_hz"].agg(["mean", "std", "count"]).reset_index()
    summary["stderr"] = summary["std"] / np.sqrt(summary["count"])
    quantized = grouped["rate_quantized_bps_hz"].mean().reset_index(drop=True)
    summary["quantized_mean"] = pd.to_numeric(quantized, errors="coerce")
    return summary[keys + ["mean", "std", "stderr", "count", "quantized_mean"]]


@dataclass
class GradientCheckReport:
    n_instances: int
    max_relative_error: dict[str, float] = field(default_factory=dict)
    tolerance: float = GRADIENT_TOLERANCE

    @property
    def worst(self) -> float:
        return max(self.max_relative_error.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance


def _random_instance(rng: np.random.Generator, topology: str) -> tuple[ChannelSet, int]:
    n_tx = int(rng.integers(2, 9))
    n_rx = int(rng.integers(2, 5))
    n_ris = int(rng.integers(2, 17))
    n_panels = int(rng.integers(1, 4))
    n_streams = int(rng.integers(1, min(n_tx, n_rx) + 1))
    return rayleigh_channel_set(rng, topology, n_tx, n_rx, n_ris, n_panels), n_streams


def _relative_gap(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)


def _directional_errors(ch: ChannelSet, lb: LinkBudget, rng: np.random.Generator, n_streams: int) -> list[float]:
    """Central differences of f along random directions against 2 Re<grad, direction>."""
    f, phi = random_feasible_point(rng, ch.direct.shape[1], n_streams, ch.n_panels, ch.n_ris, 1.0)

    def crandn(shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    errors = []
    delta_f = crandn(f.shape)
    numeric = (objective_f(ch, phi, f + FD_STEP * delta_f, lb) - objective_f(ch, phi, f - FD_STEP * delta_f, lb)) / (2 * FD_STEP)
    analytic = 2.0 * np.real(np.vdot(grad_F(ch, phi, f, lb), delta_f))
    errors.append(_relative_gap(analytic, numeric))

    grad_phi = grad_phi_parallel if isinstance(ch, ParallelChannels) else grad_phi_multihop
    for i in range(ch.n_panels):
        delta = np.zeros_like(phi)
        delta[i] = crandn(ch.n_ris)
        numeric = (objective_f(ch, phi + FD_STEP * delta, f, lb) - objective_f(ch, phi - FD_STEP * delta, f, lb)) / (2 * FD_STEP)
        analytic = 2.0 * np.real(np.vdot(grad_phi(ch, phi, f, lb, i), delta[i]))
        errors.append(_relative_gap(analytic, numeric))
    return errors


def check_gradients(n_instances: int = 50, seed: int = 0) -> GradientCheckReport:
    """Finite-difference oracle on random instances of both topologies."""
    rng = make_rng(seed)
    lb = LinkBudget(rho=1.0, noise_power=1.0)
    report = GradientCheckReport(n_instances=n_instances)
    for topology in ("parallel", "multihop"):
        worst = 0.0
        for _ in range(n_instances):
            ch, n_streams = _random_instance(rng, topology)
            worst = max(worst, *_directional_errors(ch, lb, rng, n_streams))
        report.max_relative_error[topology] = worst
        logger.info(f"Gradient check ({topology}): max relative error {worst:.3e} over {n_instances} instances")
    return report


@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str


@dataclass
class AuditReport:
    results: list[PropertyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, name: str, passed: bool, detail: str) -> None:
        level = logging.INFO if passed else logging.WARNING
        logger.log(level, f"{name}: {'PASS' if passed else 'FAIL'} ({detail})")
        self.results.append(PropertyResult(name, passed, detail))

    def lines(self) -> list[str]:
        return [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}" for r in self.results]


def _toy_bounds() -> tuple[float, float]:
    one = np.ones((1, 1), dtype=np.complex128)
    zero = np.zeros((1, 1), dtype=np.complex128)
    lb = LinkBudget(rho=1.0, noise_power=1.0)
    parallel = lipschitz_bound(ParallelChannels(zero, [(one, one)]), lb, 1, 1.0).L
    multihop = lipschitz_bound(MultiHopChannels(zero, [one, one]), lb, 1, 1.0).L
    return parallel, multihop


def _descent_violations(report: RunReport) -> tuple[int, int, int]:
    """(objective increases, monitor increases, wrong selections) recorded in a run."""
    f = report.objective
    objective = sum(1 for a, b in zip(f, f[1:]) if b > a + 1e-9)
    monitor = sum(1 for a, b in zip(f, report.monitor_objective) if b > a + 1e-9)
    selection = 0
    for (w, u), branch, chosen in zip(report.candidates, report.branches, f[1:]):
        if chosen != min(w, u) or (branch == "accelerated") != (w <= u):
            selection += 1
    return objective, monitor, selection


def _desk_channels(cfg: ScenarioConfig | None, rng: np.random.Generator, topology: str):
    if cfg is None:
        n_panels = int(rng.integers(1, 3))
        ch = rayleigh_channel_set(rng, topology, 8, 4, 16, n_panels)
        return ch, LinkBudget(rho=1.0, noise_power=1.0), 2, 1.0
    return (
        generate_scenario_channels(cfg, rng),
        LinkBudget(rho=cfg.rho, noise_power=cfg.link_budget.noise_power),
        cfg.n_streams,
        cfg.amplitude,
    )


def audit_properties(
    cfg: ScenarioConfig | None = None,
    n_instances: int = 20,
    n_pairs: int = 100,
    n_chains: int = 500,
    n_runs: int = 100,
    max_iterations: int = 500,
    seed: int = 0,
) -> AuditReport:
    """Property suite: toy bounds, Lipschitz soundness, chain inequality, descent, decay, consistency.

    Without a config, descent runs use i.i.d. Rayleigh desk instances of both
    topologies; with one, they use the scenario's geometric channels.
    """
    rng = make_rng(seed)
    audit = AuditReport()
    lb = LinkBudget(rho=1.0, noise_power=1.0)

    toy_parallel, toy_multihop = _toy_bounds()
    audit.add(
        "toy_bounds",
        math.isclose(toy_parallel, 7.0, rel_tol=1e-12) and math.isclose(toy_multihop, math.sqrt(50.0), rel_tol=1e-12),
        f"parallel L={toy_parallel!r}, multihop L={toy_multihop!r}",
    )

    worst_ratio = -math.inf
    for topology in ("parallel", "multihop"):
        for _ in range(n_instances):
            ch, n_streams = _random_instance(rng, topology)
            bound = lipschitz_bound(ch, lb, n_streams, 1.0).L
            ratio = empirical_lipschitz_ratio(ch, lb, n_streams, 1.0, rng, n_pairs)
            worst_ratio = max(worst_ratio, ratio / bound - 1.0 if bound > 0 else math.inf)
    audit.add("lipschitz_soundness", worst_ratio <= 1e-9, f"max(ratio / L) - 1 = {worst_ratio:.3e}")

    chain_violations = 0
    for k in range(n_chains):
        n = 2 + k % 3
        dims = rng.integers(1, 5, n + 1)
        chain_1 = [rng.standard_normal((dims[j + 1], dims[j])) + 1j * rng.standard_normal((dims[j + 1], dims[j])) for j in range(n)]
        chain_2 = [p + 0.3 * (rng.standard_normal(p.shape) + 1j * rng.standard_normal(p.shape)) for p in chain_1]
        for variant in ("frobenius", "spectral"):
            lhs, rhs = product_difference_gap(chain_1, chain_2, variant)
            chain_violations += lhs > rhs * (1 + 1e-12) + 1e-12
    audit.add("product_difference_bound", chain_violations == 0, f"{chain_violations} violations over {n_chains} chains")

    opt = OptimizerConfig(max_iterations=max_iterations, stop_tol=0.0)
    if cfg is not None:
        opt = cfg.optimizer.model_copy(update={"max_iterations": max_iterations, "stop_tol": 0.0})
    topologies = (cfg.topology,) if cfg is not None else ("parallel", "multihop")
    counts = {"objective": 0, "monitor": 0, "selection": 0, "budget": 0, "raised": 0}
    decayed = slow = total = 0
    for topology in topologies:
        for _ in range(n_runs // len(topologies)):
            ch, run_lb, n_streams, amplitude = _desk_channels(cfg, rng, topology)
            init = InitialPoint.static_mirror(ch, n_streams, amplitude)
            for solver in (jpr_mapg, jpr_pg):
                total += 1
                try:
                    report = solver(ch, run_lb, opt, init)
                except NonmonotoneDetected:
                    counts["raised"] += 1
                    continue
                objective, monitor, selection = _descent_violations(report)
                counts["objective"] += objective
                counts["monitor"] += monitor
                counts["selection"] += selection
                spent, budget = report.descent_budget()
                counts["budget"] += spent > budget * (1 + 1e-9) + 1e-12
                squared = report.residuals_squared()
                if squared and min(squared) > budget * (1 + 1e-9) / len(squared) + 1e-12:
                    slow += 1
                if squared and (squared[0] == 0.0 or min(squared) <= RESIDUAL_DECAY_TARGET * squared[0]):
                    decayed += 1
    audit.add(
        "monotone_descent",
        counts["objective"] == 0 and counts["raised"] == 0,
        f"{counts['objective']} increases, {counts['raised']} aborted runs over {total} runs",
    )
    audit.add("monitored_descent", counts["monitor"] == 0, f"{counts['monitor']} violations")
    audit.add("branch_selection", counts["selection"] == 0, f"{counts['selection']} wrong selections")
    audit.add("descent_budget", counts["budget"] == 0, f"{counts['budget']} runs over budget")
    # min_q r_q^2 <= budget / Q follows from the descent bound at alpha = c / L
    audit.add(
        "residual_decay",
        slow == 0,
        f"{slow} runs above the budget / Q rate; {decayed}/{total} reached "
        f"{RESIDUAL_DECAY_TARGET:g} of the initial residual",
    )

    worst_gap = 0.0
    for _ in range(n_instances):
        ch, n_streams = _random_instance(rng, "parallel")
        h_s1 = ch.panels[0][0]
        h_1d = ch.panels[0][1]
        single = ParallelChannels(ch.direct, [(h_s1, h_1d)])
        hop = MultiHopChannels(ch.direct, [h_s1, h_1d])
        f, phi = random_feasible_point(rng, ch.direct.shape[1], n_streams, 1, h_s1.shape[0], 1.0)
        a, b = evaluate(single, phi, f, lb), evaluate(hop, phi, f, lb)
        rate_gap = abs(
            achievable_rate(composite_channel(single, phi), f, lb) - achievable_rate(composite_channel(hop, phi), f, lb)
        )
        scale = max(1.0, abs(a.value), float(np.max(np.abs(a.grad_f))), float(np.max(np.abs(a.grad_phi))))
        gaps = (
            abs(a.value - b.value),
            rate_gap,
            float(np.max(np.abs(a.grad_f - b.grad_f))),
            float(np.max(np.abs(a.grad_phi - b.grad_phi))),
        )
        worst_gap = max(worst_gap, max(gaps) / scale)
    audit.add("single_panel_consistency", worst_gap <= 1e-12, f"max difference {worst_gap:.3e}")
    return audit
