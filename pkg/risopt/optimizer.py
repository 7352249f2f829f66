"""Joint precoder / phase optimizers and the closed-form benchmarks.

``jpr_mapg`` is the monotone accelerated proximal gradient loop: every
iteration builds an extrapolated candidate and a plain proximal-gradient
("monitored") candidate and keeps whichever has the lower objective, so the
objective trajectory never increases. ``jpr_pg`` keeps only the monitored
step. ``ris_only_baseline`` freezes an SVD precoder and moves the phases only.
"""

import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import DimensionMismatch, NonmonotoneDetected, RankDeficientWarning
from .lipschitz import lipschitz_bound
from .numerics import ComplexMatrix, herm
from .objective import (
    ChannelSet,
    LinkBudget,
    ParallelChannels,
    PhasePattern,
    achievable_rate,
    composite_channel,
    evaluate,
    objective_f,
)

logger = logging.getLogger(__name__)

Algorithm = Literal["jpr_mapg", "jpr_pg", "ris_only", "static_ris", "no_ris"]
ALGORITHMS: tuple[str, ...] = ("jpr_mapg", "jpr_pg", "ris_only", "static_ris", "no_ris")

DESCENT_SLACK = 1e-9
RANK_RTOL = 1e-12
LN2 = math.log(2.0)


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_iterations: int = Field(default=500, ge=1)
    step_scale: float = Field(default=0.99, gt=0, lt=1)
    stop_tol: float = Field(default=1e-8, ge=0)
    quant_bits: int | None = Field(default=None, ge=1)
    algorithm: Algorithm = "jpr_mapg"


@dataclass(frozen=True)
class InitialPoint:
    precoder: ComplexMatrix
    phases: np.ndarray
    amplitude: float = 1.0

    @property
    def n_streams(self) -> int:
        return self.precoder.shape[1]

    @classmethod
    def static_mirror(cls, ch: ChannelSet, n_streams: int, amplitude: float = 1.0) -> "InitialPoint":
        """phi = a * ones on every panel, F = SVD precoder of the resulting composite channel."""
        phases = PhasePattern.static(ch.n_panels, ch.n_ris, amplitude).vectors
        return cls(svd_precoder(composite_channel(ch, phases), n_streams), phases, amplitude)


@dataclass
class OptimizerState:
    """Iterates of the accelerated loop.

    (F, phi) current point, (W, z) accelerated candidate, (U, v) monitored
    candidate, (P, y) extrapolated point.
    """

    F: ComplexMatrix
    phi: np.ndarray
    F_prev: ComplexMatrix
    phi_prev: np.ndarray
    W: ComplexMatrix
    z: np.ndarray
    U: ComplexMatrix
    v: np.ndarray
    P: ComplexMatrix
    y: np.ndarray
    t_prev: float = 0.0
    t_cur: float = 1.0
    iteration: int = 0

    @classmethod
    def start(cls, init: InitialPoint) -> "OptimizerState":
        f0 = np.array(init.precoder, dtype=np.complex128)
        p0 = np.array(init.phases, dtype=np.complex128)
        return cls(
            F=f0, phi=p0, F_prev=f0, W=f0, z=p0, U=f0, v=p0, P=f0, y=p0, phi_prev=p0,
        )

    def extrapolate(self) -> None:
        """P = F + t_{q-1}/t_q (W - F) + (t_{q-1} - 1)/t_q (F - F_prev); same for y."""
        a = self.t_prev / self.t_cur
        b = (self.t_prev - 1.0) / self.t_cur
        self.P = self.F + a * (self.W - self.F) + b * (self.F - self.F_prev)
        self.y = self.phi + a * (self.z - self.phi) + b * (self.phi - self.phi_prev)

    def advance_t(self) -> None:
        self.t_prev, self.t_cur = self.t_cur, next_t(self.t_cur)


def next_t(t: float) -> float:
    return (math.sqrt(4.0 * t * t + 1.0) + 1.0) / 2.0


@dataclass
class RunReport:
    algorithm: str
    objective: list[float]
    precoder: ComplexMatrix
    phases: np.ndarray
    lipschitz: float
    alpha: float
    amplitude: float = 1.0
    residual_f: list[float] = field(default_factory=list)
    residual_phi: list[float] = field(default_factory=list)
    branches: list[str] = field(default_factory=list)
    candidates: list[tuple[float, float]] = field(default_factory=list)
    monitor_objective: list[float] = field(default_factory=list)
    status: str = "max_iterations"
    wall_ms: float = 0.0

    @property
    def rate(self) -> list[float]:
        """Rate trajectory in bits/s/Hz."""
        return [-f / LN2 for f in self.objective]

    @property
    def final_rate(self) -> float:
        return -self.objective[-1] / LN2

    @property
    def initial_rate(self) -> float:
        return -self.objective[0] / LN2

    @property
    def iterations(self) -> int:
        return len(self.objective) - 1

    def residuals_squared(self) -> list[float]:
        return [rf * rf + rp * rp for rf, rp in zip(self.residual_f, self.residual_phi)]

    def descent_budget(self) -> tuple[float, float]:
        """(spent, budget): sum of squared residuals against (f0 - f_final) / (1/(2 alpha) - L/2)."""
        spent = float(sum(self.residuals_squared()))
        margin = 0.5 / self.alpha - 0.5 * self.lipschitz
        if not self.residual_f or margin <= 0:
            return spent, math.inf
        return spent, (self.objective[0] - self.objective[-1]) / margin


def prox_precoder(x: ComplexMatrix, n_streams: int) -> ComplexMatrix:
    """Projection onto the power ball ||F||_F^2 <= N_s."""
    norm = float(np.linalg.norm(x))
    if norm * norm <= n_streams:
        return np.array(x, dtype=np.complex128, copy=True)
    return (math.sqrt(n_streams) / norm) * x


def prox_phase(x: np.ndarray, amplitude: float = 1.0) -> np.ndarray:
    """Entrywise projection onto |phi_m| = a; zero entries map to a."""
    x = np.asarray(x, dtype=np.complex128)
    mag = np.abs(x)
    unit = np.divide(x, mag, out=np.ones_like(x), where=mag > 0)
    return amplitude * unit


def svd_precoder(h: ComplexMatrix, n_streams: int) -> ComplexMatrix:
    """Top-N_s right singular vectors of H, unit columns so ||F||_F^2 = N_s."""
    h = np.asarray(h, dtype=np.complex128)
    if n_streams > h.shape[1]:
        raise DimensionMismatch(f"Cannot send {n_streams} streams from {h.shape[1]} antennas")
    _, s, vh = np.linalg.svd(h, full_matrices=True)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    if rank < n_streams:
        msg = f"Channel rank {rank} is below {n_streams} streams; padding with the orthonormal complement"
        logger.warning(msg)
        warnings.warn(msg, RankDeficientWarning, stacklevel=2)
    return herm(vh)[:, :n_streams].copy()


def quantize_phases(phases: np.ndarray, n_bits: int, amplitude: float = 1.0) -> PhasePattern:
    """Snap each phase to the nearest of 2^N_b uniform levels; ties go to the smaller index."""
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    levels = 2**n_bits
    step = 2.0 * math.pi / levels
    position = np.mod(np.angle(np.asarray(phases, dtype=np.complex128)), 2.0 * math.pi) / step
    index = np.mod(np.where(position == levels - 0.5, 0.0, np.ceil(position - 0.5)), levels)
    return PhasePattern(amplitude * np.exp(1j * index * step), amplitude)


def _step_size(cfg: OptimizerConfig, big_l: float) -> float:
    # zero channels have L = 0 and vanishing gradients; any finite step works
    return cfg.step_scale / big_l if big_l > 0 else cfg.step_scale


def _resolve_lipschitz(ch: ChannelSet, lb: LinkBudget, init: InitialPoint, big_l: float | None) -> float:
    if big_l is not None:
        return big_l
    return lipschitz_bound(ch, lb, init.n_streams, init.amplitude).L


def _check_descent(name: str, iteration: int, before: float, after: float, what: str) -> None:
    if after > before + DESCENT_SLACK:
        raise NonmonotoneDetected(
            f"{name}: {what} rose from {before!r} to {after!r} at iteration {iteration}"
        )


def _converged(cfg: OptimizerConfig, before: float, after: float) -> bool:
    return abs(after - before) < cfg.stop_tol * max(abs(before), 1.0)


def _proximal_pair(f: ComplexMatrix, phi: np.ndarray, grad_f, grad_phi, alpha: float, init: InitialPoint):
    return prox_precoder(f - alpha * grad_f, init.n_streams), prox_phase(phi - alpha * grad_phi, init.amplitude)


def jpr_mapg(
    ch: ChannelSet, lb: LinkBudget, cfg: OptimizerConfig, init: InitialPoint, lipschitz: float | None = None
) -> RunReport:
    started = time.perf_counter()
    big_l = _resolve_lipschitz(ch, lb, init, lipschitz)
    alpha = _step_size(cfg, big_l)
    state = OptimizerState.start(init)
    current = evaluate(ch, state.phi, state.F, lb)
    report = RunReport("jpr_mapg", [current.value], state.F, state.phi, big_l, alpha, init.amplitude)

    for q in range(1, cfg.max_iterations + 1):
        state.iteration = q
        state.extrapolate()
        at_p = evaluate(ch, state.y, state.P, lb)
        state.W, state.z = _proximal_pair(state.P, state.y, at_p.grad_f, at_p.grad_phi, alpha, init)
        state.U, state.v = _proximal_pair(state.F, state.phi, current.grad_f, current.grad_phi, alpha, init)

        at_w = evaluate(ch, state.z, state.W, lb)
        at_u = evaluate(ch, state.v, state.U, lb)
        _check_descent("jpr_mapg", q, current.value, at_u.value, "monitored objective")
        report.residual_f.append(float(np.linalg.norm(state.U - state.F)))
        report.residual_phi.append(float(np.linalg.norm(state.v - state.phi)))
        report.candidates.append((at_w.value, at_u.value))
        report.monitor_objective.append(at_u.value)

        state.F_prev, state.phi_prev = state.F, state.phi
        if at_w.value <= at_u.value:
            state.F, state.phi, chosen = state.W, state.z, at_w
            report.branches.append("accelerated")
        else:
            state.F, state.phi, chosen = state.U, state.v, at_u
            report.branches.append("monitored")
        state.advance_t()

        _check_descent("jpr_mapg", q, current.value, chosen.value, "objective")
        report.objective.append(chosen.value)
        previous, current = current, chosen
        if _converged(cfg, previous.value, current.value):
            report.status = "converged"
            break

    report.precoder, report.phases = state.F, state.phi
    report.wall_ms = (time.perf_counter() - started) * 1e3
    logger.debug(f"jpr_mapg finished after {report.iterations} iterations ({report.status}), rate {report.final_rate:.4f}")
    return report


def jpr_pg(
    ch: ChannelSet, lb: LinkBudget, cfg: OptimizerConfig, init: InitialPoint, lipschitz: float | None = None
) -> RunReport:
    """Proximal gradient without extrapolation: only the monitored step."""
    started = time.perf_counter()
    big_l = _resolve_lipschitz(ch, lb, init, lipschitz)
    alpha = _step_size(cfg, big_l)
    f = np.array(init.precoder, dtype=np.complex128)
    phi = np.array(init.phases, dtype=np.complex128)
    current = evaluate(ch, phi, f, lb)
    report = RunReport("jpr_pg", [current.value], f, phi, big_l, alpha, init.amplitude)

    for q in range(1, cfg.max_iterations + 1):
        u, v = _proximal_pair(f, phi, current.grad_f, current.grad_phi, alpha, init)
        at_u = evaluate(ch, v, u, lb)
        _check_descent("jpr_pg", q, current.value, at_u.value, "objective")
        report.residual_f.append(float(np.linalg.norm(u - f)))
        report.residual_phi.append(float(np.linalg.norm(v - phi)))
        report.monitor_objective.append(at_u.value)
        report.branches.append("monitored")
        report.objective.append(at_u.value)
        f, phi = u, v
        previous, current = current, at_u
        if _converged(cfg, previous.value, current.value):
            report.status = "converged"
            break

    report.precoder, report.phases = f, phi
    report.wall_ms = (time.perf_counter() - started) * 1e3
    return report


def ris_only_baseline(
    ch: ChannelSet, lb: LinkBudget, cfg: OptimizerConfig, init: InitialPoint, lipschitz: float | None = None
) -> RunReport:
    """Freeze F = SVD precoder at the initial phases, then run projected gradient on the phases."""
    started = time.perf_counter()
    big_l = _resolve_lipschitz(ch, lb, init, lipschitz)
    alpha = _step_size(cfg, big_l)
    phi = np.array(init.phases, dtype=np.complex128)
    f = svd_precoder(composite_channel(ch, phi), init.n_streams)
    current = evaluate(ch, phi, f, lb)
    report = RunReport("ris_only", [current.value], f, phi, big_l, alpha, init.amplitude)

    for q in range(1, cfg.max_iterations + 1):
        v = prox_phase(phi - alpha * current.grad_phi, init.amplitude)
        at_v = evaluate(ch, v, f, lb)
        _check_descent("ris_only", q, current.value, at_v.value, "objective")
        report.residual_f.append(0.0)
        report.residual_phi.append(float(np.linalg.norm(v - phi)))
        report.monitor_objective.append(at_v.value)
        report.branches.append("monitored")
        report.objective.append(at_v.value)
        phi = v
        previous, current = current, at_v
        if _converged(cfg, previous.value, current.value):
            report.status = "converged"
            break

    report.phases = phi
    report.wall_ms = (time.perf_counter() - started) * 1e3
    return report


def static_ris(ch: ChannelSet, lb: LinkBudget, n_streams: int, amplitude: float = 1.0) -> RunReport:
    """RIS as a plain mirror (phi = a * ones) with an SVD precoder."""
    started = time.perf_counter()
    init = InitialPoint.static_mirror(ch, n_streams, amplitude)
    value = objective_f(ch, init.phases, init.precoder, lb)
    report = RunReport("static_ris", [value], init.precoder, init.phases, math.nan, math.nan, amplitude)
    report.status = "closed_form"
    report.wall_ms = (time.perf_counter() - started) * 1e3
    return report


def no_ris(ch: ChannelSet, lb: LinkBudget, n_streams: int, amplitude: float = 1.0) -> RunReport:
    """Direct link only, SVD precoder on H_SD."""
    started = time.perf_counter()
    f = svd_precoder(ch.direct, n_streams)
    empty = np.zeros((0, 0), dtype=np.complex128)
    value = objective_f(ParallelChannels(ch.direct), empty, f, lb)
    report = RunReport("no_ris", [value], f, empty, math.nan, math.nan, amplitude)
    report.status = "closed_form"
    report.wall_ms = (time.perf_counter() - started) * 1e3
    return report


def quantized_rate(ch: ChannelSet, lb: LinkBudget, report: RunReport, n_bits: int) -> float:
    """Rate after snapping the final phases to the N_b-bit grid, precoder unchanged."""
    if report.phases.size == 0:
        return report.final_rate
    pattern = quantize_phases(report.phases, n_bits, report.amplitude)
    return achievable_rate(composite_channel(ch, pattern.vectors), report.precoder, lb)


_ITERATIVE: dict[str, Callable[..., RunReport]] = {
    "jpr_mapg": jpr_mapg,
    "jpr_pg": jpr_pg,
    "ris_only": ris_only_baseline,
}
_CLOSED_FORM: dict[str, Callable[..., RunReport]] = {
    "static_ris": static_ris,
    "no_ris": no_ris,
}


def run_algorithm(
    name: str,
    ch: ChannelSet,
    lb: LinkBudget,
    cfg: OptimizerConfig,
    n_streams: int,
    amplitude: float = 1.0,
    lipschitz: float | None = None,
    init: InitialPoint | None = None,
) -> RunReport:
    if name in _CLOSED_FORM:
        return _CLOSED_FORM[name](ch, lb, n_streams, amplitude)
    if name not in _ITERATIVE:
        raise ValueError(f"Unknown algorithm {name!r}; expected one of {ALGORITHMS}")
    if init is None:
        init = InitialPoint.static_mirror(ch, n_streams, amplitude)
    return _ITERATIVE[name](ch, lb, cfg, init, lipschitz)
