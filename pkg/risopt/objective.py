"""Composite channel, achievable rate and closed-form Wirtinger gradients.

Phase patterns are handled as a 2-D array of shape (n_panels, n_ris). The
functions accept arbitrary complex entries because the accelerated branch of
the optimizer evaluates gradients at extrapolated points off the unit-modulus
set. Panel indices are zero-based.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, WrongTopology
from .numerics import ComplexMatrix, herm, hpd_inverse, logdet_and_inverse, logdet_hpd

logger = logging.getLogger(__name__)

FEASIBILITY_SLACK = 1e-9
MODULUS_TOL = 1e-12


@dataclass(frozen=True)
class LinkBudget:
    rho: float
    noise_power: float

    def __post_init__(self):
        if self.rho <= 0 or self.noise_power <= 0:
            raise ValueError("rho and noise_power must both be positive")

    @property
    def snr(self) -> float:
        return self.rho / self.noise_power


@dataclass(frozen=True)
class ParallelChannels:
    """H = H_SD + sum_i H_iD diag(phi_i) H_Si."""

    direct: ComplexMatrix
    panels: list[tuple[ComplexMatrix, ComplexMatrix]] = field(default_factory=list)

    topology = "parallel"

    def __post_init__(self):
        n_rx, n_tx = self.direct.shape
        for i, (h_si, h_id) in enumerate(self.panels):
            if h_si.shape[1] != n_tx or h_id.shape[0] != n_rx or h_id.shape[1] != h_si.shape[0]:
                raise DimensionMismatch(
                    f"Panel {i}: H_Si {h_si.shape} and H_iD {h_id.shape} do not chain with H_SD {self.direct.shape}"
                )

    @property
    def n_panels(self) -> int:
        return len(self.panels)

    @property
    def n_ris(self) -> int:
        return self.panels[0][0].shape[0] if self.panels else 0

    def stacked(self) -> tuple[ComplexMatrix, ComplexMatrix]:
        """Concatenated receive-side [H_1D ... H_ND] and transmit-side [H_S1; ...; H_SN]."""
        h_rd = np.hstack([h_id for _, h_id in self.panels])
        h_sr = np.vstack([h_si for h_si, _ in self.panels])
        return h_rd, h_sr


@dataclass(frozen=True)
class MultiHopChannels:
    """H = H_SD + H_{N+1} Phi_N H_N ... Phi_1 H_1."""

    direct: ComplexMatrix
    hops: list[ComplexMatrix] = field(default_factory=list)

    topology = "multihop"

    def __post_init__(self):
        if len(self.hops) < 2:
            raise DimensionMismatch("A multi-hop channel needs at least one panel (two hop matrices)")
        n_rx, n_tx = self.direct.shape
        if self.hops[0].shape[1] != n_tx or self.hops[-1].shape[0] != n_rx:
            raise DimensionMismatch("First/last hop do not match the direct link dimensions")
        for i in range(1, len(self.hops)):
            if self.hops[i].shape[1] != self.hops[i - 1].shape[0]:
                raise DimensionMismatch(f"Hop {i} {self.hops[i].shape} does not chain with hop {i - 1}")

    @property
    def n_panels(self) -> int:
        return len(self.hops) - 1

    @property
    def n_ris(self) -> int:
        return self.hops[0].shape[0]


ChannelSet = ParallelChannels | MultiHopChannels


@dataclass(frozen=True)
class PhasePattern:
    vectors: np.ndarray
    amplitude: float = 1.0

    def __post_init__(self):
        if self.vectors.size and np.max(np.abs(np.abs(self.vectors) - self.amplitude)) > MODULUS_TOL:
            raise ValueError(f"Phase entries must all have modulus {self.amplitude}")

    @classmethod
    def static(cls, n_panels: int, n_ris: int, amplitude: float = 1.0) -> "PhasePattern":
        return cls(np.full((n_panels, n_ris), amplitude, dtype=np.complex128), amplitude)


def is_feasible_precoder(f: ComplexMatrix, n_streams: int) -> bool:
    return float(np.linalg.norm(f) ** 2) <= n_streams + FEASIBILITY_SLACK


def _check_phases(ch: ChannelSet, phi: np.ndarray) -> np.ndarray:
    if not ch.n_panels:
        return np.zeros((0, 0), complex)
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.size != ch.n_panels * ch.n_ris:
        raise DimensionMismatch(
            f"Expected {ch.n_panels} x {ch.n_ris} phases, got {phi.size} entries (shape {phi.shape})"
        )
    return phi.reshape(ch.n_panels, ch.n_ris)


def _prefix_suffix(ch: MultiHopChannels, phi: np.ndarray) -> tuple[list[ComplexMatrix], list[ComplexMatrix]]:
    """Effective channels into (H̄_Si) and out of (H̄_iD) each panel."""
    n = ch.n_panels
    prefix = [ch.hops[0]]
    for i in range(1, n):
        prefix.append(ch.hops[i] @ (phi[i - 1][:, None] * prefix[-1]))
    suffix = [None] * n
    suffix[n - 1] = ch.hops[n]
    for i in range(n - 2, -1, -1):
        suffix[i] = (suffix[i + 1] * phi[i + 1][None, :]) @ ch.hops[i + 1]
    return prefix, suffix


def composite_channel(ch: ChannelSet, phi: np.ndarray) -> ComplexMatrix:
    phi = _check_phases(ch, phi)
    h = np.array(ch.direct, dtype=np.complex128, copy=True)
    if isinstance(ch, ParallelChannels):
        for (h_si, h_id), p in zip(ch.panels, phi):
            h += (h_id * p[None, :]) @ h_si
        return h
    cascade = ch.hops[0]
    for i in range(1, len(ch.hops)):
        cascade = ch.hops[i] @ (phi[i - 1][:, None] * cascade)
    return h + cascade


def _gram(h: ComplexMatrix, f: ComplexMatrix, lb: LinkBudget) -> ComplexMatrix:
    hf = h @ f
    return np.eye(f.shape[1], dtype=np.complex128) + lb.snr * (herm(hf) @ hf)


def achievable_rate(h: ComplexMatrix, f: ComplexMatrix, lb: LinkBudget) -> float:
    """log2 det(I + (rho/P_n) F^H H^H H F) in bits/s/Hz."""
    return logdet_hpd(_gram(h, f, lb)) / math.log(2.0)


def objective_f(ch: ChannelSet, phi: np.ndarray, f: ComplexMatrix, lb: LinkBudget) -> float:
    return -logdet_hpd(_gram(composite_channel(ch, phi), f, lb))


def _common_terms(ch: ChannelSet, phi: np.ndarray, f: ComplexMatrix, lb: LinkBudget):
    h = composite_channel(ch, phi)
    k = hpd_inverse(_gram(h, f, lb))
    return h, k


def grad_F(ch: ChannelSet, phi: np.ndarray, f: ComplexMatrix, lb: LinkBudget) -> ComplexMatrix:
    """-(rho/P_n) H^H H F K with K = (I + (rho/P_n) F^H H^H H F)^{-1}."""
    h, k = _common_terms(ch, phi, f, lb)
    return -lb.snr * (herm(h) @ (h @ f)) @ k


def _diag_sandwich(left: ComplexMatrix, middle: ComplexMatrix, right: ComplexMatrix) -> np.ndarray:
    """diag(left^H middle right^H) without forming the square product."""
    return np.sum((herm(left) @ middle) * right.conj(), axis=1)


def grad_phi_parallel(ch: ChannelSet, phi: np.ndarray, f: ComplexMatrix, lb: LinkBudget, i: int) -> np.ndarray:
    if not isinstance(ch, ParallelChannels):
        raise WrongTopology("grad_phi_parallel needs a parallel channel set")
    h, k = _common_terms(ch, phi, f, lb)
    h_si, h_id = ch.panels[i]
    middle = h @ f @ k @ herm(f)
    return -lb.snr * _diag_sandwich(h_id, middle, h_si)


def grad_phi_multihop(ch: ChannelSet, phi: np.ndarray, f: ComplexMatrix, lb: LinkBudget, i: int) -> np.ndarray:
    if not isinstance(ch, MultiHopChannels):
        raise WrongTopology("grad_phi_multihop needs a multi-hop channel set")
    phi = _check_phases(ch, phi)
    h, k = _common_terms(ch, phi, f, lb)
    prefix, suffix = _prefix_suffix(ch, phi)
    middle = h @ f @ k @ herm(f)
    return -lb.snr * _diag_sandwich(suffix[i], middle, prefix[i])


@dataclass
class Evaluation:
    """Objective and both gradient blocks at one point."""

    value: float
    grad_f: ComplexMatrix
    grad_phi: np.ndarray


def evaluate(ch: ChannelSet, phi: np.ndarray, f: ComplexMatrix, lb: LinkBudget) -> Evaluation:
    """Objective plus gradients sharing one composite channel and factorization."""
    phi = _check_phases(ch, phi)
    h = composite_channel(ch, phi)
    logdet, k = logdet_and_inverse(_gram(h, f, lb))
    hfk = h @ f @ k
    g_f = -lb.snr * herm(h) @ hfk
    middle = hfk @ herm(f)
    g_phi = np.zeros_like(phi)
    if isinstance(ch, ParallelChannels):
        for i, (h_si, h_id) in enumerate(ch.panels):
            g_phi[i] = -lb.snr * _diag_sandwich(h_id, middle, h_si)
    else:
        prefix, suffix = _prefix_suffix(ch, phi)
        for i in range(ch.n_panels):
            g_phi[i] = -lb.snr * _diag_sandwich(suffix[i], middle, prefix[i])
    return Evaluation(-logdet, g_f, g_phi)


def grad_concat(ch: ChannelSet, phi: np.ndarray, f: ComplexMatrix, lb: LinkBudget) -> tuple[ComplexMatrix, np.ndarray]:
    """Precoder gradient and the panel phase gradients stacked in panel order."""
    ev = evaluate(ch, phi, f, lb)
    return ev.grad_f, ev.grad_phi.reshape(-1)
