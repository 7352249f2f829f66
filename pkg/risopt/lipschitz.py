"""Gradient-Lipschitz constants that set the optimizer step size.

Both bounds hold over the feasible set (||F||_F^2 <= N_s, |phi_m| = a) and are
computed once per channel realization.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import DimensionMismatch
from .numerics import ComplexMatrix, spectral_norm
from .objective import ChannelSet, LinkBudget, MultiHopChannels, ParallelChannels, grad_concat

logger = logging.getLogger(__name__)

SINGULAR_VALUE_TOL = 1e-10


@dataclass(frozen=True)
class LipschitzBound:
    L: float
    topology: str
    b: float
    c: float
    d: float
    zeta: float
    e: float | None = None
    n_panels: int = 0
    singular_values: dict[str, float] = field(default_factory=dict)

    def recombine(self) -> float:
        """Recompute L from the stored intermediates."""
        if self.topology == "parallel":
            b, c, d, e = self.b, self.c, self.d, self.e
            return math.sqrt(max(b * b + b * c + d * d + d * e, c * c + b * c + e * e + d * e))
        n = self.n_panels
        b, c, d = self.b, self.c, self.d
        return math.sqrt((n + 1) * max(b * b + n * c * c, c * c + n * d * d))


def lipschitz_parallel(ch: ParallelChannels, lb: LinkBudget, n_streams: int, amplitude: float) -> LipschitzBound:
    snr = lb.snr
    sv = {"H_SD": spectral_norm(ch.direct, SINGULAR_VALUE_TOL)}
    panel_sum = 0.0
    for i, (h_si, h_id) in enumerate(ch.panels):
        sv[f"H_S{i + 1}"] = spectral_norm(h_si, SINGULAR_VALUE_TOL)
        sv[f"H_{i + 1}D"] = spectral_norm(h_id, SINGULAR_VALUE_TOL)
        panel_sum += sv[f"H_{i + 1}D"] * sv[f"H_S{i + 1}"]
    if ch.panels:
        h_rd, h_sr = ch.stacked()
        sv["H_RD"] = spectral_norm(h_rd, SINGULAR_VALUE_TOL)
        sv["H_SR"] = spectral_norm(h_sr, SINGULAR_VALUE_TOL)
    else:
        sv["H_RD"] = sv["H_SR"] = 0.0
    stacked = sv["H_RD"] * sv["H_SR"]

    zeta = sv["H_SD"] + amplitude * panel_sum
    ns_snr = n_streams * snr
    b = snr * zeta**2 * (1 + 2 * ns_snr * zeta**2)
    c = 2 * math.sqrt(n_streams) * snr * zeta * stacked * (1 + ns_snr * zeta**2)
    d = 2 * math.sqrt(n_streams) * snr * zeta * (1 + ns_snr * zeta**2) * panel_sum
    e = ns_snr * (1 + 2 * ns_snr * zeta**2) * stacked * panel_sum
    big_l = math.sqrt(max(b * b + b * c + d * d + d * e, c * c + b * c + e * e + d * e))
    return LipschitzBound(L=big_l, topology="parallel", b=b, c=c, d=d, e=e, zeta=zeta,
                          n_panels=ch.n_panels, singular_values=sv)


def lipschitz_multihop(ch: MultiHopChannels, lb: LinkBudget, n_streams: int, amplitude: float) -> LipschitzBound:
    snr = lb.snr
    n = ch.n_panels
    sv = {"H_SD": spectral_norm(ch.direct, SINGULAR_VALUE_TOL)}
    hop_product = 1.0
    for i, hop in enumerate(ch.hops):
        sv[f"H_{i + 1}"] = spectral_norm(hop, SINGULAR_VALUE_TOL)
        hop_product *= sv[f"H_{i + 1}"]

    zeta = sv["H_SD"] + amplitude**n * hop_product
    ns_snr = n_streams * snr
    b = snr * zeta**2 * (1 + 2 * ns_snr * zeta**2)
    c = 2 * math.sqrt(n_streams) * snr * zeta * amplitude ** (n - 1) * hop_product * (1 + ns_snr * zeta**2)
    d = ns_snr * amplitude ** (2 * n - 2) * hop_product**2 * (1 + 2 * ns_snr * zeta**2)
    big_l = math.sqrt((n + 1) * max(b * b + n * c * c, c * c + n * d * d))
    return LipschitzBound(L=big_l, topology="multihop", b=b, c=c, d=d, zeta=zeta, n_panels=n, singular_values=sv)


def lipschitz_bound(ch: ChannelSet, lb: LinkBudget, n_streams: int, amplitude: float) -> LipschitzBound:
    if isinstance(ch, ParallelChannels):
        return lipschitz_parallel(ch, lb, n_streams, amplitude)
    return lipschitz_multihop(ch, lb, n_streams, amplitude)


def _chain_product(chain: Sequence[ComplexMatrix]) -> ComplexMatrix:
    """prod_{k=1}^N Psi_k = Psi_N ... Psi_1."""
    out = chain[0]
    for psi in chain[1:]:
        if psi.shape[1] != out.shape[0]:
            raise DimensionMismatch(f"Cannot chain {psi.shape} after {out.shape}")
        out = psi @ out
    return out


def product_difference_gap(
    chain_1: Sequence[ComplexMatrix],
    chain_2: Sequence[ComplexMatrix],
    variant: Literal["frobenius", "spectral"] = "frobenius",
) -> tuple[float, float]:
    """Both sides of the product-difference bound.

    lhs = ||prod Psi^(2) - prod Psi^(1)||, rhs = sum_l (prod_{m>l} ||Psi_m^(1)||_2)
    ||Psi_l^(2) - Psi_l^(1)|| (prod_{k<l} ||Psi_k^(2)||_2). ``variant`` picks the
    norm used on the differences.
    """
    if len(chain_1) != len(chain_2) or len(chain_1) < 2:
        raise DimensionMismatch("Chains must have equal length N >= 2")
    for a, b in zip(chain_1, chain_2):
        if a.shape != b.shape:
            raise DimensionMismatch(f"Chain shapes differ: {a.shape} vs {b.shape}")

    def diff_norm(x: ComplexMatrix) -> float:
        return float(np.linalg.norm(x, 2 if variant == "spectral" else "fro"))

    lhs = diff_norm(_chain_product(chain_2) - _chain_product(chain_1))
    norms_1 = [float(np.linalg.norm(p, 2)) for p in chain_1]
    norms_2 = [float(np.linalg.norm(p, 2)) for p in chain_2]
    rhs = 0.0
    n = len(chain_1)
    for l in range(n):
        rhs += math.prod(norms_1[l + 1:]) * diff_norm(chain_2[l] - chain_1[l]) * math.prod(norms_2[:l])
    return lhs, rhs


def random_feasible_point(
    rng: np.random.Generator, n_tx: int, n_streams: int, n_panels: int, n_ris: int, amplitude: float
) -> tuple[ComplexMatrix, np.ndarray]:
    """Precoder uniformly scaled inside the power ball, phases uniform on the circle."""
    f = rng.standard_normal((n_tx, n_streams)) + 1j * rng.standard_normal((n_tx, n_streams))
    f *= math.sqrt(n_streams) * rng.uniform() / np.linalg.norm(f)
    phi = amplitude * np.exp(1j * rng.uniform(0, 2 * np.pi, (n_panels, n_ris)))
    return f, phi


def empirical_lipschitz_ratio(
    ch: ChannelSet,
    lb: LinkBudget,
    n_streams: int,
    amplitude: float,
    rng: np.random.Generator,
    n_pairs: int,
) -> float:
    """Largest observed ||grad difference|| / ||point difference|| over feasible pairs."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be at least 1")
    n_tx = ch.direct.shape[1]
    best = 0.0
    for _ in range(n_pairs):
        f1, phi1 = random_feasible_point(rng, n_tx, n_streams, ch.n_panels, ch.n_ris, amplitude)
        f2, phi2 = random_feasible_point(rng, n_tx, n_streams, ch.n_panels, ch.n_ris, amplitude)
        step = math.sqrt(np.linalg.norm(f2 - f1) ** 2 + np.linalg.norm(phi2 - phi1) ** 2)
        if step == 0.0:
            continue
        gf1, gp1 = grad_concat(ch, phi1, f1, lb)
        gf2, gp2 = grad_concat(ch, phi2, f2, lb)
        change = math.sqrt(np.linalg.norm(gf2 - gf1) ** 2 + np.linalg.norm(gp2 - gp1) ** 2)
        best = max(best, change / step)
    return best
