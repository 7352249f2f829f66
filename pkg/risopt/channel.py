"""Geometric channel simulator for transmitter, RIS panels and receiver.

Near-field links (centre distance below the Fraunhofer distance of either
endpoint) use exact element-pair distances with spherical wavefronts; far-field
links use planar-wave clustered channels built from UPA steering vectors.
Matrices are (receiver elements) x (transmitter elements).
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import CoincidentElements, InvalidRicianFactor
from .numerics import ComplexMatrix
from .objective import ChannelSet, MultiHopChannels, ParallelChannels
from .utils.units import wavelength

if TYPE_CHECKING:
    from .classes.config import ScenarioConfig

logger = logging.getLogger(__name__)

Vector3 = tuple[float, float, float]
LinkKind = Literal["tx_rx", "tx_ris", "ris_rx", "ris_ris"]


class ArrayGeometry(BaseModel):
    """Uniform planar array: n_horizontal x n_vertical elements.

    Element (p, q) sits at centre + (p - (n_h-1)/2) s u + (q - (n_v-1)/2) s v,
    where (u, v, normal) is a right-handed local frame. Vectors are ordered
    with p as the slow index.
    """

    model_config = ConfigDict(frozen=True)

    n_horizontal: int = Field(ge=1)
    n_vertical: int = Field(ge=1)
    spacing: float = Field(gt=0)
    center: Vector3 = (0.0, 0.0, 0.0)
    normal: Vector3 = (1.0, 0.0, 0.0)
    kind: Literal["antenna", "ris"] = "antenna"
    element_size: tuple[float, float] | None = None

    @property
    def n_elements(self) -> int:
        return self.n_horizontal * self.n_vertical

    @property
    def element_area(self) -> float:
        if self.element_size is None:
            return self.spacing**2
        return self.element_size[0] * self.element_size[1]

    @property
    def extent(self) -> float:
        """Largest overall dimension (aperture diagonal)."""
        return math.hypot(self.n_horizontal * self.spacing, self.n_vertical * self.spacing)

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = np.asarray(self.normal, dtype=float)
        n = n / np.linalg.norm(n)
        ref = np.array([0.0, 0.0, 1.0])
        if np.linalg.norm(np.cross(ref, n)) < 1e-9:
            ref = np.array([0.0, 1.0, 0.0])
        u = np.cross(ref, n)
        u /= np.linalg.norm(u)
        return u, np.cross(n, u), n

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        p, q = np.meshgrid(np.arange(self.n_horizontal), np.arange(self.n_vertical), indexing="ij")
        return p.ravel(), q.ravel()

    def element_positions(self) -> np.ndarray:
        u, v, _ = self.basis()
        p, q = self.indices()
        du = (p - (self.n_horizontal - 1) / 2) * self.spacing
        dv = (q - (self.n_vertical - 1) / 2) * self.spacing
        return np.asarray(self.center)[None, :] + du[:, None] * u[None, :] + dv[:, None] * v[None, :]

    def local_angles(self, direction: np.ndarray) -> tuple[float, float]:
        """(azimuth, elevation) of a global direction in this array's frame."""
        u, v, n = self.basis()
        w = direction / np.linalg.norm(direction)
        el = math.acos(float(np.clip(w @ v, -1.0, 1.0)))
        az = math.atan2(float(w @ u), float(w @ n))
        return az, el


class PropagationPhysics(BaseModel):
    model_config = ConfigDict(frozen=True)

    carrier_frequency: float = Field(gt=0)
    k_abs: float = Field(default=0.0, ge=0)
    path_loss_exponent_los: float = Field(default=2.0, gt=0)
    path_loss_exponent_nlos: float = Field(default=2.0, gt=0)
    rician_factor: float = Field(default=10.0, ge=0)
    n_rays: int = Field(default=10, ge=1)
    tx_gain: float = Field(default=1.0, gt=0)
    rx_gain: float = Field(default=1.0, gt=0)
    # False: |alpha| with the phase carried by the path length; True: complex alpha
    complex_ray_gains: bool = False
    scatter_margin: float = Field(default=2.0, ge=0)

    @property
    def wavelength(self) -> float:
        return wavelength(self.carrier_frequency)


@dataclass(frozen=True)
class LinkChannel:
    matrix: ComplexMatrix
    model_used: Literal["spherical", "planar"]
    link_kind: str


def steering_vector(az: float, el: float, grid: ArrayGeometry, wavelength_m: float) -> np.ndarray:
    """UPA response with phase (2 pi / lambda) d (p sin(az) sin(el) + q cos(el))."""
    p, q = grid.indices()
    phase = 2 * np.pi / wavelength_m * grid.spacing * (p * np.sin(az) * np.sin(el) + q * np.cos(el))
    return np.exp(1j * phase)


def fraunhofer_distance(array_extent: float, wavelength_m: float) -> float:
    if array_extent <= 0 or wavelength_m <= 0:
        raise ValueError("array extent and wavelength must be positive")
    return 2.0 * array_extent**2 / wavelength_m


def aperture_product(tx: ArrayGeometry, rx: ArrayGeometry, phys: PropagationPhysics) -> float:
    """Transmit gain times receive aperture of one element pair.

    Antennas use the physics gains with A = lambda^2 G / (4 pi); RIS elements
    re-radiate with G = 4 pi A / lambda^2. Transmitter-to-RIS therefore gives
    G_tx A_RIS and RIS-to-receiver gives G_rx A_RIS.
    """
    lam = phys.wavelength
    gain = phys.tx_gain if tx.kind == "antenna" else 4 * math.pi * tx.element_area / lam**2
    aperture = lam**2 * phys.rx_gain / (4 * math.pi) if rx.kind == "antenna" else rx.element_area
    return gain * aperture


def path_loss(distance: float, aperture: float, exponent: float, k_abs: float = 0.0) -> float:
    """beta = G A / (4 pi d^gamma) e^{-k_abs d}."""
    return aperture / (4 * math.pi * distance**exponent) * math.exp(-k_abs * distance)


def _pair_distances(tx: ArrayGeometry, rx: ArrayGeometry) -> np.ndarray:
    diff = rx.element_positions()[:, None, :] - tx.element_positions()[None, :, :]
    return np.linalg.norm(diff, axis=-1)


def _spherical_entries(distance: np.ndarray, aperture: float, phys: PropagationPhysics) -> np.ndarray:
    return (
        np.sqrt(aperture / (4 * np.pi * distance**2))
        * np.exp(-phys.k_abs * distance)
        * np.exp(-2j * np.pi * distance / phys.wavelength)
    )


def _ray_gains(rng: np.random.Generator, n_rays: int) -> np.ndarray:
    """Circular Gaussian gains with variance 1/N_ray each."""
    scale = math.sqrt(0.5 / n_rays)
    return scale * (rng.standard_normal(n_rays) + 1j * rng.standard_normal(n_rays))


def los_spherical(tx: ArrayGeometry, rx: ArrayGeometry, phys: PropagationPhysics) -> ComplexMatrix:
    distance = _pair_distances(tx, rx)
    if np.any(distance == 0.0):
        raise CoincidentElements("Transmit and receive elements coincide")
    return _spherical_entries(distance, aperture_product(tx, rx, phys), phys)


def nlos_spherical(
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    phys: PropagationPhysics,
    rng: np.random.Generator,
    scatter_points: np.ndarray | None = None,
    ray_gains: np.ndarray | None = None,
) -> ComplexMatrix:
    """Sum of single-bounce rays scaled by 1/sqrt(K_Rice).

    Each ray bounces off one scatter point drawn uniformly in the box spanned
    by the two array centres, widened by ``scatter_margin``.
    """
    if phys.rician_factor <= 0:
        raise InvalidRicianFactor("nlos_spherical needs K_Rice > 0")
    if scatter_points is None:
        lo = np.minimum(tx.center, rx.center) - phys.scatter_margin
        hi = np.maximum(tx.center, rx.center) + phys.scatter_margin
        scatter_points = rng.uniform(lo, hi, size=(phys.n_rays, 3))
    if ray_gains is None:
        ray_gains = _ray_gains(rng, len(scatter_points))
    weights = ray_gains if phys.complex_ray_gains else np.abs(ray_gains)

    to_scatter = np.linalg.norm(scatter_points[:, None, :] - tx.element_positions()[None, :, :], axis=-1)
    from_scatter = np.linalg.norm(rx.element_positions()[None, :, :] - scatter_points[:, None, :], axis=-1)
    distance = from_scatter[:, :, None] + to_scatter[:, None, :]
    if np.any(distance == 0.0):
        raise CoincidentElements("Ray path of zero length")

    entries = _spherical_entries(distance, aperture_product(tx, rx, phys), phys)
    return np.tensordot(weights, entries, axes=1) / math.sqrt(phys.rician_factor)


def planar_cluster_channel(
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    phys: PropagationPhysics,
    rng: np.random.Generator,
    include_los: bool,
    ray_gains: np.ndarray | None = None,
    departure_angles: np.ndarray | None = None,
    arrival_angles: np.ndarray | None = None,
) -> ComplexMatrix:
    """Far-field clustered channel; angles are (n_rays, 2) arrays of (az, el)."""
    if phys.rician_factor <= 0:
        raise InvalidRicianFactor("planar_cluster_channel needs K_Rice > 0")
    lam = phys.wavelength
    offset = np.asarray(rx.center) - np.asarray(tx.center)
    distance = float(np.linalg.norm(offset))
    aperture = aperture_product(tx, rx, phys)

    n_rays = phys.n_rays
    if departure_angles is None:
        departure_angles = np.column_stack(
            [rng.uniform(-np.pi, np.pi, n_rays), rng.uniform(-np.pi / 2, np.pi / 2, n_rays)]
        )
    if arrival_angles is None:
        arrival_angles = np.column_stack(
            [rng.uniform(-np.pi, np.pi, n_rays), rng.uniform(-np.pi / 2, np.pi / 2, n_rays)]
        )
    if ray_gains is None:
        ray_gains = _ray_gains(rng, len(departure_angles))

    beta_nlos = path_loss(distance, aperture, phys.path_loss_exponent_nlos, phys.k_abs)
    h = np.zeros((rx.n_elements, tx.n_elements), dtype=np.complex128)
    for alpha, (az_d, el_d), (az_a, el_a) in zip(ray_gains, departure_angles, arrival_angles):
        a_rx = steering_vector(az_a, el_a, rx, lam)
        a_tx = steering_vector(az_d, el_d, tx, lam)
        h += alpha * np.outer(a_rx, a_tx.conj())
    h *= math.sqrt(beta_nlos / phys.rician_factor)

    if include_los:
        beta_los = path_loss(distance, aperture, phys.path_loss_exponent_los, phys.k_abs)
        a_rx = steering_vector(*rx.local_angles(-offset), rx, lam)
        a_tx = steering_vector(*tx.local_angles(offset), tx, lam)
        h += math.sqrt(beta_los) * np.outer(a_rx, a_tx.conj())
    return h


def generate_link(
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    phys: PropagationPhysics,
    rng: np.random.Generator,
    link_kind: str = "tx_rx",
) -> LinkChannel:
    """Pick the wavefront model by distance and compose LOS + NLOS.

    K_Rice = 0 means an NLOS-only link with unit NLOS scaling.
    """
    distance = float(np.linalg.norm(np.asarray(rx.center) - np.asarray(tx.center)))
    threshold = max(
        fraunhofer_distance(tx.extent, phys.wavelength),
        fraunhofer_distance(rx.extent, phys.wavelength),
    )
    model = "spherical" if distance < threshold else "planar"
    nlos_only = phys.rician_factor == 0
    if nlos_only:
        phys = phys.model_copy(update={"rician_factor": 1.0})

    if model == "spherical":
        matrix = nlos_spherical(tx, rx, phys, rng)
        if not nlos_only:
            matrix = los_spherical(tx, rx, phys) + matrix
    else:
        matrix = planar_cluster_channel(tx, rx, phys, rng, include_los=not nlos_only)

    logger.debug(f"{link_kind} link: {model} model at {distance:.2f} m (D_F={threshold:.2f} m)")
    return LinkChannel(matrix=matrix, model_used=model, link_kind=link_kind)


def generate_scenario_channels(cfg: "ScenarioConfig", rng: np.random.Generator) -> ChannelSet:
    """Draw every link of a scenario; deterministic given (cfg, rng state)."""
    geometry = cfg.build_geometry()
    tx, rx, panels = geometry.transmitter, geometry.receiver, geometry.panels

    if cfg.direct_link_blocked:
        direct = np.zeros((rx.n_elements, tx.n_elements), dtype=np.complex128)
    else:
        direct = generate_link(tx, rx, cfg.physics_for("tx_rx"), rng, "tx_rx").matrix

    if cfg.topology == "parallel":
        pairs = []
        for i, panel in enumerate(panels):
            h_si = generate_link(tx, panel, cfg.physics_for("tx_ris"), rng, f"tx_ris{i}").matrix
            h_id = generate_link(panel, rx, cfg.physics_for("ris_rx"), rng, f"ris{i}_rx").matrix
            pairs.append((h_si, h_id))
        return ParallelChannels(direct=direct, panels=pairs)

    hops = [generate_link(tx, panels[0], cfg.physics_for("tx_ris"), rng, "tx_ris0").matrix]
    for i in range(1, len(panels)):
        hops.append(generate_link(panels[i - 1], panels[i], cfg.physics_for("ris_ris"), rng, f"ris{i - 1}_ris{i}").matrix)
    hops.append(generate_link(panels[-1], rx, cfg.physics_for("ris_rx"), rng, f"ris{len(panels) - 1}_rx").matrix)
    return MultiHopChannels(direct=direct, hops=hops)


def rayleigh_channel_set(
    rng: np.random.Generator,
    topology: Literal["parallel", "multihop"],
    n_tx: int,
    n_rx: int,
    n_ris: int,
    n_panels: int,
    direct: bool = True,
    scale: float = 1.0,
) -> ChannelSet:
    """i.i.d. CN(0, scale^2) entries for every link; geometry-free test instances."""

    def draw(rows: int, cols: int) -> ComplexMatrix:
        return scale * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2)

    h_sd = draw(n_rx, n_tx) if direct else np.zeros((n_rx, n_tx), dtype=np.complex128)
    if topology == "parallel":
        return ParallelChannels(direct=h_sd, panels=[(draw(n_ris, n_tx), draw(n_rx, n_ris)) for _ in range(n_panels)])
    hops = [draw(n_ris, n_tx)] + [draw(n_ris, n_ris) for _ in range(n_panels - 1)] + [draw(n_rx, n_ris)]
    return MultiHopChannels(direct=h_sd, hops=hops)
