import math
from dataclasses import dataclass
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..channel import ArrayGeometry, PropagationPhysics
from ..optimizer import Algorithm, OptimizerConfig
from ..utils.units import dbm_to_watts, thermal_noise_power, watts_to_dbm, wavelength

SweepParameter = Literal["p_tx_dbm", "n_ris", "user_distance", "quant_bits", "n_panels"]
LINK_KINDS = ("tx_rx", "tx_ris", "ris_rx", "ris_ris")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ArraySpec(_Strict):
    """One array in scenario coordinates; 2-D positions get z = 0."""

    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    position: list[float] = Field(min_length=2, max_length=3)
    spacing_wavelengths: float = Field(default=0.5, gt=0)
    element_size_wavelengths: float = Field(default=0.5, gt=0)
    normal: list[float] | None = Field(default=None, min_length=3, max_length=3)

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    @property
    def xyz(self) -> tuple[float, float, float]:
        x, y, *z = self.position
        return float(x), float(y), float(z[0]) if z else 0.0


class LinkPhysicsSpec(_Strict):
    rician_factor: float = Field(default=10.0, ge=0)
    path_loss_exponent_los: float = Field(default=1.90, gt=0)
    path_loss_exponent_nlos: float = Field(default=4.39, gt=0)
    n_rays: int = Field(default=10, ge=1)


def _default_links() -> dict[str, LinkPhysicsSpec]:
    return {
        "tx_rx": LinkPhysicsSpec(rician_factor=0.0),
        "tx_ris": LinkPhysicsSpec(),
        "ris_rx": LinkPhysicsSpec(),
        "ris_ris": LinkPhysicsSpec(),
    }


class PhysicsSpec(_Strict):
    carrier_frequency_hz: float = Field(default=28e9, gt=0)
    k_abs: float = Field(default=0.0, ge=0)
    tx_gain_dbi: float = 0.0
    rx_gain_dbi: float = 0.0
    complex_ray_gains: bool = False
    scatter_margin_m: float = Field(default=2.0, ge=0)
    links: dict[str, LinkPhysicsSpec] = Field(default_factory=_default_links)

    @model_validator(mode="after")
    def _known_links(self):
        unknown = set(self.links) - set(LINK_KINDS)
        if unknown:
            raise ValueError(f"Unknown link classes: {sorted(unknown)}")
        for kind, spec in _default_links().items():
            self.links.setdefault(kind, spec)
        return self


class LinkBudgetSpec(_Strict):
    p_tx_dbm: float = 30.0
    p_tx_w: float | None = Field(default=None, gt=0)
    noise_power_w: float | None = Field(default=None, gt=0)
    bandwidth_hz: float = Field(default=800e6, gt=0)
    noise_figure_db: float = Field(default=0.0, ge=0)
    temperature_k: float = Field(default=290.0, gt=0)

    @model_validator(mode="after")
    def _watts_override(self):
        if self.p_tx_w is not None:
            self.p_tx_dbm = watts_to_dbm(self.p_tx_w)
            self.p_tx_w = None
        return self

    @property
    def transmit_power_w(self) -> float:
        return dbm_to_watts(self.p_tx_dbm)

    @property
    def noise_power(self) -> float:
        if self.noise_power_w is not None:
            return self.noise_power_w
        return thermal_noise_power(self.bandwidth_hz, self.noise_figure_db, self.temperature_k)


class SweepSpec(_Strict):
    parameter: SweepParameter
    values: list[float | Literal["inf"]] = Field(min_length=1)


class UserPathSpec(_Strict):
    """User positions for distance sweeps: (distance, y_offset) in the BS plane."""

    y_offset_m: float = 0.0


@dataclass(frozen=True)
class ScenarioGeometry:
    transmitter: ArrayGeometry
    receiver: ArrayGeometry
    panels: list[ArrayGeometry]


class ScenarioConfig(_Strict):
    name: str = "scenario"
    topology: Literal["parallel", "multihop"] = "parallel"
    amplitude: float = Field(default=1.0, gt=0)
    n_streams: int = Field(default=3, ge=1)
    transmitter: ArraySpec
    receiver: ArraySpec
    panels: list[ArraySpec] = Field(default_factory=list)
    direct_link_blocked: bool = False
    physics: PhysicsSpec = Field(default_factory=PhysicsSpec)
    link_budget: LinkBudgetSpec = Field(default_factory=LinkBudgetSpec)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    algorithms: list[Algorithm] = Field(default_factory=lambda: ["jpr_mapg"], min_length=1)
    trials: int = Field(default=500, ge=1)
    master_seed: int = Field(default=0, ge=0)
    sweep: SweepSpec | None = None
    user_path: UserPathSpec = Field(default_factory=UserPathSpec)

    @model_validator(mode="after")
    def _consistent(self):
        positions = [self.transmitter.xyz, self.receiver.xyz] + [p.xyz for p in self.panels]
        if len(set(positions)) != len(positions):
            raise ValueError("Transmitter, receiver and panel positions must be distinct")
        if self.topology == "multihop" and not self.panels:
            raise ValueError("A multi-hop scenario needs at least one panel")
        if len({p.n_elements for p in self.panels}) > 1:
            raise ValueError("All panels must have the same number of elements")
        if self.n_streams > self.transmitter.n_elements:
            raise ValueError("n_streams cannot exceed the number of transmit antennas")
        return self

    @property
    def wavelength(self) -> float:
        return wavelength(self.physics.carrier_frequency_hz)

    @property
    def rho(self) -> float:
        """Power per stream: total transmit power split evenly over N_s."""
        return self.link_budget.transmit_power_w / self.n_streams

    def physics_for(self, link_kind: str) -> PropagationPhysics:
        common = self.physics
        link = common.links[link_kind]
        return PropagationPhysics(
            carrier_frequency=common.carrier_frequency_hz,
            k_abs=common.k_abs,
            path_loss_exponent_los=link.path_loss_exponent_los,
            path_loss_exponent_nlos=link.path_loss_exponent_nlos,
            rician_factor=link.rician_factor,
            n_rays=link.n_rays,
            tx_gain=10 ** (common.tx_gain_dbi / 10),
            rx_gain=10 ** (common.rx_gain_dbi / 10),
            complex_ray_gains=common.complex_ray_gains,
            scatter_margin=common.scatter_margin_m,
        )

    def build_geometry(self) -> ScenarioGeometry:
        """Arrays in metres; unset normals face the partner end (panels face the BS-user midpoint)."""
        lam = self.wavelength
        tx_pos = _vec(self.transmitter.xyz)
        rx_pos = _vec(self.receiver.xyz)
        midpoint = tuple((a + b) / 2 for a, b in zip(tx_pos, rx_pos))

        def build(spec: ArraySpec, kind: str, facing: tuple[float, float, float]) -> ArrayGeometry:
            center = spec.xyz
            normal = spec.normal or [f - c for f, c in zip(facing, center)]
            if math.hypot(*normal) == 0.0:
                normal = [1.0, 0.0, 0.0]
            size = spec.element_size_wavelengths * lam
            return ArrayGeometry(
                n_horizontal=spec.cols,
                n_vertical=spec.rows,
                spacing=spec.spacing_wavelengths * lam,
                center=center,
                normal=tuple(normal),
                kind=kind,
                element_size=(size, size) if kind == "ris" else None,
            )

        return ScenarioGeometry(
            transmitter=build(self.transmitter, "antenna", rx_pos),
            receiver=build(self.receiver, "antenna", tx_pos),
            panels=[build(p, "ris", midpoint) for p in self.panels],
        )


def _vec(xyz: tuple[float, float, float]) -> tuple[float, float, float]:
    return tuple(float(v) for v in xyz)
