import math

import pytest

from risopt.errors import ConfigParseError, ConfigValidationError
from risopt.harness import apply_sweep_value, dump_config, load_config, validate_config

MINIMAL = {
    "transmitter": {"rows": 2, "cols": 2, "position": [0.0, 0.0]},
    "receiver": {"rows": 1, "cols": 2, "position": [30.0, 0.0]},
    "panels": [{"rows": 4, "cols": 4, "position": [10.0, 10.0]}],
    "n_streams": 1,
}


def with_updates(**updates):
    return {**MINIMAL, **updates}


class TestLoadConfig:
    def test_bundled_preset(self):
        cfg = load_config("indoor_panel_10_10")
        assert cfg.transmitter.n_elements == 64
        assert cfg.receiver.n_elements == 16
        assert cfg.panels[0].n_elements == 256
        assert cfg.n_streams == 3

    def test_every_preset_loads(self):
        for name in (
            "desk_parallel", "desk_multihop", "indoor_panel_25_10", "indoor_ris_elements",
            "indoor_multi_panel_distance", "indoor_quantized_phases", "subthz_multihop",
        ):
            assert load_config(name).name

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigParseError):
            load_config(tmp_path / "absent.toml")

    def test_malformed_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("trials = [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigParseError):
            load_config(path)

    def test_dump_round_trip(self, tmp_path):
        cfg = load_config("desk_multihop")
        path = tmp_path / "dumped.toml"
        path.write_text(dump_config(cfg), encoding="utf-8")
        assert load_config(path) == cfg


class TestValidation:
    def test_defaults(self):
        cfg = validate_config(MINIMAL)
        assert cfg.trials == 500
        assert cfg.optimizer.step_scale == 0.99
        assert cfg.algorithms == ["jpr_mapg"]
        assert cfg.physics.links["tx_rx"].rician_factor == 0.0
        assert cfg.physics.links["ris_ris"].rician_factor == 10.0

    def test_negative_power(self):
        with pytest.raises(ConfigValidationError) as excinfo:
            validate_config(with_updates(link_budget={"p_tx_w": -1.0}))
        assert "link_budget.p_tx_w" in excinfo.value.field_paths

    def test_watts_override(self):
        cfg = validate_config(with_updates(link_budget={"p_tx_w": 1.0}))
        assert cfg.link_budget.p_tx_dbm == pytest.approx(30.0)
        assert cfg.link_budget.transmit_power_w == pytest.approx(1.0)

    def test_unknown_key(self):
        with pytest.raises(ConfigValidationError):
            validate_config(with_updates(trails=10))

    def test_unknown_algorithm(self):
        with pytest.raises(ConfigValidationError):
            validate_config(with_updates(algorithms=["simulated_annealing"]))

    def test_unknown_link_class(self):
        with pytest.raises(ConfigValidationError):
            validate_config(with_updates(physics={"links": {"ris_user": {}}}))

    def test_coincident_positions(self):
        with pytest.raises(ConfigValidationError):
            validate_config(with_updates(receiver={"rows": 1, "cols": 2, "position": [0.0, 0.0, 0.0]}))

    def test_multihop_needs_panels(self):
        with pytest.raises(ConfigValidationError):
            validate_config(with_updates(topology="multihop", panels=[]))

    def test_panels_share_size(self):
        panels = [
            {"rows": 4, "cols": 4, "position": [10.0, 10.0]},
            {"rows": 2, "cols": 4, "position": [20.0, 10.0]},
        ]
        with pytest.raises(ConfigValidationError):
            validate_config(with_updates(panels=panels))

    def test_too_many_streams(self):
        with pytest.raises(ConfigValidationError):
            validate_config(with_updates(n_streams=5))

    def test_power_per_stream(self):
        cfg = validate_config(with_updates(n_streams=2, link_budget={"p_tx_dbm": 30.0}))
        assert cfg.rho == pytest.approx(0.5)

    def test_thermal_noise(self):
        cfg = validate_config(with_updates(link_budget={"bandwidth_hz": 1e6}))
        assert cfg.link_budget.noise_power == pytest.approx(1.380649e-23 * 290.0 * 1e6)

    def test_geometry_faces_partner(self):
        geometry = validate_config(MINIMAL).build_geometry()
        assert geometry.transmitter.normal == (30.0, 0.0, 0.0)
        assert geometry.panels[0].kind == "ris"
        assert geometry.panels[0].n_elements == 16
        assert math.isclose(geometry.panels[0].spacing, 0.5 * validate_config(MINIMAL).wavelength)


class TestSweepValues:
    def test_power(self):
        cfg = apply_sweep_value(validate_config(MINIMAL), "p_tx_dbm", 10.0)
        assert cfg.link_budget.p_tx_dbm == 10.0

    def test_ris_elements(self):
        cfg = apply_sweep_value(validate_config(MINIMAL), "n_ris", 64)
        assert (cfg.panels[0].rows, cfg.panels[0].cols) == (8, 8)

    def test_ris_elements_must_be_square(self):
        with pytest.raises(ConfigValidationError):
            apply_sweep_value(validate_config(MINIMAL), "n_ris", 50)

    def test_user_distance(self):
        base = validate_config(with_updates(user_path={"y_offset_m": 2.0}))
        cfg = apply_sweep_value(base, "user_distance", 55.0)
        assert cfg.receiver.xyz == (55.0, 2.0, 0.0)

    def test_quant_bits(self):
        base = validate_config(MINIMAL)
        assert apply_sweep_value(base, "quant_bits", 2).optimizer.quant_bits == 2
        assert apply_sweep_value(base, "quant_bits", "inf").optimizer.quant_bits is None

    def test_inf_only_for_quant_bits(self):
        with pytest.raises(ConfigValidationError):
            apply_sweep_value(validate_config(MINIMAL), "p_tx_dbm", "inf")

    def test_panel_count(self):
        panels = [
            {"rows": 4, "cols": 4, "position": [10.0, 10.0]},
            {"rows": 4, "cols": 4, "position": [20.0, 10.0]},
        ]
        base = validate_config(with_updates(panels=panels))
        assert len(apply_sweep_value(base, "n_panels", 1).panels) == 1
        with pytest.raises(ConfigValidationError):
            apply_sweep_value(base, "n_panels", 3)
