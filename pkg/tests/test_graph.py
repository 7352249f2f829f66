import asyncio

import pytest

from risopt.graph import TrialGraph
from risopt.lipschitz import LipschitzBound
from risopt.services import ProgressManager
from risopt.utils.seeding import trial_seed


def invoke(trial_input):
    graph = TrialGraph().compile()
    return asyncio.run(graph.ainvoke(trial_input))


class TestTrialGraph:
    def test_rows_follow_configured_algorithms(self, desk_config):
        cfg = desk_config.model_copy(update={"algorithms": ["no_ris", "jpr_mapg", "ris_only"]})
        state = invoke({"config": cfg, "trial": 0, "seed": trial_seed(cfg.master_seed, 0)})
        assert [row.algorithm for row in state["rows"]] == ["no_ris", "jpr_mapg", "ris_only"]
        assert set(state["reports"]) == {"no_ris", "jpr_mapg", "ris_only"}
        assert isinstance(state["bound"], LipschitzBound)

    def test_only_configured_solvers_run(self, desk_config):
        cfg = desk_config.model_copy(update={"algorithms": ["static_ris"]})
        state = invoke({"config": cfg, "trial": 1, "seed": 99})
        assert list(state["reports"]) == ["static_ris"]
        row = state["rows"][0]
        assert (row.sweep_param, row.sweep_value, row.trial, row.status) == ("none", "-", 1, "closed_form")
        assert row.lipschitz_L == pytest.approx(state["bound"].L)

    def test_solver_failure_is_isolated(self, desk_config, monkeypatch):
        from risopt.nodes.solvers import base

        real = base.run_algorithm

        def flaky(name, *args, **kwargs):
            if name == "jpr_pg":
                raise FloatingPointError("diverged")
            return real(name, *args, **kwargs)

        monkeypatch.setattr(base, "run_algorithm", flaky)
        cfg = desk_config.model_copy(update={"algorithms": ["jpr_mapg", "jpr_pg"]})
        state = invoke({"config": cfg, "trial": 0, "seed": 5})
        statuses = {row.algorithm: row.status for row in state["rows"]}
        assert statuses["jpr_pg"] == "error:FloatingPointError"
        assert not statuses["jpr_mapg"].startswith("error")

    def test_quantizer(self, desk_config):
        optimizer = desk_config.optimizer.model_copy(update={"quant_bits": 2})
        cfg = desk_config.model_copy(update={"algorithms": ["jpr_mapg"], "optimizer": optimizer})
        state = invoke({"config": cfg, "trial": 0, "seed": 7})
        assert set(state["quantized"]) == {"jpr_mapg"}
        assert state["rows"][0].rate_quantized_bps_hz == state["quantized"]["jpr_mapg"]

    def test_progress_updates(self, desk_config):
        progress = ProgressManager()
        progress.start_job("job", 1)
        cfg = desk_config.model_copy(update={"algorithms": ["static_ris"]})
        invoke({"config": cfg, "trial": 0, "seed": 3, "progress": progress, "job_id": "job"})
        counters = progress.finish_job("job")
        assert (counters.done, counters.failed) == (1, 0)


def test_progress_counts_failures():
    progress = ProgressManager(report_every=1)
    progress.start_job("job", 2)
    asyncio.run(progress.send_status_update("job", "trial_complete", message="ok"))
    asyncio.run(progress.send_status_update("job", "trial_error", error="boom"))
    counters = progress.jobs["job"]
    assert (counters.total, counters.done, counters.failed) == (2, 2, 1)
