import asyncio
import logging

from ...classes import TrialState
from ...optimizer import RunReport, run_algorithm

logger = logging.getLogger(__name__)


class BaseSolver:
    def __init__(self):
        self.algorithm = "base_solver"

    @property
    def algorithm(self) -> str:
        if not hasattr(self, "_algorithm"):
            raise ValueError("Algorithm not set by subclass")
        return self._algorithm

    @algorithm.setter
    def algorithm(self, value: str):
        self._algorithm = value

    def solve(self, state: TrialState) -> RunReport:
        cfg = state["config"]
        return run_algorithm(
            self.algorithm,
            state["channels"],
            state["link_budget"],
            cfg.optimizer,
            cfg.n_streams,
            cfg.amplitude,
            lipschitz=state["bound"].L,
        )

    async def run(self, state: TrialState) -> dict:
        try:
            report = await asyncio.to_thread(self.solve, state)
        except Exception as e:
            logger.error(f"{self.algorithm} failed on trial {state['trial']}: {str(e)}", exc_info=True)
            return {"failures": {self.algorithm: type(e).__name__}}
        logger.debug(
            f"{self.algorithm} on trial {state['trial']}: {report.final_rate:.4f} bits/s/Hz "
            f"after {report.iterations} iterations"
        )
        return {"reports": {self.algorithm: report}}
