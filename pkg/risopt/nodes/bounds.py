import asyncio
import logging

from ..classes import TrialState
from ..lipschitz import lipschitz_bound

logger = logging.getLogger(__name__)


class LipschitzEstimator:
    """Gradient-Lipschitz bound for the realization, shared by every solver of the trial."""

    async def run(self, state: TrialState) -> dict:
        cfg = state["config"]
        bound = await asyncio.to_thread(
            lipschitz_bound, state["channels"], state["link_budget"], cfg.n_streams, cfg.amplitude
        )
        logger.debug(f"Trial {state['trial']}: L = {bound.L:.6g} (zeta = {bound.zeta:.6g})")
        return {"bound": bound}
