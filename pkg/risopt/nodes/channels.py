import asyncio
import logging

from ..channel import generate_scenario_channels
from ..classes import TrialState
from ..objective import LinkBudget
from ..utils.seeding import make_rng

logger = logging.getLogger(__name__)


class ChannelGenerator:
    """Draws one channel realization from the trial's own random stream."""

    async def generate(self, state: TrialState) -> dict:
        cfg = state["config"]
        rng = make_rng(state["seed"])
        logger.debug(f"Drawing channels for trial {state['trial']} (seed {state['seed']})")
        channels = await asyncio.to_thread(generate_scenario_channels, cfg, rng)
        link_budget = LinkBudget(rho=cfg.rho, noise_power=cfg.link_budget.noise_power)
        return {"channels": channels, "link_budget": link_budget}

    async def run(self, state: TrialState) -> dict:
        return await self.generate(state)
