import logging

from ..classes import TrialState
from ..optimizer import quantized_rate

logger = logging.getLogger(__name__)


class Quantizer:
    """Final projection of every solver's phases onto the N_b-bit grid."""

    async def run(self, state: TrialState) -> dict:
        bits = state["config"].optimizer.quant_bits
        if bits is None:
            return {"quantized": {}}
        quantized = {}
        for name, report in state.get("reports", {}).items():
            quantized[name] = quantized_rate(state["channels"], state["link_budget"], report, bits)
        return {"quantized": quantized}
