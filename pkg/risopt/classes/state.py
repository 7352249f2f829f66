from typing import Annotated

from typing_extensions import NotRequired, Required, TypedDict

from ..lipschitz import LipschitzBound
from ..objective import ChannelSet, LinkBudget
from ..optimizer import RunReport
from ..services.progress import ProgressManager
from .config import ScenarioConfig
from .results import ResultRow


def merge_dicts(left: dict | None, right: dict | None) -> dict:
    """Reducer for keys written by the parallel solver nodes."""
    return {**(left or {}), **(right or {})}


# Define the input state
class TrialInput(TypedDict, total=False):
    config: Required[ScenarioConfig]
    trial: Required[int]
    seed: Required[int]
    sweep_param: NotRequired[str]
    sweep_value: NotRequired[float | str]
    timing: NotRequired[bool]
    progress: NotRequired[ProgressManager]
    job_id: NotRequired[str]


class TrialState(TrialInput):
    channels: ChannelSet
    link_budget: LinkBudget
    bound: LipschitzBound
    reports: Annotated[dict[str, RunReport], merge_dicts]
    failures: Annotated[dict[str, str], merge_dicts]
    quantized: dict[str, float]
    rows: list[ResultRow]
