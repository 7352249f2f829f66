from .config import ScenarioConfig
from .results import CSV_COLUMNS, ResultRow
from .state import TrialInput, TrialState

__all__ = ["ScenarioConfig", "ResultRow", "CSV_COLUMNS", "TrialInput", "TrialState"]
