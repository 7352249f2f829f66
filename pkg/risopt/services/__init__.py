from .progress import JobCounters, ProgressManager
from .results import ResultWriter

__all__ = ["JobCounters", "ProgressManager", "ResultWriter"]
