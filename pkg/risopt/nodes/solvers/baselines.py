from .base import BaseSolver


class RisOnlySolver(BaseSolver):
    """SVD precoder held fixed, phases optimized."""

    def __init__(self):
        super().__init__()
        self.algorithm = "ris_only"


class StaticRisSolver(BaseSolver):
    def __init__(self):
        super().__init__()
        self.algorithm = "static_ris"


class NoRisSolver(BaseSolver):
    def __init__(self):
        super().__init__()
        self.algorithm = "no_ris"
