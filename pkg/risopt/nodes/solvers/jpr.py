from .base import BaseSolver


class JprMapgSolver(BaseSolver):
    def __init__(self):
        super().__init__()
        self.algorithm = "jpr_mapg"


class JprPgSolver(BaseSolver):
    def __init__(self):
        super().__init__()
        self.algorithm = "jpr_pg"
