from .base import BaseSolver
from .baselines import NoRisSolver, RisOnlySolver, StaticRisSolver
from .jpr import JprMapgSolver, JprPgSolver

SOLVERS: dict[str, type[BaseSolver]] = {
    "jpr_mapg": JprMapgSolver,
    "jpr_pg": JprPgSolver,
    "ris_only": RisOnlySolver,
    "static_ris": StaticRisSolver,
    "no_ris": NoRisSolver,
}

__all__ = [
    "BaseSolver",
    "JprMapgSolver",
    "JprPgSolver",
    "RisOnlySolver",
    "StaticRisSolver",
    "NoRisSolver",
    "SOLVERS",
]
