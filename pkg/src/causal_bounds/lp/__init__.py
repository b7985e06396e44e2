from .simplex import LinearProgram, LpSolution, Status, solve_lp, TAU_LP, TAU_GAP
from .mu_program import (
    DualCertificate,
    MuProgramResult,
    build_mu_program,
    check_conforming,
    constraint_system,
    dual_objective_f,
    solve_mu_program,
)

__all__ = [
    "LinearProgram",
    "LpSolution",
    "Status",
    "solve_lp",
    "TAU_LP",
    "TAU_GAP",
    "DualCertificate",
    "MuProgramResult",
    "build_mu_program",
    "check_conforming",
    "constraint_system",
    "dual_objective_f",
    "solve_mu_program",
]
