"""Extensions of the baseline model: rising delay costs, bounded jumps,
unlimited capacity, multi-jump paths and the teacher scenarios."""

from .bounded import BoundedJumpSolution, bounded_jump_solve
from .increasing_cost import CostSchedule, IncreasingCostSolution, solve_increasing_cost
from .suspensive import audit_suspensive, compose_suspensive_path, compose_suspensive_paths, jump_law
from .teacher import teacher_engagement_max, teacher_knowledge_max
from .unlimited import UnlimitedCapacitySolution, unlimited_capacity_solve

__all__ = [
    "BoundedJumpSolution", "bounded_jump_solve", "CostSchedule", "IncreasingCostSolution",
    "solve_increasing_cost", "audit_suspensive", "compose_suspensive_path", "compose_suspensive_paths",
    "jump_law", "teacher_engagement_max", "teacher_knowledge_max", "UnlimitedCapacitySolution",
    "unlimited_capacity_solve",
]
