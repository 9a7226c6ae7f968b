"""Curriculum-based course timetabling: instance model, cost core, simulated annealing
and a feature-based parameter tuning pipeline."""

from .annealer import SAParams, SearchResult, anneal, compute_na, compute_ns
from .evaluation import (CostBreakdown, Move, Timetable, apply_move, brute_force_optimum,
                         delta_cost, format_solution, full_cost, parse_solution,
                         random_assignment)
from .instance import (FEATURE_NAMES, FeatureVector, Instance, extract_features,
                       format_ctt, generate_toy_instance, load_ctt, parse_ctt,
                       validate_instance)

__version__ = "0.1.0"

__all__ = [
    "CostBreakdown", "FEATURE_NAMES", "FeatureVector", "Instance", "Move", "SAParams",
    "SearchResult", "Timetable", "anneal", "apply_move", "brute_force_optimum",
    "compute_na", "compute_ns", "delta_cost", "extract_features", "format_ctt",
    "format_solution", "full_cost", "generate_toy_instance", "load_ctt", "parse_ctt",
    "parse_solution", "random_assignment", "validate_instance",
]
