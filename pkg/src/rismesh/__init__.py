"""Interference-aware routing and throughput maximisation for RIS-assisted
THz relay mesh networks."""

from .channel import PhyParams
from .estimator import MeshNetwork, PathSelector, build_network, throughput_sweep
from .geometry import RisPanel
from .optimizer import Instance, Solution, evaluate_lambda, solve_exact, solve_heuristic
from .topology import Demand, PathRoute, Scenario, Transmission, build_demands, generate_scenario
from .validation import Infeasible, NeverDetectable, TooLarge

__version__ = "0.1.0"

__all__ = [
    "Demand",
    "Infeasible",
    "Instance",
    "MeshNetwork",
    "NeverDetectable",
    "PathRoute",
    "PathSelector",
    "PhyParams",
    "RisPanel",
    "Scenario",
    "Solution",
    "TooLarge",
    "Transmission",
    "build_demands",
    "build_network",
    "evaluate_lambda",
    "generate_scenario",
    "solve_exact",
    "solve_heuristic",
    "throughput_sweep",
]
