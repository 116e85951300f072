"""Cube-and-conquer cubing with propagation-rate guided Monte Carlo tree search."""

from .cnf import CnfFormula, CubeSet, parse_dimacs, parse_icnf, write_dimacs, write_icnf
from .cuber import CubingConfig, cube_episode
from .conquer import solve, solve_cnc, verify_model

__all__ = [
    "CnfFormula", "CubeSet", "CubingConfig", "cube_episode", "parse_dimacs", "parse_icnf",
    "solve", "solve_cnc", "verify_model", "write_dimacs", "write_icnf",
]
__version__ = "0.1.0"
