"""Exact maximum-clique matching with pairwise constraints for 3D correspondences."""

from .graph import Graph, VertexSet, adjacency, build_graph, complement, parse_dimacs, write_dimacs
from .solvers import SolveResult, brute_force_mc, solve, solve_basic, solve_mcq, solve_pmc

__version__ = "0.1.0"
