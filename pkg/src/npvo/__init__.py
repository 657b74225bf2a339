# NPVO module initialization
from .ellipsoid import BOUNDARY_RTOL, Ellipsoid
from .obstacle import Npvo, build_multi_agent_npvo, membership_grid, npvo_membership
from .solver import Feasibility, SolverConfig, VelocityQuery, find_safe_velocity

__all__ = [
    'BOUNDARY_RTOL', 'Ellipsoid',
    'Npvo', 'build_multi_agent_npvo', 'membership_grid', 'npvo_membership',
    'Feasibility', 'SolverConfig', 'VelocityQuery', 'find_safe_velocity',
]
