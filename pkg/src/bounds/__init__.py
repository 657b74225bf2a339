# Bounds module initialization
from .formulas import BoundKind, BoundQuery, collision_bound, pair_count
from .monte_carlo import (
    EmpiricalRate,
    bound_table,
    empirical_collision_rate,
    read_bound_table,
    write_bound_table,
)

__all__ = [
    'BoundKind', 'BoundQuery', 'collision_bound', 'pair_count',
    'EmpiricalRate', 'bound_table', 'empirical_collision_rate', 'read_bound_table', 'write_bound_table',
]
