"""Time-periodic subsonic duct flow with damping and boundary feedback.

Steady background, x-marching builder for the periodic orbit, semi-Lagrangian
time-domain solver and the stability experiments built on them.
"""
from .errors import (ChokingError, ConfigError, ConvergenceError, DomainError, InstabilityError,
                     SolverError, UsageError)
from .gas_model import GasModel, PrimitiveState, RiemannTriple, from_riemann, to_riemann, wave_speeds
from .steady_fanno import NO_CHOKING, DampingProfile, InflowCondition, SteadyProfile, max_duct_length, solve_fanno
from .field_grid import PeriodicField, PeriodicGrid, WindowField, sup_distance
from .periodic_builder import BoundarySpec, BuildReport, FourierSeries, build_periodic, integrating_factors
from .ibvp_solver import CflCertificate, InitialData, simulate, step, t_zero_horizon
from .config import SimConfig, default_config, load_config, loads

__version__ = "0.1.0"
