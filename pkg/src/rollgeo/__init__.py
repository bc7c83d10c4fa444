"""Rolling-manifold geodesics and lifted Hamiltonian flows.

Numerical library for Hamiltonian systems on submersions with
connections, the kinematics of one Riemannian surface rolling on another
without twisting or slipping, the normal geodesics of that control
system (including the variable-length pendulum reduction in two
dimensions), and a shooting solver for the endpoint problem.
"""

from .charts import ChartMetric, chart_by_name, chart_names
from .errors import ChartDomainError, DimensionError, HorizontalityError
from .geodesics import (
    GeodesicRun,
    Pendulum2DState,
    PendulumRun,
    RollingGeodesicState,
    charge_monitor,
    integrate_geodesic,
    pendulum_constants,
    pendulum_residual,
    reduce_2d,
    rn_rolling_flow,
)
from .rolling import (
    RollingConfiguration,
    RollingPath,
    aligned_configuration,
    curvature_gap,
    develop,
    noslip_notwist_residual,
)
from .shooting import ShootingProblem, ShootingResult, endpoint_map, solve
from .submersion import (
    CotangentState,
    SubmersionTestbed,
    testbed_by_name,
    testbed_names,
    verify_projection,
)
from .suites import execute_scenario, run_suite, scenario_by_name, scenario_names

__version__ = "0.1.0"

__all__ = [
    "ChartMetric",
    "ChartDomainError",
    "CotangentState",
    "DimensionError",
    "GeodesicRun",
    "HorizontalityError",
    "Pendulum2DState",
    "PendulumRun",
    "RollingConfiguration",
    "RollingGeodesicState",
    "RollingPath",
    "ShootingProblem",
    "ShootingResult",
    "SubmersionTestbed",
    "aligned_configuration",
    "charge_monitor",
    "chart_by_name",
    "chart_names",
    "curvature_gap",
    "develop",
    "endpoint_map",
    "execute_scenario",
    "integrate_geodesic",
    "noslip_notwist_residual",
    "pendulum_constants",
    "pendulum_residual",
    "reduce_2d",
    "rn_rolling_flow",
    "run_suite",
    "scenario_by_name",
    "scenario_names",
    "solve",
    "testbed_by_name",
    "testbed_names",
    "verify_projection",
]
