"""Sensor selection and scheduling for linear-Gaussian target tracking.

Submodules
----------
linalg            pseudoinverse, PSD-tolerant Cholesky, SPD solves
model             scenario data model, JSON I/O, generators
filter            prediction, masked-measurement updates, covariance rollout
measure           information measures and the selection objectives
select_separable  analytic top-k selection and the exhaustive oracle
select_lp         LP relaxation, simplex solver, greedy rounding, certificates
select_sdr        semidefinite relaxation and Gaussian randomization
sim               Monte Carlo simulation harness
cli               command-line entry point
"""

from .errors import (
    Infeasible,
    InvalidMatrix,
    NotConverged,
    NotPSD,
    NotPositiveDefinite,
    NotSeparableNoise,
    PerStepCountOutOfRange,
    RoundingInfeasible,
    ScenarioError,
    SenselError,
    SingularBlock,
    SingularNoise,
    TooLarge,
)
from .model import (
    ConstraintSet,
    DynamicSystem,
    JammerSpec,
    LinearConstraint,
    NoiseModel,
    Scenario,
    SelectionSchedule,
    SensorModel,
    apply_jammer,
    distance_noise,
    gen_grid_scenario,
    gen_uniform_scenario,
    load_scenario,
    make_scenario,
    save_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "ConstraintSet",
    "DynamicSystem",
    "Infeasible",
    "InvalidMatrix",
    "JammerSpec",
    "LinearConstraint",
    "NoiseModel",
    "NotConverged",
    "NotPSD",
    "NotPositiveDefinite",
    "NotSeparableNoise",
    "PerStepCountOutOfRange",
    "RoundingInfeasible",
    "Scenario",
    "ScenarioError",
    "SelectionSchedule",
    "SenselError",
    "SensorModel",
    "SingularBlock",
    "SingularNoise",
    "TooLarge",
    "apply_jammer",
    "distance_noise",
    "gen_grid_scenario",
    "gen_uniform_scenario",
    "load_scenario",
    "make_scenario",
    "save_scenario",
]
