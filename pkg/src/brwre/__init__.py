"""Branching random walks in random environment under a moving barrier."""
__version__ = "0.1.0"

from .environment import BarrierSpec, EnvironmentLaw, EnvironmentSequence, sample_environment
from .pointprocess import OffspringAtom, PointProcessLaw, laplace_profile, spine_step_law
from .criticality import assumption_report, find_critical_theta
from .streams import McEstimate

__all__ = [
    "BarrierSpec", "EnvironmentLaw", "EnvironmentSequence", "McEstimate", "OffspringAtom",
    "PointProcessLaw", "assumption_report", "find_critical_theta", "laplace_profile",
    "sample_environment", "spine_step_law",
]
