"""Stable motion learning on Riemannian manifolds (unit sphere, SPD cone)."""

from .base_ds import GeodesicDS, GoalSwitcher, gain_from_normalized
from .gmm import GmmDiffeomorphism, fit_em
from .learning import (DemonstrationSet, RiemannianDS, build_tangent_pairs,
                       generate_base_trajectories, train)
from .manifolds import (SPD, DomainError, Euclidean, SingularityError, Sphere, distance,
                        exp_map, log_map, parallel_transport)
from .stiffness import StiffnessProfile, stiffness_from_covariance

__version__ = "0.1.0"
