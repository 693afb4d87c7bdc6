"""Explicit-constant convergence bounds for non-normal semigroups via intertwining.

Modules
-------
specmat
    Matrix exponentials, Lyapunov solves, Gramians, Kalman test, conditioning.
gaussalg
    Closed-form plane-wave algebra under Gaussian weights.
ou
    Degenerate Ornstein-Uhlenbeck models, diagonal sandwiches and decay curves.
jacobi
    Non-local Jacobi models, Beta moments and multiplier bounds.
nsa
    Finite-dimensional sandbox for oblique spectral resolutions and two-sided intertwiners.
"""

from .errors import (DegenerateInputError, DomainError, HypocoerciveError, HypothesisError,
                     InvalidInputError, OrderingError, PropernessError, SingularityError,
                     StabilityError)

__version__ = "0.1.0"

__all__ = ["DegenerateInputError", "DomainError", "HypocoerciveError", "HypothesisError",
           "InvalidInputError", "OrderingError", "PropernessError", "SingularityError",
           "StabilityError", "__version__"]
