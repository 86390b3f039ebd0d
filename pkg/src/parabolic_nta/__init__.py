"""Finite-scale verification of parabolic NTA domains in one space and one time dimension."""

from .errors import (AmbiguityError, DegenerateInputError, ParabolicError, PreconditionError,
                     RejectedQueryError, ResolutionError, SolverError, SpecParseError,
                     WindowError)
from .geometry import (Box, DomainModel, ParaCylinder, ParaPoint, SampledFunction,
                       boundary_sample, lip_half_norm, para_dist, rasterize, signed_distance)

__version__ = "0.1.0"
