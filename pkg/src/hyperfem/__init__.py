"""hyperfem: hyperelastic finite elements driven by strain-energy expressions.

Define a material by its strain-energy density only; stress and tangent
kernels are derived symbolically and compiled to instruction tapes that
feed a total-Lagrangian Newton solver, a verification harness and an
interactive probing service.
"""

__version__ = "0.1.0"

from ._accel import BACKEND as kernel_backend  # noqa: F401
