"""Linear inviscid damping for the shear flow u(y) = tanh y.

Modules: flow_profile, rayleigh_homogeneous, wronskian, kernel_operators,
spectral_evolution, direct_oracle, harness_cli (plus the named initial data in ``data``).
"""

from . import (data, direct_oracle, flow_profile, harness_cli, kernel_operators, rayleigh_homogeneous,
               spectral_evolution, wronskian)

__version__ = "0.1.0"

__all__ = ["data", "direct_oracle", "flow_profile", "harness_cli", "kernel_operators", "rayleigh_homogeneous",
           "spectral_evolution", "wronskian", "__version__"]
