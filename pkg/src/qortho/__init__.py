"""q-Hermite and related orthogonal polynomials: exact connection formulas,
orthogonality densities, bilinear kernels and verification sweeps."""

from .qcore import DEFAULT_POLICY, QParam, TruncationPolicy, support_radius
from .polyfam import Family, FamilySpec, coeffs, evaluate, sequence

__all__ = ["DEFAULT_POLICY", "QParam", "TruncationPolicy", "support_radius",
           "Family", "FamilySpec", "coeffs", "evaluate", "sequence"]
__version__ = "0.1.0"
