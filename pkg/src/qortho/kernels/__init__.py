"""Densities, orthogonality, kernel sums and the q-Kibble-Slepian sum."""

from .densities import (DENSITY_KINDS, PAIRING_DEFAULTS, PAIRINGS, DensitySpec, EigenResiduals, GramResult,
                        QuadratureResult, chapman_kolmogorov_check, density, eigen_integral_checks, gram_matrix,
                        integrate, log_aux_product, log_qpoch_inf, orthogonality_integral, orthogonality_norm,
                        weighted_nodes)
from .kibble import (REPRESENTATIONS, KSParams, KSValue, NegativePoint, carlitz_bound, finite_sum_terms,
                     kibble_slepian, majorant_length, negativity_search)
from .sums import (KERNEL_KINDS, RECIPROCAL_KINDS, CarlitzResiduals, ConditioningError, KernelResult, C_n_aux, Q_mk,
                   carlitz_bilinear_check, gamma_mk, kernel_sum, poisson_mehler, poisson_mehler_diagonal_corollary,
                   reciprocal_expansion, series_sum)
