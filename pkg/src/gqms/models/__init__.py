"""The single-noise (3-mode) and two-noise (4-mode) systems."""

from .common import ModelInconsistency, RegionVerdict, analyse_system
from .single_noise import (
    KAPPA_CROSSOVER,
    SingleNoiseParams,
    beta_star,
    beta_tilde_threshold,
    single_noise_closed_form,
    single_noise_entangled,
    single_noise_entangled_region,
    single_noise_reduced_closed_form,
    single_noise_stability,
    single_noise_system,
    appendix_b_inequalities,
)
from .two_noise import (
    TwoNoiseParams,
    appendix_a_decomposition,
    two_noise_equal_temp_region,
    two_noise_k0_closed_form,
    two_noise_k1_closed_form,
    two_noise_stability,
    two_noise_system,
)

__all__ = [
    "ModelInconsistency",
    "RegionVerdict",
    "analyse_system",
    "KAPPA_CROSSOVER",
    "SingleNoiseParams",
    "beta_star",
    "beta_tilde_threshold",
    "single_noise_closed_form",
    "single_noise_entangled",
    "single_noise_entangled_region",
    "single_noise_reduced_closed_form",
    "single_noise_stability",
    "single_noise_system",
    "appendix_b_inequalities",
    "TwoNoiseParams",
    "appendix_a_decomposition",
    "two_noise_equal_temp_region",
    "two_noise_k0_closed_form",
    "two_noise_k1_closed_form",
    "two_noise_stability",
    "two_noise_system",
]
