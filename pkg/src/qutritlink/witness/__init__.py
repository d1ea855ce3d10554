from .cglmp import (
    CGLMP_WEIGHTS,
    LOCAL_BOUND,
    MES_OPTIMUM,
    STANDARD_SETTINGS,
    CGLMPOptimum,
    CGLMPSettings,
    LocalBases,
    cglmp_optimize,
    cglmp_probability,
    cglmp_value,
    fourier_basis,
    joint_probabilities,
)
from .fidelity import best_mes_fidelity, certify_dimension, schmidt_rank_bound
from .report import WitnessReport, witness_report
