from .bootstrap import BootstrapResult, bootstrap_uncertainty, poisson_resampler
from .counts import CoincidenceTable, format_table, load_bundled_table, parse_table, read_table, write_table
from .mle import MLEResult, log_likelihood, measurement_operators, mle_reconstruct, predicted_probabilities, predicted_probability
from .process import (
    ProcessMatrix,
    apply_process,
    chi_from_kraus,
    default_inputs,
    identity_process,
    kraus_from_chi,
    process_fidelity,
    process_reconstruct,
)
from .projectors import ProjectorSet, build_projector_set
