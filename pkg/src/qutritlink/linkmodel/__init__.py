from .channels import (
    P_EVEN,
    P_ODD,
    SPEED_OF_LIGHT,
    LinkParameters,
    QuantumChannel,
    apply_channel,
    coherence_time,
    crosstalk_channel,
    dephasing_channel,
    parity_dephasing,
)
from .dispersion import GaussianFit, fit_dispersion, fit_gaussian, read_delay_scan, synthetic_scan, write_delay_scan
from .fibermodes import OAM_STATES, VECTOR_MODES, FiberModeMap, fiber_to_oam, oam_to_fiber
from .simulate import simulate_link, sweep_link, write_sweep
from .source import SpiralCoefficients, source_for_fidelity, spdc_state
