"""Particle (blob) method for aggregation-diffusion gradient flows.

Simulates 2-Wasserstein gradient flows of the energy
interaction + Renyi entropy for power-law interaction potentials; large
diffusion exponents m approximate the height-constrained interaction
energy, whose set-valued minimizers and critical masses the experiment
harness investigates.
"""

from ._accel import BACKEND
from .config import BarenblattInit, PatchInit, RunConfig, emit_config, parse_config
from .dynamics import (
    SimulationState,
    TrajectoryRecord,
    detect_steady,
    initial_state,
    run,
    step,
    velocity,
)
from .energy import (
    DissipationReport,
    EnergyBreakdown,
    dissipation_report,
    entropy_blob,
    interaction_energy,
    total_energy,
)
from .ensemble import (
    ObservableSet,
    ParticleEnsemble,
    init_barenblatt,
    init_patch,
    make_ensemble,
    observables,
    read_snapshot,
    write_snapshot,
)
from .errors import (
    ConfigError,
    DensityBlowupError,
    NumericalError,
    SlowdiffError,
    StiffBlowupError,
    ValidationError,
)
from .experiments import (
    CriticalMassResult,
    MSweepRow,
    PhaseReport,
    classify_phase,
    critical_mass,
    desk_config,
    initial_data_invariance,
    m_sweep,
    repulsive_attractive_terms,
)
from .kernel import (
    InteractionKernel,
    conv_grad,
    kernel_eval,
    kernel_from_raw,
    kernel_grad,
    kernel_validate,
    powerlaw_kernel,
)
from .mollifier import Mollifier, epsilon_from_h, mollify_density, mollify_density_grad
from .transport import TransportResult, wasserstein_1d, wasserstein_oracle

__version__ = "0.1.0"
