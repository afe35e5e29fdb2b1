"""shearlab: stability analysis and exact localizing solutions of thermally
softening shear flows, with a direct nonlinear solver for cross-validation."""

__version__ = "0.1.0"

from .errors import (
    ShearlabError,
    ParameterError,
    EmptyOverlapError,
    RegionExitError,
    MaxStepsError,
    UnresolvedTailError,
    StiffnessError,
    PositivityError,
    RangeError,
)
from .material import (
    MaterialParams,
    UniformShearState,
    ScalingParams,
    GridTriple,
    uniform_shear,
    tau_of_t,
    t_of_tau,
    constitutive_stress,
    rescale_triple,
)
from .stability import (
    ModeEigen,
    ModeSpectrum,
    ModeTrajectory,
    EnergyCertificate,
    DecayReport,
    mode_eigen,
    spectrum,
    asymptotic_eigen,
    mode_matrix,
    trotter_split,
    frozen_mode_solution,
    integrate_mode,
    energy_certificate,
    energy_decay_check,
)
from .orbit import (
    PlanarParams,
    EquilibriumInfo,
    OrbitPath,
    vector_field,
    jacobian,
    equilibria,
    shoot_heteroclinic,
    estimate_kappa1,
    reparametrize,
)
from .profile import (
    Profile,
    ResidualReport,
    EndpointReport,
    reconstruct,
    equilibrium_closed_form,
    scale_invariant_solution,
    ode_residual,
    endpoint_report,
)
from .localization import (
    LocalizedSolution,
    SpaceTimeResidual,
    BandDiagnostics,
    pde_residual,
    residual_convergence,
    band_diagnostics,
)
from .pdesim import (
    Grid1D,
    FieldState,
    SimConfig,
    SimResult,
    initial_uniform,
    initial_gaussian_bump,
    step,
    run,
)
