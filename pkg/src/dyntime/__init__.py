"""
Time functions and dynamical simultaneity for finite-level quantum systems
and a few closed-form classical systems.
"""

from .action_angle import (
    ActionAngleChart,
    EnergyBasisCoordinates,
    admissible_indices,
    chart,
    chart_inverse,
    energy_coordinates,
    in_reduced_space,
    intertwine,
    intertwiner,
    time_function,
    time_function_period,
)
from .classical import (
    ConstantForce,
    FreeParticle,
    HarmonicOscillator,
    PhasePoint,
    flow,
    ho_chart,
    in_reduced_space_classical,
    theta_pairing,
    time_function_classical,
)
from .errors import (
    DegenerateFrequency,
    DimensionMismatch,
    DyntimeError,
    InsufficientSamples,
    InvalidChart,
    NotHermitian,
    NotInReducedSpace,
    NumericalFailure,
    ParseError,
)
from .projective import (
    ObservableFunction,
    PureState,
    evolve,
    expectation,
    is_fixed_point,
    poisson_bracket,
    ray_equal,
)
from .simultaneity import (
    FlowHandle,
    OrbitClass,
    OrbitKind,
    VerificationReport,
    classical_flow,
    classify_orbit,
    level_set_pairs,
    quantum_flow,
    verify_time_function,
)
from .spectral import (
    HermitianOperator,
    SpectralData,
    projectors,
    propagator,
    spectral_decompose,
)

__version__ = "0.1.0"
