"""SLH input-output calculus for open quantum networks."""
from .errors import (
    AlgebraicLoopError, DimensionError, DomainExitError, IntegrationDivergedError,
    InvariantError, ModelError, NoStratonovichFormError, NumericalError, ParityError,
    ParseError, PoleError, SingularTransformError, SLHError, StructureError,
)
from .ops import (
    Property, PropertyReport, as_operator, bracket, check, dagger, tensor,
)
from .slh import (
    GeneratorMatrix, LangevinCoefficients, SLHTriple, StratonovichCoefficients,
    generator_matrix, io_coefficients, ito_product, ito_to_stratonovich,
    langevin_coefficients, lindblad_heisenberg, lindblad_schrodinger,
    stratonovich_to_ito,
)
from .network import (
    NetworkSpec, ReductionTrace, concatenate, feedback_reduce, permute_channels,
    reduce_network, series,
)
from .fermi import (
    FermiSLH, Parity, ParityContext, fermi_feedback_reduce, fermi_langevin,
    fermi_series, fermion_modes, parity_of, split_parity, validate_fermi,
    validate_fermi_stratonovich,
)
from .dynamics import (
    DensityMatrix, Trajectory, embed_diffusion, embed_poisson, embed_quadrature,
    expectation, integrate_master,
)
from .wire import (
    LinearPassive, TransferPoint, WireState, cascade_transfer, delta_phase,
    propagate_wavepacket, transfer_function,
)

__version__ = "0.1.0"
