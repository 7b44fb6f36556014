"""Chebyshev-filtered MPS ground-state energy estimation.

A library for estimating ground-state energies of qubit Hamiltonians by
expanding a threshold filter in Chebyshev polynomials, evaluating the
Chebyshev moments of a guiding state with bond-truncated matrix product
states, extrapolating the moment tail by linear prediction, and scanning
the resulting cumulative function.  A dense state-vector oracle validates
every approximation at small qubit counts.
"""

__version__ = "0.1.0"

from .chebyshev import (
    ChebRunConfig,
    MomentSequence,
    StepReport,
    bond_growth_trace,
    cheb_step,
    moments_from_vectors,
    run_chebyshev,
    truncation_budget,
)
from .dmrg import DmrgConfig, DmrgResult, dmrg_ground, load_guiding_state
from .errors import (
    CapacityError,
    ChebGseeError,
    FormatError,
    NumericalError,
    ParameterError,
    StructuralError,
    ThresholdNotBracketedError,
)
from .filters import (
    ChebCoeffs,
    FilterMeta,
    cheb_family,
    default_degree,
    eval_cheb,
    shifted_sign_cheb,
    smoothing_rate,
)
from .gsee import GseeResult, binary_search_energy, cumulative, estimate_energy, filter_value
from .hamiltonians import (
    NormalizedHamiltonian,
    PauliSum,
    normalize_pauli_sum,
    paulisum_to_mpo,
    tfim_1d,
    tfim_2d,
)
from .linear_prediction import LpModel, extrapolate, fit_lp, select_lp, stabilize
from .mps import (
    Mpo,
    Mps,
    TruncReport,
    add,
    apply_mpo,
    canonicalize,
    inner,
    isometry_residuals,
    load_mpo,
    load_mps,
    mpo_expectation,
    save_mpo,
    save_mps,
    to_dense,
    truncate,
)
from .oracle import (
    DenseSystem,
    dense_cheb_moments,
    dense_ground,
    moment_error_profile,
    overlap_chi,
)
