"""Coherence as translational asymmetry, measured through complex weak values.

The main entry points:

- :func:`tc_w_coherence` / :func:`spectral_oracle`: the coherence of a state
  relative to the translations generated by an observable, by direct search
  over bases and in closed form.
- :func:`weak_values`, :func:`kd_quasiprobability`,
  :func:`classical_fisher_information`: the weak-value quantities behind it.
- :func:`bounds_report`: variance, quantum Fisher information and the
  inequalities relating them to the coherence.
- :func:`run_property_suite`: numerical checks of the monotone properties.
- :func:`estimate_tc_w_coherence`: shot-noise simulation of the estimate.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundsReport,
    bounds_report,
    fidelity,
    kd_imaginary_bound,
    kwr_lower_bound,
    optimal_estimation_bound,
    pure_state_gap_distribution,
    qfi_fidelity,
    qfi_unitary_family,
    spectrum_class_sup,
    uncertainty_product_check,
    variance,
)
from .coherence import (
    BasisParameterization,
    CoherenceResult,
    bloch_basis,
    bloch_grid_bases,
    commutator_generator,
    local_terms,
    normalized_oracle,
    normalized_tc_w_coherence,
    objective,
    oracle_basis,
    permutation_covariance_check,
    product_basis_coherence,
    product_grid_maximum,
    qubit_closed_form,
    spectral_oracle,
    tc_w_coherence,
    tc_w_coherence_many,
)
from .core import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    GeneratorObservable,
    OrthonormalBasis,
    SpectrumClass,
    commutator,
    embed,
    haar_random_unitary,
    hermitian_eigensystem,
    kron,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    random_density_matrix,
    random_generator,
    random_hermitian,
    random_pure_state,
    save_matrix,
    validate_density_matrix,
)
from .covariant import (
    CovariantChannel,
    PropertyReport,
    apply_channel,
    build_free_channel,
    channel_covariance_error,
    random_covariant_unitary,
    run_property_suite,
    translation_unitary,
)
from .errors import *  # noqa: F401,F403
from .estimation import (
    EstimationRecord,
    convergence_study,
    estimate_im_weak_value_terms,
    estimate_tc_w_coherence,
    sample_born,
)
from .weak_values import (
    KDTable,
    born_probabilities,
    classical_fisher_information,
    imag_terms,
    kd_quasiprobability,
    log_derivative_identity_residual,
    translated,
    weak_value,
    weak_values,
)
