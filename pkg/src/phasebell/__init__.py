"""Phase-space Bell inequalities, their quantum violation, and the
complete family of nonnegative densities matching three prescribed marginals.

The package is organized by subject:

- :mod:`phasebell.grids`      midpoint grids, quadrature, unitary transforms
- :mod:`phasebell.states`     wavefunctions, marginals, Wigner transform
- :mod:`phasebell.bell`       sign patterns and the Bell functional
- :mod:`phasebell.operators`  projector algebra and spectra
- :mod:`phasebell.marginals`  consistency and the three-marginal solver
- :mod:`phasebell.cli`        reproducible experiments with JSON reports
"""

from .grids import (
    Axis,
    AtomicDistribution2D,
    Field1D,
    Field2D,
    Field4D,
    dual_axis,
    integrate_1d,
    integrate_2d,
    integrate_4d,
    load_field,
    marginalize_4d,
    save_field,
    to_momentum,
    to_position,
)
from .states import (
    MarginalQuartet,
    RegularizedSqrtProfile,
    WaveFunction1D,
    WaveFunction2D,
    gaussian_1d,
    gaussian_state,
    load_state,
    mixed_representations,
    oscillator_1d,
    oscillator_product,
    product_density,
    product_state,
    quantum_marginals,
    random_superposition,
    violating_state,
    wigner_function,
    wigner_value,
)
from .bell import (
    AsymptoticBellValue,
    BellReport,
    HalfLine,
    IntervalUnion,
    MaskSet,
    SignPattern,
    aligned_pattern,
    asymptotic_bell_value,
    bell_functions,
    bell_value,
    classical_counterexample_quartet,
    classical_p_value,
    indicator_polynomial,
    quantum_bell_value,
    theta_pattern,
)
from .operators import (
    ProjectorSpec,
    bell_combination_expectation,
    bell_square_residual,
    build_bell_combination,
    build_projector,
    commutator_expectation,
    negativity_witness,
    pattern_specs,
    spectrum_bounds,
)
from .marginals import (
    ChainBase,
    MarginalTriple,
    MixingRange,
    SolutionFamily,
    check_consistency,
    general_density,
    mixing_range,
    one_variable_marginals,
    particular_density,
    perturbation_from_seed,
    random_seed_field,
    represent,
    save_solution_family,
    triple_from_quartet,
)

__version__ = "0.1.0"
